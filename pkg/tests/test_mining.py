import random
from fractions import Fraction
from itertools import combinations

import pytest

from hybridrec.dataset import build_dataset
from hybridrec.mining import (
    KeywordClassSet,
    MiningConfig,
    MiningTrace,
    apriori_gen,
    confidence,
    format_classes,
    mine_keyword_classes,
    parse_classes,
    partition_users,
    polling_assign,
    support,
)

from oracles import brute_force_classes

A, B, C, Z = 1, 2, 3, 26
EVERYONE = [1, 2, 3]


def mined_sets(classes):
    return {c.keywords for c in classes}


class TestPartition:
    def test_single_site(self, small_corpus):
        parts = partition_users(small_corpus, 1)
        assert [p.users for p in parts] == [(1, 2, 3)]

    def test_mod_two(self):
        ds = build_dataset(users={u: (1, {7: 1.0}) for u in (1, 2, 3, 4)})
        parts = partition_users(ds, 2)
        assert parts[0].users == (2, 4)
        assert parts[1].users == (1, 3)

    def test_no_keywords(self):
        ds = build_dataset(users={u: (1, {}) for u in (1, 2, 3, 4)})
        assert all(not p.users for p in partition_users(ds, 3))
        assert len(mine_keyword_classes(ds, MiningConfig(n_sites=3))) == 0

    def test_disjoint_cover(self, fixture_dataset):
        parts = partition_users(fixture_dataset, 4)
        seen = [u for p in parts for u in p.users]
        assert len(seen) == len(set(seen))
        assert set(seen) == {u for u, r in fixture_dataset.users.items() if r.keywords}


class TestSupportConfidence:
    def test_single_keyword(self, small_corpus):
        # (0.5 + 0.6 + 0) / 3
        assert support([A], EVERYONE, small_corpus) == (Fraction(0.5) + Fraction(0.6)) / 3
        assert float(support([A], EVERYONE, small_corpus)) == pytest.approx(0.366667, abs=1e-6)

    def test_pair_takes_min(self, small_corpus):
        assert float(support([A, B], EVERYONE, small_corpus)) == pytest.approx(0.3, abs=1e-12)

    def test_absent_keyword(self, small_corpus):
        assert support([Z], EVERYONE, small_corpus) == 0

    def test_empty_population(self, small_corpus):
        assert support([A], [], small_corpus) == 0

    def test_singleton_confidence(self, small_corpus):
        assert confidence([A], small_corpus, EVERYONE) == 1

    def test_pair_confidence(self, small_corpus):
        # 0.3 / max(0.36667, 0.3)
        assert float(confidence([A, B], small_corpus, EVERYONE)) == pytest.approx(0.818182, abs=1e-6)

    def test_zero_numerator(self, small_corpus):
        assert confidence([A, Z], small_corpus, EVERYONE) == 0

    def test_zero_denominator(self, small_corpus):
        assert confidence([Z, Z + 1], small_corpus, EVERYONE) == 0


class TestAprioriGen:
    def test_empty(self):
        assert apriori_gen([]) == []

    def test_join_and_prune(self):
        assert apriori_gen([(1, 2), (1, 3), (2, 3)]) == [(1, 2, 3)]

    def test_unjoinable(self):
        assert apriori_gen([(1, 2), (3, 4)]) == []

    def test_prune_missing_subset(self):
        assert apriori_gen([(1, 2), (1, 3)]) == []

    def test_singletons(self):
        assert apriori_gen([(3,), (1,), (2,)]) == [(1, 2), (1, 3), (2, 3)]

    def test_mixed_sizes_rejected(self):
        with pytest.raises(ValueError):
            apriori_gen([(1,), (1, 2)])

    def test_matches_brute_join(self):
        rng = random.Random(1)
        for _ in range(50):
            prev = {tuple(sorted(rng.sample(range(8), 3))) for _ in range(rng.randint(0, 15))}
            expected = sorted(
                c for c in combinations(range(8), 4)
                if all(s in prev for s in combinations(c, 3))
            )
            assert apriori_gen(prev) == expected


class TestPolling:
    def test_one_site(self):
        assert polling_assign((5, 9, 2), 1) == 0

    def test_order_independent(self):
        assert polling_assign((3, 1), 7) == polling_assign((1, 3), 7)

    def test_documented_vector(self):
        # crc32(b"1,2") == 722365595; 722365595 % 4 == 3
        assert polling_assign((1, 2), 4) == 3

    def test_rejects_zero_sites(self):
        with pytest.raises(ValueError):
            polling_assign((1,), 0)


class TestMine:
    def test_default_thresholds(self, small_corpus):
        classes = mine_keyword_classes(small_corpus, MiningConfig(0.2, 0.2, 0.7, 0.7, n_sites=1))
        assert mined_sets(classes) == {(A, B), (C,)}
        by_set = {c.keywords: c.support for c in classes}
        assert by_set[(A, B)] == pytest.approx(0.3)
        assert by_set[(C,)] == pytest.approx(1 / 3)
        # size descending, then lexicographic
        assert classes.itemsets == [(A, B), (C,)]

    def test_high_thresholds(self, small_corpus):
        assert len(mine_keyword_classes(small_corpus, MiningConfig(0.99, 0.99, 0.99, 0.99))) == 0

    @pytest.mark.parametrize("n_sites", [1, 2, 3, 4, 7])
    def test_partition_invariance(self, fixture_dataset, n_sites):
        base = mine_keyword_classes(fixture_dataset, MiningConfig(0.025, 0.025, 0.6, 0.6, n_sites=1))
        other = mine_keyword_classes(fixture_dataset, MiningConfig(0.025, 0.025, 0.6, 0.6, n_sites=n_sites, n_polling_sites=3))
        assert other == base

    def test_matches_oracle_on_fixture(self, fixture_dataset):
        cfg = MiningConfig(0.025, 0.025, 0.6, 0.6, n_sites=4)
        kws = [dict(u.keywords) for u in fixture_dataset.users.values() if u.keywords]
        expected = brute_force_classes(kws, cfg.supp_global, cfg.conf_global, cfg.max_size)
        got = mine_keyword_classes(fixture_dataset, cfg)
        assert {c.keywords: Fraction(c.support) for c in got} == {k: Fraction(float(v)) for k, v in expected.items()}

    def test_ambiguous_keyword_in_two_classes(self):
        # keyword 5 ("apple") is a synonym in two unrelated clusters
        users = {}
        for u in range(10):
            users[u] = (1, {1: 1, 2: 1, 5: 1})
        for u in range(10, 20):
            users[u] = (1, {3: 1, 4: 1, 5: 1})
        ds = build_dataset(users)
        classes = mine_keyword_classes(ds, MiningConfig(0.1, 0.1, 0.5, 0.5, n_sites=3))
        assert mined_sets(classes) == {(1, 2, 5), (3, 4, 5)}
        assert len(classes.classes_of(5)) == 2

    def test_downward_closure(self, fixture_dataset):
        cfg = MiningConfig(0.02, 0.02, 0.5, 0.5, n_sites=2)
        population = [u for u, r in fixture_dataset.users.items() if r.keywords]
        for cls in mine_keyword_classes(fixture_dataset, cfg):
            s = support(cls.keywords, population, fixture_dataset)
            for size in range(1, len(cls.keywords)):
                for sub in combinations(cls.keywords, size):
                    assert support(sub, population, fixture_dataset) >= s

    def test_classes_are_maximal(self, fixture_dataset):
        classes = mine_keyword_classes(fixture_dataset, MiningConfig(0.02, 0.02, 0.5, 0.5))
        sets = [set(c.keywords) for c in classes]
        assert not any(a < b for a in sets for b in sets)

    def test_max_size_caps_itemsets(self):
        ds = build_dataset({u: (1, {1: 1, 2: 1, 3: 1, 4: 1}) for u in range(5)})
        classes = mine_keyword_classes(ds, MiningConfig(0.1, 0.1, 0.5, 0.5, max_size=2))
        assert mined_sets(classes) == set(combinations((1, 2, 3, 4), 2))

    def test_trace_records_rounds(self, small_corpus):
        trace = MiningTrace()
        mine_keyword_classes(small_corpus, MiningConfig(0.2, 0.2, 0.7, 0.7, n_sites=2), trace)
        assert trace.candidates[0] == 3
        assert trace.frequent[:2] == [3, 1]

    def test_report_round_trip(self, fixture_dataset):
        classes = mine_keyword_classes(fixture_dataset, MiningConfig(0.025, 0.025, 0.6, 0.6))
        text = format_classes(classes)
        assert parse_classes(text) == classes
        first = text.splitlines()[0].split("\t")
        assert first[0] == "0" and "," in first[1]

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MiningConfig(supp_global=0)
        with pytest.raises(ValueError):
            MiningConfig(n_sites=0)
        assert isinstance(KeywordClassSet(), KeywordClassSet)
