import pytest
from hypothesis import given, strategies as st

from hybridrec.evaluation import ap_at_k, map_at_k
from hybridrec.taxonomy import UserClass


class TestAP:
    def test_hits_first_and_third(self):
        assert ap_at_k([10, 20, 30], {10, 30}) == pytest.approx(5 / 6, abs=1e-12)

    def test_hit_first_only(self):
        assert ap_at_k([10, 20, 30], {10}) == 1.0

    def test_hit_third_only(self):
        assert ap_at_k([10, 20, 30], {30}) == pytest.approx(1 / 3, abs=1e-12)

    def test_no_accepted(self):
        assert ap_at_k([1, 2, 3], set()) == 0

    def test_denominator_capped_at_k(self):
        assert ap_at_k([1, 2, 3], {1, 2, 3, 4, 5}) == 1.0

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            ap_at_k([1, 1, 2], {1})

    @given(st.permutations(list(range(6))), st.sets(st.integers(0, 5), min_size=1))
    def test_bounded(self, ranking, accepted):
        assert 0 <= ap_at_k(ranking, accepted) <= 1

    @given(st.permutations(list(range(5))), st.sets(st.integers(0, 5), min_size=1), st.integers(1, 4))
    def test_moving_hit_earlier_never_hurts(self, ranking, accepted, pos):
        ranking = list(ranking)[:3] + [5]
        ranking = ranking[:3]
        if pos >= len(ranking) or ranking[pos] not in accepted:
            return
        better = list(ranking)
        better[pos - 1], better[pos] = better[pos], better[pos - 1]
        assert ap_at_k(better, accepted) >= ap_at_k(ranking, accepted) - 1e-15


class TestMAP:
    def test_single(self):
        rep = map_at_k({1: 0.5}, {1: UserClass.ACTIVE})
        assert rep.overall == 0.5

    def test_one_class(self):
        rep = map_at_k({1: 1.0, 2: 0.0}, {1: UserClass.ACTIVE, 2: UserClass.ACTIVE})
        assert rep.per_class[UserClass.ACTIVE] == 0.5

    def test_two_classes(self):
        rep = map_at_k({1: 1.0, 2: 0.0}, {1: UserClass.ACTIVE, 2: UserClass.FAKE})
        assert rep.overall == 0.5
        assert rep.per_class == {UserClass.ACTIVE: 1.0, UserClass.FAKE: 0.0}

    def test_empty(self):
        rep = map_at_k({}, {})
        assert rep.overall is None
        assert all(n == 0 for n in rep.counts.values())
        assert "n/a" in rep.summary()

    @given(st.dictionaries(st.integers(0, 50), st.tuples(st.floats(0, 1), st.sampled_from(list(UserClass))), min_size=1))
    def test_overall_is_count_weighted_class_mean(self, rows):
        aps = {u: ap for u, (ap, _) in rows.items()}
        classes = {u: c for u, (_, c) in rows.items()}
        rep = map_at_k(aps, classes)
        weighted = sum(rep.per_class[c] * rep.counts[c] for c in rep.per_class) / len(aps)
        assert rep.overall == pytest.approx(weighted, abs=1e-12)
