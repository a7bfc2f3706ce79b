import math
import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from hybridrec.dataset import (
    CategoryPath,
    DataError,
    dump_dataset,
    load_dataset,
    normalize_keyword_weights,
    parse_category_path,
)

FILES = {
    "user_profile.tsv": "123\t50\n7\t10\n9\t300\n11\t0\n",
    "user_key_word.tsv": "123\t45:0.5;46:0.5\n7\t1:2;2:2\n",
    "item.tsv": "9\ta.b.c\t1;2;3\n11\ta.b.c\t4:1;5:3\n",
    "user_sns.tsv": "123\t9\n7\t9\n7\t11\n",
    "user_action.tsv": "123\t7\t1\t2\t3\n7\t123\t0\t0\t1\n",
    "rec_log.tsv": "123\t11\t1\t1000\n7\t9\t-1\t900\n",
}


def write_files(directory: Path, files=FILES, **overrides):
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in {**files, **overrides}.items():
        (directory / name).write_text(text, encoding="utf-8")
    return directory


@pytest.fixture
def corpus_dir(tmp_path):
    return write_files(tmp_path / "data")


class TestNormalize:
    def test_empty(self):
        assert dict(normalize_keyword_weights({})) == {}

    def test_single_key(self):
        assert dict(normalize_keyword_weights({1: 0.14})) == {1: 1.0}

    def test_divides_by_sum(self):
        assert dict(normalize_keyword_weights({1: 1, 2: 3})) == {1: 0.25, 2: 0.75}

    def test_all_zero_is_empty(self):
        assert len(normalize_keyword_weights({1: 0.0, 2: 0.0})) == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            normalize_keyword_weights({1: -0.1})

    @given(st.dictionaries(st.integers(0, 1000), st.floats(0, 1e6, allow_nan=False), max_size=30))
    def test_sums_to_one_or_empty(self, raw):
        out = normalize_keyword_weights(raw)
        assert len(out) == 0 or math.isclose(sum(out.values()), 1.0, abs_tol=1e-9)


class TestCategoryPath:
    @pytest.mark.parametrize(
        "text,segments",
        [
            ("a.b.d.f", ("a", "b", "d", "f")),
            ("science-and-technology.internet.mobile", ("science-and-technology", "internet", "mobile")),
            ("x", ("x",)),
        ],
    )
    def test_parse(self, text, segments):
        assert parse_category_path(text).segments == segments

    @pytest.mark.parametrize("bad", ["", "a..b", ".a", "a."])
    def test_rejects_empty_segments(self, bad):
        with pytest.raises(ValueError):
            parse_category_path(bad)

    def test_str_round_trip(self):
        assert str(parse_category_path("a.b.c")) == "a.b.c"
        assert CategoryPath(("a",)) < CategoryPath(("b",))


class TestLoad:
    def test_examples(self, corpus_dir):
        ds = load_dataset(corpus_dir)
        assert dict(ds.users[123].keywords) == {45: 0.5, 46: 0.5}
        assert dict(ds.users[7].keywords) == {1: 0.5, 2: 0.5}
        item = ds.items[9]
        assert item.category.segments == ("a", "b", "c")
        assert dict(item.keywords) == pytest.approx({1: 1 / 3, 2: 1 / 3, 3: 1 / 3}, abs=1e-12)
        assert dict(ds.items[11].keywords) == {4: 0.25, 5: 0.75}

    def test_cross_links(self, corpus_dir):
        ds = load_dataset(corpus_dir)
        assert ds.items[9].followers == 2
        assert ds.items[11].followers == 1
        assert ds.following(7) == {9, 11}
        assert ds.interaction(123, 7).total == 6
        assert ds.interaction(9, 7).total == 0
        assert [r.timestamp for r in ds.rec_log] == [900, 1000]
        assert ds.categories[parse_category_path("a.b.c")] == (9, 11)
        assert ds.outgoing_interactions == {123: 6, 7: 1}

    def test_round_trip(self, corpus_dir, tmp_path):
        ds = load_dataset(corpus_dir)
        dump_dataset(ds, tmp_path / "again")
        assert load_dataset(tmp_path / "again") == ds

    def test_round_trip_synthetic(self, fixture_dataset, tmp_path):
        dump_dataset(fixture_dataset, tmp_path / "fx")
        assert load_dataset(tmp_path / "fx") == fixture_dataset

    def test_line_order_does_not_matter(self, corpus_dir, tmp_path):
        rng = random.Random(3)
        shuffled = {}
        for name, text in FILES.items():
            lines = text.splitlines(keepends=True)
            rng.shuffle(lines)
            shuffled[name] = "".join(lines)
        other = write_files(tmp_path / "shuffled", shuffled)
        a, b = load_dataset(corpus_dir), load_dataset(other)
        assert a == b
        assert list(a.users) == list(b.users)

    def test_every_keyword_set_normalized(self, fixture_dataset):
        for rec in list(fixture_dataset.users.values()) + list(fixture_dataset.items.values()):
            total = sum(rec.keywords.values())
            assert len(rec.keywords) == 0 or abs(total - 1) <= 1e-9

    def test_duplicate_interactions_summed(self, tmp_path):
        d = write_files(tmp_path / "dup", **{"user_action.tsv": "123\t7\t1\t2\t3\n123\t7\t1\t1\t1\n"})
        ds = load_dataset(d)
        c = ds.interaction(123, 7)
        assert (c.at, c.retweet, c.comment) == (2, 3, 4)
        assert any("duplicate interaction" in w for w in ds.report.warnings)


class TestMalformed:
    @pytest.mark.parametrize(
        "name,text,line",
        [
            ("user_profile.tsv", "123\t50\n7\tmany\n", 2),
            ("user_profile.tsv", "123\t50\n123\t5\n", 2),
            ("user_key_word.tsv", "123\t45:0.5;45:0.5\n", 1),
            ("user_key_word.tsv", "123\t45:-1\n", 1),
            ("item.tsv", "9\ta..c\t1;2\n", 1),
            ("item.tsv", "9\ta.b\t1;2:0.5\n", 1),
            ("user_sns.tsv", "123\t9\n7\t7\n", 2),
            ("user_action.tsv", "123\t7\t1\t2\n", 1),
            ("rec_log.tsv", "123\t11\t0\t1000\n", 1),
            ("rec_log.tsv", "123\t11\t1\t1000\n123\t555\t1\t1\n", 2),
        ],
    )
    def test_strict_reports_file_and_line(self, tmp_path, name, text, line):
        d = write_files(tmp_path / "bad", **{name: text})
        with pytest.raises(DataError) as info:
            load_dataset(d, strict=True)
        assert info.value.path.endswith(name)
        assert info.value.line == line

    def test_lenient_skips_and_counts(self, tmp_path):
        d = write_files(
            tmp_path / "bad",
            **{"rec_log.tsv": "123\t11\t1\t1000\n123\t11\t2\t1000\nnot a line\n7\t9\t-1\t5\n"},
        )
        ds = load_dataset(d, strict=False)
        assert len(ds.rec_log) == 2
        assert ds.report.skipped["rec_log.tsv"] == 2
        assert ds.report.total_skipped == 2

    def test_item_without_profile(self, tmp_path):
        d = write_files(tmp_path / "bad", **{"item.tsv": "9\ta.b.c\t1\n77\tx\t1\n"})
        with pytest.raises(DataError):
            load_dataset(d)
        ds = load_dataset(d, strict=False)
        assert 77 in ds.users and ds.users[77].tweets == 0

    def test_missing_file(self, tmp_path):
        d = write_files(tmp_path / "partial")
        (d / "user_sns.tsv").unlink()
        with pytest.raises(DataError, match="missing"):
            load_dataset(d)
