"""Loading and validation of the six tab-separated corpus files.

File layout (KDD Cup 2012 Track 1 style), one record per line, UTF-8:

    user_profile.tsv   user-id <TAB> tweet-count
    user_key_word.tsv  user-id <TAB> k:w;k:w;...
    item.tsv           item-id <TAB> dot.separated.category <TAB> k;k;...  (or k:w;...)
    user_sns.tsv       follower-id <TAB> followee-id
    user_action.tsv    source-id <TAB> target-id <TAB> at <TAB> retweet <TAB> comment
    rec_log.tsv        user-id <TAB> item-id <TAB> 1|-1 <TAB> unix-timestamp

Item follower counts are not stored anywhere; they are derived from user_sns.
"""

from __future__ import annotations

import logging
import math
import os
from collections import Counter, defaultdict
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

log = logging.getLogger(__name__)

PROFILE_FILE = "user_profile.tsv"
KEYWORD_FILE = "user_key_word.tsv"
ITEM_FILE = "item.tsv"
SNS_FILE = "user_sns.tsv"
ACTION_FILE = "user_action.tsv"
REC_LOG_FILE = "rec_log.tsv"

_NORMALIZED_TOL = 1e-12

FILE_NAMES = (PROFILE_FILE, KEYWORD_FILE, ITEM_FILE, SNS_FILE, ACTION_FILE, REC_LOG_FILE)


class DataError(ValueError):
    """Malformed or inconsistent input data."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path if line is None else f"{self.path}:{line}"
            where += ": "
        super().__init__(where + message)


class WeightedKeywordSet(Mapping):
    """Immutable keyword-id -> weight map. Missing keywords weigh 0."""

    __slots__ = ("_weights",)

    def __init__(self, weights: Mapping[int, float] | None = None):
        self._weights = dict(sorted((weights or {}).items()))

    def __getitem__(self, keyword: int) -> float:
        return self._weights[keyword]

    def __iter__(self) -> Iterator[int]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __hash__(self):
        return hash(tuple(self._weights.items()))

    def __repr__(self):
        return f"WeightedKeywordSet({self._weights!r})"

    def weight(self, keyword: int) -> float:
        return self._weights.get(keyword, 0.0)


def normalize_keyword_weights(raw: Mapping[int, float]) -> WeightedKeywordSet:
    """Scale non-negative weights so they sum to one.

    Empty or all-zero input gives an empty set. Negative weights raise ValueError.
    """
    for k, w in raw.items():
        if w < 0:
            raise ValueError(f"negative weight {w} for keyword {k}")
    total = math.fsum(raw.values())
    if total == 0:
        return WeightedKeywordSet()
    if abs(total - 1.0) <= _NORMALIZED_TOL:
        # already normalized; dividing again would perturb the last bits and break round trips
        return WeightedKeywordSet({k: float(w) for k, w in raw.items() if w > 0})
    return WeightedKeywordSet({k: w / total for k, w in raw.items() if w > 0})


@dataclass(frozen=True, order=True)
class CategoryPath:
    segments: tuple[str, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("category path needs at least one segment")
        if any(not s for s in self.segments):
            raise ValueError(f"empty segment in category path {self.segments!r}")

    def __str__(self):
        return ".".join(self.segments)


def parse_category_path(text: str) -> CategoryPath:
    if not text:
        raise ValueError("empty category path")
    return CategoryPath(tuple(text.split(".")))


@dataclass(frozen=True)
class UserRecord:
    user_id: int
    tweets: int
    keywords: WeightedKeywordSet = field(default_factory=WeightedKeywordSet)


@dataclass(frozen=True)
class ItemRecord:
    item_id: int
    category: CategoryPath
    keywords: WeightedKeywordSet
    followers: int = 0


@dataclass(frozen=True)
class InteractionCounts:
    source: int
    target: int
    at: int = 0
    retweet: int = 0
    comment: int = 0

    @property
    def total(self) -> int:
        return self.at + self.retweet + self.comment


@dataclass(frozen=True, order=True)
class RecLogRecord:
    timestamp: int
    user_id: int
    item_id: int
    result: int


@dataclass
class LoadReport:
    skipped: Counter = field(default_factory=Counter)
    messages: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def total_skipped(self) -> int:
        return sum(self.skipped.values())


@dataclass(frozen=True)
class Dataset:
    """Immutable, cross-linked corpus. Build it with :func:`load_dataset`."""

    users: dict[int, UserRecord]
    items: dict[int, ItemRecord]
    followees: dict[int, frozenset[int]]
    interactions: dict[tuple[int, int], InteractionCounts]
    rec_log: tuple[RecLogRecord, ...]
    report: LoadReport = field(default_factory=LoadReport, compare=False, repr=False)

    @cached_property
    def categories(self) -> dict[CategoryPath, tuple[int, ...]]:
        by_cat = defaultdict(list)
        for item in self.items.values():
            by_cat[item.category].append(item.item_id)
        return {c: tuple(sorted(ids)) for c, ids in sorted(by_cat.items())}

    @cached_property
    def outgoing_interactions(self) -> dict[int, int]:
        totals: dict[int, int] = defaultdict(int)
        for (src, _), counts in self.interactions.items():
            totals[src] += counts.total
        return dict(totals)

    def following(self, user_id: int) -> frozenset[int]:
        return self.followees.get(user_id, frozenset())

    def interaction(self, source: int, target: int) -> InteractionCounts:
        counts = self.interactions.get((source, target))
        return counts if counts is not None else InteractionCounts(source, target)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in sorted(self.followees) for b in sorted(self.followees[a])]


@dataclass(frozen=True)
class DatasetPaths:
    profile: Path
    keywords: Path
    items: Path
    sns: Path
    actions: Path
    rec_log: Path

    @classmethod
    def from_dir(cls, directory: str | os.PathLike) -> DatasetPaths:
        d = Path(directory)
        return cls(*(d / name for name in FILE_NAMES))


# ---------------------------------------------------------------------------
# parsing helpers


class _LineError(Exception):
    pass


def _int(text: str, what: str, minimum: int | None = None) -> int:
    try:
        value = int(text)
    except ValueError:
        raise _LineError(f"bad {what} {text!r}") from None
    if minimum is not None and value < minimum:
        raise _LineError(f"{what} must be >= {minimum}, got {value}")
    return value


def _parse_keywords(text: str, weighted: bool | None) -> dict[int, float]:
    """Parse 'k:w;k:w' or 'k;k'. `weighted` None accepts either (but not a mix)."""
    raw: dict[int, float] = {}
    text = text.strip()
    if not text:
        return raw
    entries = text.split(";")
    has_weights = {":" in e for e in entries}
    if len(has_weights) > 1:
        raise _LineError("mixed weighted and unweighted keywords")
    is_weighted = has_weights.pop()
    if weighted is not None and weighted != is_weighted:
        raise _LineError("keyword weights required" if weighted else "unexpected keyword weights")
    for entry in entries:
        if is_weighted:
            k_text, _, w_text = entry.partition(":")
            try:
                w = float(w_text)
            except ValueError:
                raise _LineError(f"bad keyword weight {w_text!r}") from None
            if not w >= 0 or w == float("inf"):
                raise _LineError(f"keyword weight must be finite and >= 0, got {w_text!r}")
        else:
            k_text, w = entry, 1.0
        k = _int(k_text, "keyword id", 0)
        if k in raw:
            raise _LineError(f"duplicate keyword id {k}")
        raw[k] = w
    return raw


def _rows(path: Path, ncols: int, strict: bool, report: LoadReport) -> Iterator[tuple[int, list[str], callable]]:
    """Yield (line number, fields, fail) for each non-blank line of `path`.

    `fail(msg)` raises in strict mode and records a skip otherwise.
    """
    name = path.name

    def fail(lineno: int, msg: str):
        if strict:
            raise DataError(msg, path, lineno)
        report.skipped[name] += 1
        report.messages.append(f"{path}:{lineno}: {msg}")

    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != ncols:
                fail(lineno, f"expected {ncols} tab-separated fields, got {len(fields)}")
                continue
            yield lineno, fields, fail


def load_dataset(paths: DatasetPaths | str | os.PathLike, strict: bool = True) -> Dataset:
    """Read, validate and cross-link the corpus files.

    In strict mode the first malformed line raises :class:`DataError` naming the
    file and line. Otherwise bad lines are skipped and tallied in ``dataset.report``.
    """
    if not isinstance(paths, DatasetPaths):
        paths = DatasetPaths.from_dir(paths)
    for p in (paths.profile, paths.keywords, paths.items, paths.sns, paths.actions, paths.rec_log):
        if not Path(p).is_file():
            raise DataError("missing input file", p)
    report = LoadReport()

    tweets: dict[int, int] = {}
    for lineno, (uid, count), fail in _rows(Path(paths.profile), 2, strict, report):
        try:
            uid_i = _int(uid, "user id")
            count_i = _int(count, "tweet count", 0)
            if uid_i in tweets:
                raise _LineError(f"duplicate user id {uid_i}")
        except _LineError as e:
            fail(lineno, str(e))
            continue
        tweets[uid_i] = count_i

    def known_user(uid: int, fail, lineno: int) -> bool:
        if uid in tweets:
            return True
        fail(lineno, f"unknown user id {uid}")
        return False

    user_keywords: dict[int, WeightedKeywordSet] = {}
    for lineno, (uid, kws), fail in _rows(Path(paths.keywords), 2, strict, report):
        try:
            uid_i = _int(uid, "user id")
            if uid_i in user_keywords:
                raise _LineError(f"duplicate user id {uid_i}")
            raw = _parse_keywords(kws, weighted=True)
        except _LineError as e:
            fail(lineno, str(e))
            continue
        if known_user(uid_i, fail, lineno):
            user_keywords[uid_i] = normalize_keyword_weights(raw)

    item_rows: dict[int, tuple[CategoryPath, WeightedKeywordSet]] = {}
    for lineno, (iid, cat, kws), fail in _rows(Path(paths.items), 3, strict, report):
        try:
            iid_i = _int(iid, "item id")
            if iid_i in item_rows:
                raise _LineError(f"duplicate item id {iid_i}")
            try:
                category = parse_category_path(cat)
            except ValueError as e:
                raise _LineError(str(e)) from None
            raw = _parse_keywords(kws, weighted=None)
        except _LineError as e:
            fail(lineno, str(e))
            continue
        if iid_i not in tweets:
            # items are users; a missing profile is tolerated only in lenient mode
            if strict:
                raise DataError(f"item {iid_i} has no user profile", paths.items, lineno)
            report.warnings.append(f"{paths.items}:{lineno}: item {iid_i} has no user profile; added with 0 tweets")
            tweets[iid_i] = 0
        item_rows[iid_i] = (category, normalize_keyword_weights(raw))

    followees: dict[int, set[int]] = defaultdict(set)
    for lineno, (a, b), fail in _rows(Path(paths.sns), 2, strict, report):
        try:
            a_i, b_i = _int(a, "follower id"), _int(b, "followee id")
            if a_i == b_i:
                raise _LineError(f"self-follow {a_i}")
        except _LineError as e:
            fail(lineno, str(e))
            continue
        if known_user(a_i, fail, lineno) and known_user(b_i, fail, lineno):
            if b_i in followees[a_i]:
                report.warnings.append(f"{paths.sns}:{lineno}: duplicate edge {a_i}->{b_i} ignored")
            followees[a_i].add(b_i)

    interactions: dict[tuple[int, int], InteractionCounts] = {}
    for lineno, fields, fail in _rows(Path(paths.actions), 5, strict, report):
        try:
            src, tgt = _int(fields[0], "source id"), _int(fields[1], "target id")
            at, rt, cm = (_int(v, name, 0) for v, name in zip(fields[2:], ("at", "retweet", "comment")))
        except _LineError as e:
            fail(lineno, str(e))
            continue
        if not (known_user(src, fail, lineno) and known_user(tgt, fail, lineno)):
            continue
        prev = interactions.get((src, tgt))
        if prev is not None:
            msg = f"{paths.actions}:{lineno}: duplicate interaction row {src}->{tgt} summed"
            log.warning(msg)
            report.warnings.append(msg)
            at, rt, cm = at + prev.at, rt + prev.retweet, cm + prev.comment
        interactions[(src, tgt)] = InteractionCounts(src, tgt, at, rt, cm)

    records: list[RecLogRecord] = []
    for lineno, fields, fail in _rows(Path(paths.rec_log), 4, strict, report):
        try:
            uid_i, iid_i = _int(fields[0], "user id"), _int(fields[1], "item id")
            result = _int(fields[2], "result")
            if result not in (1, -1):
                raise _LineError(f"result must be 1 or -1, got {result}")
            ts = _int(fields[3], "timestamp")
        except _LineError as e:
            fail(lineno, str(e))
            continue
        if not known_user(uid_i, fail, lineno):
            continue
        if iid_i not in item_rows:
            fail(lineno, f"unknown item id {iid_i}")
            continue
        records.append(RecLogRecord(ts, uid_i, iid_i, result))

    return _assemble(tweets, user_keywords, item_rows, followees, interactions, records, report)


def _assemble(tweets, user_keywords, item_rows, followees, interactions, records, report=None) -> Dataset:
    follower_counts = Counter(b for bs in followees.values() for b in bs)
    users = {
        uid: UserRecord(uid, tweets[uid], user_keywords.get(uid, WeightedKeywordSet()))
        for uid in sorted(tweets)
    }
    items = {
        iid: ItemRecord(iid, cat, kws, follower_counts.get(iid, 0))
        for iid, (cat, kws) in sorted(item_rows.items())
    }
    return Dataset(
        users=users,
        items=items,
        followees={a: frozenset(bs) for a, bs in sorted(followees.items()) if bs},
        interactions=dict(sorted(interactions.items())),
        rec_log=tuple(sorted(records)),
        report=report or LoadReport(),
    )


def build_dataset(
    users: Mapping[int, tuple[int, Mapping[int, float]]],
    items: Mapping[int, tuple[str, Mapping[int, float] | list[int]]] = (),
    follows=(),
    interactions=(),
    rec_log=(),
) -> Dataset:
    """Assemble a Dataset from in-memory values, applying the loader's normalization.

    ``users`` maps id -> (tweets, raw keyword weights); ``items`` maps id ->
    (category text, keyword weights or a plain keyword list for uniform weights);
    ``interactions`` holds (source, target, at, retweet, comment) tuples and
    ``rec_log`` (user, item, result, timestamp) tuples. Items missing from
    ``users`` are added with zero tweets.
    """
    tweets = {uid: t for uid, (t, _) in users.items()}
    user_keywords = {uid: normalize_keyword_weights(kw) for uid, (_, kw) in users.items()}
    item_rows = {}
    for iid, (cat, kws) in dict(items).items():
        raw = kws if isinstance(kws, Mapping) else {k: 1.0 for k in kws}
        item_rows[iid] = (parse_category_path(cat), normalize_keyword_weights(raw))
        tweets.setdefault(iid, 0)
    followees: dict[int, set[int]] = defaultdict(set)
    for a, b in follows:
        if a == b:
            raise ValueError(f"self-follow {a}")
        followees[a].add(b)
    counts: dict[tuple[int, int], InteractionCounts] = {}
    for src, tgt, at, rt, cm in interactions:
        prev = counts.get((src, tgt), InteractionCounts(src, tgt))
        counts[(src, tgt)] = InteractionCounts(src, tgt, prev.at + at, prev.retweet + rt, prev.comment + cm)
    records = []
    for uid, iid, result, ts in rec_log:
        if result not in (1, -1):
            raise ValueError(f"result must be 1 or -1, got {result}")
        records.append(RecLogRecord(ts, uid, iid, result))
    return _assemble(tweets, user_keywords, item_rows, followees, counts, records)


def _fmt_keywords(kws: WeightedKeywordSet) -> str:
    return ";".join(f"{k}:{w!r}" for k, w in kws.items())


def dump_dataset(dataset: Dataset, directory: str | os.PathLike) -> DatasetPaths:
    """Write `dataset` back out in the loader's format."""
    paths = DatasetPaths.from_dir(directory)
    Path(directory).mkdir(parents=True, exist_ok=True)
    with open(paths.profile, "w", encoding="utf-8") as fh:
        for u in dataset.users.values():
            fh.write(f"{u.user_id}\t{u.tweets}\n")
    with open(paths.keywords, "w", encoding="utf-8") as fh:
        for u in dataset.users.values():
            if u.keywords:
                fh.write(f"{u.user_id}\t{_fmt_keywords(u.keywords)}\n")
    with open(paths.items, "w", encoding="utf-8") as fh:
        for it in dataset.items.values():
            fh.write(f"{it.item_id}\t{it.category}\t{_fmt_keywords(it.keywords)}\n")
    with open(paths.sns, "w", encoding="utf-8") as fh:
        for a, b in dataset.edges:
            fh.write(f"{a}\t{b}\n")
    with open(paths.actions, "w", encoding="utf-8") as fh:
        for c in dataset.interactions.values():
            fh.write(f"{c.source}\t{c.target}\t{c.at}\t{c.retweet}\t{c.comment}\n")
    with open(paths.rec_log, "w", encoding="utf-8") as fh:
        for r in dataset.rec_log:
            fh.write(f"{r.user_id}\t{r.item_id}\t{r.result}\t{r.timestamp}\n")
    return paths
