"""Synonym keyword classes via weighted, distributed Apriori.

Support of an itemset over a user population is the mean, over all users in
the population, of the smallest weight the user gives to any keyword of the
itemset (0 when the user lacks one). Sites here are logical: each holds a
disjoint slice of the keyword-bearing users, computes local supports, and
forwards locally frequent candidates to a polling site chosen by a stable
hash. Polling sites ask every site for its exact local sum, apply the global
support and confidence thresholds, and the home site unions and broadcasts
the survivors for the next round.

Sums are accumulated as :class:`fractions.Fraction` so that the result does
not depend on how users are split across sites.
"""

from __future__ import annotations

import zlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .dataset import Dataset, WeightedKeywordSet

Itemset = tuple[int, ...]


@dataclass(frozen=True)
class MiningConfig:
    supp_local: float = 0.2
    supp_global: float = 0.2
    conf_local: float = 0.7  # carried for completeness; confidence is only enforced globally
    conf_global: float = 0.7
    n_sites: int = 4
    n_polling_sites: int = 2
    max_size: int = 5

    def __post_init__(self):
        for name in ("supp_local", "supp_global", "conf_local", "conf_global"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.n_sites < 1 or self.n_polling_sites < 1:
            raise ValueError("n_sites and n_polling_sites must be >= 1")
        if self.max_size < 1:
            raise ValueError("max_size must be >= 1")


@dataclass(frozen=True)
class KeywordClass:
    keywords: Itemset
    support: float


@dataclass(frozen=True)
class KeywordClassSet:
    """Mined classes, ordered by size (descending) then lexicographically.

    A class id is its position in ``classes``.
    """

    classes: tuple[KeywordClass, ...] = ()

    def __len__(self):
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, class_id: int) -> KeywordClass:
        return self.classes[class_id]

    @property
    def itemsets(self) -> list[Itemset]:
        return [c.keywords for c in self.classes]

    def classes_of(self, keyword: int) -> tuple[int, ...]:
        return self._index.get(keyword, ())

    @cached_property
    def _index(self) -> dict[int, tuple[int, ...]]:
        acc: dict[int, list[int]] = {}
        for cid, cls in enumerate(self.classes):
            for k in cls.keywords:
                acc.setdefault(k, []).append(cid)
        return {k: tuple(v) for k, v in acc.items()}


@dataclass(frozen=True)
class SitePartition:
    site: int
    users: tuple[int, ...]


@dataclass
class MiningTrace:
    """Per-round bookkeeping of the simulated protocol."""

    candidates: list[int] = field(default_factory=list)
    sent_to_polling: list[int] = field(default_factory=list)
    frequent: list[int] = field(default_factory=list)


def keyword_bearing_users(dataset: Dataset) -> list[int]:
    return [uid for uid, u in dataset.users.items() if u.keywords]


def partition_users(dataset: Dataset, n_sites: int) -> list[SitePartition]:
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    slices: list[list[int]] = [[] for _ in range(n_sites)]
    for uid in sorted(keyword_bearing_users(dataset)):
        slices[uid % n_sites].append(uid)
    return [SitePartition(i, tuple(s)) for i, s in enumerate(slices)]


def _min_weight_sum(itemset: Itemset, keyword_sets: Iterable[WeightedKeywordSet]) -> Fraction:
    total = Fraction(0)
    for kws in keyword_sets:
        m = min(kws.weight(k) for k in itemset)
        if m:
            total += Fraction(m)
    return total


def support(itemset: Iterable[int], user_ids: Sequence[int], dataset: Dataset) -> Fraction:
    """Mean over `user_ids` of each user's minimum weight on `itemset`."""
    itemset = tuple(sorted(itemset))
    if not itemset:
        raise ValueError("itemset must be non-empty")
    if not user_ids:
        return Fraction(0)
    return _min_weight_sum(itemset, (dataset.users[u].keywords for u in user_ids)) / len(user_ids)


def confidence(itemset: Iterable[int], dataset: Dataset, population: Sequence[int]) -> Fraction:
    """supp(itemset) over the largest support among its one-smaller subsets."""
    itemset = tuple(sorted(itemset))
    if len(itemset) == 1:
        return Fraction(1)
    num = support(itemset, population, dataset)
    den = max(support(sub, population, dataset) for sub in combinations(itemset, len(itemset) - 1))
    return Fraction(0) if den == 0 else num / den


def apriori_gen(frequent_prev: Iterable[Iterable[int]]) -> list[Itemset]:
    """Join size-(j-1) itemsets sharing a (j-2)-prefix, then prune by subsets."""
    prev = sorted({tuple(sorted(s)) for s in frequent_prev})
    if not prev:
        return []
    size = len(prev[0])
    if any(len(s) != size for s in prev):
        raise ValueError("all itemsets must have the same size")
    known = set(prev)
    out = []
    for i, a in enumerate(prev):
        for b in prev[i + 1:]:
            if a[:-1] != b[:-1]:
                break
            cand = a + (b[-1],)
            if all(sub in known for sub in combinations(cand, size)):
                out.append(cand)
    return out


def polling_assign(itemset: Iterable[int], n_polling_sites: int) -> int:
    """CRC-32 of the comma-joined ascending ids, modulo the number of polling sites."""
    if n_polling_sites < 1:
        raise ValueError("n_polling_sites must be >= 1")
    key = ",".join(str(k) for k in sorted(itemset)).encode("ascii")
    return zlib.crc32(key) % n_polling_sites


class RemoteSite:
    def __init__(self, partition: SitePartition, dataset: Dataset):
        self.index = partition.site
        self.size = len(partition.users)
        self._keywords = [dataset.users[u].keywords for u in partition.users]

    def local_sum(self, itemset: Itemset) -> Fraction:
        return _min_weight_sum(itemset, self._keywords)

    def locally_frequent(self, candidates: list[Itemset], threshold: Fraction) -> list[Itemset]:
        if not self.size:
            return []
        return [c for c in candidates if self.local_sum(c) / self.size >= threshold]


class PollingSite:
    def __init__(self, index: int, sites: list[RemoteSite]):
        self.index = index
        self.sites = sites
        self.population = sum(s.size for s in sites)
        self.inbox: set[Itemset] = set()

    def receive(self, itemset: Itemset):
        self.inbox.add(itemset)

    def global_support(self, itemset: Itemset) -> Fraction:
        # request every site's local sum, including sites that pruned the candidate
        return sum((s.local_sum(itemset) for s in self.sites), Fraction(0)) / self.population

    def resolve(self, known: dict[Itemset, Fraction], supp_min: Fraction, conf_min: Fraction) -> dict[Itemset, Fraction]:
        accepted = {}
        for cand in sorted(self.inbox):
            supp = self.global_support(cand)
            if supp < supp_min:
                continue
            if len(cand) > 1:
                den = max(known[sub] for sub in combinations(cand, len(cand) - 1))
                conf = supp / den if den else Fraction(0)
                if conf < conf_min:
                    continue
            accepted[cand] = supp
        self.inbox.clear()
        return accepted


def maximal_itemsets(frequent: dict[Itemset, Fraction]) -> KeywordClassSet:
    sets = sorted(frequent, key=lambda s: (-len(s), s))
    kept: list[Itemset] = []
    for s in sets:
        ss = set(s)
        if not any(ss < set(k) for k in kept):
            kept.append(s)
    return KeywordClassSet(tuple(KeywordClass(s, float(frequent[s])) for s in kept))


def mine_keyword_classes(dataset: Dataset, config: MiningConfig = MiningConfig(), trace: MiningTrace | None = None) -> KeywordClassSet:
    partitions = partition_users(dataset, config.n_sites)
    sites = [RemoteSite(p, dataset) for p in partitions]
    population = sum(s.size for s in sites)
    if population == 0:
        return KeywordClassSet()
    pollers = [PollingSite(i, sites) for i in range(config.n_polling_sites)]
    supp_local = Fraction(config.supp_local)
    supp_global = Fraction(config.supp_global)
    conf_global = Fraction(config.conf_global)

    universe = sorted({k for uid in (u for p in partitions for u in p.users) for k in dataset.users[uid].keywords})
    frequent: dict[Itemset, Fraction] = {}
    broadcast: list[Itemset] = []
    for size in range(1, config.max_size + 1):
        # every site holds the same broadcast set, hence the same candidates
        candidates = [(k,) for k in universe] if size == 1 else apriori_gen(broadcast)
        if not candidates:
            break
        sent = 0
        for site in sites:
            for cand in site.locally_frequent(candidates, supp_local):
                pollers[polling_assign(cand, len(pollers))].receive(cand)
                sent += 1
        round_result: dict[Itemset, Fraction] = {}
        for poller in pollers:
            round_result.update(poller.resolve(frequent, supp_global, conf_global))
        if trace is not None:
            trace.candidates.append(len(candidates))
            trace.sent_to_polling.append(sent)
            trace.frequent.append(len(round_result))
        if not round_result:
            break
        frequent.update(round_result)
        broadcast = sorted(round_result)
    return maximal_itemsets(frequent)


def format_classes(classes: KeywordClassSet) -> str:
    return "".join(
        f"{cid}\t{','.join(map(str, c.keywords))}\t{c.support!r}\n" for cid, c in enumerate(classes)
    )


def parse_classes(text: str) -> KeywordClassSet:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        _, kws, supp = line.split("\t")
        out.append(KeywordClass(tuple(int(k) for k in kws.split(",")), float(supp)))
    return KeywordClassSet(tuple(out))
