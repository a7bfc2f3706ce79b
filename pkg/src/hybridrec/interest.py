"""Sparse class-weight profiles for users, items and categories.

A profile ("class weights") maps a keyword-class id to a non-negative weight.
Profiles are plain dicts and are never densified.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field

from .dataset import CategoryPath, Dataset, InteractionCounts, WeightedKeywordSet
from .mining import KeywordClassSet
from .taxonomy import UserClass

ClassWeights = dict[int, float]

MAX_DEPTH = 3
FONDNESS_STEEPNESS = 100.0
_NORM_NUMERATOR = 1.0 + math.e


@dataclass(frozen=True)
class FamiliarityWeights:
    at: float = 1 / 3
    retweet: float = 1 / 3
    comment: float = 1 / 3

    def __post_init__(self):
        if min(self.at, self.retweet, self.comment) < 0:
            raise ValueError("familiarity weights must be >= 0")
        if abs(self.at + self.retweet + self.comment - 1) > 1e-9:
            raise ValueError("familiarity weights must sum to 1")

    @classmethod
    def from_pair(cls, w1: float, w2: float) -> FamiliarityWeights:
        return cls(w1, w2, max(0.0, 1.0 - w1 - w2))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.at, self.retweet, self.comment)


def key_class(keywords: WeightedKeywordSet | Mapping[int, float], classes: KeywordClassSet) -> ClassWeights:
    """Per class, the summed weight of the entity's keywords that fall in it."""
    out: ClassWeights = {}
    for k, w in sorted(keywords.items()):
        for cid in classes.classes_of(k):
            out[cid] = out.get(cid, 0.0) + w
    return dict(sorted(out.items()))


def _average_profiles(profiles) -> ClassWeights:
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for prof in profiles:
        for cid, w in prof.items():
            sums[cid] = sums.get(cid, 0.0) + w
            counts[cid] = counts.get(cid, 0) + 1
    return {cid: sums[cid] / counts[cid] for cid in sorted(sums)}


def kh_map(category: CategoryPath, dataset: Dataset, classes: KeywordClassSet) -> ClassWeights:
    """Category profile: each class's weight averaged over the items that carry it."""
    item_ids = dataset.categories.get(category, ())
    return _average_profiles(key_class(dataset.items[i].keywords, classes) for i in item_ids)


def sigmoid_f(x: float) -> float:
    """2 / (1 + e^-x) - 1 for a non-negative count."""
    if x < 0:
        raise ValueError("count must be >= 0")
    return 2.0 / (1.0 + math.exp(-x)) - 1.0


def familiarity(counts: InteractionCounts, omega: FamiliarityWeights = FamiliarityWeights()) -> float:
    return (
        omega.at * sigmoid_f(counts.at)
        + omega.retweet * sigmoid_f(counts.retweet)
        + omega.comment * sigmoid_f(counts.comment)
    )


def search_followees(dataset: Dataset, user_id: int, depth: int) -> dict[int, int]:
    """Users reachable along followee edges within `depth` hops, mapped to their hop count."""
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [0, {MAX_DEPTH}], got {depth}")
    if user_id not in dataset.users:
        raise KeyError(f"unknown user id {user_id}")
    hops = {user_id: 0}
    queue = deque([user_id])
    while queue:
        u = queue.popleft()
        if hops[u] == depth:
            continue
        for v in sorted(dataset.following(u)):
            if v not in hops:
                hops[v] = hops[u] + 1
                queue.append(v)
    del hops[user_id]
    return dict(sorted(hops.items()))


def related_users(
    dataset: Dataset, user_id: int, depth: int, omega: FamiliarityWeights = FamiliarityWeights()
) -> dict[int, float]:
    """Followees up to `depth` hops, each with its familiarity to `user_id`.

    Familiarity uses the direct user_id -> v interaction row even when v is
    only indirectly followed; no row means familiarity 0.
    """
    return {v: familiarity(dataset.interaction(user_id, v), omega) for v in search_followees(dataset, user_id, depth)}


def potential_key(
    user_id: int,
    dataset: Dataset,
    classes: KeywordClassSet,
    omega: FamiliarityWeights = FamiliarityWeights(),
    depth: int = 2,
    own_profiles: Mapping[int, ClassWeights] | None = None,
) -> ClassWeights:
    out: ClassWeights = {}
    for v, fami in related_users(dataset, user_id, depth, omega).items():
        if fami == 0:
            continue
        prof = own_profiles[v] if own_profiles is not None else key_class(dataset.users[v].keywords, classes)
        for cid, w in prof.items():
            out[cid] = out.get(cid, 0.0) + w * fami
    return dict(sorted(out.items()))


def merge_interests(own: ClassWeights, potential: ClassWeights) -> ClassWeights:
    """Union of the two profiles; classes present in both get the mean weight."""
    out = dict(own)
    for cid, w in potential.items():
        out[cid] = (out[cid] + w) / 2 if cid in out else w
    return dict(sorted(out.items()))


def rank_norm(x: float) -> float:
    """(1 + e) / (1 + e^x), capped at 1 so that inputs below 1 map to 1."""
    if x <= 1:
        return 1.0
    # e^-x form keeps large ranks from overflowing
    z = math.exp(-x)
    return _NORM_NUMERATOR * z / (z + 1.0)


def sparse_dot(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return math.fsum(w * b[k] for k, w in a.items() if k in b)


def sparse_distance(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    keys = a.keys() | b.keys()
    return math.sqrt(math.fsum((a.get(k, 0.0) - b.get(k, 0.0)) ** 2 for k in keys))


def similarity(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    return rank_norm(sparse_distance(a, b))


def saturating_g(x: float, y: float) -> float:
    """2(1+e^-y) / ((1-e^-y)(1+e^-xy)) - (1+e^-y)/(1-e^-y).

    Evaluated as tanh(xy/2) / tanh(y/2), which is the same function but does
    not overflow for large |xy|.
    """
    if y <= 0:
        raise ValueError("y must be > 0")
    return math.tanh(x * y / 2) / math.tanh(y / 2)


def fondness(user_weights: Mapping[int, float], category_weights: Mapping[int, float]) -> float:
    g = saturating_g(sparse_dot(user_weights, category_weights), FONDNESS_STEEPNESS)
    return min(1.0, max(0.0, g))


DEFAULT_DEPTHS = {UserClass.ACTIVE: 1, UserClass.INACTIVE: 2, UserClass.FAKE: 0}


@dataclass
class Profiles:
    """Precomputed, read-only profile caches for one dataset and class set."""

    classes: KeywordClassSet
    user_classes: dict[int, UserClass]
    omegas: dict[UserClass, FamiliarityWeights]
    depths: dict[UserClass, int]
    own: dict[int, ClassWeights] = field(default_factory=dict)
    items: dict[int, ClassWeights] = field(default_factory=dict)
    categories: dict[CategoryPath, ClassWeights] = field(default_factory=dict)
    potential: dict[int, ClassWeights] = field(default_factory=dict)
    interests: dict[int, ClassWeights] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        dataset: Dataset,
        classes: KeywordClassSet,
        user_classes: Mapping[int, UserClass],
        omega: FamiliarityWeights | Mapping[UserClass, FamiliarityWeights] = FamiliarityWeights(),
        depths: Mapping[UserClass, int] | None = None,
    ) -> Profiles:
        """`omega` is either shared by all classes or given per user class."""
        depths = dict(DEFAULT_DEPTHS if depths is None else depths)
        # potential interests are never generated for fake users
        depths[UserClass.FAKE] = 0
        if isinstance(omega, FamiliarityWeights):
            omegas = {c: omega for c in UserClass}
        else:
            omegas = {c: omega.get(c, FamiliarityWeights()) for c in UserClass}
        prof = cls(classes, dict(user_classes), omegas, depths)
        prof.own = {uid: key_class(u.keywords, classes) for uid, u in dataset.users.items()}
        prof.items = {iid: key_class(it.keywords, classes) for iid, it in dataset.items.items()}
        for cat, item_ids in dataset.categories.items():
            prof.categories[cat] = _average_profiles(prof.items[i] for i in item_ids)
        for uid in dataset.users:
            prof.potential[uid] = prof.potential_for(dataset, uid, prof.omega_for(uid))
            prof.interests[uid] = merge_interests(prof.own[uid], prof.potential[uid])
        return prof

    def depth_for(self, user_id: int) -> int:
        return self.depths[self.user_classes[user_id]]

    def omega_for(self, user_id: int) -> FamiliarityWeights:
        return self.omegas[self.user_classes[user_id]]

    def potential_for(self, dataset: Dataset, user_id: int, omega: FamiliarityWeights) -> ClassWeights:
        depth = self.depth_for(user_id)
        if depth == 0:
            return {}
        return potential_key(user_id, dataset, self.classes, omega, depth, own_profiles=self.own)

    def profile(self, user_id: int) -> ClassWeights:
        return self.interests[user_id]


def format_profile(weights: Mapping[int, float]) -> str:
    return "".join(f"{cid}\t{w!r}\n" for cid, w in sorted(weights.items()))
