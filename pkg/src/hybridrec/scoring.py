"""Item popularity, candidate selection, grading and top-k recommendation."""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .dataset import CategoryPath, Dataset, RecLogRecord
from .interest import ClassWeights, FamiliarityWeights, Profiles, fondness, kh_map, rank_norm, similarity
from .mining import KeywordClassSet
from .taxonomy import UserClass

SECONDS_PER_DAY = 86400
DEFAULT_K = 3
DEFAULT_ALPHA1 = {UserClass.ACTIVE: 0.33, UserClass.INACTIVE: 0.18}


@dataclass(frozen=True)
class GradingParams:
    alpha1: float = 0.5
    omega: FamiliarityWeights = FamiliarityWeights()
    lam: float = 2.0
    use_time_decay: bool = False

    def __post_init__(self):
        if not 0 <= self.alpha1 <= 1:
            raise ValueError(f"alpha1 must be in [0, 1], got {self.alpha1}")
        if not self.lam > 1:
            raise ValueError(f"lambda must be > 1, got {self.lam}")

    @property
    def alpha2(self) -> float:
        return 1.0 - self.alpha1


def default_params(
    lam: float = 2.0, use_time_decay: bool = False, omega: FamiliarityWeights = FamiliarityWeights()
) -> dict[UserClass, GradingParams]:
    return {c: GradingParams(a, omega, lam, use_time_decay) for c, a in DEFAULT_ALPHA1.items()}


@dataclass(frozen=True)
class PopularityIndex:
    """1-based follower-count ranks, within each category and over all items.

    Ties go to the smaller item id. ``hot``/``HOT`` hold the normalized values.
    """

    category_rank: dict[int, int]
    global_rank: dict[int, int]
    hot: dict[int, float]
    HOT: dict[int, float]
    global_order: tuple[int, ...]


def build_popularity(dataset: Dataset) -> PopularityIndex:
    def ranks(item_ids: Iterable[int]) -> list[int]:
        return sorted(item_ids, key=lambda i: (-dataset.items[i].followers, i))

    category_rank = {}
    for item_ids in dataset.categories.values():
        for r, iid in enumerate(ranks(item_ids), start=1):
            category_rank[iid] = r
    order = ranks(dataset.items)
    global_rank = {iid: r for r, iid in enumerate(order, start=1)}
    return PopularityIndex(
        category_rank=dict(sorted(category_rank.items())),
        global_rank=global_rank,
        hot={i: rank_norm(r) for i, r in sorted(category_rank.items())},
        HOT={i: rank_norm(r) for i, r in global_rank.items()},
        global_order=tuple(order),
    )


def _check_unit(**values):
    for name, v in values.items():
        if not 0 <= v <= 1:
            raise ValueError(f"{name} must be in [0, 1], got {v}")


def grade(fond: float, hot: float, sim: float, alpha1: float) -> float:
    """2 * fond * (alpha1 * hot + (1 - alpha1) * sim) - 1."""
    _check_unit(fond=fond, hot=hot, sim=sim, alpha1=alpha1)
    return 2.0 * fond * (alpha1 * hot + (1.0 - alpha1) * sim) - 1.0


def time_factor(t_days: float | None, lam: float = 2.0) -> float:
    """1 + (lam - 1) e^t for t <= 0 days; None (never accepted) means t = -inf."""
    if t_days is None or t_days == -math.inf:
        return 1.0
    if t_days > 0:
        raise ValueError(f"t must be <= 0, got {t_days}")
    return 1.0 + (lam - 1.0) * math.exp(t_days)


def revised_grade(grade_value: float, time_value: float, lam: float = 2.0) -> float:
    return time_value * grade_value / lam


def fake_grade(fond: float, global_hot: float) -> float:
    _check_unit(fond=fond, global_hot=global_hot)
    return (1.0 + fond) * global_hot - 1.0


class AcceptanceIndex:
    """Timestamps of accepted recommendations per (user, category)."""

    def __init__(self, dataset: Dataset, records: Iterable[RecLogRecord]):
        acc: dict[tuple[int, CategoryPath], list[int]] = defaultdict(list)
        for r in records:
            if r.result == 1:
                acc[(r.user_id, dataset.items[r.item_id].category)].append(r.timestamp)
        self._times = {key: sorted(ts) for key, ts in acc.items()}

    def latest(self, user_id: int, category: CategoryPath, before: int | None = None) -> int | None:
        """Latest acceptance strictly before `before` (or overall when None)."""
        ts = self._times.get((user_id, category))
        if not ts:
            return None
        if before is None:
            return ts[-1]
        pos = bisect.bisect_left(ts, before)
        return ts[pos - 1] if pos else None

    def days_since(self, user_id: int, category: CategoryPath, now: int, strict: bool = False) -> float | None:
        """Non-positive offset in days of the latest acceptance at or before `now`."""
        last = self.latest(user_id, category, now if strict else now + 1)
        return None if last is None else (last - now) / SECONDS_PER_DAY


def category_class_index(category_profiles: Mapping[CategoryPath, ClassWeights]) -> dict[int, list[CategoryPath]]:
    idx: dict[int, list[CategoryPath]] = defaultdict(list)
    for cat, prof in category_profiles.items():
        for cid in prof:
            idx[cid].append(cat)
    return idx


def candidate_items(
    interests: Mapping[int, float],
    dataset: Dataset,
    classes: KeywordClassSet,
    user_id: int | None = None,
    category_profiles: Mapping[CategoryPath, ClassWeights] | None = None,
) -> set[int]:
    """Items of every category whose profile shares a class with `interests`.

    Items `user_id` already follows, and the user itself, are left out.
    """
    if not interests:
        return set()
    if category_profiles is None:
        category_profiles = {c: kh_map(c, dataset, classes) for c in dataset.categories}
    out = set()
    for cat, prof in category_profiles.items():
        if any(cid in interests for cid in prof):
            out.update(dataset.categories[cat])
    if user_id is not None:
        out -= dataset.following(user_id)
        out.discard(user_id)
    return out


@dataclass(frozen=True)
class Recommendation:
    user_id: int
    items: tuple[tuple[int, float], ...]

    @property
    def item_ids(self) -> list[int]:
        return [i for i, _ in self.items]


@dataclass
class Scorer:
    """Read-only grading over prebuilt indexes."""

    dataset: Dataset
    profiles: Profiles
    popularity: PopularityIndex
    params: dict[UserClass, GradingParams] = field(default_factory=default_params)
    acceptances: AcceptanceIndex | None = None
    reference_time: int | None = None
    _class_index: dict[int, list[CategoryPath]] = field(init=False, repr=False)

    def __post_init__(self):
        self._class_index = category_class_index(self.profiles.categories)
        if self.reference_time is None and self.dataset.rec_log:
            self.reference_time = max(r.timestamp for r in self.dataset.rec_log)

    def user_class(self, user_id: int) -> UserClass:
        try:
            return self.profiles.user_classes[user_id]
        except KeyError:
            raise KeyError(f"unknown user id {user_id}") from None

    def interests(self, user_id: int) -> ClassWeights:
        # fake users carry no potential interests (their depth is 0)
        return self.profiles.interests[user_id]

    def candidates(self, user_id: int) -> set[int]:
        interests = self.interests(user_id)
        cats = {c for cid in interests for c in self._class_index.get(cid, ())}
        out = {i for c in cats for i in self.dataset.categories[c]}
        out -= self.dataset.following(user_id)
        out.discard(user_id)
        return out

    def all_items(self, user_id: int) -> set[int]:
        out = set(self.dataset.items) - self.dataset.following(user_id)
        out.discard(user_id)
        return out

    def components(self, interests: Mapping[int, float], item_id: int) -> tuple[float, float, float]:
        """(fond, hot, sim) for a user profile and an item."""
        cat = self.dataset.items[item_id].category
        fond = fondness(interests, self.profiles.categories[cat])
        sim = similarity(interests, self.profiles.items[item_id])
        return fond, self.popularity.hot[item_id], sim

    def time_value(self, user_id: int, item_id: int, now: int | None = None, lam: float = 2.0) -> float:
        if self.acceptances is None:
            return 1.0
        now = self.reference_time if now is None else now
        if now is None:
            return 1.0
        cat = self.dataset.items[item_id].category
        return time_factor(self.acceptances.days_since(user_id, cat, now), lam)

    def score(self, user_id: int, item_id: int) -> float:
        ucls = self.user_class(user_id)
        interests = self.interests(user_id)
        if ucls is UserClass.FAKE:
            cat = self.dataset.items[item_id].category
            return fake_grade(fondness(interests, self.profiles.categories[cat]), self.popularity.HOT[item_id])
        p = self.params[ucls]
        fond, hot, sim = self.components(interests, item_id)
        g = grade(fond, hot, sim, p.alpha1)
        if p.use_time_decay:
            g = revised_grade(g, self.time_value(user_id, item_id, lam=p.lam), p.lam)
        return g

    def rank_items(self, user_id: int, item_ids: Iterable[int], k: int | None = None) -> list[tuple[int, float]]:
        scored = sorted(((i, self.score(user_id, i)) for i in set(item_ids)), key=lambda t: (-t[1], t[0]))
        return scored if k is None else scored[:k]

    def recommend(self, user_id: int, k: int = DEFAULT_K) -> Recommendation:
        ucls = self.user_class(user_id)
        pool = self.candidates(user_id)
        if ucls is UserClass.FAKE and not pool:
            # little to go on: fall back to the whole item set ranked by global popularity
            pool = self.all_items(user_id)
        return Recommendation(user_id, tuple(self.rank_items(user_id, pool, k)))


def recommend(
    user_id: int,
    dataset: Dataset,
    profiles: Profiles,
    popularity: PopularityIndex,
    params: Mapping[UserClass, GradingParams] | None = None,
    k: int = DEFAULT_K,
    acceptances: AcceptanceIndex | None = None,
) -> Recommendation:
    scorer = Scorer(dataset, profiles, popularity, dict(params or default_params()), acceptances)
    return scorer.recommend(user_id, k)


def format_recommendations(recs: Iterable[Recommendation]) -> str:
    lines = []
    for rec in recs:
        for pos, (iid, g) in enumerate(rec.items, start=1):
            lines.append(f"{rec.user_id}\t{iid}\t{pos}\t{g!r}\n")
    return "".join(lines)
