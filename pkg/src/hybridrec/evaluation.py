"""AP@k / MAP@k over logged recommendations."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

from .dataset import RecLogRecord
from .scoring import DEFAULT_K, Scorer
from .taxonomy import UserClass


def ap_at_k(recommended: Sequence[int], accepted: Iterable[int], k: int = DEFAULT_K) -> float:
    """Average precision of the first `k` recommendations.

    Sum of precision@i at every hit position, divided by min(|accepted|, k).
    """
    accepted = set(accepted)
    if not accepted:
        return 0.0
    top = list(recommended)[:k]
    if len(set(top)) != len(top):
        raise ValueError("recommended list contains duplicates")
    hits = 0
    total = 0.0
    for pos, item in enumerate(top, start=1):
        if item in accepted:
            hits += 1
            total += hits / pos
    return total / min(len(accepted), k)


@dataclass
class EvalReport:
    k: int = DEFAULT_K
    per_user: dict[int, float] = field(default_factory=dict)
    per_class: dict[UserClass, float] = field(default_factory=dict)
    counts: dict[UserClass, int] = field(default_factory=dict)
    overall: float | None = None
    ranked: dict[int, list[int]] = field(default_factory=dict)

    def summary(self) -> str:
        lines = [f"MAP@{self.k} evaluation", f"users evaluated: {len(self.per_user)}"]
        for ucls in UserClass:
            n = self.counts.get(ucls, 0)
            value = self.per_class.get(ucls)
            shown = "n/a" if value is None else f"{value:.5f}"
            lines.append(f"  {ucls.value:<9} users={n:<5d} MAP@{self.k}={shown}")
        shown = "n/a" if self.overall is None else f"{self.overall:.5f}"
        lines.append(f"  {'total':<9} users={len(self.per_user):<5d} MAP@{self.k}={shown}")
        return "\n".join(lines) + "\n"

    def to_tsv(self, user_classes: Mapping[int, UserClass]) -> str:
        return "".join(f"{uid}\t{user_classes[uid]}\t{ap!r}\n" for uid, ap in sorted(self.per_user.items()))


def map_at_k(per_user: Mapping[int, float], user_classes: Mapping[int, UserClass], k: int = DEFAULT_K) -> EvalReport:
    report = EvalReport(k=k, per_user=dict(sorted(per_user.items())))
    grouped: dict[UserClass, list[float]] = {}
    for uid, ap in report.per_user.items():
        grouped.setdefault(user_classes[uid], []).append(ap)
    report.counts = {c: len(grouped.get(c, ())) for c in UserClass}
    report.per_class = {c: sum(v) / len(v) for c, v in grouped.items()}
    if report.per_user:
        report.overall = sum(report.per_user.values()) / len(report.per_user)
    return report


def evaluate(scorer: Scorer, test_records: Iterable[RecLogRecord], k: int = DEFAULT_K) -> EvalReport:
    """Rank each user's logged test items and score the top `k` against acceptances.

    Only users with at least one accepted test item are evaluated.
    """
    shown: dict[int, set[int]] = {}
    accepted: dict[int, set[int]] = {}
    for r in test_records:
        shown.setdefault(r.user_id, set()).add(r.item_id)
        if r.result == 1:
            accepted.setdefault(r.user_id, set()).add(r.item_id)
    per_user = {}
    ranked = {}
    for uid in sorted(accepted):
        order = [i for i, _ in scorer.rank_items(uid, shown[uid], k)]
        ranked[uid] = order
        per_user[uid] = ap_at_k(order, accepted[uid], k)
    report = map_at_k(per_user, scorer.profiles.user_classes, k)
    report.ranked = ranked
    return report
