"""Online, single-pass training of the grading weights with momentum.

Each logged recommendation is shown once. The error is ``result - grade``;
the update for a parameter theta is

    delta(n) = eta * ((1 - beta) * error(n) * dgrade/dtheta + beta * delta(n-1))

followed by projection back onto the feasible set. Training of a user stops
at the first record whose absolute error is within ``performance``.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field, replace

from .dataset import Dataset, RecLogRecord
from .interest import (
    ClassWeights,
    FamiliarityWeights,
    Profiles,
    merge_interests,
    search_followees,
    sigmoid_f,
)
from .scoring import AcceptanceIndex, GradingParams, Scorer, grade, revised_grade, time_factor
from .taxonomy import UserClass


@dataclass(frozen=True)
class TrainingConfig:
    beta: float = 0.9
    performance: float = 0.01
    eta: float = 1.0
    train_omegas: bool = False
    use_time_decay: bool = False
    lam: float = 2.0
    seed: int = 0
    init_low: float = 0.1
    init_high: float = 0.9

    def __post_init__(self):
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if not self.performance > 0:
            raise ValueError("performance must be > 0")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not self.lam > 1:
            raise ValueError("lambda must be > 1")


@dataclass(frozen=True)
class TrainingState:
    alpha1: float
    omega1: float = 1 / 3
    omega2: float = 1 / 3
    d_alpha1: float = 0.0
    d_omega1: float = 0.0
    d_omega2: float = 0.0
    epoch: int = 0
    last_error: float | None = None
    converged: bool = False
    history: tuple[tuple[float, float], ...] = ()  # (error, alpha1 before the update) per epoch

    @property
    def omega3(self) -> float:
        return max(0.0, 1.0 - self.omega1 - self.omega2)

    @property
    def omega(self) -> FamiliarityWeights:
        return FamiliarityWeights.from_pair(self.omega1, self.omega2)


@dataclass(frozen=True)
class SampleContext:
    """Everything the grade of one logged recommendation depends on.

    ``dw1``/``dw2`` are the summed approximate derivatives of the user's
    profile weights with respect to omega1/omega2, and ``sigma`` the sign of
    the summed user-minus-item profile difference.
    """

    result: int
    fond: float
    hot: float
    sim: float
    time: float = 1.0
    sigma: float = 0.0
    dw1: float = 0.0
    dw2: float = 0.0


def initial_state(seed: int, user_id: int = 0, config: TrainingConfig = TrainingConfig(), omega=FamiliarityWeights()) -> TrainingState:
    rng = random.Random(f"{seed}:{user_id}")
    return TrainingState(alpha1=rng.uniform(config.init_low, config.init_high), omega1=omega.at, omega2=omega.retweet)


def training_error(result: int, predicted_grade: float) -> float:
    return result - predicted_grade


def predict(ctx: SampleContext, alpha1: float, config: TrainingConfig) -> float:
    g = grade(ctx.fond, ctx.hot, ctx.sim, alpha1)
    return revised_grade(g, ctx.time, config.lam) if config.use_time_decay else g


def grade_gradients(ctx: SampleContext, alpha1: float, config: TrainingConfig = TrainingConfig()) -> tuple[float, float, float]:
    """Partial derivatives of the predicted grade w.r.t. alpha1, omega1, omega2."""
    scale = 2.0 * ctx.time / config.lam if config.use_time_decay else 2.0
    d_alpha = scale * ctx.fond * (ctx.hot - ctx.sim)
    if not config.train_omegas:
        return d_alpha, 0.0, 0.0
    common = scale * ctx.sigma * (1.0 - alpha1) * ctx.fond
    return d_alpha, common * ctx.dw1, common * ctx.dw2


def momentum_step(
    param: float,
    step: float,
    prev_delta: float,
    beta: float,
    eta: float = 1.0,
    bounds: tuple[float, float] | None = (0.0, 1.0),
) -> tuple[float, float]:
    """Return (new parameter, update). `step` is error * gradient.

    The returned update is the unclipped one and feeds the next momentum term.
    """
    update = eta * ((1.0 - beta) * step + beta * prev_delta)
    new = param + update
    if bounds is not None:
        new = min(bounds[1], max(bounds[0], new))
    return new, update


def project_simplex(values: Sequence[float]) -> list[float]:
    """Euclidean projection onto {x >= 0, sum x = 1}."""
    u = sorted(values, reverse=True)
    cumulative = 0.0
    theta = 0.0
    for i, v in enumerate(u, start=1):
        cumulative += v
        t = (cumulative - 1.0) / i
        if v - t > 0:
            theta = t
    return [max(v - theta, 0.0) for v in values]


def train_step(state: TrainingState, ctx: SampleContext, config: TrainingConfig) -> TrainingState:
    predicted = predict(ctx, state.alpha1, config)
    error = training_error(ctx.result, predicted)
    history = state.history + ((error, state.alpha1),)
    if abs(error) <= config.performance:
        return replace(state, epoch=state.epoch + 1, last_error=error, converged=True, history=history)
    g_alpha, g_w1, g_w2 = grade_gradients(ctx, state.alpha1, config)
    alpha1, d_alpha1 = momentum_step(state.alpha1, error * g_alpha, state.d_alpha1, config.beta, config.eta)
    omega1, omega2 = state.omega1, state.omega2
    d_omega1, d_omega2 = state.d_omega1, state.d_omega2
    if config.train_omegas:
        omega1, d_omega1 = momentum_step(omega1, error * g_w1, d_omega1, config.beta, config.eta, None)
        omega2, d_omega2 = momentum_step(omega2, error * g_w2, d_omega2, config.beta, config.eta, None)
        omega1, omega2, _ = project_simplex([omega1, omega2, 1.0 - omega1 - omega2])
    return TrainingState(alpha1, omega1, omega2, d_alpha1, d_omega1, d_omega2, state.epoch + 1, error, False, history)


def train_samples(
    samples: Iterable[SampleContext | Callable[[TrainingState], SampleContext]],
    config: TrainingConfig,
    state: TrainingState,
) -> TrainingState:
    """Present each sample once, stopping early once the error is small enough.

    A sample may be a callable that builds its context from the current state,
    which is how omega-dependent profiles are refreshed during training.
    """
    for sample in samples:
        ctx = sample(state) if callable(sample) else sample
        state = train_step(state, ctx, config)
        if state.converged:
            break
    return state


# ---------------------------------------------------------------------------
# contexts from the corpus


@dataclass
class _UserGraph:
    related: dict[int, tuple[float, float, float]]  # v -> (f(at), f(retweet), f(comment))
    own: ClassWeights
    dw1: float
    dw2: float


def _user_graph(dataset: Dataset, profiles: Profiles, user_id: int) -> _UserGraph:
    related = {}
    dw1 = dw2 = 0.0
    for v in search_followees(dataset, user_id, profiles.depth_for(user_id)):
        c = dataset.interaction(user_id, v)
        fa, fr, fc = sigmoid_f(c.at), sigmoid_f(c.retweet), sigmoid_f(c.comment)
        related[v] = (fa, fr, fc)
        mass = sum(profiles.own[v].values())
        dw1 += 0.5 * mass * (fa - fc)
        dw2 += 0.5 * mass * (fr - fc)
    return _UserGraph(related, profiles.own[user_id], dw1, dw2)


def _interests_with(graph: _UserGraph, profiles: Profiles, omega: FamiliarityWeights) -> ClassWeights:
    potential: ClassWeights = {}
    for v, (fa, fr, fc) in graph.related.items():
        fami = omega.at * fa + omega.retweet * fr + omega.comment * fc
        if fami == 0:
            continue
        for cid, w in profiles.own[v].items():
            potential[cid] = potential.get(cid, 0.0) + w * fami
    return merge_interests(graph.own, potential)


def _sign(x: float) -> float:
    return float((x > 0) - (x < 0))


def sample_context(
    record: RecLogRecord,
    scorer: Scorer,
    interests: ClassWeights,
    config: TrainingConfig,
    graph: _UserGraph | None = None,
) -> SampleContext:
    fond, hot, sim = scorer.components(interests, record.item_id)
    time = 1.0
    if config.use_time_decay and scorer.acceptances is not None:
        cat = scorer.dataset.items[record.item_id].category
        time = time_factor(scorer.acceptances.days_since(record.user_id, cat, record.timestamp, strict=True), config.lam)
    item_prof = scorer.profiles.items[record.item_id]
    diff = sum(interests.values()) - sum(item_prof.values())
    return SampleContext(
        result=record.result,
        fond=fond,
        hot=hot,
        sim=sim,
        time=time,
        sigma=_sign(diff),
        dw1=graph.dw1 if graph else 0.0,
        dw2=graph.dw2 if graph else 0.0,
    )


def train_user(
    records: Sequence[RecLogRecord],
    scorer: Scorer,
    config: TrainingConfig,
    state: TrainingState,
) -> TrainingState:
    """Single time-ordered pass over one user's logged recommendations."""
    if not records:
        return state
    user_id = records[0].user_id
    if any(r.user_id != user_id for r in records):
        raise ValueError("records must belong to a single user")
    records = sorted(records)
    graph = _user_graph(scorer.dataset, scorer.profiles, user_id)

    def provider(record):
        def build(st: TrainingState) -> SampleContext:
            interests = _interests_with(graph, scorer.profiles, st.omega) if config.train_omegas else scorer.interests(user_id)
            return sample_context(record, scorer, interests, config, graph)
        return build

    return train_samples((provider(r) for r in records), config, state)


@dataclass
class TrainingRun:
    states: dict[int, TrainingState] = field(default_factory=dict)
    params: dict[UserClass, GradingParams] = field(default_factory=dict)
    counts: dict[UserClass, int] = field(default_factory=dict)


def train_all(
    records: Iterable[RecLogRecord],
    scorer: Scorer,
    config: TrainingConfig,
    defaults: Mapping[UserClass, GradingParams],
) -> TrainingRun:
    """Train every non-fake user with logged records, then average per class."""
    by_user: dict[int, list[RecLogRecord]] = {}
    for r in records:
        by_user.setdefault(r.user_id, []).append(r)
    states = {}
    for uid in sorted(by_user):
        ucls = scorer.user_class(uid)
        if ucls is UserClass.FAKE:
            continue
        omega = scorer.profiles.omega_for(uid)
        init = initial_state(config.seed, uid, config, omega)
        states[uid] = train_user(by_user[uid], scorer, config, init)
    params, counts = aggregate_params(states, scorer.profiles.user_classes, defaults, config)
    return TrainingRun(states, params, counts)


def aggregate_params(
    states: Mapping[int, TrainingState],
    user_classes: Mapping[int, UserClass],
    defaults: Mapping[UserClass, GradingParams],
    config: TrainingConfig = TrainingConfig(),
) -> tuple[dict[UserClass, GradingParams], dict[UserClass, int]]:
    """Mean trained parameters per user class; untrained classes keep their defaults."""
    grouped: dict[UserClass, list[TrainingState]] = {}
    for uid, st in states.items():
        ucls = user_classes[uid]
        if ucls is not UserClass.FAKE:
            grouped.setdefault(ucls, []).append(st)
    out = dict(defaults)
    counts = {c: len(grouped.get(c, ())) for c in defaults}
    for ucls, sts in grouped.items():
        base = defaults.get(ucls, GradingParams())
        alpha1 = sum(s.alpha1 for s in sts) / len(sts)
        omega = base.omega
        if config.train_omegas:
            w1 = sum(s.omega1 for s in sts) / len(sts)
            w2 = sum(s.omega2 for s in sts) / len(sts)
            omega = FamiliarityWeights(*project_simplex([w1, w2, 1.0 - w1 - w2]))
        out[ucls] = replace(base, alpha1=min(1.0, max(0.0, alpha1)), omega=omega)
    return out, counts


def format_params(params: Mapping[UserClass, GradingParams]) -> str:
    lines = []
    for ucls in (UserClass.ACTIVE, UserClass.INACTIVE):
        if ucls in params:
            p = params[ucls]
            w = p.omega
            lines.append(f"{ucls}\t{p.alpha1!r}\t{w.at!r}\t{w.retweet!r}\t{w.comment!r}\n")
    return "".join(lines)


def parse_params(text: str, lam: float = 2.0, use_time_decay: bool = False) -> dict[UserClass, GradingParams]:
    out = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        ucls, a, w1, w2, w3 = line.split("\t")
        out[UserClass(ucls)] = GradingParams(float(a), FamiliarityWeights(float(w1), float(w2), float(w3)), lam, use_time_decay)
    return out
