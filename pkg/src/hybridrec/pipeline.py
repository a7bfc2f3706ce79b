"""End-to-end batch run: mine, classify, profile, train, recommend, evaluate."""

from __future__ import annotations

import logging
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from .config import PipelineConfig
from .dataset import Dataset, RecLogRecord, load_dataset
from .evaluation import EvalReport, evaluate
from .interest import Profiles
from .mining import KeywordClassSet, format_classes, mine_keyword_classes
from .scoring import AcceptanceIndex, GradingParams, Recommendation, Scorer, build_popularity, format_recommendations
from .taxonomy import UserClass, classify_all, format_taxonomy
from .training import TrainingRun, format_params, train_all

log = logging.getLogger(__name__)

CLASSES_FILE = "classes.tsv"
TAXONOMY_FILE = "taxonomy.tsv"
PARAMS_FILE = "params.tsv"
RECS_FILE = "recommendations.tsv"
EVAL_FILE = "evaluation.tsv"
SUMMARY_FILE = "summary.txt"


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


def split_by_time(records: Sequence[RecLogRecord], train_fraction: float = 0.8) -> tuple[list[RecLogRecord], list[RecLogRecord]]:
    """Earliest `train_fraction` of the time-sorted log for training, the rest for testing."""
    ordered = sorted(records)
    cut = math.floor(len(ordered) * train_fraction)
    return ordered[:cut], ordered[cut:]


@dataclass
class System:
    """Everything built from a dataset before any user is scored."""

    dataset: Dataset
    config: PipelineConfig
    classes: KeywordClassSet
    user_classes: dict[int, UserClass]
    profiles: Profiles
    scorer: Scorer


def build_system(
    dataset: Dataset,
    config: PipelineConfig,
    params: Mapping[UserClass, GradingParams] | None = None,
    history: Sequence[RecLogRecord] | None = None,
    classes: KeywordClassSet | None = None,
) -> System:
    """`history` is the log visible to the recommender (for time decay); default all of it."""
    history = dataset.rec_log if history is None else history
    params = dict(params or config.default_params())
    if classes is None:
        classes = _stage("mine", mine_keyword_classes, dataset, config.mining())
    user_classes = _stage("classify", classify_all, dataset, config.taxonomy())
    omegas = {c: p.omega for c, p in params.items()}
    profiles = _stage("profile", Profiles.build, dataset, classes, user_classes, omegas, config.depths())
    popularity = build_popularity(dataset)
    reference = max((r.timestamp for r in history), default=None)
    scorer = Scorer(dataset, profiles, popularity, params, AcceptanceIndex(dataset, history), reference)
    return System(dataset, config, classes, user_classes, profiles, scorer)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(name, e) from e


def recommend_all(scorer: Scorer, k: int, user_ids=None) -> list[Recommendation]:
    ids = sorted(scorer.dataset.users) if user_ids is None else user_ids
    return [scorer.recommend(uid, k) for uid in ids]


@dataclass
class PipelineResult:
    params_path: Path
    recommendations_path: Path
    report: EvalReport
    training: TrainingRun
    system: System


def run_pipeline(
    config: PipelineConfig,
    data: Dataset | str | os.PathLike,
    out_dir: str | os.PathLike,
    strict: bool = True,
) -> PipelineResult:
    dataset = data if isinstance(data, Dataset) else _stage("load", load_dataset, data, strict)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, test = split_by_time(dataset.rec_log, config.train_fraction)
    log.info("split %d training / %d test records", len(train), len(test))

    base = build_system(dataset, config, history=train)
    run = _stage("train", train_all, train, base.scorer, config.training(), config.default_params())
    system = build_system(dataset, config, run.params, history=train, classes=base.classes)

    recs = _stage("recommend", recommend_all, system.scorer, config.k)
    report = _stage("evaluate", evaluate, system.scorer, test, config.k)

    (out / CLASSES_FILE).write_text(format_classes(system.classes), encoding="utf-8")
    (out / TAXONOMY_FILE).write_text(format_taxonomy(dataset, config.taxonomy()), encoding="utf-8")
    (out / PARAMS_FILE).write_text(format_params(run.params), encoding="utf-8")
    (out / RECS_FILE).write_text(format_recommendations(recs), encoding="utf-8")
    (out / EVAL_FILE).write_text(report.to_tsv(system.user_classes), encoding="utf-8")
    (out / SUMMARY_FILE).write_text(_summary(system, run, report, len(train), len(test)), encoding="utf-8")
    return PipelineResult(out / PARAMS_FILE, out / RECS_FILE, report, run, system)


def _summary(system: System, run: TrainingRun, report: EvalReport, n_train: int, n_test: int) -> str:
    counts = {c: 0 for c in UserClass}
    for c in system.user_classes.values():
        counts[c] += 1
    lines = [
        f"users: {len(system.dataset.users)} "
        + " ".join(f"{c.value}={counts[c]}" for c in UserClass),
        f"items: {len(system.dataset.items)}  categories: {len(system.dataset.categories)}",
        f"keyword classes: {len(system.classes)}",
        f"rec_log records: train={n_train} test={n_test}",
    ]
    for c, p in sorted(run.params.items(), key=lambda kv: kv[0].value):
        lines.append(f"trained {c.value}: alpha1={p.alpha1:.5f} users={run.counts.get(c, 0)}")
    return "\n".join(lines) + "\n" + report.summary()
