"""Pipeline configuration: one flat record, read from ``key = value`` text."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

from .interest import FamiliarityWeights, MAX_DEPTH
from .mining import MiningConfig
from .scoring import GradingParams
from .taxonomy import TaxonomyConfig, UserClass
from .training import TrainingConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    # keyword mining
    supp_local: float = 0.2
    supp_global: float = 0.2
    conf_local: float = 0.7
    conf_global: float = 0.7
    n_sites: int = 4
    n_polling_sites: int = 2
    max_itemset_size: int = 5
    # taxonomy
    min_activeness: float = 100
    min_action: int = 20
    # interests
    omega_at: float = 1 / 3
    omega_retweet: float = 1 / 3
    omega_comment: float = 1 / 3
    depth_active: int = 1
    depth_inactive: int = 2
    # grading
    alpha1_active: float = 0.33
    alpha1_inactive: float = 0.18
    lam: float = 2.0
    time_decay: bool = False
    k: int = 3
    # training
    beta: float = 0.9
    performance: float = 0.01
    eta: float = 1.0
    train_omegas: bool = False
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        try:
            self.mining()
            self.taxonomy()
            self.omega()
            self.training()
            self.default_params()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        for name in ("depth_active", "depth_inactive"):
            if not 0 <= getattr(self, name) <= MAX_DEPTH:
                raise ConfigError(f"{name} must be in [0, {MAX_DEPTH}]")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must be in (0, 1)")

    def mining(self) -> MiningConfig:
        return MiningConfig(
            self.supp_local, self.supp_global, self.conf_local, self.conf_global,
            self.n_sites, self.n_polling_sites, self.max_itemset_size,
        )

    def taxonomy(self) -> TaxonomyConfig:
        return TaxonomyConfig(self.min_activeness, self.min_action)

    def omega(self) -> FamiliarityWeights:
        return FamiliarityWeights(self.omega_at, self.omega_retweet, self.omega_comment)

    def depths(self) -> dict[UserClass, int]:
        return {UserClass.ACTIVE: self.depth_active, UserClass.INACTIVE: self.depth_inactive, UserClass.FAKE: 0}

    def default_params(self) -> dict[UserClass, GradingParams]:
        w = self.omega()
        return {
            UserClass.ACTIVE: GradingParams(self.alpha1_active, w, self.lam, self.time_decay),
            UserClass.INACTIVE: GradingParams(self.alpha1_inactive, w, self.lam, self.time_decay),
        }

    def training(self) -> TrainingConfig:
        return TrainingConfig(
            beta=self.beta, performance=self.performance, eta=self.eta,
            train_omegas=self.train_omegas, use_time_decay=self.time_decay,
            lam=self.lam, seed=self.seed,
        )

    def with_overrides(self, **changes) -> PipelineConfig:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in asdict(self).items())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, kind, text: str):
    text = text.strip()
    try:
        if kind in (bool, "bool"):
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if kind in (int, "int"):
            return int(text)
        if kind in (float, "float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    raise ConfigError(f"unsupported type for {name}")


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse ``key = value`` lines; '#' starts a comment. Unknown keys are errors."""
    kinds = {f.name: f.type for f in fields(PipelineConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        if key not in kinds:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, kinds[key], value)
    return replace(base or PipelineConfig(), **values)


def load_config(path: str | os.PathLike | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
