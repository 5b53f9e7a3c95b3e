"""Experiment configuration, presets and the flat JSON config format.

A config file is a flat JSON object whose keys are :class:`ExperimentConfig`
field names, with the strategy and access knobs flattened next to them::

    {"preset": "exp3-uncertainty", "horizon_T": 100, "seeds": [1, 2, 3]}

The optional ``preset`` key names the base the file overrides; without it the
package defaults are the base.
"""

import json
import math
import pathlib
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import toolz
from multipledispatch import Dispatcher

from .environment import AccessDistribution, GroundTruthSchedule, Uniform, Zipf
from .exceptions import ConfigError
from .store import StoreConfig
from .strategy import (
    StrategyKind,
    Uncertainty,
    WithSurprisalReset,
    from_name,
    strategy_name,
)

DEFAULT_SEEDS = tuple(range(1, 21))

DEFAULTS: Dict[str, Any] = {
    "k": 100,
    "horizon_T": 2000,
    "gamma": 0.999,
    "strategy": "random",
    "tie_epsilon": 1e-12,
    "tau": 2.5,
    "n_reset": 2.0,
    "access": "uniform",
    "zipf_s": 1.1,
    "schedule": [[1, 0.8], [501, 0.2]],
    "schedule_overrides": {},
    "batch_m": 10,
    "n_min": 0.5,
    "capacity": None,
    "prior_alpha": 1.0,
    "prior_beta": 1.0,
    "seeds": list(DEFAULT_SEEDS),
}

# Golden parameter sets of the three consensus-shift experiments.
PRESETS: Dict[str, Dict[str, Any]] = {
    "exp1-static": {"gamma": 1.0},
    "exp1-high": {"gamma": 0.999},
    "exp1-low": {"gamma": 0.95},
    "exp2-random": {"strategy": "random"},
    "exp2-uncertainty": {"strategy": "uncertainty"},
    "exp2-uncertainty-reset": {"strategy": "uncertainty+reset"},
    "exp3-random": {"access": "zipf", "strategy": "random"},
    "exp3-uncertainty": {"access": "zipf", "strategy": "uncertainty"},
    "exp3-uncertainty-reset": {"access": "zipf", "strategy": "uncertainty+reset"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one multi-seed experiment."""

    k: int
    horizon_T: int
    gamma: float
    strategy: StrategyKind
    access: AccessDistribution
    schedule: GroundTruthSchedule
    batch_m: int = 10
    n_min: float = 0.5
    capacity: Optional[int] = None
    prior_alpha: float = 1.0
    prior_beta: float = 1.0
    seeds: Tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        for name in ("k", "horizon_T", "batch_m"):
            value = getattr(self, name)
            if not _is_integer(value) or value < 1:
                raise ConfigError(
                    f"must be a positive integer, got {value!r}", field=name
                )
        if self.access.k != self.k:
            raise ConfigError(
                f"access distribution covers {self.access.k} propositions, "
                f"expected k = {self.k}",
                field="access",
            )
        if not isinstance(self.strategy, StrategyKind):
            raise ConfigError(f"not a strategy: {self.strategy!r}", field="strategy")
        self.store_config()
        seeds = tuple(self.seeds)
        if not seeds:
            raise ConfigError("at least one seed is required", field="seeds")
        for seed in seeds:
            if not _is_integer(seed) or not 0 <= seed < 2 ** 64:
                raise ConfigError(
                    f"seeds must be unsigned 64-bit integers, got {seed!r}",
                    field="seeds",
                )
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds must be distinct", field="seeds")
        object.__setattr__(self, "seeds", tuple(int(seed) for seed in seeds))

    def store_config(self) -> StoreConfig:
        return StoreConfig(
            gamma=self.gamma,
            n_min=self.n_min,
            capacity=self.capacity,
            prior_alpha=self.prior_alpha,
            prior_beta=self.prior_beta,
        )

    def replace(self, **changes) -> "ExperimentConfig":
        """Copy of this config with fields given in flat-mapping form replaced."""
        return from_mapping(toolz.merge(to_mapping(self), changes))


def _is_integer(value) -> bool:
    return not isinstance(value, bool) and isinstance(value, (int, np.integer))


def _number(raw: Mapping[str, Any], name: str) -> float:
    value = raw[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", field=name)
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", field=name)
    return float(value)


def _integer(raw: Mapping[str, Any], name: str) -> int:
    value = raw[name]
    if not _is_integer(value):
        raise ConfigError(f"expected an integer, got {value!r}", field=name)
    return int(value)


def _access(raw: Mapping[str, Any], k: int) -> AccessDistribution:
    name = raw["access"]
    if name == "uniform":
        return Uniform(k)
    if name == "zipf":
        return Zipf(k, _number(raw, "zipf_s"))
    raise ConfigError(
        f"Got unexpected value {name!r}. Expected 'uniform' or 'zipf'.", field="access"
    )


def from_mapping(
    raw: Mapping[str, Any], source: Optional[str] = None
) -> ExperimentConfig:
    """Build a config from the flat mapping form.

    Missing keys take their value from :data:`DEFAULTS`.

    Raises
    ------
    ConfigError
        On unknown keys or invalid values; the error names the field.
    """
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}", source=source)
    raw = toolz.merge(DEFAULTS, raw)
    try:
        k = _integer(raw, "k")
        capacity = raw["capacity"]
        if capacity is not None:
            capacity = _integer(raw, "capacity")
        strategy = raw["strategy"]
        if not isinstance(strategy, str):
            raise ConfigError(f"expected a name, got {strategy!r}", field="strategy")
        seeds = raw["seeds"]
        if not isinstance(seeds, (list, tuple)):
            raise ConfigError(f"expected a list, got {seeds!r}", field="seeds")
        overrides = raw["schedule_overrides"]
        if not isinstance(overrides, Mapping):
            raise ConfigError(
                f"expected an object, got {overrides!r}", field="schedule_overrides"
            )
        try:
            overrides = {int(id): segments for id, segments in overrides.items()}
        except ValueError as exc:
            raise ConfigError(
                f"keys must be proposition ids: {exc}", field="schedule_overrides"
            ) from exc
        return ExperimentConfig(
            k=k,
            horizon_T=_integer(raw, "horizon_T"),
            gamma=_number(raw, "gamma"),
            strategy=from_name(
                strategy,
                tie_epsilon=_number(raw, "tie_epsilon"),
                tau=_number(raw, "tau"),
                n_reset=_number(raw, "n_reset"),
            ),
            access=_access(raw, k),
            schedule=GroundTruthSchedule(raw["schedule"], overrides),
            batch_m=_integer(raw, "batch_m"),
            n_min=_number(raw, "n_min"),
            capacity=capacity,
            prior_alpha=_number(raw, "prior_alpha"),
            prior_beta=_number(raw, "prior_beta"),
            seeds=tuple(seeds),
        )
    except ConfigError as exc:
        exc.source = exc.source or source
        raise


strategy_knobs = Dispatcher("strategy_knobs")


@strategy_knobs.register(StrategyKind)
def strategy_knobs_default(kind):
    return {}


@strategy_knobs.register(Uncertainty)
def strategy_knobs_uncertainty(kind):
    return {"tie_epsilon": kind.tie_epsilon}


@strategy_knobs.register(WithSurprisalReset)
def strategy_knobs_wrapped(kind):
    return toolz.merge(
        strategy_knobs(kind.inner), {"tau": kind.tau, "n_reset": kind.n_reset}
    )


access_fields = Dispatcher("access_fields")


@access_fields.register(Uniform)
def access_fields_uniform(d):
    return {"access": "uniform"}


@access_fields.register(Zipf)
def access_fields_zipf(d):
    return {"access": "zipf", "zipf_s": d.s}


def to_mapping(cfg: ExperimentConfig) -> Dict[str, Any]:
    """Flat mapping form of `cfg`; :func:`from_mapping` inverts it."""
    return toolz.merge(
        {
            "k": cfg.k,
            "horizon_T": cfg.horizon_T,
            "gamma": cfg.gamma,
            "strategy": strategy_name(cfg.strategy),
        },
        strategy_knobs(cfg.strategy),
        access_fields(cfg.access),
        {
            "schedule": [list(segment) for segment in cfg.schedule.segments],
            "schedule_overrides": {
                str(id): [list(segment) for segment in segments]
                for id, segments in cfg.schedule.overrides.items()
            },
            "batch_m": cfg.batch_m,
            "n_min": cfg.n_min,
            "capacity": cfg.capacity,
            "prior_alpha": cfg.prior_alpha,
            "prior_beta": cfg.prior_beta,
            "seeds": list(cfg.seeds),
        },
    )


def preset(name: str) -> ExperimentConfig:
    """Config of a named preset; see :data:`PRESETS`."""
    if name not in PRESETS:
        raise ConfigError(
            f"Unknown preset {name!r}. Expected one of: {', '.join(PRESETS)}."
        )
    return from_mapping(PRESETS[name], source=name)


def load_config(source) -> ExperimentConfig:
    """Load a preset by name or a flat JSON config file by path.

    Parameters
    ----------
    source : str or pathlib.Path

    Returns
    -------
    ExperimentConfig

    Raises
    ------
    ConfigError
        For unknown presets, unreadable or malformed files, and invalid
        values. Syntax errors carry the line and column of the problem.
    """
    if isinstance(source, str) and source in PRESETS:
        return preset(source)
    path = pathlib.Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        if path.suffix:
            raise ConfigError(f"config file {str(path)!r} does not exist")
        raise ConfigError(
            f"Unknown preset {str(source)!r}. Expected one of: {', '.join(PRESETS)}."
        )
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", source=str(path)) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            exc.msg, line=exc.lineno, column=exc.colno, source=str(path)
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", line=1, source=str(path))
    base = raw.pop("preset", None)
    if base is not None:
        if base not in PRESETS:
            raise ConfigError(
                f"Unknown preset {base!r}. Expected one of: {', '.join(PRESETS)}.",
                field="preset",
                source=str(path),
            )
        raw = toolz.merge(PRESETS[base], raw)
    return from_mapping(raw, source=str(path))


def dump_config(cfg: ExperimentConfig, path) -> None:
    """Write `cfg` as a flat JSON config that :func:`load_config` reads back."""
    text = json.dumps(to_mapping(cfg), indent=2, sort_keys=True)
    pathlib.Path(path).write_text(text + "\n", encoding="utf-8")
