"""The simulated commons: ground truth, access skew and feedback.

Per tick the commons surfaces a batch of ``m`` candidate propositions drawn
i.i.d. from the access distribution; the agent engages exactly one of them and
receives one Bernoulli observation of it.
"""

import bisect
import math
from dataclasses import dataclass, field
from typing import List, Mapping, Tuple

import numpy as np
from cached_property import cached_property
from multipledispatch import Dispatcher

from .belief import Evidence
from .exceptions import ConfigError

Segments = Tuple[Tuple[int, float], ...]
CandidateBatch = List[int]


def _segments(raw, name="schedule") -> Segments:
    try:
        segments = tuple((int(start), float(theta)) for start, theta in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"expected a list of [start_tick, theta_star] pairs: {exc}", field=name
        ) from exc
    if not segments:
        raise ConfigError("needs at least one segment", field=name)
    if segments[0][0] != 1:
        raise ConfigError(
            f"first segment must start at tick 1, got {segments[0][0]}", field=name
        )
    for (prev, _), (start, _) in zip(segments, segments[1:]):
        if start <= prev:
            raise ConfigError(
                f"segment starts must be strictly increasing, got {prev} then {start}",
                field=name,
            )
    for start, theta in segments:
        if not math.isfinite(theta) or not 0.0 <= theta <= 1.0:
            raise ConfigError(
                f"theta_star must lie in [0, 1], got {theta!r} at tick {start}",
                field=name,
            )
    return segments


def _lookup(segments: Segments, t: int) -> float:
    if t < segments[0][0]:
        raise ValueError(f"Tick {t} precedes the first schedule segment")
    index = bisect.bisect_right([start for start, _ in segments], t) - 1
    return segments[index][1]


@dataclass(frozen=True)
class GroundTruthSchedule:
    """Piecewise-constant ``theta_star(t)`` shared by all propositions.

    Parameters
    ----------
    segments : Sequence[Tuple[int, float]]
        ``(start_tick, theta_star)`` pairs, strictly increasing, the first
        starting at tick 1.
    overrides : Mapping[int, Sequence[Tuple[int, float]]]
        Optional per-proposition segment lists that replace `segments`.
    """

    segments: Segments
    overrides: Mapping[int, Segments] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "segments", _segments(self.segments))
        object.__setattr__(
            self,
            "overrides",
            {
                int(id): _segments(raw, name=f"overrides[{id}]")
                for id, raw in dict(self.overrides).items()
            },
        )

    @property
    def shift_ticks(self) -> List[int]:
        """Ticks at which the shared ground truth changes."""
        return [start for start, _ in self.segments[1:]]


def consensus_shift(
    before: float = 0.8, after: float = 0.2, at: int = 501
) -> GroundTruthSchedule:
    """Schedule whose ground truth flips for good from `before` to `after` at `at`."""
    return GroundTruthSchedule(((1, before), (at, after)))


def theta_star(sched: GroundTruthSchedule, id: int, t: int) -> float:
    """Ground truth of proposition `id` at tick `t`.

    Examples
    --------
    >>> theta_star(consensus_shift(), 0, 500)
    0.8
    >>> theta_star(consensus_shift(), 0, 501)
    0.2
    """
    return _lookup(sched.overrides.get(id, sched.segments), t)


def theta_vector(sched: GroundTruthSchedule, k: int, t: int) -> np.ndarray:
    """Ground truth of every proposition ``0..k-1`` at tick `t`."""
    theta = np.full(k, _lookup(sched.segments, t))
    for id, segments in sched.overrides.items():
        if id < k:
            theta[id] = _lookup(segments, t)
    return theta


class AccessDistribution:
    """Probability of each proposition being surfaced by the commons."""

    k: int

    def _validate(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)):
            raise ConfigError(f"must be an integer, got {self.k!r}", field="k")
        if self.k < 1:
            raise ConfigError(f"must be positive, got {self.k}", field="k")

    @cached_property
    def pmf(self) -> np.ndarray:
        return access_pmf(self)

    @cached_property
    def cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.pmf)
        cdf[-1] = 1.0
        return cdf


@dataclass(frozen=True)
class Uniform(AccessDistribution):
    k: int

    def __post_init__(self):
        self._validate()


@dataclass(frozen=True)
class Zipf(AccessDistribution):
    """Power-law access: the proposition with id ``i`` has rank ``i + 1``."""

    k: int
    s: float = 1.1

    def __post_init__(self):
        self._validate()
        if not math.isfinite(self.s) or self.s <= 0:
            raise ConfigError(f"must be positive, got {self.s!r}", field="zipf_s")


access_pmf = Dispatcher("access_pmf")


@access_pmf.register(Uniform)
def access_pmf_uniform(d):
    return np.full(d.k, 1.0 / d.k)


@access_pmf.register(Zipf)
def access_pmf_zipf(d):
    weights = np.arange(1, d.k + 1, dtype=np.float64) ** -d.s
    return weights / weights.sum()


def draw_candidates(
    d: AccessDistribution, m: int, rng: np.random.Generator
) -> CandidateBatch:
    """Draw `m` i.i.d. proposition ids by inverse-CDF sampling.

    Duplicates are kept; the batch is exactly `m` long.
    """
    if m < 1:
        raise ValueError(f"Candidate batch size must be positive, got {m}")
    ids = np.searchsorted(d.cdf, rng.random(m), side="right")
    return np.minimum(ids, d.k - 1).tolist()


def observe(
    sched: GroundTruthSchedule, id: int, t: int, rng: np.random.Generator
) -> Evidence:
    """One Bernoulli observation of proposition `id` at tick `t`."""
    return Evidence(1.0 if rng.random() < theta_star(sched, id, t) else 0.0)


@dataclass(frozen=True)
class Commons:
    """Schedule, access skew and batch size of one simulated commons."""

    schedule: GroundTruthSchedule
    access: AccessDistribution
    batch_m: int = 10

    @property
    def k(self) -> int:
        return self.access.k

    def draw(self, rng: np.random.Generator) -> CandidateBatch:
        return draw_candidates(self.access, self.batch_m, rng)

    def feedback(self, id: int, t: int, rng: np.random.Generator) -> Evidence:
        return observe(self.schedule, id, t, rng)

    def theta(self, t: int) -> np.ndarray:
        return theta_vector(self.schedule, self.access.k, t)
