"""Query-selection policies.

A strategy picks which proposition of the offered candidate batch the agent
engages. ``Random`` samples the batch uniformly, ``Uncertainty`` takes the
candidate of maximal belief variance, and ``WithSurprisalReset`` wraps either
one and restores plasticity after a badly mispredicted observation.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from multipledispatch import Dispatcher

from .belief import BetaBelief, as_evidence
from .exceptions import ConfigError, EmptyCandidatesError

logger = logging.getLogger(__name__)

DEFAULT_TIE_EPSILON = 1e-12
DEFAULT_TAU = 2.5
DEFAULT_N_RESET = 2.0


class StrategyKind:
    """Base class of the query strategies."""


@dataclass(frozen=True)
class Random(StrategyKind):
    pass


@dataclass(frozen=True)
class Uncertainty(StrategyKind):
    """Argmax-variance selection.

    Candidates whose variance lies within `tie_epsilon` of the maximum are
    tied and one of them is drawn uniformly.
    """

    tie_epsilon: float = DEFAULT_TIE_EPSILON

    def __post_init__(self):
        if not math.isfinite(self.tie_epsilon) or self.tie_epsilon < 0:
            raise ConfigError(
                f"must be >= 0, got {self.tie_epsilon!r}", field="tie_epsilon"
            )


@dataclass(frozen=True)
class WithSurprisalReset(StrategyKind):
    """Wrap `inner` and reset beliefs whose surprisal exceeds `tau` nats."""

    inner: StrategyKind
    tau: float = DEFAULT_TAU
    n_reset: float = DEFAULT_N_RESET

    def __post_init__(self):
        if isinstance(self.inner, WithSurprisalReset) or not isinstance(
            self.inner, StrategyKind
        ):
            raise ConfigError(
                f"must be a plain strategy, got {self.inner!r}", field="strategy"
            )
        if not math.isfinite(self.tau) or self.tau <= 0:
            raise ConfigError(f"must be positive, got {self.tau!r}", field="tau")
        if not math.isfinite(self.n_reset) or self.n_reset <= 0:
            raise ConfigError(
                f"must be positive, got {self.n_reset!r}", field="n_reset"
            )


@dataclass(frozen=True)
class ResetEvent:
    id: int
    t: int
    surprisal: float


_select = Dispatcher("select")


def select(kind: StrategyKind, candidates, store, now: int, rng: np.random.Generator):
    """Choose the proposition to engage from `candidates`.

    Parameters
    ----------
    kind : StrategyKind
    candidates : Sequence[int]
        Nonempty candidate batch; duplicates are allowed.
    store : EpistemicStore
        The agent's beliefs. ``Uncertainty`` reads them through
        :meth:`EpistemicStore.get_or_init`, so candidates not yet tracked
        enter the store at the prior.
    now : int
    rng : numpy.random.Generator
        Source of every random draw.

    Returns
    -------
    int
    """
    candidates = [store.check_id(id) for id in candidates]
    if not candidates:
        raise EmptyCandidatesError("Cannot select from an empty candidate batch")
    return _select(kind, candidates, store, now, rng)


@_select.register(Random, list, object, object, object)
def select_random(kind, candidates, store, now, rng):
    return candidates[int(rng.integers(len(candidates)))]


@_select.register(Uncertainty, list, object, object, object)
def select_uncertainty(kind, candidates, store, now, rng):
    variances = np.array([store.get_or_init(id, now).variance for id in candidates])
    tied = np.flatnonzero(variances >= variances.max() - kind.tie_epsilon)
    if len(tied) == 1:
        return candidates[int(tied[0])]
    return candidates[int(tied[rng.integers(len(tied))])]


@_select.register(WithSurprisalReset, list, object, object, object)
def select_wrapped(kind, candidates, store, now, rng):
    return _select(kind.inner, candidates, store, now, rng)


after_observe = Dispatcher(
    "after_observe",
    doc="""Post-observation hook of a strategy.

Parameters
----------
kind : StrategyKind
id : int
evidence : Evidence or float
store : EpistemicStore
    Already holds the updated belief for `id`.
now : int
before : BetaBelief
    The belief for `id` as it stood just before the observation.

Returns
-------
Optional[ResetEvent]
""",
)


@after_observe.register(StrategyKind, object, object, object, object, BetaBelief)
def after_observe_noop(kind, id, evidence, store, now, before):
    return None


@after_observe.register(WithSurprisalReset, object, object, object, object, BetaBelief)
def after_observe_reset(kind, id, evidence, store, now, before) -> Optional[ResetEvent]:
    surprisal = before.surprisal(as_evidence(evidence))
    if surprisal <= kind.tau:
        return None
    updated = store.get_or_init(id, now)
    store.replace(id, updated.reset_plasticity(kind.n_reset), now)
    logger.debug(
        "t=%d reset proposition %d: surprisal %.4f > tau %g",
        now,
        id,
        surprisal,
        kind.tau,
    )
    return ResetEvent(id, now, surprisal)


strategy_name = Dispatcher("strategy_name")


@strategy_name.register(Random)
def strategy_name_random(kind):
    return "random"


@strategy_name.register(Uncertainty)
def strategy_name_uncertainty(kind):
    return "uncertainty"


@strategy_name.register(WithSurprisalReset)
def strategy_name_wrapped(kind):
    return f"{strategy_name(kind.inner)}+reset"


def from_name(
    name: str,
    tie_epsilon: float = DEFAULT_TIE_EPSILON,
    tau: float = DEFAULT_TAU,
    n_reset: float = DEFAULT_N_RESET,
) -> StrategyKind:
    """Build a strategy from its config name.

    Parameters
    ----------
    name : str
        ``'random'``, ``'uncertainty'``, ``'random+reset'`` or
        ``'uncertainty+reset'``.

    Returns
    -------
    StrategyKind
    """
    base, _, suffix = name.partition("+")
    if base == "random":
        kind: StrategyKind = Random()
    elif base == "uncertainty":
        kind = Uncertainty(tie_epsilon)
    else:
        raise ConfigError(
            f"Got unexpected value {name!r}. Expected one of 'random', "
            "'uncertainty' or 'uncertainty+reset'.",
            field="strategy",
        )
    if suffix == "reset":
        return WithSurprisalReset(kind, tau, n_reset)
    if suffix:
        raise ConfigError(f"Unknown strategy modifier {suffix!r}", field="strategy")
    return kind
