"""Beta-Bernoulli beliefs with a forgetting factor.

A belief about one proposition is a pair of decayed pseudo-counts
``(alpha, beta)`` and a per-tick forgetting factor ``gamma``. Every operation
returns a new value; nothing here holds shared state.
"""

import math
import numbers
import operator
from dataclasses import dataclass
from fractions import Fraction

from multipledispatch import Dispatcher

from .exceptions import (
    InvalidBeliefError,
    UndefinedEquilibriumError,
    UndefinedMomentsError,
)

# Decayed counts are clamped here instead of denormalising towards zero.
COUNT_FLOOR = 1e-300


def _check_gamma(gamma: float) -> float:
    if not math.isfinite(gamma) or not 0.0 < gamma <= 1.0:
        raise InvalidBeliefError(
            f"Got unexpected value for gamma = {gamma!r}. Expected 0 < gamma <= 1."
        )
    return float(gamma)


@dataclass(frozen=True)
class Evidence:
    """Degree of support ``y`` in ``[0, 1]`` carried by one observation.

    ``y = 1`` fully supports the proposition, ``y = 0`` fully contradicts it.
    Values in between are soft evidence.
    """

    y: float

    def __post_init__(self):
        if not math.isfinite(self.y) or not 0.0 <= self.y <= 1.0:
            raise InvalidBeliefError(
                f"Got unexpected value for evidence y = {self.y!r}. "
                "Expected 0 <= y <= 1."
            )


as_evidence = Dispatcher("as_evidence")


@as_evidence.register(Evidence)
def as_evidence_identity(evidence):
    return evidence


@as_evidence.register(numbers.Real)
def as_evidence_number(y):
    return Evidence(float(y))


@dataclass(frozen=True)
class BetaBelief:
    """Decayed pseudo-counts for one proposition.

    Parameters
    ----------
    alpha : float
        Positive pseudo-evidence count.
    beta : float
        Negative pseudo-evidence count.
    gamma : float
        Forgetting factor in ``(0, 1]``, fixed for the lifetime of the belief.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidBeliefError(
                    f"Got unexpected value for {name} = {value!r}. "
                    "Expected a finite, nonnegative count."
                )
        _check_gamma(self.gamma)

    def update(self, evidence) -> "BetaBelief":
        """Decay by one tick and add one observation.

        ``alpha' = gamma * alpha + y`` and ``beta' = gamma * beta + (1 - y)``.

        Parameters
        ----------
        evidence : Evidence or float

        Returns
        -------
        BetaBelief
        """
        y = as_evidence(evidence).y
        return BetaBelief(
            self.gamma * self.alpha + y, self.gamma * self.beta + (1.0 - y), self.gamma
        )

    def absorb(self, evidence) -> "BetaBelief":
        """Add one observation to a belief already decayed through its tick.

        ``update(y) == decay(1).absorb(y)``.
        """
        y = as_evidence(evidence).y
        return BetaBelief(self.alpha + y, self.beta + (1.0 - y), self.gamma)

    def decay(self, dt: int) -> "BetaBelief":
        """Apply ``dt`` ticks of forgetting with no observation.

        Closed form of ``dt`` applications of ``N' = gamma * N``, so a stored
        belief can be brought up to date lazily when it is next read.

        Parameters
        ----------
        dt : int
            Number of elapsed ticks, ``dt >= 0``.

        Returns
        -------
        BetaBelief
        """
        dt = operator.index(dt)
        if dt < 0:
            raise InvalidBeliefError(f"Cannot decay by a negative interval dt = {dt}")
        if dt == 0 or self.gamma == 1.0:
            return self
        factor = self.gamma ** dt
        return BetaBelief(
            _scale(self.alpha, factor), _scale(self.beta, factor), self.gamma
        )

    @property
    def n_eff(self) -> float:
        """Effective sample size ``alpha + beta``."""
        return self.alpha + self.beta

    @property
    def mean(self) -> float:
        """Expected success rate ``alpha / (alpha + beta)``."""
        total = self.n_eff
        if total <= 0:
            raise UndefinedMomentsError(
                "Moments are undefined for a belief with alpha + beta = 0"
            )
        return self.alpha / total

    @property
    def variance(self) -> float:
        """Epistemic uncertainty of the belief.

        ``alpha * beta / ((alpha + beta) ** 2 * (alpha + beta + 1))``
        """
        total = self.n_eff
        if total <= 0:
            raise UndefinedMomentsError(
                "Moments are undefined for a belief with alpha + beta = 0"
            )
        return self.alpha * self.beta / (total * total * (total + 1.0))

    def surprisal(self, evidence) -> float:
        """Predictive log-loss of `evidence` under this belief, in nats.

        Parameters
        ----------
        evidence : Evidence or float

        Returns
        -------
        float
            ``-(y * ln(mean) + (1 - y) * ln(1 - mean))``
        """
        y = as_evidence(evidence).y
        mean = self.mean
        loss = 0.0
        if y > 0:
            if mean == 0.0:
                return math.inf
            loss -= y * math.log(mean)
        if y < 1:
            if mean == 1.0:
                return math.inf
            loss -= (1.0 - y) * math.log1p(-mean)
        return loss

    def reset_plasticity(self, n_reset: float) -> "BetaBelief":
        """Rescale the counts to ``n_reset`` total while keeping the mean.

        Parameters
        ----------
        n_reset : float
            Target effective sample size, ``n_reset > 0``.

        Returns
        -------
        BetaBelief
        """
        if not math.isfinite(n_reset) or n_reset <= 0:
            raise InvalidBeliefError(
                f"Got unexpected value for n_reset = {n_reset!r}. Expected n_reset > 0."
            )
        alpha = self.mean * n_reset
        return BetaBelief(alpha, max(n_reset - alpha, 0.0), self.gamma)


def _scale(count: float, factor: float) -> float:
    if count == 0.0:
        return 0.0
    scaled = count * factor
    assert scaled >= 0.0, scaled
    return scaled if scaled >= COUNT_FLOOR else COUNT_FLOOR


def new_prior(
    alpha0: float = 1.0, beta0: float = 1.0, gamma: float = 1.0
) -> BetaBelief:
    """Create the belief held before any evidence is seen.

    Parameters
    ----------
    alpha0, beta0 : float
        Strictly positive prior pseudo-counts.
    gamma : float
        Forgetting factor in ``(0, 1]``; ``1`` gives a static agent.

    Returns
    -------
    BetaBelief

    Examples
    --------
    >>> b = new_prior(1, 1, 0.99)
    >>> b.mean, b.n_eff
    (0.5, 2.0)
    """
    for name, value in (("alpha0", alpha0), ("beta0", beta0)):
        if not math.isfinite(value) or value <= 0:
            raise InvalidBeliefError(
                f"Got unexpected value for {name} = {value!r}. "
                "Prior counts must be finite and strictly positive."
            )
    return BetaBelief(float(alpha0), float(beta0), _check_gamma(gamma))


def n_eq(gamma: float) -> float:
    """Equilibrium effective sample size ``1 / (1 - gamma)``.

    `gamma` is read by its shortest decimal representation, so
    ``n_eq(0.999)`` is exactly ``1000.0`` rather than ``999.9999999999991``.

    Parameters
    ----------
    gamma : float
        Forgetting factor in ``(0, 1)``.

    Returns
    -------
    float

    Examples
    --------
    >>> n_eq(0.95)
    20.0
    """
    gamma = _check_gamma(gamma)
    if gamma == 1.0:
        raise UndefinedEquilibriumError(
            "A belief with gamma = 1 never forgets and has no finite equilibrium"
        )
    return float(1 / (1 - Fraction(repr(gamma))))
