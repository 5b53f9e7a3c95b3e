import math
import pickle

import numpy as np
import pytest

from epistemic_sim.belief import COUNT_FLOOR, BetaBelief, Evidence, n_eq, new_prior
from epistemic_sim.exceptions import (
    InvalidBeliefError,
    UndefinedEquilibriumError,
    UndefinedMomentsError,
)
from epistemic_sim.tests.oracle import (
    alternating_evidence,
    expected_variance_reduction,
    n_eff_recurrence,
)


def test_new_prior():
    b = new_prior(1, 1, 0.99)
    assert (b.alpha, b.beta, b.gamma) == (1.0, 1.0, 0.99)
    assert b.mean == 0.5
    assert b.n_eff == 2.0


@pytest.mark.parametrize(
    ("alpha0", "beta0", "gamma"),
    [
        (0, 1, 0.9),
        (1, -1, 0.9),
        (math.inf, 1, 0.9),
        (1, 1, 0.0),
        (1, 1, 1.5),
        (1, 1, math.nan),
    ],
)
def test_new_prior_rejects(alpha0, beta0, gamma):
    with pytest.raises(InvalidBeliefError):
        new_prior(alpha0, beta0, gamma)


def test_invalid_belief_is_value_error():
    with pytest.raises(ValueError, match="gamma"):
        new_prior(1, 1, 2.0)


@pytest.mark.parametrize(
    ("start", "y", "expected"),
    [
        ((1, 1, 1.0), 1, (2.0, 1.0)),
        ((1, 1, 0.5), 0, (0.5, 1.5)),
        ((1, 1, 1.0), 0.3, (1.3, 1.7)),
        ((3, 5, 0.9), Evidence(1.0), (3.7, 4.5)),
    ],
)
def test_update(start, y, expected):
    result = BetaBelief(*start).update(y)
    assert (result.alpha, result.beta) == pytest.approx(expected, rel=1e-15)
    assert result.gamma == start[2]


@pytest.mark.parametrize("y", [-0.1, 1.1, math.nan])
def test_update_rejects_evidence(y):
    with pytest.raises(InvalidBeliefError, match="evidence"):
        new_prior().update(y)


def test_update_is_pure():
    b = new_prior(2, 3, 0.9)
    b.update(1.0)
    assert (b.alpha, b.beta) == (2.0, 3.0)


def test_update_equals_decay_then_add():
    b = BetaBelief(4.0, 7.0, 0.97)
    decayed = b.decay(1)
    updated = b.update(0.25)
    assert updated.alpha == pytest.approx(decayed.alpha + 0.25, rel=1e-15)
    assert updated.beta == pytest.approx(decayed.beta + 0.75, rel=1e-15)


@pytest.mark.parametrize("gamma", [0.5, 0.9, 0.999])
def test_decay_composes(gamma):
    b = BetaBelief(3.0, 1.5, gamma)
    assert b.decay(7).decay(5).alpha == pytest.approx(b.decay(12).alpha, rel=1e-12)
    assert b.decay(7).decay(5).beta == pytest.approx(b.decay(12).beta, rel=1e-12)


@pytest.mark.parametrize("dt", [1, 10, 1000])
def test_decay_keeps_mean(dt):
    b = BetaBelief(3.0, 9.0, 0.95)
    assert b.decay(dt).mean == pytest.approx(b.mean, rel=1e-12)


def test_decay_identity_cases():
    b = BetaBelief(3.0, 9.0, 0.95)
    assert b.decay(0) is b
    static = BetaBelief(3.0, 9.0, 1.0)
    assert static.decay(10 ** 6) == static


def test_decay_rejects_negative():
    with pytest.raises(InvalidBeliefError, match="negative"):
        new_prior(gamma=0.9).decay(-1)


def test_decay_rejects_fractional():
    with pytest.raises(TypeError):
        new_prior(gamma=0.9).decay(1.5)


def test_decay_clamps_at_floor():
    b = BetaBelief(1.0, 0.0, 0.5).decay(5000)
    assert b.alpha == COUNT_FLOOR
    assert b.beta == 0.0
    assert b.mean == 1.0


def test_decay_example():
    b = BetaBelief(10.0, 10.0, 0.9).decay(2)
    assert (b.alpha, b.beta) == pytest.approx((8.1, 8.1), rel=1e-12)


@pytest.mark.parametrize(
    ("alpha", "beta", "mean", "variance"),
    [
        (1, 1, 0.5, 1 / 12),
        (2, 8, 0.2, 16 / 1100),
        (5, 5, 0.5, 25 / 1100),
    ],
)
def test_moments(alpha, beta, mean, variance):
    b = BetaBelief(alpha, beta, 1.0)
    assert b.mean == pytest.approx(mean)
    assert b.variance == pytest.approx(variance)


def test_moments_undefined_at_zero_counts():
    b = BetaBelief(0.0, 0.0, 1.0)
    with pytest.raises(UndefinedMomentsError):
        b.mean
    with pytest.raises(UndefinedMomentsError):
        b.variance


@pytest.mark.parametrize("n", [2, 5, 10, 100])
def test_variance_peaks_at_even_split(n):
    alphas = np.linspace(0.0, n, 4001)
    variances = [BetaBelief(a, n - a, 1.0).variance for a in alphas]
    best = alphas[int(np.argmax(variances))]
    assert best == pytest.approx(n / 2)
    assert BetaBelief(best, n - best, 1.0).mean == pytest.approx(0.5)


@pytest.mark.parametrize(
    ("gamma", "expected"), [(0.999, 1000.0), (0.95, 20.0), (0.5, 2.0), (0.9, 10.0)]
)
def test_n_eq(gamma, expected):
    assert n_eq(gamma) == expected


def test_n_eq_undefined_without_forgetting():
    with pytest.raises(UndefinedEquilibriumError):
        n_eq(1.0)


@pytest.mark.parametrize("n0", [2.0, 50.0, 5000.0])
@pytest.mark.parametrize("gamma", [0.5, 0.9, 0.95, 0.999])
def test_n_eff_reaches_fixed_point(gamma, n0):
    target = n_eq(gamma)
    steps = math.ceil(math.log(1e-9) / math.log(gamma))
    b = BetaBelief(n0 / 2, n0 / 2, gamma)
    for _ in range(steps):
        b = b.update(1.0)
    assert abs(b.n_eff - target) <= 1e-9 * abs(n0 - target) + 1e-9 * target


def test_n_eff_follows_recurrence():
    b = new_prior(gamma=0.95)
    recurrence = n_eff_recurrence(b.n_eff, 0.95)
    for y in [1.0, 0.0, 0.5, 1.0, 0.0] * 20:
        b = b.update(y)
        assert b.n_eff == pytest.approx(next(recurrence), rel=1e-12)


@pytest.mark.parametrize(
    ("gamma", "ticks", "tolerance"),
    [(0.95, 200, 1e-3), (0.95, 400, 1e-6), (0.999, 20000, 1e-5)],
)
def test_every_tick_belief_converges(gamma, ticks, tolerance):
    b = new_prior(gamma=gamma)
    for t in range(ticks):
        b = b.update(float(t % 2))
    assert abs(b.n_eff - n_eq(gamma)) < tolerance


def test_variance_floor_under_alternating_evidence():
    variances = alternating_evidence(0.95, 10000)
    assert variances[-1000:].min() > 0.005


@pytest.mark.parametrize(
    ("belief", "y", "expected"),
    [
        ((1, 1), 1.0, math.log(2)),
        ((1, 1), 0.0, math.log(2)),
        ((9, 1), 0.0, math.log(10)),
        ((9, 1), 1.0, -math.log(0.9)),
        ((3, 1), 0.5, -(0.5 * math.log(0.75) + 0.5 * math.log(0.25))),
    ],
)
def test_surprisal(belief, y, expected):
    assert BetaBelief(*belief, 0.9).surprisal(y) == pytest.approx(expected)


def test_surprisal_of_certain_belief():
    b = BetaBelief(1.0, 0.0, 1.0)
    assert b.surprisal(1.0) == 0.0
    assert b.surprisal(0.0) == math.inf


@pytest.mark.parametrize(
    ("alpha", "beta", "n_reset"), [(80, 20, 2), (3, 9, 5), (1, 1, 10)]
)
def test_reset_plasticity(alpha, beta, n_reset):
    b = BetaBelief(alpha, beta, 0.99)
    reset = b.reset_plasticity(n_reset)
    assert reset.n_eff == pytest.approx(n_reset)
    assert reset.mean == pytest.approx(b.mean)
    assert reset.gamma == b.gamma


@pytest.mark.parametrize("n_reset", [0.0, -1.0, math.inf])
def test_reset_plasticity_rejects(n_reset):
    with pytest.raises(InvalidBeliefError):
        new_prior().reset_plasticity(n_reset)


def test_expected_variance_reduction_static():
    b = BetaBelief(3.0, 5.0, 1.0)
    assert expected_variance_reduction(b) == pytest.approx(b.variance / (b.n_eff + 1))


def test_expected_variance_reduction_peaks_at_even_split():
    reductions = [
        expected_variance_reduction(BetaBelief(a, 10.0 - a, 1.0)) for a in range(1, 10)
    ]
    assert int(np.argmax(reductions)) + 1 == 5


@pytest.mark.parametrize("y", [0.0, 0.3, 1.0])
def test_absorb_adds_without_forgetting(y):
    b = BetaBelief(2.0, 3.0, 0.9)
    absorbed = b.absorb(y)
    assert (absorbed.alpha, absorbed.beta) == pytest.approx((2.0 + y, 4.0 - y))
    assert absorbed.gamma == 0.9
    got = b.decay(1).absorb(y)
    assert (got.alpha, got.beta) == pytest.approx((b.update(y).alpha, b.update(y).beta))


def test_belief_is_hashable_and_picklable():
    b = BetaBelief(2.0, 3.0, 0.9)
    assert {b: 1}[BetaBelief(2.0, 3.0, 0.9)] == 1
    assert pickle.loads(pickle.dumps(b)) == b
