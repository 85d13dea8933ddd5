"""Solver core: weights, Mittag-Leffler series, PECE solve, order harness."""

import math

import numpy as np
import pytest
from mpmath import mp, mpf
from mpmath import gamma as mp_gamma

from foodborne.fracode import (
    FractionalIVP,
    MittagLefflerError,
    NonFiniteStateError,
    OrderEstimate,
    SolverConfig,
    SolverError,
    Trajectory,
    convergence_order,
    corrector_weight,
    mittag_leffler,
    predictor_weight,
    solve,
)


def ml_reference(alpha, z, terms=300, dps=50):
    """Independent arbitrary-precision series sum of E_alpha(z)."""
    with mp.workdps(dps):
        total = mpf(0)
        for k in range(terms):
            total += mpf(z) ** k / mp_gamma(mpf(alpha) * k + 1)
        return float(total)


def decay_ivp(alpha, dim=1, t_end=1.0):
    y0 = np.ones(dim)
    return FractionalIVP(alpha=alpha, t0=0.0, t_end=t_end, y0=y0,
                         rhs=lambda t, y: -y)


# ---------------------------------------------------------------- weights

def test_predictor_weight_examples():
    assert predictor_weight(0, 0, 0.5) == 1.0
    for j in range(6):
        assert predictor_weight(5, j, 1.0) == 1.0
    # direct evaluation of (2)^0.5 - 1
    assert predictor_weight(1, 0, 0.5) == pytest.approx(0.41421356237309515,
                                                        rel=1e-12)


def test_corrector_weight_examples():
    assert corrector_weight(3, 4, 0.7) == 1.0          # j = n+1 branch
    assert corrector_weight(3, 0, 1.0) == 1.0          # n^2 - (n-1)(n+1)
    assert corrector_weight(3, 2, 1.0) == 2.0          # (m+2)^2 + m^2 - 2(m+1)^2


def test_alpha_one_collapse_sequences():
    for n in (0, 1, 5, 50):
        seq = [corrector_weight(n, j, 1.0) for j in range(n + 2)]
        assert seq == [1.0] + [2.0] * n + [1.0]
        assert all(predictor_weight(n, j, 1.0) == 1.0 for j in range(n + 1))


def test_weight_domain_errors():
    with pytest.raises(ValueError):
        predictor_weight(3, 4, 0.5)
    with pytest.raises(ValueError):
        predictor_weight(3, -1, 0.5)
    with pytest.raises(ValueError):
        predictor_weight(3, 1, 0.0)
    with pytest.raises(ValueError):
        corrector_weight(3, 5, 0.5)
    with pytest.raises(ValueError):
        corrector_weight(3, 1, 1.5)


@pytest.mark.parametrize("alpha", np.arange(0.05, 1.0001, 0.05).tolist())
def test_weight_positivity_up_to_10000(alpha):
    n = np.arange(10_001, dtype=float)
    b = (n + 1.0) ** alpha - n ** alpha
    d0 = n ** (alpha + 1.0) - (n - alpha) * (n + 1.0) ** alpha
    m = np.arange(10_000, dtype=float)
    c = (m + 2.0) ** (alpha + 1.0) + m ** (alpha + 1.0) \
        - 2.0 * (m + 1.0) ** (alpha + 1.0)
    assert np.all(b > 0)
    assert np.all(d0 > 0)
    assert np.all(c > 0)


def test_vectorized_weights_match_scalar_ops():
    alpha = 0.65
    for n in (0, 1, 7, 42):
        for j in range(n + 1):
            b = (n - j + 1.0) ** alpha - (n - j) ** alpha
            assert b == predictor_weight(n, j, alpha)
        for j in range(n + 2):
            assert corrector_weight(n, j, alpha) > 0


# ---------------------------------------------------------- Mittag-Leffler

def test_ml_trivial_values():
    assert mittag_leffler(0.7, 0.0) == 1.0
    assert mittag_leffler(1.0, -1.0) == pytest.approx(math.exp(-1.0), abs=1e-10)
    assert mittag_leffler(1.0, 2.5) == pytest.approx(math.exp(2.5), rel=1e-12)


def test_ml_half_at_minus_one_frozen():
    # E_{1/2}(-1) = exp(1) * erfc(1); frozen from a 50-digit series sum
    assert mittag_leffler(0.5, -1.0) == pytest.approx(0.4275835761558070,
                                                      rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0])
@pytest.mark.parametrize("z", [-1.5, -1.0, -0.25, 0.5, 2.0])
def test_ml_against_independent_series(alpha, z):
    # Well-conditioned region: the double series tracks the 50-digit sum.
    assert mittag_leffler(alpha, z) == pytest.approx(
        ml_reference(alpha, z), rel=1e-11, abs=1e-13)


def test_ml_cancellation_region_degrades_gracefully():
    # At z = -5 the alternating terms peak near 2e8, so roughly eight of
    # the sixteen digits cancel away; the result is still in the right
    # place, just not at full precision.
    assert mittag_leffler(0.5, -5.0) == pytest.approx(
        ml_reference(0.5, -5.0, terms=600), rel=1e-3)


def test_ml_domain_errors():
    with pytest.raises(ValueError):
        mittag_leffler(0.0, 1.0)
    with pytest.raises(ValueError):
        mittag_leffler(1.5, 1.0)
    with pytest.raises(ValueError):
        mittag_leffler(0.5, 51.0)


def test_ml_nonconvergence_is_distinct_error():
    # At alpha = 0.05 the terms of E_alpha(50) overflow doubles long before
    # the gamma factor wins; must surface as the dedicated error type.
    with pytest.raises(MittagLefflerError):
        mittag_leffler(0.05, 50.0)


# ------------------------------------------------------------------ solve

def test_zero_rhs_keeps_initial_state_exactly():
    ivp = FractionalIVP(alpha=0.6, t0=0.0, t_end=3.0,
                        y0=np.array([2.0, -1.5, 0.0]),
                        rhs=lambda t, y: np.zeros_like(y))
    traj = solve(ivp, SolverConfig(step_count=40))
    assert np.all(traj.states == traj.states[0])
    assert np.array_equal(traj.states[0], ivp.y0)


def test_classical_exponential_decay():
    traj = solve(decay_ivp(1.0), SolverConfig(step_count=1000))
    assert traj.states[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-5)


def test_fractional_decay_matches_ml_oracle():
    # D^0.8 y = -y  =>  y(t) = E_0.8(-t^0.8)
    traj = solve(decay_ivp(0.8), SolverConfig(step_count=400))
    ref = ml_reference(0.8, -1.0)
    assert traj.states[-1, 0] == pytest.approx(ref, rel=1e-4)


@pytest.mark.parametrize("alpha", [0.5, 0.75, 0.9])
def test_linear_oracle_agreement(alpha):
    traj = solve(decay_ivp(alpha), SolverConfig(step_count=400))
    ref = np.array([mittag_leffler(alpha, -(t ** alpha)) for t in traj.times])
    rel = np.max(np.abs(traj.states[:, 0] - ref) / np.abs(ref))
    assert rel < 1e-2


@pytest.mark.parametrize("alpha", [0.5, 1.0])
def test_first_step_consistency(alpha):
    M = 200
    traj = solve(decay_ivp(alpha), SolverConfig(step_count=M))
    h = 1.0 / M
    # |f| <= 1 along the decay, so C = 2 sup|f| / Gamma(alpha+1)
    bound = 2.0 / math.gamma(alpha + 1.0) * h ** alpha
    assert abs(traj.states[1, 0] - traj.states[0, 0]) <= bound


def test_solve_is_deterministic_bitwise():
    ivp = decay_ivp(0.7, dim=3, t_end=2.0)
    a = solve(ivp, SolverConfig(step_count=150))
    b = solve(ivp, SolverConfig(step_count=150))
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.times, b.times)


def test_trajectory_grid_and_manifest():
    traj = solve(decay_ivp(0.9, t_end=2.0), SolverConfig(step_count=10))
    assert traj.times.shape == (11,)
    assert traj.states[0, 0] == 1.0
    assert np.all(np.diff(traj.times) > 0)
    assert traj.manifest["step_count"] == 10
    assert traj.manifest["alpha"] == 0.9


def test_rhs_failure_carries_step_index():
    def bad_rhs(t, y):
        if t > 0.5:
            raise RuntimeError("boom")
        return -y

    ivp = FractionalIVP(alpha=1.0, t0=0.0, t_end=1.0, y0=np.array([1.0]),
                        rhs=bad_rhs)
    with pytest.raises(SolverError) as excinfo:
        solve(ivp, SolverConfig(step_count=10))
    assert excinfo.value.step is not None
    assert "boom" in str(excinfo.value)


def test_rhs_wrong_shape_rejected():
    ivp = FractionalIVP(alpha=1.0, t0=0.0, t_end=1.0, y0=np.array([1.0, 1.0]),
                        rhs=lambda t, y: np.zeros(3))
    with pytest.raises(SolverError):
        solve(ivp, SolverConfig(step_count=4))


def test_nonfinite_state_aborts_with_step():
    # y' = y^2 from y(0) = 1 blows up at t = 1
    ivp = FractionalIVP(alpha=1.0, t0=0.0, t_end=2.0, y0=np.array([1.0]),
                        rhs=lambda t, y: y * y)
    with pytest.raises(NonFiniteStateError) as excinfo:
        solve(ivp, SolverConfig(step_count=40))
    assert excinfo.value.step is not None


def test_ivp_and_config_validation():
    with pytest.raises(ValueError):
        FractionalIVP(alpha=0.0, t0=0.0, t_end=1.0, y0=np.array([1.0]),
                      rhs=lambda t, y: -y)
    with pytest.raises(ValueError):
        FractionalIVP(alpha=1.2, t0=0.0, t_end=1.0, y0=np.array([1.0]),
                      rhs=lambda t, y: -y)
    with pytest.raises(ValueError):
        FractionalIVP(alpha=0.5, t0=1.0, t_end=1.0, y0=np.array([1.0]),
                      rhs=lambda t, y: -y)
    with pytest.raises(ValueError):
        SolverConfig(step_count=0)


def test_trajectory_rejects_non_uniform_grid():
    with pytest.raises(ValueError):
        Trajectory(times=np.array([0.0, 0.1, 0.3]),
                   states=np.zeros((3, 1)), alpha=1.0)


# ------------------------------------------------------- convergence order

def test_convergence_order_classical_is_two():
    est = convergence_order(decay_ivp(1.0), lambda t: np.array([math.exp(-t)]),
                            [50, 100, 200, 400])
    assert not est.degenerate
    assert 1.7 <= est.slope <= 2.3


@pytest.mark.parametrize("alpha,floor", [(0.5, 1.2), (0.75, 1.45), (0.9, 1.6)])
def test_convergence_order_fractional(alpha, floor):
    ref = lambda t: np.array([mittag_leffler(alpha, -(t ** alpha))])
    est = convergence_order(decay_ivp(alpha), ref, [50, 100, 200, 400])
    assert not est.degenerate
    assert est.slope >= floor


def test_convergence_order_degenerate_constant_problem():
    ivp = FractionalIVP(alpha=0.5, t0=0.0, t_end=1.0, y0=np.array([4.0]),
                        rhs=lambda t, y: np.zeros_like(y))
    est = convergence_order(ivp, lambda t: np.array([4.0]), [50, 100, 200])
    assert est.degenerate
    assert math.isnan(est.slope)
    assert all(e <= 1e-12 for e in est.errors)


def test_convergence_order_validates_step_counts():
    ivp = decay_ivp(1.0)
    ref = lambda t: np.array([math.exp(-t)])
    with pytest.raises(ValueError):
        convergence_order(ivp, ref, [100, 200])
    with pytest.raises(ValueError):
        convergence_order(ivp, ref, [100, 200, 300])
