import numpy as np
import pytest

from spinmetro import (
    DomainError,
    SpinConfig,
    ghz_qfim,
    individual_reference_bounds,
    optimize_sum_variance,
    product_qfim,
    qcrb_simultaneous,
    scan_scaling,
    scan_theta,
)
from spinmetro.state_opt import fit_loglog_slope, golden_section


def optimal_edge_weight(F: int) -> float:
    """Analytic optimum of the three-amplitude family.

    Stationarity of (f11 + f22)/(f11 f22) with f11 = 8uF^2 and
    f22 = 8uF^4(1-2u) reduces to F^2 v^2 + 2v - 1 = 0 for v = 1 - 2u, so
    v = (sqrt(1 + F^2) - 1)/F^2.  Independent of both N and the ensemble.
    """
    v = (np.sqrt(1.0 + F**2) - 1.0) / F**2
    return (1.0 - v) / 2.0


def test_golden_section_quadratic():
    # Locating a quadratic minimum by value comparison alone is noise-limited
    # to about sqrt(eps) in x; the objective itself is machine accurate.
    x, fx, evals = golden_section(lambda x: (x - 1.7) ** 2 + 3.0, 0.0, 4.0, tol=1e-12)
    assert x == pytest.approx(1.7, abs=1e-7)
    assert fx == pytest.approx(3.0, abs=1e-14)
    assert evals > 10


@pytest.mark.parametrize("F", range(1, 6))
def test_three_amplitude_matches_analytic_optimum(F):
    result = optimize_sum_variance(F, 1, "product", "three_amplitude")
    u = result.best_state.populations[-1]
    assert u == pytest.approx(optimal_edge_weight(F), abs=1e-10)


@pytest.mark.parametrize("ensemble", ["product", "ghz"])
def test_three_amplitude_closed_form_delta_p(ensemble):
    # delta_p = 1/(2 sqrt(2 N) |alpha_F| F) for products, one more sqrt(N) for GHZ.
    F, N = 3, 50
    result = optimize_sum_variance(F, N, ensemble, "three_amplitude")
    a_F = abs(result.best_state.amplitudes[-1])
    scale = np.sqrt(2.0 * N) if ensemble == "product" else np.sqrt(2.0) * N
    assert result.bound.delta_p == pytest.approx(1.0 / (2 * scale * a_F * F), rel=1e-10)


@pytest.mark.parametrize("F", range(1, 6))
def test_general_optimizer_discovers_support(F):
    result = optimize_sum_variance(F, 1, "product", "general")
    w = result.best_state.populations
    off_support = w.copy()
    off_support[[0, F, 2 * F]] = 0.0
    assert off_support.sum() <= 1e-8
    assert abs(w[0] - w[-1]) <= 1e-8
    assert w[F] > 0.0  # nonzero reference-mode weight


@pytest.mark.parametrize("F", [1, 3, 5])
def test_general_never_beats_three_amplitude_materially(F):
    general = optimize_sum_variance(F, 1, "product", "general")
    restricted = optimize_sum_variance(F, 1, "product", "three_amplitude")
    # the restricted family is contained in the general one ...
    assert general.objective <= restricted.objective + 1e-10
    # ... and is in fact optimal, so the general search cannot do better.
    assert general.objective >= restricted.objective - 1e-8


def test_optimizer_bitwise_determinism():
    a = optimize_sum_variance(2, 10, "ghz", "general", seed=123)
    b = optimize_sum_variance(2, 10, "ghz", "general", seed=123)
    assert np.array_equal(a.best_state.amplitudes, b.best_state.amplitudes)
    assert a.objective == b.objective
    assert a.iterations == b.iterations


def test_result_bound_consistency():
    for family in ("general", "three_amplitude"):
        result = optimize_sum_variance(2, 7, "product", family)
        cfg = SpinConfig(F=2, N=7)
        recomputed = qcrb_simultaneous(product_qfim(result.best_state, cfg))
        assert result.bound.delta_p == pytest.approx(recomputed.delta_p, abs=1e-12)
        assert result.bound.delta_q == pytest.approx(recomputed.delta_q, abs=1e-12)
        assert result.objective == pytest.approx(recomputed.sum_variance, abs=1e-12)


def test_objective_ratio_ghz_vs_product():
    F, N = 2, 64
    prod = optimize_sum_variance(F, N, "product", "three_amplitude")
    ghz = optimize_sum_variance(F, N, "ghz", "three_amplitude")
    assert ghz.objective / prod.objective == pytest.approx(1.0 / N, rel=1e-10)


def test_optimizer_input_validation():
    with pytest.raises(DomainError):
        optimize_sum_variance(1, 1, "bogus", "general")
    with pytest.raises(DomainError):
        optimize_sum_variance(1, 1, "product", "bogus")


def test_large_spin_warns():
    with pytest.warns(UserWarning):
        optimize_sum_variance(6, 1, "product", "three_amplitude")


def test_scan_theta_minimum_at_equator():
    samples = 181
    rows = scan_theta(2, 10, samples)
    assert rows.shape == (samples, 3)
    step = np.pi / (samples + 1)
    for col in (1, 2):
        theta_min = rows[np.argmin(rows[:, col]), 0]
        assert abs(theta_min - np.pi / 2) <= step + 1e-12


def test_scan_theta_divergence_and_symmetry():
    rows = scan_theta(1, 5, 201)
    # poles concentrate all weight on one sublevel: bounds blow up
    assert rows[0, 1] > 10 * np.min(rows[:, 1])
    assert rows[0, 2] > 10 * np.min(rows[:, 2])
    # m <-> -m relabeling: delta(theta) = delta(pi - theta)
    assert np.allclose(rows[:, 1], rows[::-1, 1], rtol=1e-10)
    assert np.allclose(rows[:, 2], rows[::-1, 2], rtol=1e-10)


def test_scan_theta_guards():
    with pytest.raises(DomainError):
        scan_theta(1, 1, 2)


def test_scan_scaling_slopes():
    n_values = [2**k for k in range(3, 11)]
    ghz = scan_scaling(1, n_values, "ghz", "three_amplitude")
    assert ghz.slope_p == pytest.approx(-1.0, abs=1e-8)
    assert ghz.slope_q == pytest.approx(-1.0, abs=1e-8)
    prod = scan_scaling(1, n_values, "product", "three_amplitude")
    assert prod.slope_p == pytest.approx(-0.5, abs=1e-8)
    assert prod.slope_q == pytest.approx(-0.5, abs=1e-8)


def test_scan_scaling_guards():
    with pytest.raises(DomainError):
        scan_scaling(1, [8, 16, 32], "ghz", "three_amplitude")
    with pytest.raises(DomainError):
        scan_scaling(1, [8, 16, 16, 32], "ghz", "three_amplitude")
    with pytest.raises(DomainError):
        fit_loglog_slope(np.array([1.0, 2.0]), np.array([1.0, 0.5]))


def test_individual_reference_values():
    # After halving the atom number per parameter: delta_p = 1/(NF) exactly,
    # and delta_q = 2/(N F^2) from the direct covariance (see test_qfim for
    # the oracle on the underlying f22).
    for F in (1, 2):
        for N in (8, 64):
            bound = individual_reference_bounds(F, N)
            assert bound.delta_p == pytest.approx(1.0 / (N * F), rel=1e-12)
            assert bound.delta_q == pytest.approx(2.0 / (N * F**2), rel=1e-12)
            assert bound.mode == "individual"


def test_individual_reference_needs_even_n():
    with pytest.raises(DomainError):
        individual_reference_bounds(1, 7)


def test_simultaneous_beats_halved_individual():
    for F in (1, 2):
        for N in (8, 32, 128):
            sim = optimize_sum_variance(F, N, "ghz", "three_amplitude").bound
            assert sim.delta_p <= 1.0 / (N * F)
            assert sim.delta_q <= np.sqrt(2.0) / (N * F**2)
