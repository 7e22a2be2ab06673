import numpy as np
import pytest

from conftest import random_pair_state

from spinmetro import (
    DomainError,
    Fock3State,
    NumericalError,
    PairState,
    SpinConfig,
    ValidationError,
    analytic_output_state,
    apply_beam_splitter,
    apply_phase_evolution,
    brute_force_qfim,
    embed_pair_state,
    evolve_smd,
    ground_state_and_gap,
    optimal_prepared_state,
    pair_qcrb,
    qcrb_simultaneous,
    qpt_hamiltonian,
    smd_hamiltonian,
)
from spinmetro.fock3 import (
    beam_splitter_unitary,
    fock_basis,
    fock_dimension,
    fock_index,
    project_pair_state,
    ramp_qpt,
    splitting_coefficient,
    to_tensor_state,
)


def polar_state(N: int) -> PairState:
    alphas = np.zeros(N // 2 + 1, dtype=complex)
    alphas[0] = 1.0
    return PairState(N, alphas)


# ---------------------------------------------------------------- basis


def test_fock_basis_order_and_dimension():
    basis = fock_basis(2)
    assert basis == ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
    for N in (1, 2, 5, 10):
        assert len(fock_basis(N)) == fock_dimension(N) == (N + 1) * (N + 2) // 2


def test_pair_state_guards():
    with pytest.raises(DomainError):
        PairState(3, np.array([1.0, 0.0]))
    with pytest.raises(ValidationError):
        PairState(2, np.array([1.0, 1.0]))


# ----------------------------------------------------------- hamiltonians


def test_smd_matrix_elements():
    h = smd_hamiltonian(2, 0.7)
    assert np.allclose(h.diag, 0.0)
    assert h.offdiag[0] == pytest.approx(0.7 * np.sqrt(2.0), rel=1e-15)
    assert np.allclose(smd_hamiltonian(6, 0.0).dense(), 0.0)


def test_smd_hermitian():
    dense = smd_hamiltonian(8, 1.3).dense()
    assert np.array_equal(dense, dense.T)


def test_smd_rejects_odd_n():
    with pytest.raises(DomainError):
        smd_hamiltonian(5, 1.0)


def test_smd_spectrum_symmetric_about_zero():
    # alpha_k -> (-1)^k alpha_k flips the off-diagonal-only matrix.
    from scipy.linalg import eigh_tridiagonal

    h = smd_hamiltonian(12, 1.0)
    vals = eigh_tridiagonal(h.diag, h.offdiag, eigvals_only=True)
    assert np.allclose(vals, -vals[::-1], atol=1e-10)


def test_qpt_matrix_elements():
    N, c2, eps = 4, -1.0, 0.3
    h = qpt_hamiltonian(N, c2, eps)
    k = np.arange(3)
    expected_diag = (c2 / (2 * N)) * (2 * (N - 2 * k) - 1) * (2 * k) - eps * (N - 2 * k)
    assert np.allclose(h.diag, expected_diag)
    assert np.allclose(h.offdiag, (c2 / N) * smd_hamiltonian(N, 1.0).offdiag)
    dense = h.dense()
    assert np.array_equal(dense, dense.T)


def test_qpt_rejects_zero_mixing():
    with pytest.raises(DomainError):
        qpt_hamiltonian(4, 0.0, 1.0)


@pytest.mark.parametrize("N", [10, 40])
def test_qpt_phase_limits(N):
    polar, _ = ground_state_and_gap(qpt_hamiltonian(N, -1.0, 10.0))
    assert abs(polar.alphas[0]) ** 2 >= 0.99
    twin, _ = ground_state_and_gap(qpt_hamiltonian(N, -1.0, -10.0))
    assert abs(twin.alphas[-1]) ** 2 >= 0.99


def test_qpt_gap_minimum_inside_transition_region():
    eps_grid = np.linspace(-4.0, 4.0, 401)
    gaps = [ground_state_and_gap(qpt_hamiltonian(20, -1.0, e))[1] for e in eps_grid]
    e_min = eps_grid[int(np.argmin(gaps))]
    assert -2.0 < e_min < 2.0
    assert min(gaps) >= 0.0


def test_qpt_ground_state_sweep_continuity():
    prev = None
    for eps in np.arange(-4.0, 4.0001, 0.01):
        state, _ = ground_state_and_gap(qpt_hamiltonian(40, -1.0, eps))
        if prev is not None:
            assert abs(np.vdot(prev.alphas, state.alphas)) >= 0.99
        prev = state


def test_ground_state_phase_convention():
    state, gap = ground_state_and_gap(qpt_hamiltonian(10, -1.0, 0.5))
    biggest = state.alphas[np.argmax(np.abs(state.alphas))]
    assert biggest.real > 0.0 and abs(biggest.imag) < 1e-15
    assert gap > 0.0


# -------------------------------------------------------------- dynamics


def test_evolve_smd_identity_at_zero():
    state = evolve_smd(6, 1.0, 0.0)
    assert state.alphas[0] == pytest.approx(1.0)
    assert np.allclose(state.alphas[1:], 0.0)


def test_evolve_smd_norm_preserved():
    for t in (0.1, 1.0, 4.7):
        state = evolve_smd(10, 1.0, t)
        assert abs(np.sum(np.abs(state.alphas) ** 2) - 1.0) < 1e-10


def test_evolve_smd_two_level_closed_form():
    # N=2 is a two-level Rabi problem: alpha_0 = cos(sqrt(2) t),
    # alpha_1 = -i sin(sqrt(2) t) at kappa = 1.
    for t in np.linspace(0.0, 5.0, 100):
        state = evolve_smd(2, 1.0, t)
        assert abs(state.alphas[0] - np.cos(np.sqrt(2) * t)) < 1e-10
        assert abs(state.alphas[1] + 1j * np.sin(np.sqrt(2) * t)) < 1e-10


def test_evolve_smd_rejects_negative_time():
    with pytest.raises(DomainError):
        evolve_smd(4, 1.0, -0.5)


# -------------------------------------------------------------- pair QCRB


def test_pair_qcrb_polar_uninformative():
    bound = pair_qcrb(polar_state(6))
    assert np.isinf(bound.delta_p) and np.isinf(bound.delta_q)


def test_pair_qcrb_twin_fock():
    N = 8
    alphas = np.zeros(N // 2 + 1, dtype=complex)
    alphas[-1] = 1.0
    bound = pair_qcrb(PairState(N, alphas))
    assert np.isinf(bound.delta_q)
    assert bound.delta_p == pytest.approx(1.0 / np.sqrt(8 * (N / 2 + N**2 / 4)), rel=1e-14)


def test_pair_qcrb_equal_superposition():
    # <k + k^2> = 1 and 16 Var(k) = 4, so delta_p = 1/(2 sqrt(2)) and
    # delta_q = 1/2 (the brute-force check below pins both).
    bound = pair_qcrb(PairState(2, np.array([1.0, 1.0]) / np.sqrt(2.0)))
    assert bound.delta_p == pytest.approx(1.0 / np.sqrt(8.0), rel=1e-14)
    assert bound.delta_q == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_pair_qcrb_matches_brute_force(N, rng):
    # Oracle: expand the pulsed state into the 3^N tensor basis and evaluate
    # the generator covariances there.
    for _ in range(5):
        prepared = random_pair_state(rng, N)
        pulsed = apply_beam_splitter(embed_pair_state(prepared), "pm", np.pi / 4)
        qf = brute_force_qfim(to_tensor_state(pulsed), SpinConfig(F=1, N=N))
        oracle = qcrb_simultaneous(qf)
        closed = pair_qcrb(prepared)
        assert closed.delta_p == pytest.approx(oracle.delta_p, abs=1e-8)
        assert closed.delta_q == pytest.approx(oracle.delta_q, abs=1e-8)


# ------------------------------------------------------- preparation sweeps


def test_optimal_smd_avoids_t_zero():
    state, control, bound = optimal_prepared_state("smd", 10)
    assert control > 0.0
    assert np.isfinite(bound.delta_p) and np.isfinite(bound.delta_q)
    assert bound.sum_variance <= pair_qcrb(evolve_smd(10, 1.0, 1.0)).sum_variance


def test_optimal_smd_two_atoms_closed_form():
    state, control, _ = optimal_prepared_state("smd", 2)
    assert abs(state.alphas[0] - np.cos(np.sqrt(2) * control)) < 1e-9
    assert abs(state.alphas[1] + 1j * np.sin(np.sqrt(2) * control)) < 1e-9


def test_optimal_qpt_control_in_transition_region():
    for N in (10, 30):
        _, control, bound = optimal_prepared_state("qpt", N)
        assert -2.0 < control < 2.0
        assert np.isfinite(bound.sum_variance)


def test_optimal_prepared_state_guards():
    with pytest.raises(DomainError):
        optimal_prepared_state("smd", 7)
    with pytest.raises(DomainError):
        optimal_prepared_state("bogus", 8)
    with pytest.raises(DomainError):
        optimal_prepared_state("smd", 8, sweep=(0.0, 5.0, 1))


# ----------------------------------------------------- embedding / pulses


def test_embed_polar_state():
    state = embed_pair_state(polar_state(4))
    idx = fock_index(4)
    assert state.amplitudes[idx[(0, 4, 0)]] == 1.0
    assert np.sum(np.abs(state.amplitudes) ** 2) == pytest.approx(1.0)


def test_embed_project_round_trip(rng):
    prepared = random_pair_state(rng, 8)
    back = project_pair_state(embed_pair_state(prepared))
    assert np.allclose(back.alphas, prepared.alphas, atol=1e-15)


def test_beam_splitter_unitary_matrix():
    for which in ("pm", "p0", "m0"):
        u = beam_splitter_unitary(5, which, np.pi / 4)
        assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-12


def test_pm_pulse_fixes_polar_state():
    state = embed_pair_state(polar_state(6))
    out = apply_beam_splitter(state, "pm", np.pi / 4)
    assert np.allclose(out.amplitudes, state.amplitudes, atol=1e-12)


def test_pm_half_turn_swaps_modes(rng):
    N = 4
    z = rng.standard_normal(fock_dimension(N)) + 1j * rng.standard_normal(fock_dimension(N))
    state = Fock3State(N, z / np.linalg.norm(z))
    swapped = apply_beam_splitter(state, "pm", np.pi / 2)
    idx = fock_index(N)
    for (n1, n0, nm1), i in idx.items():
        j = idx[(nm1, n0, n1)]
        assert abs(swapped.amplitudes[j]) ** 2 == pytest.approx(
            abs(state.amplitudes[i]) ** 2, abs=1e-12
        )


def test_unitarity_and_conservation_randomized(rng):
    # 100 random pulse/phase applications: norm within 1e-10, atom number exact.
    N = 6
    n1, n0, nm1 = (np.array(fock_basis(N))[:, i] for i in range(3))
    number_diag = n1 + n0 + nm1
    z = rng.standard_normal(fock_dimension(N)) + 1j * rng.standard_normal(fock_dimension(N))
    state = Fock3State(N, z / np.linalg.norm(z))
    for _ in range(100):
        kind = rng.choice(["pm", "p0", "m0", "phase"])
        if kind == "phase":
            state = apply_phase_evolution(
                state, rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2)
            )
        else:
            state = apply_beam_splitter(state, kind, rng.uniform(-np.pi, np.pi))
        w = np.abs(state.amplitudes) ** 2
        assert abs(w.sum() - 1.0) < 1e-10
        assert float(w @ number_diag) == pytest.approx(N, abs=1e-9)


def test_phase_evolution_examples():
    N = 2
    idx = fock_index(N)
    amps = np.zeros(fock_dimension(N), dtype=complex)
    amps[idx[(1, 0, 1)]] = 1.0
    state = Fock3State(N, amps)
    same = apply_phase_evolution(state, 0.0, 0.0, 1.0)
    assert np.array_equal(same.amplitudes, state.amplitudes)
    q = 0.37
    rotated = apply_phase_evolution(state, 1.23, q, 1.0)
    assert rotated.amplitudes[idx[(1, 0, 1)]] == pytest.approx(np.exp(-2j * q))
    assert np.sum(np.abs(rotated.amplitudes) ** 2) == pytest.approx(1.0, abs=0.0)


# --------------------------------------------------------- analytic output


def test_splitting_coefficients_k1():
    assert splitting_coefficient(1, 0) == pytest.approx(1.0 / np.sqrt(2.0))
    assert splitting_coefficient(1, 1) == pytest.approx(1.0 / np.sqrt(2.0))


def test_splitting_coefficients_normalized():
    for k in range(0, 9):
        total = sum(splitting_coefficient(k, m) ** 2 for m in range(k + 1))
        assert total == pytest.approx(1.0, rel=1e-13)


def test_analytic_output_polar_is_fixed_point():
    out = analytic_output_state(polar_state(4), 2.0, 0.5, 1.0)
    idx = fock_index(4)
    assert out.amplitudes[idx[(0, 4, 0)]] == pytest.approx(1.0)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_analytic_output_matches_pipeline(N, rng):
    for _ in range(10):
        prepared = random_pair_state(rng, N)
        p, q, t = rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(0, 2)
        simulated = apply_phase_evolution(
            apply_beam_splitter(embed_pair_state(prepared), "pm", np.pi / 4), p, q, t
        )
        analytic = analytic_output_state(prepared, p, q, t)
        overlap = abs(np.vdot(analytic.amplitudes, simulated.amplitudes))
        assert overlap >= 1.0 - 1e-8


# -------------------------------------------------------------- expansions


def test_to_tensor_state_norm_and_values(rng):
    N = 2
    idx = fock_index(N)
    amps = np.zeros(fock_dimension(N), dtype=complex)
    amps[idx[(1, 0, 1)]] = 1.0
    full = to_tensor_state(Fock3State(N, amps))
    # (1,0,1) spreads over |+1,-1> and |-1,+1>; site order is m = -1,0,+1.
    assert full[2 * 3 + 0] == pytest.approx(1.0 / np.sqrt(2.0))
    assert full[0 * 3 + 2] == pytest.approx(1.0 / np.sqrt(2.0))
    assert np.sum(np.abs(full) ** 2) == pytest.approx(1.0, rel=1e-14)

    state = embed_pair_state(random_pair_state(rng, 6))
    assert np.sum(np.abs(to_tensor_state(state)) ** 2) == pytest.approx(1.0, rel=1e-12)


# -------------------------------------------------------------- qpt ramps


def test_ramp_qpt_tracks_ground_state():
    # A slow ramp from deep in the polar phase into the transition region
    # should land close to the instantaneous ground state.
    N = 8
    final = ramp_qpt(N, -1.0, 6.0, 0.0, duration=200.0, steps=4000)
    target, _ = ground_state_and_gap(qpt_hamiltonian(N, -1.0, 0.0))
    assert abs(np.vdot(target.alphas, final.alphas)) >= 0.95


def test_ramp_qpt_guards():
    with pytest.raises(DomainError):
        ramp_qpt(8, -1.0, 6.0, 0.0, duration=0.0)
