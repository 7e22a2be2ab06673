"""Exact three-mode bosonic simulation of the spin-1 interferometer.

Modes are the Zeeman sublevels m = +1, 0, -1 of N spin-1 atoms.  States live
in the fixed-N Fock sector spanned by occupations (n1, n0, nm1) with
n1 + n0 + nm1 = N, dimension (N+1)(N+2)/2, enumerated lexicographically with
n1 descending and then n0 descending.

Spin-changing collisions conserve magnetization, so states grown from
|0, N, 0> stay in the zero-magnetization pair basis |k, N-2k, k> with k the
number of +1/-1 pairs (N even).  Both preparation Hamiltonians are real
tridiagonal in that basis:

    pair-creation (SMD):  kappa (a0+ a0+ a1 am1 + h.c.)
    spin-mixing with a tunable quadratic shift (QPT):
        (c2/2N) [2 (a0+ a0+ a1 am1 + h.c.) + (2 N0 - 1)(N - N0)] - eps N0

and the interferometer pulses are exponentials of quadratic mode-exchange
generators, applied exactly via eigendecomposition.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, NumericalError, ValidationError
from .qfim import MODE_SIMULTANEOUS, PrecisionBound
from .state_opt import golden_section

PULSES = ("pm", "p0", "m0")

SMD_SWEEP = (0.0, 5.0, 2000)  # evolution time at kappa = 1
QPT_SWEEP = (-4.0, 4.0, 1601)  # quadratic shift in units of |c2|

_PAIR_NORM_TOL = 1e-12
_FOCK_NORM_TOL = 1e-10


def _check_even_atoms(N: int) -> None:
    if not isinstance(N, (int, np.integer)) or N < 2 or N % 2:
        raise DomainError(f"pair-basis operations need even N >= 2, got {N!r}")


@lru_cache(maxsize=64)
def fock_basis(N: int) -> tuple[tuple[int, int, int], ...]:
    """All occupations (n1, n0, nm1) with n1+n0+nm1 = N, canonical order."""
    return tuple(
        (n1, n0, N - n1 - n0)
        for n1 in range(N, -1, -1)
        for n0 in range(N - n1, -1, -1)
    )


@lru_cache(maxsize=64)
def fock_index(N: int) -> dict[tuple[int, int, int], int]:
    return {occ: i for i, occ in enumerate(fock_basis(N))}


@lru_cache(maxsize=64)
def occupation_arrays(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    basis = np.array(fock_basis(N), dtype=float)
    n1, n0, nm1 = basis[:, 0].copy(), basis[:, 1].copy(), basis[:, 2].copy()
    for arr in (n1, n0, nm1):
        arr.setflags(write=False)
    return n1, n0, nm1


def fock_dimension(N: int) -> int:
    return (N + 1) * (N + 2) // 2


@dataclass(frozen=True)
class PairState:
    """Zero-magnetization amplitudes alpha_k over |k, N-2k, k>, k = 0..N/2."""

    N: int
    alphas: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_even_atoms(self.N)
        alphas = np.asarray(self.alphas, dtype=complex).copy()
        if alphas.shape != (self.N // 2 + 1,):
            raise ValidationError(
                f"expected {self.N // 2 + 1} pair amplitudes for N={self.N}, got {alphas.shape}"
            )
        norm_sq = float(np.sum(np.abs(alphas) ** 2))
        if abs(norm_sq - 1.0) > _PAIR_NORM_TOL:
            raise ValidationError(f"pair state not normalized: {norm_sq!r}")
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)

    @property
    def k_values(self) -> np.ndarray:
        return np.arange(self.N // 2 + 1, dtype=float)


@dataclass(frozen=True)
class Fock3State:
    """Amplitudes over the full fixed-N three-mode Fock sector."""

    N: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        dim = fock_dimension(self.N)
        if amps.shape != (dim,):
            raise ValidationError(
                f"expected {dim} Fock amplitudes for N={self.N}, got {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > _FOCK_NORM_TOL:
            raise ValidationError(f"Fock state not normalized: {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Real symmetric tridiagonal matrix in the pair basis."""

    diag: np.ndarray
    offdiag: np.ndarray
    label: str
    parameters: tuple

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float).copy()
        off = np.asarray(self.offdiag, dtype=float).copy()
        if off.shape != (diag.size - 1,):
            raise ValidationError(
                f"off-diagonal length {off.size} does not match dimension {diag.size}"
            )
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", off)

    @property
    def atoms(self) -> int:
        return 2 * (self.diag.size - 1)

    def dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )


def _pair_hop(N: int) -> np.ndarray:
    """Matrix elements <k-1| a0+ a0+ a1 am1 |k> = k sqrt((N-2k+1)(N-2k+2))."""
    k = np.arange(1, N // 2 + 1, dtype=float)
    return k * np.sqrt((N - 2 * k + 1) * (N - 2 * k + 2))


def smd_hamiltonian(N: int, kappa: float) -> TridiagonalHamiltonian:
    """Pair-creation Hamiltonian kappa (a0+ a0+ a1 am1 + h.c.) in the pair basis."""
    _check_even_atoms(N)
    return TridiagonalHamiltonian(
        diag=np.zeros(N // 2 + 1),
        offdiag=kappa * _pair_hop(N),
        label="smd",
        parameters=(kappa,),
    )


def qpt_hamiltonian(N: int, c2: float, epsilon: float) -> TridiagonalHamiltonian:
    """Spin-mixing Hamiltonian with quadratic shift epsilon on the m=0 population."""
    _check_even_atoms(N)
    if c2 == 0.0:
        raise DomainError("spin-mixing rate c2 must be nonzero")
    k = np.arange(N // 2 + 1, dtype=float)
    n0 = N - 2 * k
    diag = (c2 / (2.0 * N)) * (2.0 * n0 - 1.0) * (N - n0) - epsilon * n0
    return TridiagonalHamiltonian(
        diag=diag,
        offdiag=(c2 / N) * _pair_hop(N),
        label="qpt",
        parameters=(c2, epsilon),
    )


@lru_cache(maxsize=32)
def _smd_eigensystem(N: int, kappa: float):
    h = smd_hamiltonian(N, kappa)
    vals, vecs = eigh_tridiagonal(h.diag, h.offdiag)
    return vals, vecs


def evolve_smd(N: int, kappa: float, t: float) -> PairState:
    """Evolve |0, N, 0> for time t under the pair-creation Hamiltonian."""
    if t < 0:
        raise DomainError(f"evolution time must be >= 0, got {t!r}")
    vals, vecs = _smd_eigensystem(N, kappa)
    # vecs[0] = overlaps of the eigenvectors with the k = 0 start vector.
    alphas = vecs @ (np.exp(-1j * vals * t) * vecs[0])
    norm = np.linalg.norm(alphas)
    if abs(norm - 1.0) > _FOCK_NORM_TOL:
        raise NumericalError(f"evolution lost unitarity: |psi| = {norm!r}")
    return PairState(N, alphas / norm)


def ground_state_and_gap(h: TridiagonalHamiltonian) -> tuple[PairState, float]:
    """Lowest eigenpair; returns (ground state, E1 - E0).

    The ground state is phase-fixed so its largest-magnitude amplitude is
    real positive.  A gap below 1e-12 is flagged with a warning, not an
    error.
    """
    if h.diag.size == 1:
        return PairState(h.atoms, np.ones(1, dtype=complex)), 0.0
    vals, vecs = eigh_tridiagonal(h.diag, h.offdiag, select="i", select_range=(0, 1))
    gap = float(vals[1] - vals[0])
    if gap < 1e-12:
        warnings.warn(f"near-degenerate ground state: gap = {gap!r}", stacklevel=2)
    ground = vecs[:, 0]
    ground = ground * np.sign(ground[np.argmax(np.abs(ground))])
    return PairState(h.atoms, ground.astype(complex)), gap


def pair_qcrb(state: PairState) -> PrecisionBound:
    """Joint precision bounds of the pulsed pair state, in closed form.

    After the +-1 splitting pulse the phase generators have first and second
    pair-number moments only:

        delta_p = 1 / sqrt(8 <k + k^2>),
        delta_q = 1 / sqrt(16 (<k^2> - <k>^2)).

    Vanishing denominators (no pairs, or a sharp pair number) give +inf.
    """
    w = np.abs(state.alphas) ** 2
    k = state.k_values
    s_p = 8.0 * float(w @ (k + k * k))
    var_k = float(w @ (k * k)) - float(w @ k) ** 2
    s_q = 16.0 * var_k
    delta_p = 1.0 / np.sqrt(s_p) if s_p > 1e-300 else np.inf
    delta_q = 1.0 / np.sqrt(s_q) if s_q > 1e-300 else np.inf
    return PrecisionBound(delta_p=delta_p, delta_q=delta_q, mode=MODE_SIMULTANEOUS)


def optimal_prepared_state(
    method: str,
    N: int,
    sweep: tuple[float, float, int] | None = None,
    c2: float = -1.0,
    kappa: float = 1.0,
) -> tuple[PairState, float, PrecisionBound]:
    """Sweep the preparation control and minimize delta_p^2 + delta_q^2.

    ``method`` selects the control: evolution time under pair creation
    ("smd", default grid t in [0, 5] at kappa = 1) or the quadratic shift of
    the instantaneous ground state ("qpt", default grid eps/|c2| in [-4, 4]).
    Returns (state, control value, bound) after golden-section refinement
    around the best grid point.
    """
    _check_even_atoms(N)
    if method == "smd":
        lo, hi, points = sweep if sweep is not None else SMD_SWEEP

        def state_at(x: float) -> PairState:
            return evolve_smd(N, kappa, x)

    elif method == "qpt":
        lo, hi, points = sweep if sweep is not None else QPT_SWEEP

        def state_at(x: float) -> PairState:
            return ground_state_and_gap(qpt_hamiltonian(N, c2, x * abs(c2)))[0]

    else:
        raise DomainError(f"method must be 'smd' or 'qpt', got {method!r}")
    if points < 2:
        raise DomainError(f"sweep grid needs at least 2 points, got {points}")

    def objective(x: float) -> float:
        return pair_qcrb(state_at(x)).sum_variance

    grid = np.linspace(lo, hi, points)
    values = np.array([objective(x) for x in grid])
    if not np.any(np.isfinite(values)):
        raise DomainError("no sweep point yields finite bounds")
    i = int(np.nanargmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, points - 1)]
    control, _, _ = golden_section(objective, a, b, tol=1e-10 * max(abs(hi - lo), 1.0))
    best = state_at(control)
    return best, float(control), pair_qcrb(best)


def embed_pair_state(state: PairState) -> Fock3State:
    """Place pair amplitudes at the occupations (k, N-2k, k) of the full sector."""
    N = state.N
    amps = np.zeros(fock_dimension(N), dtype=complex)
    index = fock_index(N)
    for k, alpha in enumerate(state.alphas):
        amps[index[(k, N - 2 * k, k)]] = alpha
    return Fock3State(N, amps)


def project_pair_state(state: Fock3State) -> PairState:
    """Inverse of ``embed_pair_state`` for states supported on the pair basis."""
    _check_even_atoms(state.N)
    index = fock_index(state.N)
    alphas = np.array(
        [
            state.amplitudes[index[(k, state.N - 2 * k, k)]]
            for k in range(state.N // 2 + 1)
        ]
    )
    return PairState(state.N, alphas)


def _hop_matrix(N: int, src: int, dst: int) -> np.ndarray:
    """Dense matrix of a_dst+ a_src over the fixed-N sector (mode index 0,1,2 = +1,0,-1)."""
    basis = fock_basis(N)
    index = fock_index(N)
    dim = len(basis)
    out = np.zeros((dim, dim))
    for i, occ in enumerate(basis):
        if occ[src] == 0:
            continue
        target = list(occ)
        target[src] -= 1
        target[dst] += 1
        j = index[tuple(target)]
        out[j, i] = np.sqrt((occ[dst] + 1) * occ[src])
    return out


_MODE = {"p": 0, "0": 1, "m": 2}


@lru_cache(maxsize=16)
def beam_splitter_unitary(N: int, which: str, angle: float) -> np.ndarray:
    """Exact pulse unitary exp(G) on the fixed-N sector.

    Generators (theta = angle):
        pm:  theta (a1+ am1 - am1+ a1)
        p0: -i theta (a1+ a0 + a0+ a1)
        m0: -i theta (am1+ a0 + a0+ am1)
    computed by eigendecomposition of the Hermitian matrix i G.
    """
    if which not in PULSES:
        raise DomainError(f"pulse must be one of {PULSES}, got {which!r}")
    if which == "pm":
        g = angle * (_hop_matrix(N, 2, 0) - _hop_matrix(N, 0, 2))
        herm = 1j * g
    elif which == "p0":
        herm = angle * (_hop_matrix(N, 1, 0) + _hop_matrix(N, 0, 1))
    else:
        herm = angle * (_hop_matrix(N, 1, 2) + _hop_matrix(N, 2, 1))
    vals, vecs = np.linalg.eigh(herm)
    unitary = (vecs * np.exp(-1j * vals)) @ vecs.conj().T
    unitary.setflags(write=False)
    return unitary


def apply_beam_splitter(state: Fock3State, which: str, angle: float) -> Fock3State:
    """Apply a mode-exchange pulse; conserves particle number exactly."""
    return Fock3State(state.N, beam_splitter_unitary(state.N, which, angle) @ state.amplitudes)


def apply_phase_evolution(state: Fock3State, p: float, q: float, t: float) -> Fock3State:
    """Imprint exp(-i [(n1 - nm1) p + (n1 + nm1) q] t), with m = 0 the phase reference."""
    n1, _, nm1 = occupation_arrays(state.N)
    phases = np.exp(-1j * ((n1 - nm1) * p + (n1 + nm1) * q) * t)
    return Fock3State(state.N, phases * state.amplitudes)


def splitting_coefficient(k: int, m: int) -> float:
    """Amplitude sqrt(C(2m, m) C(2k-2m, k-m)) / 2^k of the pair-splitting pulse."""
    return np.sqrt(comb(2 * m, m) * comb(2 * (k - m), k - m)) / 2.0**k


def analytic_output_state(prepared: PairState, p: float, q: float, t: float) -> Fock3State:
    """Closed form of (phase evolution) o (pm pulse at pi/4) on a pair state.

    The pi/4 pulse maps each pair level k to a signed binomial superposition,

        |k, N-2k, k>  ->  sum_m (-1)^(k-m) c_km |2m, N-2k, 2k-2m>,

    with c_km given by ``splitting_coefficient``; the diagonal phase then
    contributes exp(-i [(4m - 2k) p + 2k q] t) per branch.
    """
    N = prepared.N
    amps = np.zeros(fock_dimension(N), dtype=complex)
    index = fock_index(N)
    for k, alpha in enumerate(prepared.alphas):
        for m in range(k + 1):
            phase = np.exp(-1j * ((4 * m - 2 * k) * p + 2 * k * q) * t)
            sign = -1.0 if (k - m) % 2 else 1.0
            amps[index[(2 * m, N - 2 * k, 2 * (k - m))]] += (
                alpha * sign * splitting_coefficient(k, m) * phase
            )
    return Fock3State(N, amps)


def to_tensor_state(state: Fock3State) -> np.ndarray:
    """Expand into the 3^N distinguishable-atom basis (per-site order m = -1, 0, +1).

    Each occupation spreads uniformly over its permutations with amplitude
    sqrt(n1! n0! nm1! / N!); used to cross-check the bosonic simulation
    against the full tensor-product machinery.
    """
    N = state.N
    full = np.zeros(3**N, dtype=complex)
    weight = {
        occ: amp * np.sqrt(
            factorial(occ[0]) * factorial(occ[1]) * factorial(occ[2]) / factorial(N)
        )
        for occ, amp in zip(fock_basis(N), state.amplitudes)
    }
    for flat, digits in enumerate(np.ndindex(*(3,) * N)):
        counts = np.bincount(digits, minlength=3)
        occ = (int(counts[2]), int(counts[1]), int(counts[0]))  # site value 2 <-> m = +1
        full[flat] = weight[occ]
    return full


def ramp_qpt(
    N: int,
    c2: float,
    eps_start: float,
    eps_stop: float,
    duration: float,
    steps: int = 2000,
) -> PairState:
    """Finite-rate linear ramp of the quadratic shift, starting from |0, N, 0>.

    Fixed-step propagation with the midpoint Hamiltonian of each step; the
    accumulated norm drift must stay below 1e-8 or the step size is rejected.
    """
    _check_even_atoms(N)
    if duration <= 0 or steps < 1:
        raise DomainError("ramp needs positive duration and at least one step")
    dt = duration / steps
    psi = np.zeros(N // 2 + 1, dtype=complex)
    psi[0] = 1.0
    for j in range(steps):
        eps = eps_start + (eps_stop - eps_start) * (j + 0.5) / steps
        h = qpt_hamiltonian(N, c2, eps)
        vals, vecs = eigh_tridiagonal(h.diag, h.offdiag)
        psi = vecs @ (np.exp(-1j * vals * dt) * (vecs.T @ psi))
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > 1e-8:
        raise NumericalError(f"ramp norm drift {drift!r} exceeds 1e-8; reduce step size")
    return PairState(N, psi / np.linalg.norm(psi))
