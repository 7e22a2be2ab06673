"""Quantum Fisher information matrices and Cramer-Rao bounds for (p, q).

The two phase generators are the collective operators G1 = T * sum_n s_z[n]
and G2 = T * sum_n s_z^2[n].  For a pure input state the QFIM is four times
the covariance matrix of (G1, G2):

    F_kl = 4 Re( <G_k G_l> - <G_k><G_l> ).

Closed forms used here:

  * product input (single-atom amplitudes alpha, N atoms):
        F = N * F_single,   F_single built from moments M1..M4;
  * multimode GHZ input sum_m alpha_m |F,m>^(x N):
        F = N^2 * F_single  (the collective generators are diagonal with
        eigenvalues N*m and N*m^2, so variances pick up N^2).

`brute_force_qfim` evaluates the covariance definition directly on a full
(2F+1)^N tensor-product state vector and is the exponential-cost oracle the
closed forms are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DomainError, NumericalError, ResourceLimitError, ValidationError
from .spin_core import MomentSet, SingleAtomState, SpinConfig, moments

BRUTE_FORCE_DIM_CAP = 10**6

MODE_SIMULTANEOUS = "simultaneous"
MODE_INDIVIDUAL = "individual"

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class Qfim2x2:
    """Real symmetric 2x2 QFIM for (p, q); positive semidefinite up to rounding."""

    f11: float
    f12: float
    f22: float

    def __post_init__(self):
        scale = max(abs(self.f11), abs(self.f22), 1.0)
        if self.f11 < -_PSD_TOL * scale or self.f22 < -_PSD_TOL * scale:
            raise ValidationError(f"QFIM diagonal must be nonnegative: {self}")
        if self.det < -_PSD_TOL * scale**2:
            raise ValidationError(f"QFIM must be positive semidefinite: {self}")

    @property
    def det(self) -> float:
        return self.f11 * self.f22 - self.f12**2

    def as_array(self) -> np.ndarray:
        return np.array([[self.f11, self.f12], [self.f12, self.f22]])

    def scaled(self, factor: float) -> "Qfim2x2":
        return Qfim2x2(factor * self.f11, factor * self.f12, factor * self.f22)


@dataclass(frozen=True)
class PrecisionBound:
    """Root-variance lower bounds (delta_p, delta_q); +inf marks a singular direction."""

    delta_p: float
    delta_q: float
    mode: str

    def __post_init__(self):
        if self.mode not in (MODE_SIMULTANEOUS, MODE_INDIVIDUAL):
            raise DomainError(f"unknown estimation mode {self.mode!r}")
        for name, value in (("delta_p", self.delta_p), ("delta_q", self.delta_q)):
            if not (value > 0.0):  # rejects NaN, zero and negatives
                raise ValidationError(f"{name} must be positive or +inf, got {value!r}")

    @property
    def sum_variance(self) -> float:
        return self.delta_p**2 + self.delta_q**2


def _qfim_from_moments(mom: MomentSet, T: float) -> Qfim2x2:
    t2 = 4.0 * T * T
    return Qfim2x2(
        f11=t2 * (mom.m2 - mom.m1**2),
        f12=t2 * (mom.m3 - mom.m1 * mom.m2),
        f22=t2 * (mom.m4 - mom.m2**2),
    )


def single_atom_qfim(state: SingleAtomState, config: SpinConfig) -> Qfim2x2:
    """QFIM of one atom: 4T^2 times the covariance matrix of (m, m^2)."""
    return _qfim_from_moments(moments(state), config.T)


def product_qfim(state: SingleAtomState, config: SpinConfig) -> Qfim2x2:
    """QFIM of the N-fold product state: N times the single-atom QFIM."""
    return single_atom_qfim(state, config).scaled(float(config.N))


def ghz_qfim(state: SingleAtomState, config: SpinConfig) -> Qfim2x2:
    """QFIM of the multimode GHZ state sum_m alpha_m |F,m>^(x N).

    The collective generators act on |F,m>^(x N) with eigenvalues N*m*T and
    N*m^2*T, so every covariance entry is N^2 times the single-atom one.
    """
    return single_atom_qfim(state, config).scaled(float(config.N) ** 2)


def _det_threshold(qfim: Qfim2x2) -> float:
    return 1e-12 * max(qfim.f11 * qfim.f22, 1.0)


def qcrb_simultaneous(qfim: Qfim2x2, trials: int = 1) -> PrecisionBound:
    """Two-parameter Cramer-Rao bound from the full matrix inverse.

    delta_p^2 = f22 / (mu * det), delta_q^2 = f11 / (mu * det).  A QFIM with
    det at or below the singularity threshold carries no finite joint bound,
    so both components come back +inf.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials!r}")
    det = qfim.det
    if det < -1e-10:
        raise NumericalError(f"QFIM determinant is negative: {det!r}")
    if det <= _det_threshold(qfim):
        return PrecisionBound(np.inf, np.inf, MODE_SIMULTANEOUS)
    mu = float(trials)
    return PrecisionBound(
        delta_p=np.sqrt(qfim.f22 / (mu * det)),
        delta_q=np.sqrt(qfim.f11 / (mu * det)),
        mode=MODE_SIMULTANEOUS,
    )


def qcrb_individual(qfim: Qfim2x2, trials: int = 1) -> PrecisionBound:
    """Single-parameter bounds 1/sqrt(mu * f_kk), the other parameter held fixed.

    A diagonal entry at rounding level relative to the matrix scale carries
    no information and maps to +inf.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials!r}")
    mu = float(trials)
    tiny = 1e-12 * max(qfim.f11, qfim.f22, 1.0)

    def bound(f: float) -> float:
        return 1.0 / np.sqrt(mu * f) if f > tiny else np.inf

    return PrecisionBound(bound(qfim.f11), bound(qfim.f22), MODE_INDIVIDUAL)


def product_state_vector(state: SingleAtomState, N: int) -> np.ndarray:
    """Full (2F+1)^N amplitude vector of the N-fold tensor power (atom 0 slowest)."""
    return reduce(np.kron, [state.amplitudes] * N)


def ghz_state_vector(state: SingleAtomState, N: int) -> np.ndarray:
    """Full amplitude vector of sum_m alpha_m |F,m>^(x N)."""
    dim = 2 * state.F + 1
    full = np.zeros(dim**N, dtype=complex)
    # |m>^(x N) sits at index sum_n i_m * dim^n, i.e. i_m * (dim^N - 1)/(dim - 1).
    stride = (dim**N - 1) // (dim - 1) if dim > 1 else 0
    for i_m, amp in enumerate(state.amplitudes):
        full[i_m * stride] += amp
    return full


def collective_generator_diagonals(F: int, N: int, T: float = 1.0):
    """Diagonals of G1 = T sum_n s_z[n] and G2 = T sum_n s_z^2[n] in the tensor basis."""
    dim = 2 * F + 1
    m = np.arange(-F, F + 1, dtype=float)
    g1 = np.zeros((dim,) * N)
    g2 = np.zeros((dim,) * N)
    for axis in range(N):
        shape = [1] * N
        shape[axis] = dim
        g1 = g1 + m.reshape(shape)
        g2 = g2 + (m**2).reshape(shape)
    return T * g1.ravel(), T * g2.ravel()


def brute_force_qfim(full_state: np.ndarray, config: SpinConfig) -> Qfim2x2:
    """Direct pure-state QFIM on a full N-atom tensor-product state vector.

    Both generators are diagonal in the Zeeman product basis, so each entry
    is a weighted covariance of the two diagonals under the populations
    |psi_i|^2.  Exponential in N; refuses dimensions above 10^6.
    """
    dim = (2 * config.F + 1) ** config.N
    if dim > BRUTE_FORCE_DIM_CAP:
        raise ResourceLimitError(
            f"full tensor basis has dimension {dim} > {BRUTE_FORCE_DIM_CAP}"
        )
    psi = np.asarray(full_state, dtype=complex).ravel()
    if psi.shape != (dim,):
        raise ValidationError(
            f"state vector has length {psi.size}, expected {dim} for F={config.F}, N={config.N}"
        )
    norm_sq = float(np.sum(np.abs(psi) ** 2))
    if abs(norm_sq - 1.0) > 1e-10:
        raise ValidationError(f"state vector not normalized: |psi|^2 = {norm_sq!r}")

    g1, g2 = collective_generator_diagonals(config.F, config.N, config.T)
    w = np.abs(psi) ** 2
    e1, e2 = float(w @ g1), float(w @ g2)
    return Qfim2x2(
        f11=4.0 * (float(w @ (g1 * g1)) - e1 * e1),
        f12=4.0 * (float(w @ (g1 * g2)) - e1 * e2),
        f22=4.0 * (float(w @ (g2 * g2)) - e2 * e2),
    )
