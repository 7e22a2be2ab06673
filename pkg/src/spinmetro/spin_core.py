"""Single-atom spin-F algebra in the Zeeman basis.

A spin-F atom has 2F+1 Zeeman sublevels |F, m> with m = -F..F.  Everywhere
in this package amplitude vectors are indexed by ascending m (m = -F first),
so the longitudinal spin operator s_z = diag(-F, ..., F) is monotone along
the diagonal.

The phase-imprinting Hamiltonian is diagonal in this basis,
H = p*s_z + q*s_z^2, with p and q the linear and quadratic Zeeman
coefficients.  All precision bounds downstream reduce to population moments
M_j = sum_m |alpha_m|^2 m^j of the input state, computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, cos, sin

import numpy as np

from .errors import DomainError, ValidationError

NORM_TOL = 1e-12


def _check_spin(F: int) -> None:
    if not isinstance(F, (int, np.integer)) or F < 1:
        raise DomainError(f"hyperfine spin F must be an integer >= 1, got {F!r}")


@dataclass(frozen=True)
class SpinConfig:
    """Ensemble parameters: spin F, atom number N, evolution duration T, trials mu."""

    F: int
    N: int
    T: float = 1.0
    trials: int = 1

    def __post_init__(self):
        _check_spin(self.F)
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise DomainError(f"atom number N must be an integer >= 1, got {self.N!r}")
        if not self.T > 0:
            raise DomainError(f"evolution duration T must be > 0, got {self.T!r}")
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")


@dataclass(frozen=True)
class SingleAtomState:
    """Normalized complex amplitudes over Zeeman sublevels, ascending m = -F..F."""

    F: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_spin(self.F)
        amps = np.asarray(self.amplitudes, dtype=complex).copy()
        if amps.shape != (2 * self.F + 1,):
            raise ValidationError(
                f"expected {2 * self.F + 1} amplitudes for F={self.F}, got shape {amps.shape}"
            )
        norm_sq = float(np.sum(np.abs(amps) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValidationError(f"state not normalized: sum |alpha|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def m_values(self) -> np.ndarray:
        return np.arange(-self.F, self.F + 1, dtype=float)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class MomentSet:
    """Population-weighted moments M_j = sum_m |alpha_m|^2 m^j, j = 1..4."""

    m1: float
    m2: float
    m3: float
    m4: float


def spin_operators(F: int) -> tuple[np.ndarray, np.ndarray]:
    """Return (s_z, s_z^2) as real diagonal matrices over ascending m = -F..F."""
    _check_spin(F)
    m = np.arange(-F, F + 1, dtype=float)
    return np.diag(m), np.diag(m**2)


def moments(state: SingleAtomState) -> MomentSet:
    """Population moments of the magnetic quantum number, M_j = <m^j>."""
    w = state.populations
    m = state.m_values
    return MomentSet(
        m1=float(w @ m),
        m2=float(w @ m**2),
        m3=float(w @ m**3),
        m4=float(w @ m**4),
    )


def uniform_state(F: int) -> SingleAtomState:
    """Equal-weight superposition of all 2F+1 sublevels, amplitude 1/sqrt(2F+1)."""
    _check_spin(F)
    dim = 2 * F + 1
    return SingleAtomState(F, np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))


def coherent_state(F: int, theta: float, phi: float = 0.0) -> SingleAtomState:
    """Spin-coherent state with binomially distributed Zeeman populations.

    alpha_m = sqrt(C(2F, F-m)) * cos(theta/2)^(F+m) * sin(theta/2)^(F-m) * e^(i(F-m)phi).

    This half-angle form is the stably evaluated equivalent of the
    stereographic parameterization eps = tan(theta/2) e^(i phi); the poles
    theta = 0 (all weight at m = +F) and theta = pi (all weight at m = -F)
    come out exactly without evaluating tan.
    """
    _check_spin(F)
    if not 0.0 <= theta <= np.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta!r}")
    c, s = cos(theta / 2.0), sin(theta / 2.0)
    m = np.arange(-F, F + 1)
    weights = np.array([np.sqrt(comb(2 * F, F - mm)) for mm in m])
    amps = weights * c ** (F + m) * s ** (F - m) * np.exp(1j * (F - m) * phi)
    # Renormalize away the residual rounding of the binomial identity.
    amps = amps / np.linalg.norm(amps)
    return SingleAtomState(F, amps)


def three_amp_state(
    F: int, a_F: complex, a_0: complex, rel_phase: float = 0.0
) -> SingleAtomState:
    """State supported on m in {-F, 0, +F} with |alpha_F| = |alpha_-F|.

    alpha_F = a_F, alpha_0 = a_0, alpha_-F = a_F * e^(i rel_phase); equal
    phases (rel_phase = 0) by default.  Requires 2|a_F|^2 + |a_0|^2 = 1.
    Relative phases leave every precision bound unchanged (the phase
    generators are diagonal), so the default is purely a determinism choice.
    """
    _check_spin(F)
    norm_sq = 2.0 * abs(a_F) ** 2 + abs(a_0) ** 2
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise ValidationError(
            f"three-amplitude state needs 2|a_F|^2 + |a_0|^2 = 1, got {norm_sq!r}"
        )
    amps = np.zeros(2 * F + 1, dtype=complex)
    amps[0] = a_F * np.exp(1j * rel_phase)  # m = -F
    amps[F] = a_0  # m = 0
    amps[2 * F] = a_F  # m = +F
    return SingleAtomState(F, amps)
