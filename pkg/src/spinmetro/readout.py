"""Observable readout and FFT-based joint estimation of (p, q).

The measured quantities are the squared population differences
(N1 - N0)^2 and (N-1 - N0)^2 on the final state of the interferometer
sequence

    embed -> pm pulse (pi/4) -> phase imprint -> p0 pulse -> m0 pulse.

Both observables are diagonal in the Fock basis, so expectations over a time
grid are cheap diagonal sums.  Their time traces oscillate at
omega = |4p|, |2p + 2q| and |-2p + 2q| (the (N-1 - N0)^2 trace lacks the
|2p + 2q| line), which lets a peak search on the spectrum recover p and q
under the working assumption p > q > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError, ValidationError
from .fock3 import (
    Fock3State,
    PairState,
    apply_beam_splitter,
    apply_phase_evolution,
    beam_splitter_unitary,
    embed_pair_state,
    occupation_arrays,
)

OBSERVABLES = ("sq_p0", "sq_m0")

_MIN_FFT_SAMPLES = 256
_PEAK_THRESHOLD = 5.0  # ratio over the median spectral magnitude
_CONSISTENCY_BINS = 2.0


@dataclass(frozen=True)
class SignalSeries:
    """Expectation of one squared population difference over a uniform time grid."""

    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    observable: str
    nyquist_ok: bool = True

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise DomainError(f"observable must be one of {OBSERVABLES}")
        times = np.asarray(self.times, dtype=float).copy()
        values = np.asarray(self.values, dtype=float).copy()
        if times.ndim != 1 or times.shape != values.shape:
            raise ValidationError("times and values must be matching 1-d arrays")
        steps = np.diff(times)
        if times.size >= 2:
            if np.any(steps <= 0):
                raise ValidationError("times must be strictly increasing")
            dt = steps[0]
            if np.max(np.abs(steps - dt)) > 1e-12 * max(abs(dt), 1.0):
                raise ValidationError("time grid must be uniform")
        if np.min(values) < -1e-9:
            raise ValidationError("squared-difference expectations must be nonnegative")
        values = np.clip(values, 0.0, None)
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class FftEstimate:
    """Joint spectral estimate; frequencies are angular, resolution is the bin width."""

    peak_frequencies: tuple
    p_hat: float
    q_hat: float
    resolution: float
    peaks_sq_p0: tuple = ()
    peaks_sq_m0: tuple = ()
    flags: tuple = ()

    def __post_init__(self):
        if abs(self.p_hat) < abs(self.q_hat):
            raise ValidationError(
                f"assignment rule requires |p_hat| >= |q_hat|: {self.p_hat}, {self.q_hat}"
            )


def observable_diagonal(N: int, observable: str) -> np.ndarray:
    """Diagonal of (N1 - N0)^2 or (N-1 - N0)^2 over the canonical Fock order."""
    n1, n0, nm1 = occupation_arrays(N)
    if observable == "sq_p0":
        return (n1 - n0) ** 2
    if observable == "sq_m0":
        return (nm1 - n0) ** 2
    raise DomainError(f"observable must be one of {OBSERVABLES}, got {observable!r}")


def final_state(prepared: PairState, p: float, q: float, t: float) -> Fock3State:
    """Full interferometer output: split, imprint phases for time t, recombine."""
    state = apply_beam_splitter(embed_pair_state(prepared), "pm", np.pi / 4)
    state = apply_phase_evolution(state, p, q, t)
    state = apply_beam_splitter(state, "p0", np.pi / 4)
    return apply_beam_splitter(state, "m0", np.pi / 4)


def expectation_and_std(state: Fock3State, observable: str) -> tuple[float, float]:
    """Mean and standard deviation of a squared population difference."""
    d = observable_diagonal(state.N, observable)
    w = np.abs(state.amplitudes) ** 2
    mean = float(w @ d)
    var = float(w @ d**2) - mean * mean
    return mean, float(np.sqrt(max(var, 0.0)))


def default_time_grid(p_guess: float, samples: int = 1024) -> np.ndarray:
    """Uniform grid sampling the fastest expected line omega = 4 p_guess at 4x Nyquist.

    dt = pi / (8 |p_guess|), which sits exactly at the guard limit
    dt <= pi / (2 * 4 |p_guess|); 2x oversampling would park the 4p line on
    the edge bin of the spectrum where peak interpolation is undefined.
    """
    if p_guess == 0.0:
        raise DomainError("p_guess must be nonzero to size the time grid")
    if samples < _MIN_FFT_SAMPLES:
        raise DomainError(f"need at least {_MIN_FFT_SAMPLES} samples, got {samples}")
    dt = np.pi / (8.0 * abs(p_guess))
    return dt * np.arange(samples)


def signal_sweep(
    prepared: PairState,
    p: float,
    q: float,
    t_grid: np.ndarray,
    p_guess: float,
) -> tuple[SignalSeries, SignalSeries]:
    """Expectations of both observables on the final state across the grid.

    Returns (sq_p0 series, sq_m0 series).  A grid step above
    pi / (8 |p_guess|) undersamples the fastest line; the series then carry
    ``nyquist_ok=False`` but are still produced.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 2:
        raise DomainError("time grid must be a 1-d array with at least 2 points")
    N = prepared.N
    n1, _, nm1 = occupation_arrays(N)

    split = apply_beam_splitter(embed_pair_state(prepared), "pm", np.pi / 4)
    recombine = beam_splitter_unitary(N, "m0", np.pi / 4) @ beam_splitter_unitary(
        N, "p0", np.pi / 4
    )
    exponent = (n1 - nm1) * p + (n1 + nm1) * q
    # columns = final states at each grid time
    phased = np.exp(-1j * np.outer(exponent, t_grid)) * split.amplitudes[:, None]
    populations = np.abs(recombine @ phased) ** 2

    dt = float(t_grid[1] - t_grid[0])
    nyquist_ok = dt <= np.pi / (2.0 * 4.0 * abs(p_guess)) * (1.0 + 1e-12)
    series = []
    for name in OBSERVABLES:
        values = observable_diagonal(N, name) @ populations
        series.append(
            SignalSeries(times=t_grid, values=values, observable=name, nyquist_ok=nyquist_ok)
        )
    return series[0], series[1]


def detrended_spectrum(series: SignalSeries) -> tuple[np.ndarray, np.ndarray]:
    """One-sided magnitude spectrum of the mean-subtracted signal.

    Returns (angular frequencies, magnitudes) over the rfft bins
    omega_k = 2 pi k / (n dt).  No window is applied; the clean multi-tone
    signals here do not need one.
    """
    x = series.values - np.mean(series.values)
    mags = np.abs(np.fft.rfft(x))
    n = series.values.size
    omegas = 2.0 * np.pi * np.arange(mags.size) / (n * series.step)
    return omegas, mags


def frequency_resolution(series: SignalSeries) -> float:
    return 2.0 * np.pi / (series.values.size * series.step)


def _find_peaks(omegas: np.ndarray, mags: np.ndarray) -> list[tuple[float, float]]:
    """Interior local maxima above 5x the median magnitude, parabolic-refined.

    Bin-centered tones leak nothing into neighboring bins, which can leave
    the median at rounding level; the additional floor of 1e-9 times the
    strongest bin keeps numerical ripple from qualifying as a peak.
    """
    if mags.size < 4:
        return []
    floor = max(
        _PEAK_THRESHOLD * float(np.median(mags[1:])),
        1e-9 * float(np.max(mags)),
    )
    peaks = []
    for k in range(1, mags.size - 1):
        if mags[k] > mags[k - 1] and mags[k] >= mags[k + 1] and mags[k] > floor:
            denom = mags[k - 1] - 2.0 * mags[k] + mags[k + 1]
            shift = 0.5 * (mags[k - 1] - mags[k + 1]) / denom if denom != 0.0 else 0.0
            step = omegas[1] - omegas[0]
            peaks.append((float(omegas[k] + shift * step), float(mags[k])))
    return peaks


def fft_estimate(series_p0: SignalSeries, series_m0: SignalSeries) -> FftEstimate:
    """Assign spectral peaks to (p, q) under the convention p > q > 0.

    The highest-frequency significant peak of the (N-1 - N0)^2 spectrum is
    read as 4 p_hat and the strongest remaining peak as |2 q_hat - 2 p_hat|;
    the (N1 - N0)^2 spectrum must then show its extra line at
    |2 p_hat + 2 q_hat| within 2 bins or the estimate is flagged
    ``inconsistent-crosscheck``.  A q_hat below one bin is flagged
    ``degenerate-q`` (merged lines / out of the assumed regime).
    """
    if series_p0.observable != "sq_p0" or series_m0.observable != "sq_m0":
        raise DomainError("pass the sq_p0 series first and the sq_m0 series second")
    if series_p0.values.size < _MIN_FFT_SAMPLES:
        raise DomainError(f"series too short for estimation: {series_p0.values.size}")
    if series_p0.values.size != series_m0.values.size or not np.allclose(
        series_p0.times, series_m0.times, rtol=0.0, atol=1e-12
    ):
        raise DomainError("both series must share one time grid")

    om_p0, mag_p0 = detrended_spectrum(series_p0)
    om_m0, mag_m0 = detrended_spectrum(series_m0)
    peaks_p0 = _find_peaks(om_p0, mag_p0)
    peaks_m0 = _find_peaks(om_m0, mag_m0)
    resolution = frequency_resolution(series_m0)

    if len(peaks_m0) < 2:
        raise EstimationError(
            f"need two significant peaks in the sq_m0 spectrum, found {len(peaks_m0)}",
            peaks=peaks_m0,
        )
    omega_a = max(peaks_m0, key=lambda pk: pk[0])[0]
    rest = [pk for pk in peaks_m0 if pk[0] != omega_a]
    omega_b = max(rest, key=lambda pk: pk[1])[0]  # strongest of the remainder

    p_hat = omega_a / 4.0
    q_hat = p_hat - omega_b / 2.0

    flags = []
    if not (series_p0.nyquist_ok and series_m0.nyquist_ok):
        flags.append("undersampled")
    if abs(q_hat) < resolution:
        flags.append("degenerate-q")
    expected_sum_line = abs(2.0 * p_hat + 2.0 * q_hat)
    if not any(
        abs(pk[0] - expected_sum_line) <= _CONSISTENCY_BINS * resolution for pk in peaks_p0
    ):
        flags.append("inconsistent-crosscheck")

    all_freqs = sorted((pk[0] for pk in peaks_p0 + peaks_m0), reverse=True)
    return FftEstimate(
        peak_frequencies=tuple(all_freqs),
        p_hat=p_hat,
        q_hat=q_hat,
        resolution=resolution,
        peaks_sq_p0=tuple(peaks_p0),
        peaks_sq_m0=tuple(peaks_m0),
        flags=tuple(flags),
    )


def signal_coefficients(prepared: PairState) -> tuple[float, float, float, complex]:
    """State-dependent coefficients (C01, C02, C1, C2) of the closed-form traces.

    C02 is transcribed with the stray leading k folded into the sum as
    (k/2); see ``analytic_expectations`` for why these closed forms are a
    cross-check rather than ground truth.
    """
    N = prepared.N
    w = np.abs(prepared.alphas) ** 2
    k = prepared.k_values
    c01 = float(
        w
        @ (
            -(9.0 / 32.0) * k
            - (57.0 / 32.0) * k**2
            + N * k
            + (11.0 / 16.0) * N
            + (1.0 / 16.0) * N**2
        )
    )
    c02 = float(w @ (0.5 * k * (N + 2.0 * N * k - 3.0 * k**2)))
    c1 = float(w @ (k + k**2))
    kk = np.arange(N // 2, dtype=float)
    c2 = complex(
        np.sum(
            np.conj(prepared.alphas[1:])
            * prepared.alphas[:-1]
            * np.sqrt((N - 2 * kk - 1) * (N - 2 * kk))
            * (1.0 + kk)
        )
    )
    return c01, c02, c1, c2


def analytic_expectations(
    prepared: PairState, p: float, q: float, t: float
) -> tuple[float, float]:
    """Closed-form trace values; a cross-check only, never ground truth.

    The published constant terms do not survive comparison with the exact
    pipeline (their transcription is internally inconsistent), so agreement
    is reported, not asserted.  The oscillation frequency content
    {4p, 2p+2q, -2p+2q} and the C1/C2 structure are reliable.
    """
    c01, c02, c1, c2 = signal_coefficients(prepared)
    w_fast = 4.0 * p * t
    w_sum = (2.0 * p + 2.0 * q) * t
    w_diff = (-2.0 * p + 2.0 * q) * t
    mean_p0 = (
        c01
        - c1 * np.cos(w_fast) / 8.0
        + c2.real * (np.cos(w_diff) / 4.0 - 9.0 * np.cos(w_sum) / 8.0)
        + c2.imag * (-np.sin(w_diff) / 4.0 - 9.0 * np.sin(w_sum) / 8.0)
    )
    mean_m0 = (
        c02
        - c1 * np.cos(w_fast) / 2.0
        + c2.real * np.cos(w_diff)
        + c2.imag * np.sin(w_diff) / 4.0
    )
    return float(mean_p0), float(mean_m0)


def harmonic_coefficients(series: SignalSeries, p: float, q: float) -> dict:
    """Least-squares projection onto the expected tones, for comparison reports.

    Fits values(t) = const + sum over the three lines of
    a cos(w t) + b sin(w t) and reports the coefficients plus the rms
    residual; a residual at rounding level certifies the frequency content.
    """
    t = series.times
    lines = {"4p": 4.0 * p, "2p+2q": 2.0 * p + 2.0 * q, "-2p+2q": -2.0 * p + 2.0 * q}
    columns = [np.ones_like(t)]
    names = ["const"]
    for name, w in lines.items():
        columns += [np.cos(w * t), np.sin(w * t)]
        names += [f"cos({name})", f"sin({name})"]
    design = np.column_stack(columns)
    coeffs, *_ = np.linalg.lstsq(design, series.values, rcond=None)
    residual = series.values - design @ coeffs
    out = dict(zip(names, (float(c) for c in coeffs)))
    out["rms_residual"] = float(np.sqrt(np.mean(residual**2)))
    return out
