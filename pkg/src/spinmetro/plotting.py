"""Figure rendering for the CLI report paths.

Each saver takes already-computed table data, draws one matplotlib figure
and writes it to the requested file (format from the extension).  Numeric
output never depends on this module; figures are a convenience layered on
top of the CSV/JSON emission.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finite(rows: np.ndarray) -> np.ndarray:
    return rows[np.all(np.isfinite(rows), axis=1)]


def save_bounds_figure(rows, path: str) -> None:
    """Bounds versus hyperfine spin for one state family; rows (F, dp, dq)."""
    rows = _finite(np.asarray(rows, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rows[:, 0], rows[:, 1], "o-", label=r"$\Delta p$")
    ax.plot(rows[:, 0], rows[:, 2], "s-", label=r"$\Delta q$")
    ax.set_xlabel("hyperfine spin F")
    ax.set_ylabel("precision bound")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_theta_figure(rows, path: str) -> None:
    """Bounds of the binomial family versus the polar angle; rows (theta, dp, dq)."""
    rows = _finite(np.asarray(rows, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rows[:, 0], rows[:, 1], label=r"$\Delta p$")
    ax.plot(rows[:, 0], rows[:, 2], label=r"$\Delta q$")
    ax.axvline(np.pi / 2, color="k", ls=":", alpha=0.5)
    ax.set_xlabel(r"$\theta$")
    ax.set_ylabel("precision bound")
    ax.set_yscale("log")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_scaling_figure(table, slope_p: float, slope_q: float, mode: str, path: str) -> None:
    """Log-log bounds versus atom number with the fitted slopes in the legend."""
    table = _finite(np.asarray(table, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(table[:, 0], table[:, 1], "o", label=rf"$\Delta p$ (slope {slope_p:.3f})")
    ax.loglog(table[:, 0], table[:, 2], "s", label=rf"$\Delta q$ (slope {slope_q:.3f})")
    for col, slope in ((1, slope_p), (2, slope_q)):
        n = table[:, 0]
        fit = np.exp(np.polyval(np.polyfit(np.log(n), np.log(table[:, col]), 1), np.log(n)))
        ax.loglog(n, fit, "--", color="gray", alpha=0.7)
    ax.set_xlabel("atom number N")
    ax.set_ylabel("precision bound")
    ax.set_title(f"mode: {mode}")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_prepared_figure(alphas, control: float, method: str, path: str) -> None:
    """Pair-number populations |alpha_k|^2 of the optimal prepared state."""
    alphas = np.asarray(alphas)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(np.arange(alphas.size), np.abs(alphas) ** 2, width=0.8)
    ax.set_xlabel("pair number k")
    ax.set_ylabel(r"$|\alpha_k|^2$")
    ax.set_title(f"{method} optimum, control = {control:.6g}")
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_estimate_figure(spectra, estimate, path: str) -> None:
    """Both magnitude spectra with detected peaks and the recovered (p, q).

    ``spectra`` maps observable name -> (omega, magnitude) arrays.
    """
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    peaks = {"sq_p0": estimate.peaks_sq_p0, "sq_m0": estimate.peaks_sq_m0}
    labels = {"sq_p0": r"$(N_1-N_0)^2$", "sq_m0": r"$(N_{-1}-N_0)^2$"}
    for ax, name in zip(axes, ("sq_p0", "sq_m0")):
        omega, mag = spectra[name]
        ax.plot(omega, mag, lw=0.8)
        for freq, height in peaks[name]:
            ax.plot([freq], [height], "rv")
            ax.annotate(f"{freq:.2f}", (freq, height), textcoords="offset points", xytext=(3, 3))
        ax.set_ylabel(f"|FFT| {labels[name]}")
        ax.grid(True, alpha=0.3)
    axes[1].set_xlabel(r"angular frequency $\omega$")
    axes[0].set_title(
        rf"$\hat p$ = {estimate.p_hat:.4f}, $\hat q$ = {estimate.q_hat:.4f}"
        + (f"  flags: {', '.join(estimate.flags)}" if estimate.flags else "")
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
