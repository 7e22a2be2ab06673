"""Command-line front end: bounds, scaling, prepare, estimate.

Every command writes CSV or JSON (``--format``) to ``--out`` (default
stdout) and can additionally render a matplotlib figure next to the data
with ``--plot FILE``.  Numeric fields are emitted with 17 significant
digits so files round-trip exactly.  An optional JSON config file supplies
defaults (keys are flag names, dashes or underscores); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fock3, readout, state_opt
from .errors import (
    DomainError,
    EstimationError,
    NumericalError,
    OptimizationError,
    ResourceLimitError,
    ValidationError,
)
from .qfim import product_qfim, qcrb_simultaneous
from .spin_core import SpinConfig, uniform_state, coherent_state

_ERRORS = (
    DomainError,
    ValidationError,
    ResourceLimitError,
    NumericalError,
    OptimizationError,
    EstimationError,
)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_int_list(text: str) -> list[int]:
    """Accepts '8,16,32', '1..5', '10..100:2' and geometric '8..1024:x2'."""
    values: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if ".." not in token:
            values.append(int(token))
            continue
        lo_text, rest = token.split("..", 1)
        lo = int(lo_text)
        if ":" in rest:
            hi_text, step_text = rest.split(":", 1)
            hi = int(hi_text)
            if step_text.startswith("x"):
                factor = int(step_text[1:])
                if factor < 2:
                    raise DomainError(f"geometric step must be >= 2 in {token!r}")
                n = lo
                while n <= hi:
                    values.append(n)
                    n *= factor
                continue
            step = int(step_text)
        else:
            hi, step = int(rest), 1
        if step < 1:
            raise DomainError(f"step must be >= 1 in {token!r}")
        values.extend(range(lo, hi + 1, step))
    if not values:
        raise DomainError(f"empty integer list: {text!r}")
    return values


def _parse_sweep(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"sweep spec must be lo:hi:points, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in raw.items()}


def _resolve(args: argparse.Namespace, config: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    return "\n".join(lines) + "\n"


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------- bounds


def cmd_bounds(args: argparse.Namespace, config: dict) -> int:
    family = _resolve(args, config, "family")
    f_values = _parse_int_list(str(_resolve(args, config, "F", "1..5")))
    n_atoms = int(_resolve(args, config, "N", 1))
    theta_samples = _resolve(args, config, "theta_samples")
    ensemble = _resolve(args, config, "ensemble", "product")
    seed = int(_resolve(args, config, "seed", 0))
    out = _resolve(args, config, "out")
    fmt = _resolve(args, config, "format", "csv")
    plot = _resolve(args, config, "plot")

    if family == "binomial" and theta_samples is not None:
        header = ["F", "family", "N", "theta", "delta_p", "delta_q"]
        rows = []
        for f_spin in f_values:
            for theta, dp, dq in state_opt.scan_theta(f_spin, n_atoms, int(theta_samples)):
                rows.append([f_spin, family, n_atoms, theta, dp, dq])
        if plot:
            from .plotting import save_theta_figure

            save_theta_figure([r[3:] for r in rows], plot)
    else:
        header = ["F", "family", "N", "delta_p", "delta_q"]
        rows = []
        for f_spin in f_values:
            config_fn = SpinConfig(F=f_spin, N=n_atoms)
            if family == "uniform":
                bound = qcrb_simultaneous(product_qfim(uniform_state(f_spin), config_fn))
            elif family == "binomial":
                bound = qcrb_simultaneous(
                    product_qfim(coherent_state(f_spin, np.pi / 2), config_fn)
                )
            else:  # optimal
                bound = state_opt.optimize_sum_variance(
                    f_spin, n_atoms, ensemble, "three_amplitude", seed=seed
                ).bound
            rows.append([f_spin, family, n_atoms, bound.delta_p, bound.delta_q])
        if plot:
            from .plotting import save_bounds_figure

            save_bounds_figure([[r[0], r[3], r[4]] for r in rows], plot)

    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        _emit(_json_dump({"rows": payload}), out)
    else:
        _emit(_csv(header, rows), out)
    return 0


# --------------------------------------------------------------- scaling


def _scaling_rows(mode: str, f_spin: int, n_values: list[int], family: str, seed: int):
    rows = []
    if mode in ("product", "ghz", "simultaneous"):
        ensemble = "ghz" if mode == "simultaneous" else mode
        scan = state_opt.scan_scaling(f_spin, n_values, ensemble, family, seed=seed)
        for n, dp, dq in scan.table:
            rows.append([int(n), dp, dq, mode, family])
        return rows, scan.slope_p, scan.slope_q
    if mode == "individual":
        deltas = [state_opt.individual_reference_bounds(f_spin, n) for n in n_values]
        for n, bound in zip(n_values, deltas):
            rows.append([n, bound.delta_p, bound.delta_q, mode, "three_amplitude"])
    elif mode in ("smd", "qpt"):
        for n in n_values:
            _, _, bound = fock3.optimal_prepared_state(mode, n)
            rows.append([n, bound.delta_p, bound.delta_q, mode, "pair"])
    else:
        raise DomainError(f"unknown scaling mode {mode!r}")
    ns = np.array([row[0] for row in rows], dtype=float)
    slope_p = state_opt.fit_loglog_slope(ns, [row[1] for row in rows])
    slope_q = state_opt.fit_loglog_slope(ns, [row[2] for row in rows])
    return rows, slope_p, slope_q


def cmd_scaling(args: argparse.Namespace, config: dict) -> int:
    mode = _resolve(args, config, "mode")
    f_spin = int(_resolve(args, config, "F", 1))
    n_values = _parse_int_list(str(_resolve(args, config, "N")))
    family = _resolve(args, config, "family", "three_amplitude")
    seed = int(_resolve(args, config, "seed", 0))
    out = _resolve(args, config, "out")
    fmt = _resolve(args, config, "format", "csv")
    plot = _resolve(args, config, "plot")

    rows, slope_p, slope_q = _scaling_rows(mode, f_spin, n_values, family, seed)
    header = ["N", "delta_p", "delta_q", "mode", "family"]

    if plot:
        from .plotting import save_scaling_figure

        save_scaling_figure([r[:3] for r in rows], slope_p, slope_q, mode, plot)

    if fmt == "json":
        payload = {
            "rows": [dict(zip(header, row)) for row in rows],
            "slope_p": slope_p,
            "slope_q": slope_q,
        }
        _emit(_json_dump(payload), out)
    else:
        body = _csv(header, [[str(r[0]), _fmt(r[1]), _fmt(r[2]), r[3], r[4]] for r in rows])
        _emit(body, out)
        print(
            json.dumps({"slope_p": slope_p, "slope_q": slope_q}),
            file=sys.stderr,
        )
    return 0


# --------------------------------------------------------------- prepare


def cmd_prepare(args: argparse.Namespace, config: dict) -> int:
    method = _resolve(args, config, "method")
    n_atoms = int(_resolve(args, config, "N"))
    sweep_text = _resolve(args, config, "sweep")
    c2 = float(_resolve(args, config, "c2", -1.0))
    kappa = float(_resolve(args, config, "kappa", 1.0))
    out = _resolve(args, config, "out")
    fmt = _resolve(args, config, "format", "json")
    plot = _resolve(args, config, "plot")

    sweep = _parse_sweep(sweep_text) if sweep_text else None
    state, control, bound = fock3.optimal_prepared_state(
        method, n_atoms, sweep=sweep, c2=c2, kappa=kappa
    )
    dump = {
        "N": n_atoms,
        "method": method,
        "control": control,
        "alphas_re": [float(a.real) for a in state.alphas],
        "alphas_im": [float(a.imag) for a in state.alphas],
        "delta_p": float(bound.delta_p),
        "delta_q": float(bound.delta_q),
    }
    if plot:
        from .plotting import save_prepared_figure

        save_prepared_figure(state.alphas, control, method, plot)

    if fmt == "csv":
        rows = [[k, a.real, a.imag] for k, a in enumerate(state.alphas)]
        _emit(_csv(["k", "alpha_re", "alpha_im"], [[str(r[0]), _fmt(r[1]), _fmt(r[2])] for r in rows]), out)
        print(json.dumps({k: v for k, v in dump.items() if not k.startswith("alphas")}), file=sys.stderr)
    else:
        _emit(_json_dump(dump), out)
    return 0


# -------------------------------------------------------------- estimate


def cmd_estimate(args: argparse.Namespace, config: dict) -> int:
    n_atoms = int(_resolve(args, config, "N", 20))
    p = float(_resolve(args, config, "p"))
    q = float(_resolve(args, config, "q"))
    method = _resolve(args, config, "method", "smd")
    p_guess = _resolve(args, config, "p_guess")
    p_guess = abs(p) if p_guess is None else float(p_guess)
    samples = int(_resolve(args, config, "samples", 1024))
    out = _resolve(args, config, "out")
    fmt = _resolve(args, config, "format", "json")
    series_out = _resolve(args, config, "series_out")
    plot = _resolve(args, config, "plot")

    prepared, control, bound = fock3.optimal_prepared_state(method, n_atoms)
    grid = readout.default_time_grid(p_guess, samples=samples)
    series_p0, series_m0 = readout.signal_sweep(prepared, p, q, grid, p_guess)

    def series_csv() -> str:
        rows = [
            [_fmt(t), _fmt(a), _fmt(b)]
            for t, a, b in zip(grid, series_p0.values, series_m0.values)
        ]
        return _csv(["t", "sq_p0", "sq_m0"], rows)

    try:
        estimate = readout.fft_estimate(series_p0, series_m0)
    except EstimationError as exc:
        report = {
            "error": str(exc),
            "peaks": [list(pk) for pk in exc.peaks],
        }
        print(_json_dump(report), file=sys.stderr)
        raise

    report = {
        "N": n_atoms,
        "method": method,
        "control": control,
        "p": p,
        "q": q,
        "p_hat": estimate.p_hat,
        "q_hat": estimate.q_hat,
        "resolution": estimate.resolution,
        "flags": list(estimate.flags),
        "peaks_sq_p0": [{"omega": w, "magnitude": m} for w, m in estimate.peaks_sq_p0],
        "peaks_sq_m0": [{"omega": w, "magnitude": m} for w, m in estimate.peaks_sq_m0],
        "prepared_delta_p": bound.delta_p,
        "prepared_delta_q": bound.delta_q,
    }

    if plot:
        from .plotting import save_estimate_figure

        spectra = {
            "sq_p0": readout.detrended_spectrum(series_p0),
            "sq_m0": readout.detrended_spectrum(series_m0),
        }
        save_estimate_figure(spectra, estimate, plot)

    if series_out:
        with open(series_out, "w", encoding="utf-8") as fh:
            fh.write(series_csv())

    if fmt == "csv":
        _emit(series_csv(), out)
        print(json.dumps(report), file=sys.stderr)
    else:
        report["series"] = {
            "t": [float(t) for t in grid],
            "sq_p0": [float(v) for v in series_p0.values],
            "sq_m0": [float(v) for v in series_m0.values],
        }
        _emit(_json_dump(report), out)
    return 0


# ------------------------------------------------------------------ main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmetro",
        description="Precision bounds and three-mode interferometry for joint "
        "linear/quadratic Zeeman estimation",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--seed", type=int, help="seed for optimizer multi-starts")
    common.add_argument("--config", help="JSON config file; flags override its keys")
    common.add_argument("--plot", help="also render a figure to this file")

    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds = sub.add_parser("bounds", parents=[common], help="bounds per state family")
    p_bounds.add_argument("--family", required=True, choices=("uniform", "binomial", "optimal"))
    p_bounds.add_argument("--F", help="spin values, e.g. 2 or 1..5")
    p_bounds.add_argument("--N", type=int, help="atom number (default 1)")
    p_bounds.add_argument("--theta-samples", type=int, dest="theta_samples",
                          help="binomial only: sample a theta scan instead of theta = pi/2")
    p_bounds.add_argument("--ensemble", choices=("product", "ghz"))

    p_scaling = sub.add_parser("scaling", parents=[common], help="bounds versus atom number")
    p_scaling.add_argument(
        "--mode",
        required=True,
        choices=("product", "ghz", "simultaneous", "individual", "smd", "qpt"),
    )
    p_scaling.add_argument("--F", help="hyperfine spin (default 1)")
    p_scaling.add_argument("--N", required=True,
                           help="atom numbers: '8,16,32', '10..100:2' or '8..1024:x2'")
    p_scaling.add_argument("--family", choices=("general", "three_amplitude"))

    p_prepare = sub.add_parser("prepare", parents=[common], help="optimal prepared pair state")
    p_prepare.add_argument("--method", required=True, choices=("smd", "qpt"))
    p_prepare.add_argument("--N", type=int, required=True, help="even atom number")
    p_prepare.add_argument("--sweep", help="control sweep lo:hi:points")
    p_prepare.add_argument("--c2", type=float, help="spin-mixing rate (default -1)")
    p_prepare.add_argument("--kappa", type=float, help="pair-creation strength (default 1)")

    p_estimate = sub.add_parser("estimate", parents=[common],
                                help="end-to-end FFT estimation of (p, q)")
    p_estimate.add_argument("--N", type=int, help="even atom number (default 20)")
    p_estimate.add_argument("--p", type=float, required=True)
    p_estimate.add_argument("--q", type=float, required=True)
    p_estimate.add_argument("--method", choices=("smd", "qpt"))
    p_estimate.add_argument("--p-guess", type=float, dest="p_guess",
                            help="magnitude bound on p for grid sizing (default |p|)")
    p_estimate.add_argument("--samples", type=int, help="series length (default 1024)")
    p_estimate.add_argument("--series-out", dest="series_out",
                            help="also write the raw series CSV here")
    return parser


_HANDLERS = {
    "bounds": cmd_bounds,
    "scaling": cmd_scaling,
    "prepare": cmd_prepare,
    "estimate": cmd_estimate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        return _HANDLERS[args.command](args, config)
    except _ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
