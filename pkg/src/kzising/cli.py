"""Command line front end: ``kzising {quench,evolve,scan,oracle}``.

Every command writes plain data (CSV tables, JSON summaries). Output files go
to ``--outdir`` (default: current directory), which the ``KZISING_OUTDIR``
environment variable overrides.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis
from . import approximations as approx
from .driven import DEFAULT_G_START, DEFAULT_TOL, IntegrationError
from .ed_oracle import N_MAX, compare
from .lattice import build_grid
from .observables import (TimeSeries, default_dt, echo_series, excitation_probability,
                          ground_probability_per_mode, ground_state_probability, sz_series,
                          transverse_magnetization)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
ORACLE_THRESHOLD = 1e-7
ENV_OUTDIR = "KZISING_OUTDIR"

DEFAULT_TAUQ_GRID = (50.0, 100.0, 200.0, 400.0, 800.0)
DEFAULT_N_GRID = (1000, 1400, 2000, 2800, 4000)
# scan observable -> (table column, transform applied before the log-log fit)
SCAN_FITS = {
    "pgs": ("p_gs", lambda y: -math.log(y)),
    "sz0": ("sz0_minus_2pi", lambda y: y),
    "peak-amplitude": ("A", lambda y: y),
    "peak-width": ("W", lambda y: y),
    "echo-width": ("Wtilde", lambda y: y),
}


class ValidationError(ValueError):
    pass


def _outdir(args) -> Path:
    path = Path(os.environ.get(ENV_OUTDIR) or args.outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _validate_common(args) -> None:
    if args.n is not None and (args.n < 4 or args.n % 2):
        raise ValidationError(f"--n must be an even integer >= 4 (got {args.n})")
    tauq = getattr(args, "tauq", None)
    if tauq is not None and not tauq > 0:
        raise ValidationError(f"--tauq must be positive (got {tauq})")
    if not args.g_start > 1.0:
        raise ValidationError(f"--g-start must exceed the critical field 1 (got {args.g_start})")
    if not 0 < args.tol <= 1e-4:
        raise ValidationError(f"--tol must lie in (0, 1e-4] (got {args.tol})")


def _stem(kind: str, N, tau_Q) -> str:
    return f"{kind}_N{N}_tauQ{tau_Q:g}"


# ---------------------------------------------------------------- commands

def cmd_quench(args) -> int:
    _validate_common(args)
    grid = build_grid(args.n)
    out = _outdir(args)
    summary = {"N": args.n, "tau_Q": args.tauq, "g_start": args.g_start,
               "approx": bool(args.approx)}
    if args.approx:
        p_k = approx.approx_excitation_probability(grid, args.tauq)
        P_k = approx.approx_ground_probability_per_mode(grid, args.tauq)
        C = approx.constant_C()
        summary.update(p_gs=math.exp(math.fsum(np.log1p(-p_k))), C=C,
                       p_gs_integral=approx.ground_state_probability_approx(args.n, args.tauq, C))
        stem = _stem("quench_approx", args.n, args.tauq)
    else:
        state = analysis.critical_state(args.n, args.tauq, args.g_start, args.tol)
        p_k = excitation_probability(state)
        P_k = ground_probability_per_mode(state)
        sz0 = transverse_magnetization(state)
        summary.update(p_gs=ground_state_probability(state), sz0=sz0,
                       sz0_minus_2pi=sz0 - 2.0 / math.pi, norm_drift=state.norm_drift())
        stem = _stem("quench", args.n, args.tauq)
        if args.dump_modes:
            state.to_csv(out / f"{stem}_modes.csv")
    lines = ["k,k_sqrt_tauQ,p_k,P_k"]
    for k, pk, Pk in zip(grid.momenta, p_k, P_k):
        lines.append(",".join(repr(float(x)) for x in (k, k * math.sqrt(args.tauq), pk, Pk)))
    (out / f"{stem}.csv").write_text("\n".join(lines) + "\n")
    _dump_json(summary, out / f"{stem}.json")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_evolve(args) -> int:
    _validate_common(args)
    dt = args.dt if args.dt is not None else default_dt(args.tauq)
    t_max = args.tmax if args.tmax is not None else 3.0 * args.n
    if not dt > 0 or not t_max > 0:
        raise ValidationError("--dt and --tmax must be positive")
    state = analysis.critical_state(args.n, args.tauq, args.g_start, args.tol)
    out = _outdir(args)
    meta = dict(tau_Q=args.tauq, g_start=args.g_start, 
                linearized_dispersion=int(args.linearized_dispersion))
    grid = state.grid
    written = []
    if args.obs in ("sz", "both"):
        ser = sz_series(state, t_max, dt, linearized=args.linearized_dispersion, **meta)
        extra = None
        if args.with_approx:
            extra = {"SzSeries": approx.sz_leading_series(grid, args.tauq, ser.t),
                     "SzTrain": approx.sz_gaussian_train(grid.N, args.tauq, ser.t)}
        path = out / f"{_stem('sz', args.n, args.tauq)}.csv"
        ser.to_csv(path, extra)
        written.append(path)
    if args.obs in ("echo", "both"):
        ser = echo_series(state, t_max, dt, linearized=args.linearized_dispersion, **meta)
        extra = {}
        if args.power_one_over_n:
            extra["L_pow_1_over_N"] = ser.power_one_over_n()
        if args.with_approx:
            extra["EchoProduct"] = approx.echo_product_approx(grid, args.tauq, ser.t)
            extra["EchoRevivals"] = approx.echo_gaussian_revivals(grid.N, args.tauq, ser.t)
        path = out / f"{_stem('echo', args.n, args.tauq)}.csv"
        ser.to_csv(path, extra or None)
        written.append(path)
    if args.peaks:
        report = {}
        for path in written:
            ser = TimeSeries.from_csv(path)
            if ser.observable == "Sz":
                peaks = analysis.find_peaks(ser)
            else:
                peaks = analysis.find_peaks(ser, polarities=(analysis.MAX,))
            entry = {"peaks": analysis.peaks_as_dicts(peaks)}
            if len(peaks) >= 3:
                entry["spacing_fit"] = json.loads(analysis.spacing_fit(peaks).to_json())
            report[ser.observable] = entry
        _dump_json(report, out / f"{_stem('peaks', args.n, args.tauq)}.json")
    for path in written:
        print(path)
    return EXIT_OK


def _parse_grid(text, conv):
    return tuple(conv(x) for x in text.split(",") if x.strip())


def cmd_scan(args) -> int:
    _validate_common(args)
    obs = list(SCAN_FITS) if args.obs == "all" else [args.obs]
    if args.vary == "tauq":
        values = _parse_grid(args.values, float) if args.values else DEFAULT_TAUQ_GRID
        if args.n is None:
            raise ValidationError("--vary tauq needs --n")
        rows = analysis.scan_tau_q(args.n, values, obs, g_start=args.g_start, tol=args.tol)
        xcol, label = "tau_Q", f"scan_tauq_N{args.n}"
    else:
        values = _parse_grid(args.values, int) if args.values else DEFAULT_N_GRID
        if args.tauq is None:
            raise ValidationError("--vary n needs --tauq")
        for n in values:
            if n < 4 or n % 2:
                raise ValidationError(f"system sizes must be even and >= 4 (got {n})")
        rows = analysis.scan_system_size(args.tauq, values, obs, g_start=args.g_start,
                                         tol=args.tol)
        xcol, label = "N", f"scan_n_tauQ{args.tauq:g}"
    out = _outdir(args)
    analysis.table_to_csv(rows, out / f"{label}.csv")
    fits = {}
    if len(rows) >= 3:
        for name in obs:
            col, transform = SCAN_FITS[name]
            pts = [(r[xcol], transform(r[col])) for r in rows]
            fits[name] = json.loads(analysis.loglog_fit(pts).to_json())
    _dump_json(fits, out / f"{label}_fits.json")
    print(json.dumps(fits, sort_keys=True))
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.n is None or args.n % 2 or not 4 <= args.n <= N_MAX:
        raise ValidationError(f"oracle supports even N with 4 <= N <= {N_MAX} (got {args.n}); "
                              "the 2^N spin space grows too fast beyond that")
    _validate_common(args)
    report = compare(args.n, args.tauq, args.g_start, args.tmax, tol=args.tol)
    report["dE0"] = float(report["dE0"])
    report["threshold"] = ORACLE_THRESHOLD
    passed = (report["max_dSz"] < ORACLE_THRESHOLD and report["max_dL"] < ORACLE_THRESHOLD
              and report["dE0"] < 1e-10)
    report["status"] = "PASS" if passed else "FAIL"
    _dump_json(report, _outdir(args) / f"oracle_N{args.n}_tauQ{args.tauq:g}.json")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK if passed else EXIT_NUMERICAL


# ---------------------------------------------------------------- parser

def _add_common(p: argparse.ArgumentParser) -> None:
    # added per subcommand rather than through a parent parser, whose Action
    # objects would be shared and so would leak set_defaults between commands
    p.add_argument("--n", type=int, help="number of spins (even)")
    p.add_argument("--tauq", type=float, help="quench time tau_Q")
    p.add_argument("--g-start", type=float, default=DEFAULT_G_START,
                   help="field at which the ramp starts (default %(default)s)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                   help="local error tolerance of the ramp integrator (default %(default)s)")
    p.add_argument("--outdir", default=".", help="output directory")
    p.add_argument("--threads", type=int, help="cap on worker threads")
    p.add_argument("--config", help="JSON file with option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kzising", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quench", help="drive to the critical point")
    _add_common(p)
    p.add_argument("--approx", action="store_true",
                   help="use the closed-form small-k amplitudes instead of integration")
    p.add_argument("--dump-modes", action="store_true",
                   help="also write (k, Re v, Im v, Re u, Im u)")
    p.set_defaults(func=cmd_quench, n=2000, tauq=100.0)

    p = sub.add_parser("evolve", help="free evolution at the critical point")
    _add_common(p)
    p.add_argument("--obs", choices=("sz", "echo", "both"), default="both")
    p.add_argument("--tmax", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--power-one-over-n", action="store_true", help="add an L^(1/N) column")
    p.add_argument("--linearized-dispersion", action="store_true",
                   help="replace 4 sin(k/2) by 2k (exactly N/2-periodic)")
    p.add_argument("--with-approx", action="store_true",
                   help="add the closed-form approximation curves as columns")
    p.add_argument("--peaks", action="store_true", help="detect peaks and write a JSON report")
    p.set_defaults(func=cmd_evolve, n=2000, tauq=100.0)

    p = sub.add_parser("scan", help="scan tau_Q or N and fit power laws")
    _add_common(p)
    p.add_argument("--vary", choices=("tauq", "n"), required=True)
    p.add_argument("--values", help="comma separated grid of the varied parameter")
    p.add_argument("--obs", choices=tuple(SCAN_FITS) + ("all",), default="all")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("oracle", help="compare with exact diagonalization")
    _add_common(p)
    p.add_argument("--tmax", type=float)
    p.set_defaults(func=cmd_oracle, n=6, tauq=10.0)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the ``--config`` JSON file, if given."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {args.config}: {exc}") from exc
    cfg = {key.replace("-", "_"): val for key, val in cfg.items()}
    known = set(vars(args))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.threads:
            import numba
            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationError, approx.QuadratureError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
