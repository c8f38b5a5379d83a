"""Command-line front end.

All times are in units of ``1/gamma`` and detunings in units of ``gamma``.
Every output file carries an echo of the configuration that produced it.

Exit status: 0 on success, 2 on usage errors, 3 when a computation did not
converge (suppressed by ``--allow-partial``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .core import ModelParams
from .nonmarkov import DEFAULT_CLASSIFY_TOL, nm_measure
from .solver import DEFAULT_MESH_PER_DELAY, amplitude_mos, amplitude_series, lindblad_amplitude
from .spectrum import spectrum_scan
from .sweep import ComputeOptions, default_gtd_axis, default_phi_axis, sweep_measure, threshold_curve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

WORKERS_ENV = "HALFCAVITY_WORKERS"


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """Full-precision decimal text that parses back to the identical float."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return format(float(x), ".17g")


def _positive(kind=float):
    def parse(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not (math.isfinite(val) and val > 0):
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val

    return parse


def _finite(text):
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return val


def _float_list(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _default_workers():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(n, 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="halfcavity", description="Emitter-mirror dynamics and non-Markovianity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("-o", "--output", default="-", help="output file, '-' for stdout")

    def point(p):
        p.add_argument("--gtd", type=_finite, required=True, help="gamma * t_d")
        p.add_argument("--phi", type=_finite, required=True, help="round-trip phase in radians")

    def numerics(p):
        p.add_argument("--mesh-per-delay", type=_positive(int), default=None)
        p.add_argument("--classify-tol", type=_positive(), default=DEFAULT_CLASSIFY_TOL)
        p.add_argument("--max-horizon", type=_positive(), default=None)
        p.add_argument("--allow-partial", action="store_true", help="exit 0 even if some cells did not converge")

    p = sub.add_parser("amplitude", help="amplitude trajectory eps(t)")
    point(p)
    p.add_argument("--horizon", type=_positive(), default=30.0)
    p.add_argument("--mesh-per-delay", type=_positive(int), default=DEFAULT_MESH_PER_DELAY)
    p.add_argument("--method", choices=("mos", "series", "lindblad"), default="mos")
    common(p)

    p = sub.add_parser("measure", help="non-Markovianity measure at one point")
    point(p)
    p.add_argument("--horizon", type=_positive(), default=None)
    numerics(p)
    common(p)

    p = sub.add_parser("sweep", help="measure over a (phi, gamma t_d) grid")
    p.add_argument("--phi-points", type=_positive(int), default=81)
    p.add_argument("--gtd-points", type=_positive(int), default=60)
    p.add_argument("--gtd-min", type=_positive(), default=0.02)
    p.add_argument("--gtd-max", type=_positive(), default=30.0)
    p.add_argument("--phi-list", type=_float_list, default=None)
    p.add_argument("--gtd-list", type=_float_list, default=None)
    p.add_argument("--workers", type=_positive(int), default=None)
    numerics(p)
    common(p)

    p = sub.add_parser("threshold", help="Markovian threshold in gamma t_d per phase")
    p.add_argument("--phi-points", type=_positive(int), default=None, help="evenly spaced phases on [0, 2*pi] (default 41)")
    p.add_argument("--list", dest="phi_list", type=_float_list, default=None, help="explicit phases, comma-separated")
    p.add_argument("--gtd-max", type=_positive(), default=5.0)
    p.add_argument("--bisection-tol", type=_positive(), default=0.01)
    p.add_argument("--workers", type=_positive(int), default=None)
    numerics(p)
    common(p)

    p = sub.add_parser("spectrum", help="bath spectral density J(Delta)")
    point(p)
    p.add_argument("--delta-min", type=_finite, required=True, help="in units of gamma")
    p.add_argument("--delta-max", type=_finite, required=True, help="in units of gamma")
    p.add_argument("--points", type=_positive(int), default=201)
    common(p)
    return parser


def _config_echo(args) -> dict:
    # worker count never changes results, so it stays out of the file
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "workers")}
    return json.loads(json.dumps(echo))


def _table(columns, rows):
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, str) or x is None:
        return x
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return [_jsonable(v) for v in x]


def render(fmt_name: str, meta: dict, table: dict, extra: dict | None = None) -> str:
    if fmt_name == "json":
        data = {"columns": table["columns"], "rows": table["rows"]}
        if extra:
            data.update(extra)
        doc = {"meta": meta, "data": data}
        return json.dumps(_jsonable(doc), indent=1, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table["columns"])
    for row in table["rows"]:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def _cmd_amplitude(args):
    params = ModelParams.from_dimensionless(args.gtd, args.phi)
    if args.method == "mos":
        if args.gtd <= 0:
            raise UsageError("--method mos needs --gtd > 0")
        traj = amplitude_mos(params, args.horizon, args.mesh_per_delay)
        keep = traj.times <= args.horizon * (1 + 1e-12)
        t = traj.scaled_times[keep]
        eps = traj.values[keep]
    else:
        if args.gtd < 0:
            raise UsageError("--gtd must be non-negative")
        n = int(math.ceil(args.horizon / 0.01)) + 1
        t = np.linspace(0.0, args.horizon, n)
        if args.method == "series":
            eps = amplitude_series(params, t)
        else:
            eps = lindblad_amplitude(1.0, params.canonical_phi, t)
    p = np.abs(eps) ** 2
    rows = zip(t, eps.real, eps.imag, p, p * p)
    return _table(("t_gamma", "re_eps", "im_eps", "abs_eps2", "abs_eps4"), rows), None, True


def _cmd_measure(args):
    if args.gtd < 0:
        raise UsageError("--gtd must be non-negative")
    params = ModelParams.from_dimensionless(args.gtd, args.phi)
    r = nm_measure(params, args.horizon, args.mesh_per_delay, args.classify_tol, args.max_horizon)
    rows = [
        ("measure", "", "", r.measure),
        ("truncation_bound", "", "", r.truncation_bound),
        ("markovian", "", "", r.markovian),
        ("converged", "", "", r.converged),
        ("horizon", "", "", r.horizon_used),
    ]
    rows += [("interval", fmt(iv.start), fmt(iv.end), iv.volume_gain) for iv in r.intervals]
    extra = {
        "measure": r.measure,
        "truncation_bound": r.truncation_bound,
        "verdict": "markovian" if r.markovian else "non-markovian",
        "converged": r.converged,
        "horizon": r.horizon_used,
        "mesh_per_delay": r.mesh_per_delay,
        "intervals": [[iv.start, iv.end, iv.volume_gain] for iv in r.intervals],
    }
    return _table(("record", "start", "end", "value"), rows), extra, r.converged


def _options(args):
    workers = args.workers if args.workers is not None else _default_workers()
    return ComputeOptions(
        mesh_per_delay=args.mesh_per_delay,
        classify_tol=args.classify_tol,
        max_horizon=args.max_horizon,
        workers=workers,
    )


def _cmd_sweep(args):
    phi = np.asarray(args.phi_list) if args.phi_list else default_phi_axis(args.phi_points)
    if args.gtd_list:
        gtd = np.asarray(args.gtd_list)
    else:
        if not args.gtd_min < args.gtd_max:
            raise UsageError("--gtd-min must be below --gtd-max")
        gtd = default_gtd_axis(args.gtd_points, args.gtd_min, args.gtd_max)
    try:
        grid = sweep_measure(phi, gtd, _options(args))
    except ValueError as exc:
        raise UsageError(str(exc))
    columns = ["gtd"] + [fmt(p) for p in grid.phi_values]
    rows = [[g] + list(row) for g, row in zip(grid.gtd_values, grid.measures)]
    extra = {
        "phi": grid.phi_values,
        "gtd": grid.gtd_values,
        "truncation_bounds": grid.truncation_bounds.tolist(),
        "horizons": grid.horizons.tolist(),
        "converged": grid.converged.tolist(),
        "multi_flip_columns": grid.multi_flip_columns(),
    }
    return _table(columns, rows), extra, grid.all_converged


def _cmd_threshold(args):
    if args.phi_list is not None:
        if args.phi_points is not None and len(args.phi_list) != args.phi_points:
            raise UsageError("--phi-points does not match the length of --list")
        phi = np.asarray(args.phi_list)
    else:
        phi = default_phi_axis(args.phi_points or 41)
    curve = threshold_curve(phi, args.gtd_max, args.bisection_tol, args.classify_tol, _options(args))
    rows = zip(curve.phi_values, curve.critical_gtd)
    extra = {"failures": {fmt(k): v for k, v in sorted(curve.failures.items())}}
    return _table(("phi", "critical_gtd"), rows), extra, not curve.failures


def _cmd_spectrum(args):
    if args.gtd < 0:
        raise UsageError("--gtd must be non-negative")
    params = ModelParams.from_dimensionless(args.gtd, args.phi)
    try:
        pts = spectrum_scan(params, args.delta_min, args.delta_max, args.points)
    except ValueError as exc:
        raise UsageError(str(exc))
    rows = [(p.detuning, p.density * math.pi) for p in pts]
    return _table(("delta_over_gamma", "j_pi_over_gamma"), rows), None, True


COMMANDS = {
    "amplitude": _cmd_amplitude,
    "measure": _cmd_measure,
    "sweep": _cmd_sweep,
    "threshold": _cmd_threshold,
    "spectrum": _cmd_spectrum,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        table, extra, ok = COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"halfcavity {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = {"version": __version__, "config": _config_echo(args)}
    text = render(args.format, meta, table, extra)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"halfcavity: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if not ok and not getattr(args, "allow_partial", False):
        print(f"halfcavity {args.subcommand}: some results did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
