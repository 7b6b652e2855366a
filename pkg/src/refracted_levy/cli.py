"""Command-line interface.

Subcommands: roots, scale, factors, resolvent, simulate, verify.  Exit
codes: 0 success, 1 validation failure, 2 numerical failure, 3 verify
suite failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import load_model_file
from .errors import (
    ConvergenceError,
    InternalConsistencyError,
    ModelValidationError,
    QuadratureError,
    RefractedLevyError,
)
from .factors import FactorSet
from .mc import SimConfig, build_histogram, compare_to_density, sample_terminal
from .resolvent import Resolvent
from .roots import root_pair
from .scale import build_scale
from .verify import run_verify

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3
EXIT_USAGE = 64


def _fmt(value) -> str:
    """17-significant-digit decimal rendering (round-trips exactly)."""
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return "%.17g" % value


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="refracted-levy",
        description="q-potential densities of refracted spectrally negative "
        "Levy processes, by scale functions and by Wiener-Hopf factors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--model", required=True,
                       help="model config path or preset name (std-bm, cl-exp)")
        p.add_argument("--q", type=float, default=1.0, help="discount rate (default 1)")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("roots", help="roots of the (tilted) exponent equations")
    common(p)

    p = sub.add_parser("scale", help="tabulate a scale function")
    common(p)
    p.add_argument("--process", choices=("X", "Y"), default="X",
                   help="driving process X or tilted process Y")
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--step", type=float, default=0.05)

    p = sub.add_parser("factors", help="tabulate the factor functions and kernel")
    common(p)
    p.add_argument("--x-min", type=float, default=-5.0)
    p.add_argument("--x-max", type=float, default=5.0)
    p.add_argument("--step", type=float, default=0.05)

    p = sub.add_parser("resolvent", help="density of the process at time e(q)")
    common(p)
    p.add_argument("--x", type=float, required=True, help="starting point")
    p.add_argument("--y-min", type=float, default=-6.0)
    p.add_argument("--y-max", type=float, default=6.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--route", choices=("scale", "wiener-hopf", "both"),
                   default="both")

    p = sub.add_parser("simulate", help="Monte Carlo histogram at time e(q)")
    common(p, seed=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--h", type=float, default=1e-3, help="Euler step")
    p.add_argument("--n", type=int, default=200_000, help="number of paths")
    p.add_argument("--bin-width", type=float, default=0.25)
    p.add_argument("--span", type=float, default=6.0,
                   help="histogram half-width around the threshold")
    p.add_argument("--compare", action="store_true",
                   help="add z-scores against the analytic density")

    p = sub.add_parser("verify", help="run the full identity suite")
    common(p)

    return parser


def _emit(args, rows, header, json_obj):
    """Write CSV rows or a JSON object per the requested format."""
    fmt = args.format or ("json" if args.command in ("roots", "verify") else "csv")
    if fmt == "json":
        text = json.dumps(json_obj, indent=2) + "\n"
    else:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) if isinstance(v, (int, float)) or v is None
                                  else str(v) for v in row))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_roots(args, model, params):
    rp = root_pair(model, params.delta, args.q)
    rows = [[rp.q, rp.phi, rp.varphi, rp.residuals[0], rp.residuals[1]]]
    _emit(args, rows, ["q", "phi", "varphi", "residual_phi", "residual_varphi"],
          rp.as_dict())
    return EXIT_OK


def _cmd_scale(args, model, params):
    tilt = params.delta if args.process == "Y" else 0.0
    ev = build_scale(model, args.q, tilt)
    xs = np.arange(0.0, args.x_max + 1e-12, args.step)
    rows = []
    for x in xs:
        wp = ev.W_prime(x) if x > 0 else None
        rows.append([x, ev.W(x), wp, ev.backend, args.q, ev.process_tag])
    json_obj = {
        "q": args.q,
        "process": ev.process_tag,
        "backend": ev.backend,
        "leading_root": ev.leading_root,
        "values": [
            {"x": r[0], "W": r[1], "W_prime": r[2]} for r in rows
        ],
    }
    _emit(args, rows, ["x", "W", "W_prime", "backend", "q", "process_tag"], json_obj)
    return EXIT_OK


def _cmd_factors(args, model, params):
    fs = FactorSet(model, params, args.q)
    xs = np.arange(args.x_min, args.x_max + 1e-12, args.step)
    rows = []
    for x in xs:
        pos = x >= 0
        rows.append([
            x,
            fs.F1(x) if pos else None,
            fs.F1_prime(x) if pos else None,
            fs.F2(x) if not pos or x == 0 else None,
            fs.F2_prime(x) if not pos or x == 0 else None,
            fs.f_aux(x) if not pos or x == 0 else None,
            fs.Kq_density(x),
        ])
    json_obj = {
        "q": args.q,
        "phi": fs.phi,
        "varphi": fs.varphi,
        "values": [
            dict(zip(("x", "F1", "F1_prime", "F2", "F2_prime", "f", "Kq_density"), r))
            for r in rows
        ],
    }
    _emit(args, rows,
          ["x", "F1", "F1_prime", "F2", "F2_prime", "f", "Kq_density"], json_obj)
    return EXIT_OK


def _cmd_resolvent(args, model, params):
    res = Resolvent(model, params, args.q)
    ys = np.arange(args.y_min, args.y_max + 1e-12, args.step)
    import time

    t0 = time.time()
    if len(ys) >= 2:
        grid = res.density_grid(args.x, ys, route=args.route)
        dens_a, dens_b = grid.density_scale, grid.density_wh
        diagnostics = {
            "route_gap": grid.route_gap,
            "normalization_defect": grid.normalization_defect,
            "threshold_gap": grid.threshold_gap,
        }
    else:
        # single-point query: no grid diagnostics to report
        dens_a = dens_b = None
        if args.route in ("scale", "both"):
            dens_a = np.array([res.density_scale(args.x, y) for y in ys])
        if args.route in ("wiener-hopf", "both"):
            dens_b = np.array([res.density_wh(args.x, y) for y in ys])
        diagnostics = {}
    elapsed = time.time() - t0
    rows = []
    for i, y in enumerate(ys):
        da = dens_a[i] if dens_a is not None else None
        db = dens_b[i] if dens_b is not None else None
        gap = abs(da - db) if da is not None and db is not None else None
        note = "threshold" if y == params.b else ""
        rows.append([y, da, db, gap, note])
    json_obj = {
        "x": args.x,
        "q": args.q,
        "route": args.route,
        "elapsed_seconds": elapsed,
        **diagnostics,
    }
    _emit(args, rows, ["y", "density_scale", "density_wh", "gap", "note"], json_obj)
    return EXIT_OK


def _cmd_simulate(args, model, params):
    cfg = SimConfig(step_h=args.h, n_paths=args.n, seed=args.seed,
                    bin_width=args.bin_width)
    samples = sample_terminal(model, params, args.x, args.q, cfg)
    lo = params.b - args.span
    hi = params.b + args.span
    edges = np.arange(lo, hi + 1e-12, cfg.bin_width)
    emp = build_histogram(samples, edges)
    rows = [
        [emp.edges[i], emp.edges[i + 1], emp.counts[i], emp.density[i],
         emp.standard_errors[i]]
        for i in range(len(emp.counts))
    ]
    json_obj = {
        "n_paths": cfg.n_paths,
        "step_h": cfg.step_h,
        "seed": cfg.seed,
        "mean": float(np.mean(samples)),
        "bins": [
            dict(zip(("lo", "hi", "count", "density", "se"), r)) for r in rows
        ],
    }
    if args.compare:
        res = Resolvent(model, params, args.q)
        ys = np.arange(lo, hi + 1e-12, 0.05)
        dens = np.array([res.density_scale(args.x, y) for y in ys])
        rep = compare_to_density(emp, ys, dens)
        json_obj["z_report"] = rep.as_dict()
    _emit(args, rows, ["lo", "hi", "count", "density", "se"], json_obj)
    return EXIT_OK


def _cmd_verify(args, model, params):
    report = run_verify(model, params, args.q)
    for line in report.summary_lines():
        print(line)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report.as_dict(), fh, indent=2)
            fh.write("\n")
    return EXIT_OK if report.ok else EXIT_VERIFY


_COMMANDS = {
    "roots": _cmd_roots,
    "scale": _cmd_scale,
    "factors": _cmd_factors,
    "resolvent": _cmd_resolvent,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        model, params = load_model_file(args.model)
        return _COMMANDS[args.command](args, model, params)
    except ModelValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, QuadratureError, InternalConsistencyError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except RefractedLevyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
