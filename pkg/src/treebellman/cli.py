"""Batch front-end: Bellman values, verification batteries, sharpness
certificates, and sweep tables from the command line.

Subcommands
-----------
omega     tabulate omega_p, h_poly and u_func over a ratio grid
bellman2  unrestricted Bellman value for (p, f, F)
bellman3  restricted Bellman value and argmax mass for (p, f, F, k)
verify    run the randomized verification battery
certify   sharpness certificate for one (p, f, F, k) query
sweep     CSV table of restricted values over a (f^p/F, k) grid

Output is JSON (default) or CSV, to stdout or --out; runs are
deterministic for a fixed seed and flag set.  Flag precedence is
command line > --config JSON file > built-in defaults.  Exit status is
0 on success, 1 if a requested check failed (its report goes to stderr
as JSON), 2 for bad usage or bad parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .battery import run_battery
from .bellman import BellmanQuery, bellman_three_var, bellman_two_var, feasible_interval
from .extremal import build_composite, certify_sharpness
from .special import h_poly, omega_p, u_func
from .trees import tree_function_to_dict

__all__ = ["main", "run"]

_SWEEP_HEADER = ["p", "f", "F", "k", "value", "argmax_B", "feasible_lo", "feasible_hi"]


def _parse_grid(text: str) -> list[float]:
    """Comma list 'a,b,c' or 'start:stop:count' linear grid."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [float(v) for v in text.split(",")]


def _emit(doc, rows, header, args) -> None:
    """Write the run result as JSON (doc) or CSV (rows + header)."""
    if args.format == "json":
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_omega(args) -> int:
    table = []
    rows = []
    for x in _parse_grid(args.grid):
        x = float(x)
        om = omega_p(x, args.p)
        entry = {"x": x, "omega": om, "h_of_omega": h_poly(om, args.p)}
        if x > 0.0:
            entry["u"] = u_func(x, args.p)
        table.append(entry)
        rows.append([repr(x), repr(om), repr(entry["h_of_omega"]),
                     repr(entry["u"]) if x > 0.0 else ""])
    _emit({"p": args.p, "table": table}, rows, ["x", "omega", "h_of_omega", "u"], args)
    return 0


def _cmd_bellman2(args) -> int:
    q = BellmanQuery(args.p, args.f, args.F)
    value = bellman_two_var(q)
    doc = {"p": args.p, "f": args.f, "F": args.F, "ratio": q.ratio, "value": value}
    _emit(doc, [[repr(args.p), repr(args.f), repr(args.F), repr(value)]],
          ["p", "f", "F", "value"], args)
    return 0


def _sweep_row(p: float, f: float, F: float, k: float, grid_points: int):
    q = BellmanQuery(p, f, F, k)
    value, argmax = bellman_three_var(q, grid_points=grid_points)
    if k < 1.0 and F > f**p * (1.0 + 1e-12):
        iv = feasible_interval(q)
        lo, hi = iv.lo, iv.hi
    else:
        lo = hi = argmax  # degenerate query: the mass is forced
    return value, argmax, lo, hi


def _cmd_bellman3(args) -> int:
    value, argmax, lo, hi = _sweep_row(args.p, args.f, args.F, args.k, args.grid_points)
    doc = {
        "p": args.p, "f": args.f, "F": args.F, "k": args.k,
        "value": value, "argmax_B": argmax,
        "feasible_lo": lo, "feasible_hi": hi,
    }
    row = [repr(v) for v in (args.p, args.f, args.F, args.k, value, argmax, lo, hi)]
    _emit(doc, [row], _SWEEP_HEADER, args)
    return 0


def _cmd_verify(args) -> int:
    summary = run_battery(
        n_trees=args.trees,
        max_depth=args.depth,
        subsets_per_tree=args.subsets,
        seed=args.seed,
    )
    rows = [
        [name, summary.checks_run[name], repr(summary.worst_margin[name])]
        for name in sorted(summary.checks_run)
    ]
    _emit(summary.to_dict(), rows, ["check", "runs", "worst_margin"], args)
    if not summary.all_passed:
        for rep in summary.failures:
            sys.stderr.write(rep.to_json() + "\n")
        return 1
    return 0


def _cmd_certify(args) -> int:
    q = BellmanQuery(args.p, args.f, args.F, args.k)
    report = certify_sharpness(
        q, eps=args.eps, r_max=args.r_max, depth_max=args.depth_max, seed=args.seed
    )
    fraction = report.lhs / report.rhs if report.rhs > 0.0 else 1.0
    rows = [[
        repr(args.p), repr(args.f), repr(args.F), repr(args.k),
        repr(report.rhs), repr(report.lhs), repr(fraction), report.passed,
    ]]
    _emit(report.to_dict(), rows,
          ["p", "f", "F", "k", "value", "achieved", "fraction", "passed"], args)
    if args.dump_witness:
        best = max(report.details["escalation"], key=lambda e: e["achieved"])
        build = build_composite(
            q, report.details["argmax_B"], best["ratio"], best["depth"]
        )
        with open(args.dump_witness, "w") as fh:
            json.dump(tree_function_to_dict(build.phi), fh)
    if not report.passed:
        sys.stderr.write(report.to_json() + "\n")
        return 1
    return 0


def _cmd_sweep(args) -> int:
    ratios = _parse_grid(args.ratios)
    ks = _parse_grid(args.ks)
    bad = [v for v in ratios + ks if not 0.0 < v <= 1.0]
    if bad:
        raise ValueError(f"ratios and ks must lie in (0, 1], got {bad}")
    rows = []
    table = []
    for x in ratios:
        F = args.f**args.p / x
        for k in ks:
            value, argmax, lo, hi = _sweep_row(args.p, args.f, F, k, args.grid_points)
            rows.append([repr(v) for v in (args.p, args.f, F, k, value, argmax, lo, hi)])
            table.append(dict(zip(_SWEEP_HEADER, (args.p, args.f, F, k, value, argmax, lo, hi))))
    _emit({"p": args.p, "f": args.f, "rows": table}, rows, _SWEEP_HEADER, args)
    return 0


def _build_parser(config: dict) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="treebellman",
        description="Bellman values of the tree maximal operator, verified numerically.",
    )
    ap.add_argument("--config", help="JSON file of flag defaults (flags still win)")
    sub = ap.add_subparsers(dest="command", required=True)

    def arg(p, flag, **kw):
        # config supplies the default and lifts `required`; flags still win
        dest = flag.lstrip("-").replace("-", "_")
        if dest in config:
            kw["default"] = config[dest]
            kw.pop("required", None)
        p.add_argument(flag, **kw)

    def add_common(p):
        arg(p, "--out", help="write the result here instead of stdout")
        arg(p, "--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("omega", help="tabulate omega_p / h_poly / u_func")
    arg(p, "--p", type=float, required=True)
    arg(p, "--grid", default="0:1:101", help="'a,b,c' or 'start:stop:count'")
    add_common(p)
    p.set_defaults(fn=_cmd_omega)

    p = sub.add_parser("bellman2", help="unrestricted Bellman value")
    arg(p, "--p", type=float, required=True)
    arg(p, "--f", type=float, required=True)
    arg(p, "--F", type=float, required=True)
    add_common(p)
    p.set_defaults(fn=_cmd_bellman2)

    p = sub.add_parser("bellman3", help="restricted Bellman value")
    arg(p, "--p", type=float, required=True)
    arg(p, "--f", type=float, required=True)
    arg(p, "--F", type=float, required=True)
    arg(p, "--k", type=float, required=True)
    arg(p, "--grid-points", type=int, default=4096)
    add_common(p)
    p.set_defaults(fn=_cmd_bellman3)

    p = sub.add_parser("verify", help="randomized verification battery")
    arg(p, "--trees", type=int, default=1000)
    arg(p, "--depth", type=int, default=12)
    arg(p, "--subsets", type=int, default=10)
    arg(p, "--seed", type=int, default=42)
    add_common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("certify", help="sharpness certificate for one query")
    arg(p, "--p", type=float, required=True)
    arg(p, "--f", type=float, required=True)
    arg(p, "--F", type=float, required=True)
    arg(p, "--k", type=float, required=True)
    arg(p, "--eps", type=float, default=0.05)
    arg(p, "--r-max", type=float, default=0.99)
    arg(p, "--depth-max", type=int, default=2000)
    arg(p, "--seed", type=int, default=None)
    arg(p, "--dump-witness", help="write the witness function as JSON here")
    add_common(p)
    p.set_defaults(fn=_cmd_certify)

    p = sub.add_parser("sweep", help="table of restricted values over a grid")
    arg(p, "--p", type=float, required=True)
    arg(p, "--f", type=float, default=1.0)
    arg(p, "--ratios", default="0.1:1:10", help="f^p/F grid, values in (0, 1]")
    arg(p, "--ks", default="0.1:1:10", help="set-measure grid, values in (0, 1]")
    arg(p, "--grid-points", type=int, default=4096)
    add_common(p)
    p.set_defaults(fn=_cmd_sweep)
    return ap


def run(argv=None) -> int:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre_ns, rest = pre.parse_known_args(argv)
    config: dict = {}
    if pre_ns.config:
        with open(pre_ns.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("--config must hold a JSON object of flag defaults")
        config = {k.replace("-", "_"): v for k, v in config.items()}
    args = _build_parser(config).parse_args(rest)
    return args.fn(args)


def main(argv=None) -> int:
    try:
        return run(argv)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
