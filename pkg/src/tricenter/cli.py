"""Command-line front end.

Every command writes its data files and a ``<command>_manifest.json`` into
``--out-dir`` and prints a JSON summary on stdout. Exit codes: 0 success,
1 a verification check failed, 2 usage or domain error, 3 collision with a
center, 4 numerical failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, kam, verify
from .core import (
    TRAJECTORY_HEADER,
    CartesianState,
    SystemConfig,
    integrate,
    read_csv,
    trajectory_table,
    write_csv,
)
from .equilibria import (
    classify,
    equilibrium,
    near_return_distance,
    reconstruct_orbit,
    return_envelope,
)
from .errors import CollisionError, DomainError, TricenterError
from .kepler import DelaunayElements, cartesian_to_delaunay, delaunay_to_cartesian

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_COLLISION, EXIT_NUMERICAL = 0, 1, 2, 3, 4


class UsageError(Exception):
    """Invalid combination of command-line flags."""


def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"{name}: expected comma-separated numbers") from exc
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"{name}: expected {n} numbers, got {len(vals)}")
    return vals


def _vec3(text):
    return _floats(text, 3, "vector")


def _vec6(text):
    return _floats(text, 6, "Delaunay elements")


def _pair(text):
    vals = tuple(int(v) for v in text.split(","))
    if vals not in kam.PAIRS:
        raise argparse.ArgumentTypeError("pair must be 1,2 or 3,4")
    return vals


class Run:
    """Collects output paths and check results for the manifest."""

    def __init__(self, args):
        self.args = args
        self.outputs = []
        self.checks = {}
        os.makedirs(args.out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.args.out_dir, name)

    def table(self, stem, header, rows):
        """Write a numeric table as CSV or JSON according to ``--format``."""
        if self.args.format == "csv":
            path = self.path(stem + ".csv")
            write_csv(path, header, rows)
        else:
            path = self.path(stem + ".json")
            self.json(path, {"columns": header.split(","),
                             "rows": np.asarray(rows, dtype=float).tolist()}, record=False)
        self.outputs.append(path)
        return path

    def json(self, path, obj, record=True):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if record:
            self.outputs.append(path)
        return path

    def manifest(self):
        params = {k: v for k, v in sorted(vars(self.args).items()) if k != "func"}
        path = self.path(f"{self.args.command}_manifest.json")
        self.outputs.append(path)
        doc = {"command": self.args.command, "parameters": params, "version": __version__,
               "outputs": list(self.outputs), "checks": self.checks}
        self.json(path, doc, record=False)
        return path


def _config(args):
    return SystemConfig(args.eps, rel_tol=args.tol_rel, abs_tol=args.tol_abs)


def _initial_state(args):
    given = sum(x is not None for x in (args.delaunay, args.q, args.equilibrium))
    if given != 1:
        raise UsageError("give exactly one of --delaunay, --q/--p or --equilibrium")
    if args.delaunay is not None:
        return delaunay_to_cartesian(DelaunayElements.from_array(args.delaunay), allow_boundary=True)
    if args.q is not None:
        if args.p is None:
            raise UsageError("--q requires --p")
        return CartesianState(args.q, args.p)
    return reconstruct_orbit(equilibrium("first", args.equilibrium, args.L), args.eps)


def cmd_simulate(args, run):
    s0 = _initial_state(args)
    traj = integrate(s0, args.t_end, _config(args), samples=args.samples)
    run.table(args.out, TRAJECTORY_HEADER, trajectory_table(traj))
    final = np.concatenate([traj.q[-1], traj.p[-1]])
    summary = {"initial_state": s0.as_array().tolist(), "final_state": final.tolist(),
               "return_distance": float(np.linalg.norm(final - s0.as_array())),
               "max_relative_energy_drift": traj.max_relative_energy_drift}
    run.json(run.path(args.out + "_summary.json"), summary)
    return summary, EXIT_OK


def cmd_elements(args, run):
    if (args.delaunay is None) == (args.q is None):
        raise UsageError("give either --delaunay or --q/--p")
    if args.delaunay is not None:
        s = delaunay_to_cartesian(DelaunayElements.from_array(args.delaunay), allow_boundary=True)
        result = {"q": s.q.tolist(), "p": s.p.tolist()}
    else:
        if args.p is None:
            raise UsageError("--q requires --p")
        d = cartesian_to_delaunay(CartesianState(args.q, args.p))
        result = json.loads(d.to_json())
        result["chart_singular"] = d.chart_singular
    run.json(run.path("elements.json"), result)
    return result, EXIT_OK


def cmd_reconstruct(args, run):
    e = equilibrium("first", args.index, args.L)
    cfg = _config(args)
    (t, f), f_at_T = near_return_distance(e, args.eps, cfg, span=args.span, samples=args.samples)
    stem = f"{args.out}_E{args.index}"
    run.table(stem + "_fcurve", "t,f", np.column_stack([t, f]))
    s0 = reconstruct_orbit(e, args.eps)
    traj = integrate(s0, args.span * 2 * np.pi * args.L**3, cfg, samples=args.samples)
    run.table(stem + "_trajectory", TRAJECTORY_HEADER, trajectory_table(traj))
    summary = {"index": args.index, "L": args.L, "epsilon": args.eps,
               "initial_state": s0.as_array().tolist(), "period": 2 * np.pi * args.L**3,
               "return_distance": f_at_T}
    if args.envelope:
        env = return_envelope(e, args.eps, periods=args.envelope, cfg=cfg)
        run.table(stem + "_envelope", "period,f_min",
                  np.column_stack([np.arange(1, args.envelope + 1), env]))
        summary["envelope"] = env.tolist()
    run.json(run.path(stem + "_summary.json"), summary)
    return summary, EXIT_OK


def cmd_stability(args, run):
    indices = range(1, 7) if args.index is None else (args.index,)
    G = args.G if args.space == "second" else None
    reports = [classify(equilibrium(args.space, i, args.L, G), args.eps).to_dict() for i in indices]
    run.json(run.path(f"stability_{args.space}.json"), reports)
    return [{"index": r["index"], "verdict": r["verdict"]} for r in reports], EXIT_OK


def cmd_kam(args, run):
    pairs = kam.PAIRS if args.pair is None else (args.pair,)
    spaces = kam.SPACES if args.space == "all" else (args.space,)
    results = []
    for space in spaces:
        for pair in pairs:
            actions = args.actions
            if actions is None:
                actions = [1.0, 0.5, 0.5] if space == "first" else [1.0, 0.8, 0.5]
            results.append(kam.analyze(space, pair, actions, args.tol).to_dict())
    for r in results:
        expected = kam.EXPECTED_RANK[(r["space"], tuple(r["pair"]))]
        run.checks[f"rank_{r['space']}_{r['pair'][0]}{r['pair'][1]}"] = r["rank"] == expected
    run.json(run.path("kam.json"), results)
    summary = [{"space": r["space"], "pair": r["pair"], "rank": r["rank"]} for r in results]
    return summary, EXIT_OK if all(run.checks.values()) else EXIT_CHECK


def cmd_verify(args, run):
    reports = verify.run(args.suite, seed=args.seed, grid=args.grid)
    doc = {"seed": args.seed, "grid": args.grid, "suites": [r.to_dict() for r in reports]}
    run.json(run.path(f"verify_{args.suite}.json"), doc)
    for r in reports:
        for c in r.checks:
            run.checks[f"{r.suite}.{c.name}"] = c.status
    summary = {r.suite: {"passed": r.passed,
                         "failed": [c.name for c in r.checks if c.status == "fail"],
                         "flagged": [c.name for c in r.checks if c.status == "flagged"]}
               for r in reports}
    return summary, EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_plot(args, run):
    from .svg import line_plot, write_svg

    if not os.path.exists(args.input):
        raise UsageError(f"input file {args.input} does not exist")
    columns, data = read_csv(args.input)
    if args.kind == "fcurve":
        if columns[:2] != ["t", "f"]:
            raise UsageError("an f-curve CSV needs columns t,f")
        series = [("", data[:, 0], data[:, 1])]
        text = line_plot(series, "t", "f(t) = |z(0) - z(t)|", args.title)
    else:
        try:
            i, j = (columns.index(a) for a in args.axes.split(","))
        except ValueError as exc:
            raise UsageError(f"axes {args.axes} not found in {columns}") from exc
        series = [("", data[:, i], data[:, j])]
        text = line_plot(series, columns[i], columns[j], args.title, equal_aspect=True)
    path = run.path(args.output)
    write_svg(path, text)
    run.outputs.append(path)
    return {"svg": path}, EXIT_OK


def _global_flags(suppress):
    """Global flags, accepted before or after the subcommand.

    The subcommand copy uses ``SUPPRESS`` defaults so a value given before
    the subcommand is not overwritten.
    """
    p = argparse.ArgumentParser(add_help=False)

    def default(value):
        return argparse.SUPPRESS if suppress else value

    p.add_argument("--out-dir", default=default("."), help="directory for all output files")
    p.add_argument("--seed", type=int, default=default(0), help="seed for random sample points")
    p.add_argument("--tol-rel", type=float, default=default(1e-12),
                   help="integrator relative tolerance")
    p.add_argument("--tol-abs", type=float, default=default(1e-14),
                   help="integrator absolute tolerance")
    p.add_argument("--format", choices=("csv", "json"), default=default("csv"),
                   help="format of tabular data files")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="tricenter", parents=[_global_flags(False)],
                                     description="Three-center problem: simulation, "
                                                 "normal forms, reduction, stability and KAM checks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[_global_flags(True)], help=help_text)
        p.set_defaults(func=func)
        return p

    def state_flags(p):
        p.add_argument("--delaunay", type=_vec6, help="ell,g,h,L,G,H")
        p.add_argument("--q", type=_vec3, help="position q1,q2,q3")
        p.add_argument("--p", type=_vec3, help="momentum p1,p2,p3")

    p = add("simulate", cmd_simulate, "integrate the full three-center system")
    state_flags(p)
    p.add_argument("--equilibrium", type=int, choices=range(1, 7),
                   help="start from the reconstructed orbit of this first-reduced equilibrium")
    p.add_argument("--L", type=float, default=1.0, help="action L for --equilibrium")
    p.add_argument("--eps", type=float, required=True, help="triangle side epsilon")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--samples", type=int, default=1001)
    p.add_argument("--out", default="trajectory", help="file stem of the trajectory table")

    p = add("elements", cmd_elements, "convert between Delaunay and Cartesian coordinates")
    state_flags(p)

    p = add("reconstruct", cmd_reconstruct, "reconstruct and test a periodic orbit")
    p.add_argument("--index", type=int, choices=range(1, 7), required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--span", type=float, default=1.2, help="integration span in periods")
    p.add_argument("--samples", type=int, default=2401)
    p.add_argument("--envelope", type=int, default=0,
                   help="also compute per-period return minima over this many periods")
    p.add_argument("--out", default="reconstruct")

    p = add("stability", cmd_stability, "linear stability of relative equilibria")
    p.add_argument("--space", choices=("first", "second"), default="first")
    p.add_argument("--index", type=int, choices=range(1, 7))
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--G", type=float, help="action G on the second reduced space (default L)")
    p.add_argument("--eps", type=float, default=0.0, help="epsilon for the multipliers")

    p = add("kam", cmd_kam, "frequency maps and the KAM rank condition")
    p.add_argument("--space", choices=("first", "second", "all"), default="all")
    p.add_argument("--pair", type=_pair)
    p.add_argument("--actions", type=_vec3, help="three actions (L,I1,I2) or (L,G,I)")
    p.add_argument("--tol", type=float, default=1e-10, help="relative singular-value cutoff")

    p = add("verify", cmd_verify, "run verification suites")
    p.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    p.add_argument("--grid", type=int, default=5, help="points per axis of the normal-form grid")

    p = add("plot", cmd_plot, "render a trajectory projection or f-curve as SVG")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("trajectory", "fcurve"), default="trajectory")
    p.add_argument("--axes", default="q1,q2", help="two column names for trajectory plots")
    p.add_argument("--title", default="")
    p.add_argument("--output", default="plot.svg")
    return parser


def _validate(args):
    if getattr(args, "eps", 0.0) < 0:
        raise UsageError("--eps must be non-negative")
    if args.tol_rel <= 0 or args.tol_abs <= 0:
        raise UsageError("tolerances must be positive")
    if getattr(args, "grid", 2) < 2:
        raise UsageError("--grid must be at least 2")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate(args)
        run = Run(args)
        summary, code = args.func(args, run)
        run.manifest()
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CollisionError as exc:
        print(f"collision: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    except TricenterError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
