"""Command-line front end.

Exit codes: 0 success, 1 no convergence, 2 invalid input, 3 internal assertion.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import bounds, dpp, instances, setups, strategy, trees

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive_float(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return val


def _open_unit(text: str) -> float:
    val = float(text)
    if not 0.0 < val < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return val


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_validate(args) -> int:
    setup = setups.load_setup(args.setup)
    layers = setups.validate(setup)
    _emit({"layers": list(layers.layer_of), "max_layer": layers.max_layer, "diam": setup.diam})
    return EXIT_OK


def _initial_values(spec: str, setup, problem) -> np.ndarray:
    if spec == "zero":
        return np.zeros(setup.n_points)
    if spec.startswith("const:"):
        return np.full(setup.n_points, float(spec[len("const:"):]))
    try:
        return np.full(setup.n_points, float(spec))
    except ValueError:
        return dpp.load_values(spec, setup.n_points)


def cmd_solve(args) -> int:
    setup, problem = dpp.load_problem(args.problem)
    setups.validate(setup)
    u0 = _initial_values(args.u0, setup, problem)
    u, trace = dpp.solve(setup, problem, u0, tol=args.tol, max_sweeps=args.max_sweeps)
    out = _out_dir(args)
    dpp.dump_values(u, out / "solution.json")
    trace.write_csv(out / "trace.csv")
    for w in trace.warnings:
        print(f"warning: {w}: inf_Y f <= 0, the solution need not be unique", file=sys.stderr)
    _emit({
        "status": trace.status.value,
        "sweeps": trace.sweeps,
        "residual": dpp.residual(setup, problem, u),
        "solution": str(out / "solution.json"),
        "trace": str(out / "trace.csv"),
    })
    return EXIT_OK if trace.status is dpp.Status.CONVERGED else EXIT_NOT_CONVERGED


def cmd_bounds(args) -> int:
    _emit(bounds.bounds_report(args.d, args.mu, args.Lambda))
    return EXIT_OK


def cmd_tree_check(args) -> int:
    with open(args.tree) as fh:
        tree = trees.build_tree(json.load(fh))
    prof = trees.mass_profile(tree, args.mu)
    report = {
        "nodes": len(tree),
        "depth": tree.height,
        "a": prof.a.tolist(),
        "b": prof.b.tolist(),
        "leaf_mass": prof.leaf_mass,
        "interior_mass": prof.interior_mass,
    }
    if args.C is not None:
        ok = trees.satisfies_sum_estimate(tree, args.mu, args.C)
        report["sum_estimate"] = ok
        if args.delta is not None:
            report["K"] = trees.sparsity_threshold(args.C, args.delta)
            report["sparsity_conclusion"] = (
                trees.check_sparsity_conclusion(tree, args.mu, args.C, args.delta) if ok else None
            )
    _emit(report)
    return EXIT_OK


def cmd_strategy(args) -> int:
    setup, problem = dpp.load_problem(args.problem)
    setups.validate(setup)
    u = dpp.load_values(args.values, setup.n_points)
    if not 0 <= args.root < setup.n_points:
        raise UsageError(f"root {args.root} out of range")
    st = strategy.extract_strategy_tree(setup, problem, u, args.root, args.depth)
    _emit({
        "root": args.root,
        "depth": args.depth,
        "strategy": st.to_nested(),
        "w": strategy.evaluate_w(setup, problem, st, u),
    })
    return EXIT_OK


def cmd_demo(args) -> int:
    if args.name == "example11":
        rows = []
        for fc in (0, 1):
            setup, problem, u = instances.example_1_1(fc)
            rows.append({
                "f": fc,
                "values": u.tolist(),
                "residual": dpp.residual(setup, problem, u),
                "subsolution": dpp.is_subsolution(setup, problem, u),
                "supersolution": dpp.is_supersolution(setup, problem, u),
            })
        _emit({"demo": "example11", "cells": list(instances.EXAMPLE_CELLS), "cases": rows})
        return EXIT_OK
    eps_list = args.eps or [0.1, 0.05, 0.025]
    rows = []
    for eps in eps_list:
        err, sweeps, status = instances.pde1d_error(eps, tol=args.tol, max_sweeps=args.max_sweeps)
        rows.append({"eps": eps, "h": eps / 4, "sup_error": err, "sweeps": sweeps,
                     "status": status.value})
    errs = [r["sup_error"] for r in rows]
    trend = all(b < a for a, b in zip(errs, errs[1:]))
    _emit({"demo": "pde1d", "oracle": "x(1-x)/2", "runs": rows, "error_decreasing": trend})
    if any(r["status"] != dpp.Status.CONVERGED.value for r in rows):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "example11":
        setup, problem, _ = instances.example_1_1(args.f_const)
    elif args.kind == "grid1d":
        spec = instances.GridSpec1D(
            h=args.eps / 4, eps=args.eps, f_tilde=lambda x: np.ones_like(x),
            boundary=instances.parabola,
        )
        setup, problem = instances.grid_1d(spec)
    else:
        setup, problem = instances.random_admissible(
            args.n, args.n_boundary, args.max_ball, args.inf_f, args.seed, mu=args.mu
        )
    out = _out_dir(args)
    dpp.dump_problem(setup, problem, out / "problem.json")
    setups.dump_setup(setup, out / "setup.json")
    _emit({"problem": str(out / "problem.json"), "setup": str(out / "setup.json")})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=dpp.DEFAULT_TOL)
    common.add_argument("--max-sweeps", type=int, default=dpp.DEFAULT_MAX_SWEEPS)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=".")

    parser = argparse.ArgumentParser(prog="tugdpp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a setup file")
    p.add_argument("setup")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common], help="iterate the DPP to its fixed point")
    p.add_argument("problem")
    p.add_argument("--u0", default="zero", help="zero, const:C, a number, or a JSON file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bounds", parents=[common], help="boundedness constants")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mu", type=_open_unit, required=True)
    p.add_argument("--Lambda", type=float, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("tree-check", parents=[common], help="mass profile of a nested-array tree")
    p.add_argument("tree")
    p.add_argument("--mu", type=_open_unit, required=True)
    p.add_argument("--C", type=_positive_float)
    p.add_argument("--delta", type=_positive_float)
    p.set_defaults(func=cmd_tree_check)

    p = sub.add_parser("strategy", parents=[common], help="greedy strategy tree and its value")
    p.add_argument("problem")
    p.add_argument("--values", required=True)
    p.add_argument("--root", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_strategy)

    p = sub.add_parser("demo", parents=[common], help="example11 or pde1d")
    p.add_argument("name", choices=["example11", "pde1d"])
    p.add_argument("--eps", type=_positive_float, nargs="+")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("generate", parents=[common], help="write a problem file")
    p.add_argument("kind", choices=["example11", "grid1d", "random"])
    p.add_argument("--f-const", type=int, choices=[0, 1], default=1)
    p.add_argument("--eps", type=_positive_float, default=0.1)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--n-boundary", type=int, default=1)
    p.add_argument("--max-ball", type=int, default=3)
    p.add_argument("--inf-f", type=_positive_float, default=0.5)
    p.add_argument("--mu", type=_open_unit, default=0.5)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.ERROR)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max_sweeps", 1) < 1:
        parser.error("--max-sweeps must be positive")
    try:
        return args.func(args)
    except (json.JSONDecodeError, OSError, ValueError, KeyError, TypeError, UsageError) as exc:
        # setup/problem/tree errors all derive from ValueError
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except dpp.NonFiniteValue as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except strategy.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
