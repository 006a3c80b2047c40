"""Command-line entry point: solve, exact, classify, export, gen and bench."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import List, Optional, Sequence

from .estimators import METHODS, PROBLEM_KIND, PROBLEMS, make_solver
from .hens import build_matches_milp, build_multistage_qp, match_instance_from_streams
from .instances import (InstanceError, RunRecord, generate_random, read_instance_file,
                        to_domain, write_instance, write_report)
from .lpformat import export_lp_text
from .pooling import (bilinear_bounds, build_p_formulation, build_pq_formulation,
                      classify_pooling_instance, piecewise_mccormick_relax)
from .scheduling import build_continuous_time_model, build_discrete_time_model

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
FORMULATIONS = {"p": "pooling", "pq": "pooling", "dt": "stn", "ct": "stn", "matches": "hens",
                "multistage": "hens"}


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("PSE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"PSE_SEED must be an integer, got {raw!r}") from None


def _load(path: str, kind: Optional[str] = None):
    try:
        env = read_instance_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if kind is not None and env.kind != kind:
        raise UsageError(f"{path} holds a {env.kind} instance, expected {kind}")
    return env, to_domain(env)


def run_cell(instance_name: str, obj, problem: str, method: str, seed: int,
             timing: bool = False, **options) -> RunRecord:
    try:
        solver = make_solver(problem, method, seed=seed, **options)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    start = time.perf_counter()
    solver.fit(obj)
    elapsed = (time.perf_counter() - start) * 1000.0 if timing else None
    name = "exact" if method == "exact" else solver.method
    return RunRecord(instance_name, problem, name, solver.status_, solver.objective_,
                     solver.bound_, solver.ratio_, elapsed, seed)


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_solve(args, exact: bool = False) -> int:
    env, obj = _load(args.instance, PROBLEM_KIND[args.problem])
    method = "exact" if exact else args.method
    if method is None:
        raise UsageError("--method is required")
    rec = run_cell(env.name, obj, args.problem, method, args.seed, args.timing,
                   pieces=args.pieces, resolution=args.grid, stages=args.stages,
                   time_limit=args.time_limit)
    report = write_report([rec])
    sys.stdout.write(report.splitlines()[1] + "\n")
    if args.out:
        _write(args.out, report)
    return EXIT_OK if rec.status == "ok" else EXIT_FAILED


def cmd_classify(args) -> int:
    _, net = _load(args.instance, "pooling")
    cls = classify_pooling_instance(net, args.kappa)
    print(f"{cls.complexity}\t{cls.rule}")
    return EXIT_OK


def build_export_model(obj, formulation: str, pieces: Optional[int] = None, stages: int = 1):
    if formulation in ("p", "pq"):
        model = (build_p_formulation if formulation == "p" else build_pq_formulation)(obj)
        if pieces:
            model = piecewise_mccormick_relax(model, pieces, bilinear_bounds(obj, model))
        return model
    if formulation == "dt":
        return build_discrete_time_model(obj)
    if formulation == "ct":
        return build_continuous_time_model(obj)
    if formulation == "matches":
        return build_matches_milp(match_instance_from_streams(obj))
    return build_multistage_qp(obj, stages)


def cmd_export(args) -> int:
    _, obj = _load(args.instance, FORMULATIONS[args.formulation])
    model = build_export_model(obj, args.formulation, args.pieces, args.stages)
    _write(args.out, export_lp_text(model))
    return EXIT_OK


def cmd_gen(args) -> int:
    sizes = {
        "pooling": dict(n_inputs=args.inputs, n_pools=args.pools, n_outputs=args.outputs,
                        n_attributes=args.attributes),
        "stn": dict(n_tasks=args.tasks, n_units=args.units, demand=args.demand),
        "hens": dict(n_hot=args.hot, n_cold=args.cold, balanced=not args.unbalanced),
    }[args.problem]
    sizes = {k: v for k, v in sizes.items() if v is not None}
    try:
        env = generate_random(args.problem, args.seed, **sizes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, write_instance(env))
    return EXIT_OK


def run_suite(suite: dict, base_dir: str, timing: bool = False) -> List[RunRecord]:
    """Run every (instance, method) cell of a suite in declaration order.

    A suite is ``{"seed": int, "cells": [...]}``; each cell names a
    ``problem``, a ``method``, optional ``options`` and either an
    ``instance`` path (relative to the suite file) or a ``generate`` block
    ``{"kind", "seed", "sizes"}``.
    """
    seed = int(suite.get("seed", 0))
    records = []
    for k, cell in enumerate(suite.get("cells", [])):
        problem, method = cell.get("problem"), cell.get("method")
        if problem not in PROBLEMS:
            raise UsageError(f"cell {k}: unknown problem {problem!r}")
        if "generate" in cell:
            g = cell["generate"]
            env = generate_random(g.get("kind", PROBLEM_KIND[problem]), int(g.get("seed", seed)),
                                  **g.get("sizes", {}))
            obj, name = to_domain(env), env.name
        elif "instance" in cell:
            env, obj = _load(os.path.join(base_dir, cell["instance"]), PROBLEM_KIND[problem])
            name = env.name
        else:
            raise UsageError(f"cell {k}: needs 'instance' or 'generate'")
        if PROBLEM_KIND[problem] != env.kind:
            raise UsageError(f"cell {k}: {problem} needs a {PROBLEM_KIND[problem]} instance")
        records.append(run_cell(name, obj, problem, method, int(cell.get("seed", seed)), timing,
                                **cell.get("options", {})))
    return records


def cmd_bench(args) -> int:
    try:
        with open(args.suite, encoding="utf-8") as fh:
            suite = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {args.suite}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.suite}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    records = run_suite(suite, os.path.dirname(os.path.abspath(args.suite)), args.timing)
    _write(args.out, write_report(records))
    return EXIT_OK


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pseapprox",
                                description="Approximation heuristics and certificates for "
                                            "pooling, batch scheduling and heat recovery networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def solve_flags(sp, need_method: bool):
        sp.add_argument("--problem", required=True, choices=PROBLEMS)
        sp.add_argument("--instance", required=True)
        sp.add_argument("--method", required=need_method,
                        help="registered method: " + ", ".join(
                            f"{pr}:{m}" for pr, m in sorted(METHODS)))
        sp.add_argument("--pieces", type=_positive)
        sp.add_argument("--grid", type=_positive, help="proportion grid resolution")
        sp.add_argument("--stages", type=_positive)
        sp.add_argument("--time-limit", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--timing", action="store_true", help="fill the time_ms column")

    solve_flags(sub.add_parser("solve", help="run a registered method"), True)
    solve_flags(sub.add_parser("exact", help="run the exact solver or oracle"), False)

    sp = sub.add_parser("classify", help="complexity class of a pooling instance")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--kappa", type=_positive, default=2)

    sp = sub.add_parser("export", help="write a formulation as LP text")
    sp.add_argument("--instance", required=True)
    sp.add_argument("--formulation", required=True, choices=sorted(FORMULATIONS))
    sp.add_argument("--pieces", type=_positive)
    sp.add_argument("--stages", type=_positive, default=1)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("gen", help="write a random instance")
    sp.add_argument("--problem", required=True, choices=("pooling", "stn", "hens"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", required=True)
    for flag in ("inputs", "pools", "outputs", "attributes", "tasks", "units", "hot", "cold"):
        sp.add_argument(f"--{flag}", type=int)
    sp.add_argument("--demand", type=float)
    sp.add_argument("--unbalanced", action="store_true")

    sp = sub.add_parser("bench", help="run a suite of (instance, method) cells")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--timing", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "seed", "absent") is None:
            args.seed = default_seed()
        handler = {"solve": cmd_solve, "exact": lambda a: cmd_solve(a, exact=True),
                   "classify": cmd_classify, "export": cmd_export, "gen": cmd_gen,
                   "bench": cmd_bench}[args.command]
        return handler(args)
    except (UsageError, InstanceError) as exc:
        print(f"pseapprox: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
