"""Relaxation rounding and greedy list scheduling for state-task networks."""
from __future__ import annotations

import math
from typing import Dict, List

import numpy as np

from ..model import HeuristicResult, ObjectiveSense, make_certificate
from ..solvers import solve_matrix
from .models import build_discrete_time_model, schedule_from_assignment, xv
from .stn import Schedule, ScheduleEntry, StateTaskNetwork, inventories, task_order, \
    validate_schedule

INT_TOL = 1e-6


def lp_relaxation_bound(stn: StateTaskNetwork) -> float:
    model = build_discrete_time_model(stn)
    out = solve_matrix(model.matrix)
    return out.objective if out.optimal else math.inf


def lp_round_schedule(stn: StateTaskNetwork) -> HeuristicResult:
    """Fix the start binaries one at a time guided by the LP relaxation.

    After each LP solve the fractional start with the largest value is
    fixed to 1 (ties: earliest slot, then lowest task id, then unit); if
    that makes the LP infeasible it is fixed to 0 instead.  When every start
    is integral the LP point is a schedule.  The certificate compares its
    makespan with the first relaxation value.
    """
    model = build_discrete_time_model(stn)
    mf = model.matrix
    lb, ub = mf.lb.copy(), mf.ub.copy()
    keys = []
    for task in stn.tasks:
        for opt in task.units:
            for t in range(stn.horizon):
                keys.append((t, task.id, opt.unit, model.index[xv(task.id, opt.unit, t)]))
    keys.sort()
    out = solve_matrix(mf, lb, ub)
    solves = 1
    if not out.optimal:
        return HeuristicResult("failed", None, None,
                               "LP relaxation is infeasible; enlarge the horizon", 1)
    bound = out.objective
    while True:
        x = np.array([out.primal[v] for v in mf.var_ids])
        frac = [(x[j], t, i, u, j) for t, i, u, j in keys
                if INT_TOL < x[j] < 1 - INT_TOL and lb[j] != ub[j]]
        if not frac:
            break
        _, t, i, u, j = min(frac, key=lambda f: (-f[0], f[1], f[2], f[3]))
        lb[j] = 1.0
        trial = solve_matrix(mf, lb, ub)
        solves += 1
        if not trial.optimal:
            lb[j], ub[j] = 0.0, 0.0
            trial = solve_matrix(mf, lb, ub)
            solves += 1
            if not trial.optimal:
                return HeuristicResult("failed", None, None,
                                       "rounding reached an infeasible fixing", solves)
        out = trial
    schedule = schedule_from_assignment(stn, out.primal)
    report = validate_schedule(stn, schedule)
    if not report.ok:
        return HeuristicResult("failed", None, None, "; ".join(report.errors), solves)
    cert = make_certificate(ObjectiveSense.MIN, schedule.makespan, bound)
    return HeuristicResult("ok", schedule, cert, "", solves)


def _plan_batches(stn: StateTaskNetwork, order: List[str]) -> Dict[str, List[float]]:
    """Batch sizes per task, planned backwards from the demands.

    Each state's requirement is assigned to its first producer; a task with
    requirement ``R`` runs ``ceil(R / b_max)`` equal batches, raised to the
    smallest batch its best unit accepts.
    """
    need = {s.id: s.demand for s in stn.states}
    plan: Dict[str, List[float]] = {}
    for tid in reversed(order):
        task = stn.task_map[tid]
        req = 0.0
        for s, f in task.produce.items():
            prods = stn.producers(s)
            if prods and prods[0] == tid:
                req = max(req, need.get(s, 0.0) / f)
        if req <= 1e-12:
            plan[tid] = []
            continue
        b_lo = min(o.b[0] for o in task.units)
        b_hi = max(o.b[1] for o in task.units)
        if b_hi <= 0:
            plan[tid] = []
            continue
        n = math.ceil(req / b_hi - 1e-9)
        size = max(req / n, b_lo)
        plan[tid] = [size] * n
        for s, f in task.consume.items():
            need[s] = need.get(s, 0.0) + f * size * n
    return plan


def greedy_list_schedule(stn: StateTaskNetwork) -> HeuristicResult:
    """Place planned batches in precedence order at their earliest feasible slot.

    A slot is feasible on a unit when the unit is idle for the whole run,
    the unit accepts the batch size, the run ends within the horizon and
    withdrawing the inputs keeps every stock nonnegative from then on.
    """
    order = task_order(stn)
    if order is None:
        return HeuristicResult("failed", None, None, "state precedence is cyclic")
    plan = _plan_batches(stn, order)
    L = stn.horizon
    busy: Dict[str, List[bool]] = {u: [False] * L for u in stn.units}
    entries: List[ScheduleEntry] = []
    for tid in order:
        task = stn.task_map[tid]
        for size in plan[tid]:
            placed = None
            for t in range(L):
                for opt in sorted(task.units, key=lambda o: o.unit):
                    if not (opt.b[0] - 1e-9 <= size <= opt.b[1] + 1e-9):
                        continue
                    if t + opt.p > L or any(busy[opt.unit][t:t + opt.p]):
                        continue
                    cand = ScheduleEntry(tid, opt.unit, t, size, opt.p)
                    inv = inventories(stn, Schedule(tuple(entries) + (cand,)))
                    if all(inv[s][tt] >= -1e-9 for s in task.consume if s in inv
                           for tt in range(t, L + 1)):
                        placed = cand
                        break
                if placed:
                    break
            if placed is None:
                return HeuristicResult("failed", None, None,
                                       f"no slot for a batch of {tid} within the horizon")
            entries.append(placed)
            for tt in range(placed.start, placed.end):
                busy[placed.unit][tt] = True
    schedule = Schedule(tuple(entries))
    report = validate_schedule(stn, schedule)
    if not report.ok:
        return HeuristicResult("failed", None, None, "; ".join(report.errors))
    bound = lp_relaxation_bound(stn)
    return HeuristicResult("ok", schedule,
                           make_certificate(ObjectiveSense.MIN, schedule.makespan, bound))


__all__ = ["greedy_list_schedule", "lp_relaxation_bound", "lp_round_schedule"]
