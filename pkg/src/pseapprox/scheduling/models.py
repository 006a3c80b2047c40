"""Discrete-time and continuous-time MILP builders for state-task networks.

Discrete time: starts ``t = 0..L-1`` with ``L = stn.horizon``, stock
``y(s,t)`` for ``t = 0..L`` and empty stock before time 0.  A run started
at ``t`` withdraws its inputs at ``t`` and delivers its outputs at
``t + p``.  Raw states (no producer) carry no stock variables.

Continuous time: event points ``k = 1..L``.  Rows follow the classical
event-point model with big-M ``H = stn.horizon_time``; the stock at the
first point is the withdrawal of runs starting there.  A finish binary at
the first point is fixed to zero because no run can end at time 0.
"""
from __future__ import annotations

from typing import Mapping

from ..model import Integrality, LinearModel, ModelBuilder, ModelError
from .stn import Schedule, ScheduleEntry, StateTaskNetwork


class MultiUnitTaskError(ModelError):
    pass


def xv(i, j, t):
    return f"x({i},{j},{t})"


def bv(i, j, t):
    return f"b({i},{j},{t})"


def sv(s, t):
    return f"y({s},{t})"


def build_discrete_time_model(stn: StateTaskNetwork) -> LinearModel:
    L = int(stn.horizon)
    mb = ModelBuilder("stn-discrete")
    slots = range(L)
    for task in stn.tasks:
        for opt in task.units:
            for t in slots:
                mb.add_var(xv(task.id, opt.unit, t), 0, 1, Integrality.BINARY)
    for task in stn.tasks:
        for opt in task.units:
            for t in slots:
                mb.add_var(bv(task.id, opt.unit, t), 0.0, opt.b[1])
    stocked = [s for s in stn.states if not stn.is_raw(s.id)]
    for s in stocked:
        for t in range(L + 1):
            mb.add_var(sv(s.id, t))
    mb.add_var("z")
    mb.set_objective({"z": 1.0})

    for task in stn.tasks:
        for opt in task.units:
            for t in slots:
                mb.add_constraint(f"makespan({task.id},{opt.unit},{t})",
                                  {"z": 1.0, xv(task.id, opt.unit, t): -(t + opt.p)}, ">=", 0.0)
    for unit in stn.units:
        for t in slots:
            terms = {}
            for i in stn.unit_tasks(unit):
                p = stn.task_map[i].option(unit).p
                for tt in range(max(0, t - p + 1), t + 1):
                    terms[xv(i, unit, tt)] = 1.0
            mb.add_constraint(f"unit({unit},{t})", terms, "<=", 1.0)
    for task in stn.tasks:
        for opt in task.units:
            lo, hi = opt.b
            for t in slots:
                x, b = xv(task.id, opt.unit, t), bv(task.id, opt.unit, t)
                if lo > 0:
                    mb.add_constraint(f"batch_lo({task.id},{opt.unit},{t})", {b: 1.0, x: -lo},
                                      ">=", 0.0)
                mb.add_constraint(f"batch_hi({task.id},{opt.unit},{t})", {b: 1.0, x: -hi},
                                  "<=", 0.0)
    for s in stocked:
        for t in range(L + 1):
            terms = {sv(s.id, t): 1.0}
            if t > 0:
                terms[sv(s.id, t - 1)] = -1.0
            for i in stn.producers(s.id):
                task = stn.task_map[i]
                for opt in task.units:
                    if 0 <= t - opt.p < L:
                        key = bv(i, opt.unit, t - opt.p)
                        terms[key] = terms.get(key, 0.0) - task.produce[s.id]
            for i in stn.consumers(s.id):
                task = stn.task_map[i]
                for opt in task.units:
                    if t < L:
                        key = bv(i, opt.unit, t)
                        terms[key] = terms.get(key, 0.0) + task.consume[s.id]
            mb.add_constraint(f"balance({s.id},{t})", terms, "=", 0.0)
        if s.demand > 0:
            mb.add_constraint(f"demand({s.id})", {sv(s.id, L): 1.0}, ">=", s.demand)
    return mb.build()


def schedule_from_assignment(stn: StateTaskNetwork, primal: Mapping[str, float],
                             drop_empty: bool = True) -> Schedule:
    """Runs whose start binary is set; empty batches are dropped by default."""
    entries = []
    for task in stn.tasks:
        for opt in task.units:
            for t in range(stn.horizon):
                if primal.get(xv(task.id, opt.unit, t), 0.0) > 0.5:
                    batch = min(max(primal[bv(task.id, opt.unit, t)], opt.b[0]), opt.b[1])
                    if drop_empty and batch <= 1e-9:
                        continue
                    entries.append(ScheduleEntry(task.id, opt.unit, t, batch, opt.p))
    return Schedule(tuple(entries))


def build_continuous_time_model(stn: StateTaskNetwork) -> LinearModel:
    for task in stn.tasks:
        if len(task.units) != 1:
            raise MultiUnitTaskError(
                f"task {task.id} has {len(task.units)} units; duplicate it per unit first")
    L = int(stn.horizon)
    H = stn.horizon_time
    K = range(1, L + 1)
    mb = ModelBuilder("stn-continuous")
    for task in stn.tasks:
        for k in K:
            mb.add_var(f"xS({task.id},{k})", 0, 1, Integrality.BINARY)
            mb.add_var(f"xF({task.id},{k})", 0, 0 if k == 1 else 1, Integrality.BINARY)
    for k in K:
        mb.add_var(f"t({k})", 0.0, H)
    for task in stn.tasks:
        hi = task.units[0].b[1]
        for k in K:
            mb.add_var(f"tS({task.id},{k})")
            mb.add_var(f"tF({task.id},{k})")
            mb.add_var(f"p({task.id},{k})")
            mb.add_var(f"b({task.id},{k})", 0.0, hi)
    for s in stn.states:
        for k in K:
            mb.add_var(f"y({s.id},{k})")
    mb.add_var("z")
    mb.set_objective({"z": 1.0})

    for task in stn.tasks:
        i = task.id
        lo, hi = task.units[0].b
        for k in K:
            xs, ts, tf, p, b, tk = (f"xS({i},{k})", f"tS({i},{k})", f"tF({i},{k})",
                                    f"p({i},{k})", f"b({i},{k})", f"t({k})")
            mb.add_constraint(f"makespan({i},{k})", {"z": 1.0, ts: -1.0, p: -1.0}, ">=", 0.0)
            mb.add_constraint(f"ptime({i},{k})", {p: 1.0, xs: -task.alpha, b: -task.beta}, "=", 0.0)
            mb.add_constraint(f"start_hi({i},{k})", {ts: 1.0, tk: -1.0, xs: H}, "<=", H)
            mb.add_constraint(f"start_lo({i},{k})", {ts: 1.0, tk: -1.0, xs: -H}, ">=", -H)
            mb.add_constraint(f"finish_hi({i},{k})", {tf: 1.0, tk: -1.0, p: -1.0, xs: H}, "<=", H)
            mb.add_constraint(f"finish_lo({i},{k})", {tf: 1.0, tk: -1.0, p: -1.0, xs: -H},
                              ">=", -H)
            if k > 1:
                prev = f"tF({i},{k - 1})"
                xf = f"xF({i},{k})"
                mb.add_constraint(f"finish_hold({i},{k})", {tf: 1.0, prev: -1.0, xs: -H}, "<=", 0.0)
                mb.add_constraint(f"end_hi({i},{k})", {prev: 1.0, tk: -1.0, xf: H}, "<=", H)
                mb.add_constraint(f"end_lo({i},{k})", {prev: 1.0, tk: -1.0, xf: -H}, ">=", -H)
    mb.add_constraint("t_first", {"t(1)": 1.0}, "=", 0.0)
    for k in range(2, L + 1):
        mb.add_constraint(f"t_order({k})", {f"t({k - 1})": 1.0, f"t({k})": -1.0}, "<=", 0.0)
    mb.add_constraint("t_last", {f"t({L})": 1.0}, "=", H)
    for unit in stn.units:
        tasks = stn.unit_tasks(unit)
        for k in K:
            terms = {}
            for i in tasks:
                for kk in range(1, k + 1):
                    terms[f"xS({i},{kk})"] = terms.get(f"xS({i},{kk})", 0.0) + 1.0
                    terms[f"xF({i},{kk})"] = terms.get(f"xF({i},{kk})", 0.0) - 1.0
            mb.add_constraint(f"unit({unit},{k})", terms, "<=", 1.0)
    for task in stn.tasks:
        i = task.id
        terms = {f"xS({i},{k})": 1.0 for k in K}
        terms.update({f"xF({i},{k})": -1.0 for k in K})
        mb.add_constraint(f"complete({i})", terms, "=", 0.0)
    for task in stn.tasks:
        i = task.id
        lo, hi = task.units[0].b
        for k in K:
            if lo > 0:
                mb.add_constraint(f"batch_lo({i},{k})", {f"b({i},{k})": 1.0, f"xS({i},{k})": -lo},
                                  ">=", 0.0)
            mb.add_constraint(f"batch_hi({i},{k})", {f"b({i},{k})": 1.0, f"xS({i},{k})": -hi},
                              "<=", 0.0)
    for s in stn.states:
        raw = stn.is_raw(s.id)
        for k in K:
            if raw:
                continue
            terms = {f"y({s.id},{k})": 1.0}
            if k > 1:
                terms[f"y({s.id},{k - 1})"] = -1.0
                for i in stn.producers(s.id):
                    key = f"b({i},{k - 1})"
                    terms[key] = terms.get(key, 0.0) - stn.task_map[i].produce[s.id]
            for i in stn.consumers(s.id):
                key = f"b({i},{k})"
                terms[key] = terms.get(key, 0.0) + stn.task_map[i].consume[s.id]
            mb.add_constraint(f"balance({s.id},{k})", terms, "=", 0.0)
        if s.demand > 0:
            mb.add_constraint(f"demand({s.id})", {f"y({s.id},{L})": 1.0}, ">=", s.demand)
    return mb.build()


__all__ = [
    "MultiUnitTaskError", "build_continuous_time_model", "build_discrete_time_model",
    "schedule_from_assignment",
]
