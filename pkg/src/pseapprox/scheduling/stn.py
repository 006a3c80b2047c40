"""State-task networks, schedules and the schedule simulator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

from ..model import ValidationReport

FRACTION_TOL = 1e-9


@dataclass(frozen=True)
class State:
    id: str
    demand: float = 0.0


@dataclass(frozen=True)
class UnitOption:
    """Unit ``unit`` can run the task in ``p`` slots with batch in ``b``."""

    unit: str
    p: int
    b: Tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))


@dataclass(frozen=True)
class Task:
    id: str
    units: Tuple[UnitOption, ...]
    consume: Mapping[str, float] = field(default_factory=dict)
    produce: Mapping[str, float] = field(default_factory=dict)
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))

    def option(self, unit: str) -> UnitOption:
        for opt in self.units:
            if opt.unit == unit:
                return opt
        raise KeyError(f"task {self.id} cannot run on unit {unit}")


@dataclass(frozen=True)
class StateTaskNetwork:
    """Recipe graph plus horizon.

    ``horizon`` is the number of discrete slots (starts ``0..horizon-1``)
    or the number of event points for the continuous-time model.
    ``big_h`` is the time span used by the continuous-time model; when
    omitted it defaults to the sum over tasks of ``alpha + beta * b_max``.
    States that no task produces are raw materials with unlimited supply.
    """

    states: Tuple[State, ...]
    tasks: Tuple[Task, ...]
    horizon: int
    big_h: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "tasks", tuple(self.tasks))

    @property
    def units(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for task in self.tasks:
            for opt in task.units:
                seen.setdefault(opt.unit, None)
        return tuple(seen)

    @cached_property
    def task_map(self) -> Dict[str, Task]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def state_map(self) -> Dict[str, State]:
        return {s.id: s for s in self.states}

    def producers(self, s: str) -> Tuple[str, ...]:
        return tuple(t.id for t in self.tasks if s in t.produce)

    def consumers(self, s: str) -> Tuple[str, ...]:
        return tuple(t.id for t in self.tasks if s in t.consume)

    def is_raw(self, s: str) -> bool:
        return not self.producers(s)

    def unit_tasks(self, unit: str) -> Tuple[str, ...]:
        return tuple(t.id for t in self.tasks if any(o.unit == unit for o in t.units))

    @property
    def horizon_time(self) -> float:
        if self.big_h is not None:
            return float(self.big_h)
        return float(sum(t.alpha + t.beta * max(o.b[1] for o in t.units) for t in self.tasks))


def task_order(stn: StateTaskNetwork) -> Optional[List[str]]:
    """Tasks in precedence order (producers before consumers), or None if cyclic."""
    succ: Dict[str, set] = {t.id: set() for t in stn.tasks}
    indeg = {t.id: 0 for t in stn.tasks}
    for t in stn.tasks:
        for s in t.produce:
            for c in stn.consumers(s):
                if c not in succ[t.id]:
                    succ[t.id].add(c)
                    indeg[c] += 1
    ready = sorted(k for k, d in indeg.items() if d == 0)
    order = []
    while ready:
        k = ready.pop(0)
        order.append(k)
        for c in sorted(succ[k]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
                ready.sort()
    return order if len(order) == len(stn.tasks) else None


def validate_stn(stn: StateTaskNetwork) -> ValidationReport:
    errors, warnings = [], []
    state_ids = [s.id for s in stn.states]
    states = set(state_ids)
    if len(states) != len(state_ids):
        errors.append("duplicate state ids")
    task_ids = [t.id for t in stn.tasks]
    if len(set(task_ids)) != len(task_ids):
        errors.append("duplicate task ids")
    if set(task_ids) & states:
        errors.append("state and task ids must be disjoint (the graph is bipartite)")
    if stn.horizon < 1:
        errors.append("horizon must be at least 1")
    for s in stn.states:
        if s.demand < 0:
            errors.append(f"state {s.id}: negative demand")
    for t in stn.tasks:
        if not t.units:
            errors.append(f"task {t.id}: no eligible unit")
        seen_units = set()
        for opt in t.units:
            if opt.unit in seen_units:
                errors.append(f"task {t.id}: unit {opt.unit} listed twice")
            seen_units.add(opt.unit)
            if int(opt.p) != opt.p or opt.p < 1:
                errors.append(f"task {t.id} on {opt.unit}: processing time must be an integer >= 1")
            lo, hi = opt.b
            if lo < 0 or lo > hi:
                errors.append(f"task {t.id} on {opt.unit}: batch bounds out of order")
        for name, fr in (("consume", t.consume), ("produce", t.produce)):
            for s, f in fr.items():
                if s not in states:
                    errors.append(f"task {t.id}: {name} arc to unknown state {s!r}")
                if f <= 0:
                    errors.append(f"task {t.id}: {name} fraction for {s} must be positive")
            if fr and abs(sum(fr.values()) - 1.0) > FRACTION_TOL:
                errors.append(f"task {t.id}: {name} fractions sum to {sum(fr.values()):g}, not 1")
        if not t.produce:
            errors.append(f"task {t.id}: produces nothing")
        if t.alpha < 0 or t.beta < 0:
            errors.append(f"task {t.id}: alpha and beta must be nonnegative")
    if not errors and task_order(stn) is None:
        warnings.append("state precedence contains a cycle")
    for s in stn.states:
        if s.demand > 0 and s.id in states and not stn.producers(s.id):
            errors.append(f"state {s.id}: positive demand but no producing task")
    return ValidationReport(tuple(errors), tuple(warnings))


@dataclass(frozen=True)
class ScheduleEntry:
    task: str
    unit: str
    start: int
    batch: float
    duration: int

    @property
    def end(self) -> int:
        return self.start + self.duration


@dataclass(frozen=True)
class Schedule:
    entries: Tuple[ScheduleEntry, ...] = ()

    def __post_init__(self):
        ordered = sorted(self.entries, key=lambda e: (e.start, e.task, e.unit))
        object.__setattr__(self, "entries", tuple(ordered))

    @property
    def makespan(self) -> float:
        return makespan(self)


def makespan(schedule: Schedule) -> float:
    return float(max((e.start + e.duration for e in schedule.entries), default=0))


def inventories(stn: StateTaskNetwork, schedule: Schedule) -> Dict[str, List[float]]:
    """Stock of every non-raw state at times ``0..horizon``.

    A batch is withdrawn when its task starts and credited when it ends;
    stock starts empty.
    """
    L = stn.horizon
    out = {s.id: [0.0] * (L + 1) for s in stn.states if not stn.is_raw(s.id)}
    for e in schedule.entries:
        task = stn.task_map[e.task]
        for s, f in task.consume.items():
            if s in out:
                for t in range(max(e.start, 0), L + 1):
                    out[s][t] -= f * e.batch
        for s, f in task.produce.items():
            if s in out:
                for t in range(max(e.end, 0), L + 1):
                    out[s][t] += f * e.batch
    return out


def validate_schedule(stn: StateTaskNetwork, schedule: Schedule,
                      tol: float = 1e-6) -> ValidationReport:
    errors = []
    L = stn.horizon
    for e in schedule.entries:
        task = stn.task_map.get(e.task)
        if task is None:
            errors.append(f"unknown task {e.task!r}")
            continue
        try:
            opt = task.option(e.unit)
        except KeyError:
            errors.append(f"task {e.task} is not eligible on unit {e.unit}")
            continue
        if e.duration != opt.p:
            errors.append(f"{e.task}@{e.start}: duration {e.duration} differs from p={opt.p}")
        if e.start < 0 or e.start > L - 1:
            errors.append(f"{e.task}@{e.start}: start outside the horizon 0..{L - 1}")
        lo, hi = opt.b
        if e.batch < lo - tol or e.batch > hi + tol:
            errors.append(f"batch bound violated: {e.task} on {e.unit} at {e.start} "
                          f"has batch {e.batch:g} outside [{lo:g}, {hi:g}]")
    by_unit: Dict[str, List[ScheduleEntry]] = {}
    for e in schedule.entries:
        by_unit.setdefault(e.unit, []).append(e)
    for unit, ents in sorted(by_unit.items()):
        ents = sorted(ents, key=lambda e: e.start)
        for a, b in zip(ents, ents[1:]):
            if b.start < a.end:
                errors.append(f"unit {unit} overlap: {a.task}@{a.start} and {b.task}@{b.start}")
    if not errors:
        inv = inventories(stn, schedule)
        for s, levels in inv.items():
            for t, val in enumerate(levels):
                if val < -tol:
                    errors.append(f"negative inventory of {s} at time {t}: {val:g}")
                    break
        for s in stn.states:
            if s.demand <= 0:
                continue
            final = inv[s.id][L] if s.id in inv else math.inf
            if final < s.demand - tol:
                errors.append(f"demand for {s.id} not met: {final:g} < {s.demand:g}")
    return ValidationReport(tuple(errors))


__all__ = [
    "Schedule", "ScheduleEntry", "State", "StateTaskNetwork", "Task", "UnitOption",
    "inventories", "makespan", "task_order", "validate_schedule", "validate_stn",
]
