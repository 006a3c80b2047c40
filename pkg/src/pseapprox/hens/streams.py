"""Streams, temperature intervals and minimum utility targets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

from ..model import ModelBuilder, ValidationReport
from ..solvers import solve_lp

HOT, COLD = "hot", "cold"


@dataclass(frozen=True)
class Stream:
    id: str
    kind: str
    t_in: float
    t_out: float
    F: float

    @property
    def load(self) -> float:
        return self.F * abs(self.t_in - self.t_out)


@dataclass(frozen=True)
class HensInstance:
    hot: Tuple[Stream, ...]
    cold: Tuple[Stream, ...]
    dt_min: float = 0.0
    cost_hu: float = 1.0
    cost_cu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "hot", tuple(self.hot))
        object.__setattr__(self, "cold", tuple(self.cold))

    @property
    def total_hot(self) -> float:
        return sum(s.load for s in self.hot)

    @property
    def total_cold(self) -> float:
        return sum(s.load for s in self.cold)


def validate_hens(inst: HensInstance) -> ValidationReport:
    errors = []
    ids = [s.id for s in inst.hot + inst.cold]
    if len(set(ids)) != len(ids):
        errors.append("stream ids must be unique across hot and cold streams")
    for s in inst.hot:
        if s.kind != HOT:
            errors.append(f"stream {s.id}: listed as hot but kind is {s.kind!r}")
        if not s.t_in > s.t_out:
            errors.append(f"hot stream {s.id}: t_in must exceed t_out")
    for s in inst.cold:
        if s.kind != COLD:
            errors.append(f"stream {s.id}: listed as cold but kind is {s.kind!r}")
        if not s.t_in < s.t_out:
            errors.append(f"cold stream {s.id}: t_in must be below t_out")
    for s in inst.hot + inst.cold:
        if not s.F > 0:
            errors.append(f"stream {s.id}: F must be positive")
    if inst.dt_min < 0:
        errors.append("dt_min must be nonnegative")
    if inst.cost_hu < 0 or inst.cost_cu < 0:
        errors.append("utility costs must be nonnegative")
    return ValidationReport(tuple(errors))


@dataclass(frozen=True)
class TemperatureGrid:
    """Interval boundaries ``T_0 > ... > T_r`` with per-interval heats.

    ``sigma[i][t]`` and ``delta[j][t]`` use 0-based positions, so position
    ``t`` is the interval ``[T_{t+1}, T_t]``; lower positions are hotter.
    """

    boundaries: Tuple[float, ...]
    sigma: Dict[str, Tuple[float, ...]]
    delta: Dict[str, Tuple[float, ...]]

    @property
    def intervals(self) -> int:
        return max(len(self.boundaries) - 1, 0)


def _contained(lo: float, hi: float, a: float, b: float) -> bool:
    return lo >= min(a, b) - 1e-12 and hi <= max(a, b) + 1e-12


def build_temperature_intervals(inst: HensInstance) -> TemperatureGrid:
    """Partition the (shifted) temperature range at every inlet and outlet.

    Hot temperatures are lowered by ``dt_min`` first, which turns the
    approach requirement into plain containment.
    """
    dt = inst.dt_min
    temps = {s.t_in - dt for s in inst.hot} | {s.t_out - dt for s in inst.hot}
    temps |= {s.t_in for s in inst.cold} | {s.t_out for s in inst.cold}
    bounds = tuple(sorted(temps, reverse=True))
    spans = [(bounds[t + 1], bounds[t]) for t in range(len(bounds) - 1)]
    sigma = {s.id: tuple(s.F * (hi - lo) if _contained(lo, hi, s.t_in - dt, s.t_out - dt) else 0.0
                         for lo, hi in spans) for s in inst.hot}
    delta = {s.id: tuple(s.F * (hi - lo) if _contained(lo, hi, s.t_in, s.t_out) else 0.0
                         for lo, hi in spans) for s in inst.cold}
    return TemperatureGrid(bounds, sigma, delta)


@dataclass(frozen=True)
class UtilityTarget:
    hot_utility: float
    cold_utility: float
    cost: float


def _interval_net(grid: TemperatureGrid):
    r = grid.intervals
    supply = [sum(v[t] for v in grid.sigma.values()) for t in range(r)]
    demand = [sum(v[t] for v in grid.delta.values()) for t in range(r)]
    return supply, demand


def min_utility_cascade(inst: HensInstance) -> UtilityTarget:
    """Top-down heat cascade: hot utility covers the deepest cumulative deficit."""
    grid = build_temperature_intervals(inst)
    supply, demand = _interval_net(grid)
    residual, worst = 0.0, 0.0
    for s, d in zip(supply, demand):
        residual += s - d
        worst = min(worst, residual)
    q_hu = abs(worst)
    q_cu = max(0.0, q_hu + sum(supply) - sum(demand))
    return UtilityTarget(q_hu, q_cu, inst.cost_hu * q_hu + inst.cost_cu * q_cu)


def transshipment_utility_lp(inst: HensInstance) -> UtilityTarget:
    """The same target from the transshipment LP, solved with the simplex engine."""
    grid = build_temperature_intervals(inst)
    supply, demand = _interval_net(grid)
    r = len(supply)
    if r == 0:
        return UtilityTarget(0.0, 0.0, 0.0)
    mb = ModelBuilder("min-utility")
    mb.add_var("QHU")
    for t in range(1, r):
        mb.add_var(f"R({t})")
    mb.add_var("QCU")
    mb.set_objective({"QHU": inst.cost_hu, "QCU": inst.cost_cu})
    for t in range(r):
        into = "QHU" if t == 0 else f"R({t})"
        out = "QCU" if t == r - 1 else f"R({t + 1})"
        mb.add_constraint(f"interval({t + 1})", {into: 1.0, out: -1.0}, "=", demand[t] - supply[t])
    res = solve_lp(mb.build())
    if not res.optimal:
        raise RuntimeError(f"transshipment LP ended with status {res.status}")
    return UtilityTarget(res.primal["QHU"], res.primal["QCU"], res.objective)


def utility_energy_lower_bound(inst: HensInstance) -> float:
    h, c = inst.total_hot, inst.total_cold
    return inst.cost_hu * max(0.0, c - h) + inst.cost_cu * max(0.0, h - c)


__all__ = [
    "COLD", "HOT", "HensInstance", "Stream", "TemperatureGrid", "UtilityTarget",
    "build_temperature_intervals", "min_utility_cascade", "transshipment_utility_lp",
    "utility_energy_lower_bound", "validate_hens",
]
