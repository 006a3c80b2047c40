"""Best-bound-first branch and bound over :func:`solve_matrix`."""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import BilinearModel, LinearModel
from .simplex import solve_matrix

INT_TOL = 1e-7


@dataclass(frozen=True)
class MilpOutcome:
    status: str
    objective: float
    primal: Optional[dict]
    best_bound: float
    nodes_explored: int

    @property
    def has_solution(self) -> bool:
        return self.primal is not None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class UnboundedRelaxationError(ValueError):
    pass


def _integral_objective(mf) -> bool:
    nz = np.flatnonzero(mf.c)
    return (bool(np.all(mf.integer[nz])) and bool(np.all(mf.c[nz] == np.round(mf.c[nz])))
            and float(mf.c0).is_integer())


def solve_milp(model: LinearModel, node_limit: int = 100_000,
               time_limit: Optional[float] = None, seed: int = 0) -> MilpOutcome:
    """Solve a mixed-integer linear model to global optimality.

    Nodes are expanded best-bound first (ties by creation order) and branch
    on the most fractional integer variable, lowest index first.  When a
    limit stops the search the best incumbent is returned with status
    ``feasible-limit``, or ``node-limit`` if none was found.  ``seed`` is
    accepted for interface symmetry; the search has no random choices.
    """
    if isinstance(model, BilinearModel):
        raise TypeError("solve_milp needs a linear model")
    mf = model.matrix
    integer = mf.integer
    for j in np.flatnonzero(integer):
        if not (math.isfinite(mf.lb[j]) and math.isfinite(mf.ub[j])):
            raise ValueError(f"integer variable {mf.var_ids[j]!r} needs finite bounds")
    sgn = -1.0 if mf.maximize else 1.0
    step = 1.0 if _integral_objective(mf) else 0.0
    lb0 = np.where(integer, np.ceil(mf.lb - INT_TOL), mf.lb)
    ub0 = np.where(integer, np.floor(mf.ub + INT_TOL), mf.ub)

    start = time.monotonic()
    heap = [(-math.inf, 0, lb0, ub0)]
    counter = 1
    incumbent = math.inf        # internal minimisation value
    best_x = None
    nodes = 0
    status = None

    def prunable(bound):
        if not math.isfinite(bound) or not math.isfinite(incumbent):
            return bound >= incumbent
        if step:
            return math.ceil(bound - 1e-6) >= incumbent - 1e-9
        return bound >= incumbent - 1e-9 * max(1.0, abs(incumbent))

    while heap:
        if nodes >= node_limit or (time_limit is not None
                                   and time.monotonic() - start > time_limit):
            status = "limit"
            break
        bound, _, lb, ub = heapq.heappop(heap)
        if prunable(bound):
            continue
        nodes += 1
        out = solve_matrix(mf, lb, ub)
        if out.status == "infeasible":
            continue
        if out.status == "unbounded":
            raise UnboundedRelaxationError("LP relaxation is unbounded")
        val = sgn * out.objective
        if prunable(val):
            continue
        x = np.array([out.primal[v] for v in mf.var_ids])
        frac = np.abs(x - np.round(x))
        frac[~integer] = 0.0
        if frac.max(initial=0.0) <= INT_TOL:
            x[integer] = np.round(x[integer])
            incumbent = sgn * (float(mf.c @ x) + mf.c0)
            best_x = x
            continue
        dist = np.where(integer & (frac > INT_TOL), np.minimum(x - np.floor(x), np.ceil(x) - x), -1.0)
        j = int(np.argmax(dist))
        down_ub = ub.copy()
        down_ub[j] = math.floor(x[j])
        up_lb = lb.copy()
        up_lb[j] = math.ceil(x[j])
        heapq.heappush(heap, (val, counter, lb, down_ub))
        heapq.heappush(heap, (val, counter + 1, up_lb, ub))
        counter += 2

    open_bound = min((h[0] for h in heap), default=math.inf)
    best_bound = min(open_bound, incumbent)
    if step and math.isfinite(best_bound) and best_bound < incumbent:
        best_bound = min(math.ceil(best_bound - 1e-6), incumbent)
    primal = dict(zip(mf.var_ids, best_x.tolist())) if best_x is not None else None
    if status == "limit":
        status = "feasible-limit" if primal is not None else "node-limit"
    else:
        status = "optimal" if primal is not None else "infeasible"
        best_bound = incumbent
    objective = sgn * incumbent if primal is not None else math.nan
    return MilpOutcome(status, objective, primal, sgn * best_bound, nodes)
