"""Feasible-solution heuristics and the grid oracle for pooling."""
from __future__ import annotations

import itertools
import math
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

from ..model import HeuristicResult, ObjectiveSense, check_feasibility, make_certificate
from ..solvers import solve_lp
from .formulations import (build_p_formulation, build_pq_formulation, fixed_proportion_lp,
                           fixed_quality_lp, p_assignment, pq_assignment, solution_from_flows,
                           solution_from_proportions, xv, yv, zv)
from .network import PoolingNetwork, PoolingSolution
from .relaxations import mccormick_bound

FEAS_TOL = 1e-6
MAX_STARTS = 64
MAX_GRID_ARCS = 6

Proportions = Dict[Tuple[str, str], float]


class GridSizeError(ValueError):
    pass


def _active_pools(net: PoolingNetwork) -> List[str]:
    return [p.id for p in net.pools if net.pool_in_degree(p.id) > 0]


def uniform_proportions(net: PoolingNetwork) -> Proportions:
    q = {}
    for l in _active_pools(net):
        ins = net.pool_inputs(l)
        for i in ins:
            q[(i, l)] = 1.0 / len(ins)
    return q


def corner_proportions(net: PoolingNetwork) -> Iterator[Proportions]:
    """Every assignment feeding each pool from a single input, in arc order."""
    pools = _active_pools(net)
    for choice in itertools.product(*(net.pool_inputs(l) for l in pools)):
        q = {(i, l): 0.0 for i, l in net.x_arcs}
        for l, i in zip(pools, choice):
            q[(i, l)] = 1.0
        yield q


def _is_feasible(net: PoolingNetwork, sol: PoolingSolution) -> bool:
    if not check_feasibility(build_p_formulation(net), p_assignment(net, sol), FEAS_TOL):
        return False
    if sol.q is not None and sol.v is not None:
        return check_feasibility(build_pq_formulation(net), pq_assignment(net, sol), FEAS_TOL).feasible
    return True


def _solve_fixed_q(net: PoolingNetwork, q: Mapping) -> Optional[PoolingSolution]:
    out = solve_lp(fixed_proportion_lp(net, q))
    if not out.optimal:
        return None
    y = {(l, j): max(0.0, out.primal[yv(l, j)]) for l, j in net.y_arcs}
    z = {(i, j): max(0.0, out.primal[zv(i, j)]) for i, j in net.z_arcs}
    return solution_from_proportions(net, q, y, z)


def _solve_fixed_p(net: PoolingNetwork, p: Mapping, q_prev: Mapping) -> Optional[PoolingSolution]:
    out = solve_lp(fixed_quality_lp(net, p))
    if not out.optimal:
        return None
    x = {(i, l): max(0.0, out.primal[xv(i, l)]) for i, l in net.x_arcs}
    y = {(l, j): max(0.0, out.primal[yv(l, j)]) for l, j in net.y_arcs}
    z = {(i, j): max(0.0, out.primal[zv(i, j)]) for i, j in net.z_arcs}
    sol = solution_from_flows(net, x, y, z, p, fallback_q=q_prev)
    # rebuild from the proportions so that x, v and p agree exactly
    return solution_from_proportions(net, sol.q, y, z)


def alternating_heuristic(net: PoolingNetwork, start: Optional[Mapping] = None,
                          max_iters: int = 20, tol: float = 1e-7,
                          bound: Optional[float] = None) -> HeuristicResult:
    """Alternate between the fixed-proportion and fixed-quality LPs.

    From each start the proportions give pool qualities; the LP with those
    qualities fixed yields new flows, whose input shares become the next
    proportions.  The loop stops when the objective no longer improves.
    Without ``start`` the corner assignments and the uniform assignment are
    tried (at most ``MAX_STARTS`` in total).  Only points that pass the
    feasibility check of both formulations are kept.
    """
    if start is not None:
        starts = [dict(start)]
        for l in _active_pools(net):
            total = sum(starts[0].get((i, l), 0.0) for i in net.pool_inputs(l))
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"start proportions for pool {l} sum to {total}, not 1")
    else:
        starts = list(itertools.islice(corner_proportions(net), MAX_STARTS - 1))
        starts.append(uniform_proportions(net))
    best: Optional[PoolingSolution] = None
    iterations = 0
    for q in starts:
        current = _solve_fixed_q(net, q)
        iterations += 1
        last = current.objective if current is not None else math.inf
        if current is not None and _is_feasible(net, current):
            if best is None or current.objective < best.objective - tol:
                best = current
        p = current.p if current is not None else solution_from_proportions(
            net, q, {}, {}).p
        q_prev = q
        for _ in range(max_iters):
            nxt = _solve_fixed_p(net, p, q_prev)
            iterations += 1
            if nxt is None:
                break
            refined = _solve_fixed_q(net, nxt.q) or nxt
            iterations += 1
            if _is_feasible(net, refined) and (best is None
                                               or refined.objective < best.objective - tol):
                best = refined
            if refined.objective >= last - tol:
                break
            last = refined.objective
            p, q_prev = refined.p, refined.q
    if best is None:
        return HeuristicResult("failed", None, None, "no feasible iterate found", iterations)
    if bound is None:
        bound = mccormick_bound(net, "pq", 1)
    cert = make_certificate(ObjectiveSense.MIN, best.objective, bound)
    return HeuristicResult("ok", best, cert, "", iterations)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def proportion_grid(net: PoolingNetwork, resolution: int) -> Iterator[Proportions]:
    pools = _active_pools(net)
    per_pool = []
    for l in pools:
        ins = net.pool_inputs(l)
        per_pool.append([{(i, l): c / resolution for i, c in zip(ins, comp)}
                         for comp in _compositions(resolution, len(ins))])
    for combo in itertools.product(*per_pool):
        q = {}
        for part in combo:
            q.update(part)
        yield q


def grid_oracle_pooling(net: PoolingNetwork, resolution: int = 10,
                        bound: Optional[float] = None) -> HeuristicResult:
    """Best fixed-proportion LP over the uniform proportion grid of step ``1/R``."""
    if len(net.inputs) * len(net.pools) > MAX_GRID_ARCS:
        raise GridSizeError(f"grid oracle limited to |I|*|L| <= {MAX_GRID_ARCS}")
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    best = None
    count = 0
    for q in proportion_grid(net, resolution):
        count += 1
        sol = _solve_fixed_q(net, q)
        if sol is None or not _is_feasible(net, sol):
            continue
        if best is None or sol.objective < best.objective - 1e-9:
            best = sol
    if best is None:
        return HeuristicResult("failed", None, None, "no grid point is feasible", count)
    if bound is None:
        bound = mccormick_bound(net, "pq", 1)
    return HeuristicResult("ok", best, make_certificate(ObjectiveSense.MIN, best.objective, bound),
                           "", count)


__all__ = [
    "GridSizeError", "alternating_heuristic", "corner_proportions", "grid_oracle_pooling",
    "proportion_grid", "uniform_proportions",
]
