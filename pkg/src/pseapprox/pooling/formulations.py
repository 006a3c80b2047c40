"""P- and PQ-formulations of the pooling problem and their linear slices.

Variable names: ``x(i,l)``, ``y(l,j)``, ``z(i,j)`` arc flows, ``p(l,k)``
pool qualities, ``q(i,l)`` input proportions and ``v(i,l,j)`` path flows.
Rows whose bounds are vacuous (zero lower bounds, infinite upper bounds)
are not emitted.  Every bilinear term is written with the quality or
proportion variable first, which is the variable partitioned by the
piecewise relaxation.
"""
from __future__ import annotations

import math
from typing import Mapping, Optional, Tuple

from ..model import (BilinearModel, LinearModel, ModelBuilder, ObjectiveSense, evaluate_expression,
                     objective_value)
from .network import PoolingNetwork, PoolingSolution


class DegeneratePoolError(ValueError):
    pass


def xv(i, l):
    return f"x({i},{l})"


def yv(l, j):
    return f"y({l},{j})"


def zv(i, j):
    return f"z({i},{j})"


def pv(l, k):
    return f"p({l},{k})"


def qv(i, l):
    return f"q({i},{l})"


def vv(i, l, j):
    return f"v({i},{l},{j})"


def _check_degenerate(net: PoolingNetwork) -> None:
    for inp in net.inputs:
        if inp.supply[0] <= 0:
            continue
        outlets = [l for i, l in net.x_arcs if i == inp.id]
        direct = [j for i, j in net.z_arcs if i == inp.id]
        if not direct and outlets and all(net.is_degenerate(l) for l in outlets):
            raise DegeneratePoolError(
                f"input {inp.id} must ship {inp.supply[0]} but only feeds degenerate pools")


def build_p_formulation(net: PoolingNetwork) -> BilinearModel:
    _check_degenerate(net)
    mb = ModelBuilder("pooling-P")
    K = net.attributes
    for i, l in net.x_arcs:
        mb.add_var(xv(i, l))
    for l, j in net.y_arcs:
        mb.add_var(yv(l, j))
    for i, j in net.z_arcs:
        mb.add_var(zv(i, j))
    for pool in net.pools:
        for k in K:
            mb.add_var(pv(pool.id, k))

    obj = {}
    for i, l in net.x_arcs:
        obj[xv(i, l)] = net.input(i).cost
    for l, j in net.y_arcs:
        obj[yv(l, j)] = -net.output(j).profit
    for i, j in net.z_arcs:
        obj[zv(i, j)] = -(net.output(j).profit - net.input(i).cost)
    mb.set_objective(obj, ObjectiveSense.MIN)

    for inp in net.inputs:
        terms = [(xv(inp.id, l), 1.0) for i, l in net.x_arcs if i == inp.id]
        terms += [(zv(inp.id, j), 1.0) for i, j in net.z_arcs if i == inp.id]
        lo, hi = inp.supply
        if lo > 0:
            mb.add_constraint(f"supply_lo({inp.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"supply_hi({inp.id})", terms, "<=", hi)
    for pool in net.pools:
        if math.isfinite(pool.capacity):
            terms = [(yv(pool.id, j), 1.0) for j in net.pool_outputs(pool.id)]
            mb.add_constraint(f"capacity({pool.id})", terms, "<=", pool.capacity)
    for out in net.outputs:
        terms = _inflow_terms(net, out.id)
        lo, hi = out.demand
        if lo > 0:
            mb.add_constraint(f"demand_lo({out.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"demand_hi({out.id})", terms, "<=", hi)
    for pool in net.pools:
        l = pool.id
        terms = [(xv(i, l), 1.0) for i in net.pool_inputs(l)]
        terms += [(yv(l, j), -1.0) for j in net.pool_outputs(l)]
        mb.add_constraint(f"balance({l})", terms, "=", 0.0)
    for pool in net.pools:
        l = pool.id
        for k in K:
            terms = [(xv(i, l), net.input(i).quality[k]) for i in net.pool_inputs(l)]
            prods = [(pv(l, k), yv(l, j), -1.0) for j in net.pool_outputs(l)]
            mb.add_constraint(f"blend({l},{k})", terms, "=", 0.0, products=prods)
    for out in net.outputs:
        j = out.id
        for k in K:
            lo, hi = net.quality_bound(j, k)
            for side, bound, sense in (("lo", lo, ">="), ("hi", hi, "<=")):
                if (side == "lo" and bound <= 0) or (side == "hi" and not math.isfinite(bound)):
                    continue
                terms = [(zv(i, j), net.input(i).quality[k] - bound)
                         for i, jj in net.z_arcs if jj == j]
                terms += [(yv(l, j), -bound) for l, jj in net.y_arcs if jj == j]
                prods = [(pv(l, k), yv(l, j), 1.0) for l, jj in net.y_arcs if jj == j]
                mb.add_constraint(f"quality_{side}({j},{k})", terms, sense, 0.0, products=prods)
    return mb.build()


def _inflow_terms(net: PoolingNetwork, j: str):
    terms = [(yv(l, j), 1.0) for l, jj in net.y_arcs if jj == j]
    terms += [(zv(i, j), 1.0) for i, jj in net.z_arcs if jj == j]
    return terms


def _paths(net: PoolingNetwork):
    return [(i, l, j) for i, l in net.x_arcs for ll, j in net.y_arcs if ll == l]


def build_pq_formulation(net: PoolingNetwork, rlt: bool = True) -> BilinearModel:
    """PQ-formulation over path flows and input proportions.

    With ``rlt`` the capacity rows are multiplied by each proportion,
    giving ``sum_j v(i,l,j) <= S_l q(i,l)`` for every finite capacity.
    The companion product ``sum_i v(i,l,j) = y(l,j)`` is the formulation's
    own output-flow row.
    """
    _check_degenerate(net)
    mb = ModelBuilder("pooling-PQ")
    K = net.attributes
    paths = _paths(net)
    for l, j in net.y_arcs:
        mb.add_var(yv(l, j))
    for i, j in net.z_arcs:
        mb.add_var(zv(i, j))
    for i, l, j in paths:
        mb.add_var(vv(i, l, j))
    for i, l in net.x_arcs:
        mb.add_var(qv(i, l), 0.0, 1.0)

    obj = {vv(i, l, j): net.input(i).cost - net.output(j).profit for i, l, j in paths}
    obj.update({zv(i, j): net.input(i).cost - net.output(j).profit for i, j in net.z_arcs})
    mb.set_objective(obj, ObjectiveSense.MIN)

    for inp in net.inputs:
        terms = [(vv(i, l, j), 1.0) for i, l, j in paths if i == inp.id]
        terms += [(zv(inp.id, j), 1.0) for i, j in net.z_arcs if i == inp.id]
        lo, hi = inp.supply
        if lo > 0:
            mb.add_constraint(f"supply_lo({inp.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"supply_hi({inp.id})", terms, "<=", hi)
    for pool in net.pools:
        if math.isfinite(pool.capacity):
            terms = [(vv(i, l, j), 1.0) for i, l, j in paths if l == pool.id]
            mb.add_constraint(f"capacity({pool.id})", terms, "<=", pool.capacity)
    for out in net.outputs:
        terms = [(vv(i, l, j), 1.0) for i, l, j in paths if j == out.id]
        terms += [(zv(i, out.id), 1.0) for i, j in net.z_arcs if j == out.id]
        lo, hi = out.demand
        if lo > 0:
            mb.add_constraint(f"demand_lo({out.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"demand_hi({out.id})", terms, "<=", hi)
    for i, l, j in paths:
        mb.add_constraint(f"path({i},{l},{j})", [(vv(i, l, j), 1.0)], "=", 0.0,
                          products=[(qv(i, l), yv(l, j), -1.0)])
    for pool in net.pools:
        if net.is_degenerate(pool.id):
            continue
        mb.add_constraint(f"fractions({pool.id})",
                          [(qv(i, pool.id), 1.0) for i in net.pool_inputs(pool.id)], "=", 1.0)
    for l, j in net.y_arcs:
        terms = [(vv(i, l, j), 1.0) for i in net.pool_inputs(l)] + [(yv(l, j), -1.0)]
        mb.add_constraint(f"outflow({l},{j})", terms, "=", 0.0)
    for out in net.outputs:
        j = out.id
        for k in K:
            lo, hi = net.quality_bound(j, k)
            for side, bound, sense in (("lo", lo, ">="), ("hi", hi, "<=")):
                if (side == "lo" and bound <= 0) or (side == "hi" and not math.isfinite(bound)):
                    continue
                terms = [(vv(i, l, jj), net.input(i).quality[k] - bound)
                         for i, l, jj in paths if jj == j]
                terms += [(zv(i, j), net.input(i).quality[k] - bound)
                          for i, jj in net.z_arcs if jj == j]
                mb.add_constraint(f"quality_{side}({j},{k})", terms, sense, 0.0)
    if rlt:
        for i, l in net.x_arcs:
            cap = net.pool(l).capacity
            if math.isfinite(cap) and not net.is_degenerate(l):
                terms = [(vv(i, l, j), 1.0) for j in net.pool_outputs(l)] + [(qv(i, l), -cap)]
                mb.add_constraint(f"rlt_cap({i},{l})", terms, "<=", 0.0)
    return mb.build()


def p_assignment(net: PoolingNetwork, sol: PoolingSolution) -> dict:
    a = {xv(i, l): sol.x.get((i, l), 0.0) for i, l in net.x_arcs}
    a.update({yv(l, j): sol.y.get((l, j), 0.0) for l, j in net.y_arcs})
    a.update({zv(i, j): sol.z.get((i, j), 0.0) for i, j in net.z_arcs})
    a.update({pv(pool.id, k): sol.p.get((pool.id, k), 0.0)
              for pool in net.pools for k in net.attributes})
    return a


def pq_assignment(net: PoolingNetwork, sol: PoolingSolution) -> dict:
    if sol.q is None or sol.v is None:
        raise ValueError("solution carries no proportions / path flows")
    a = {yv(l, j): sol.y.get((l, j), 0.0) for l, j in net.y_arcs}
    a.update({zv(i, j): sol.z.get((i, j), 0.0) for i, j in net.z_arcs})
    a.update({vv(i, l, j): sol.v.get((i, l, j), 0.0) for i, l, j in _paths(net)})
    a.update({qv(i, l): sol.q.get((i, l), 0.0) for i, l in net.x_arcs})
    return a


def solution_objective(net: PoolingNetwork, sol: PoolingSolution) -> float:
    return objective_value(build_p_formulation(net), p_assignment(net, sol))


def fixed_proportion_lp(net: PoolingNetwork, q: Mapping[Tuple[str, str], float]) -> LinearModel:
    """The PQ-formulation with proportions fixed: an LP over ``y`` and ``z``."""
    mb = ModelBuilder("pooling-fixed-q")
    K = net.attributes
    for l, j in net.y_arcs:
        mb.add_var(yv(l, j))
    for i, j in net.z_arcs:
        mb.add_var(zv(i, j))
    pool_cost = {pool.id: sum(q.get((i, pool.id), 0.0) * net.input(i).cost
                              for i in net.pool_inputs(pool.id)) for pool in net.pools}
    pool_quality = {(pool.id, k): sum(q.get((i, pool.id), 0.0) * net.input(i).quality[k]
                                      for i in net.pool_inputs(pool.id))
                    for pool in net.pools for k in K}
    obj = {yv(l, j): pool_cost[l] - net.output(j).profit for l, j in net.y_arcs}
    obj.update({zv(i, j): net.input(i).cost - net.output(j).profit for i, j in net.z_arcs})
    mb.set_objective(obj)
    for inp in net.inputs:
        terms = [(yv(l, j), q.get((inp.id, l), 0.0))
                 for i, l in net.x_arcs if i == inp.id for j in net.pool_outputs(l)]
        terms += [(zv(inp.id, j), 1.0) for i, j in net.z_arcs if i == inp.id]
        lo, hi = inp.supply
        if lo > 0:
            mb.add_constraint(f"supply_lo({inp.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"supply_hi({inp.id})", terms, "<=", hi)
    for pool in net.pools:
        terms = [(yv(pool.id, j), 1.0) for j in net.pool_outputs(pool.id)]
        if net.pool_in_degree(pool.id) == 0:
            for name, coef in terms:
                mb.add_constraint(f"idle({name})", [(name, coef)], "=", 0.0)
        elif math.isfinite(pool.capacity):
            mb.add_constraint(f"capacity({pool.id})", terms, "<=", pool.capacity)
    for out in net.outputs:
        terms = _inflow_terms(net, out.id)
        lo, hi = out.demand
        if lo > 0:
            mb.add_constraint(f"demand_lo({out.id})", terms, ">=", lo)
        if math.isfinite(hi):
            mb.add_constraint(f"demand_hi({out.id})", terms, "<=", hi)
    for out in net.outputs:
        j = out.id
        for k in K:
            lo, hi = net.quality_bound(j, k)
            for side, bound, sense in (("lo", lo, ">="), ("hi", hi, "<=")):
                if (side == "lo" and bound <= 0) or (side == "hi" and not math.isfinite(bound)):
                    continue
                terms = [(yv(l, j), pool_quality[l, k] - bound) for l, jj in net.y_arcs if jj == j]
                terms += [(zv(i, j), net.input(i).quality[k] - bound)
                          for i, jj in net.z_arcs if jj == j]
                mb.add_constraint(f"quality_{side}({j},{k})", terms, sense, 0.0)
    return mb.build()


def fixed_quality_lp(net: PoolingNetwork, p: Mapping[Tuple[str, str], float]) -> LinearModel:
    """The P-formulation with pool qualities fixed: an LP over the arc flows."""
    model = build_p_formulation(net)
    if not isinstance(model, BilinearModel):
        return model
    mb = ModelBuilder("pooling-fixed-p")
    for var in model.variables:
        if not var.id.startswith("p("):
            mb.add_var(var.id, var.lower, var.upper)
    mb.set_objective(model.objective.terms, model.sense, model.objective.constant)
    products = model.products
    for con in model.constraints:
        terms = dict(con.expr.terms)
        for t in products.get(con.label, ()):
            l, k = t.a[2:-1].split(",")
            terms[t.b] = terms.get(t.b, 0.0) + t.coefficient * p[(l, k)]
        mb.add_constraint(con.label, terms, con.sense, con.rhs, constant=con.expr.constant)
    return mb.build()


def solution_from_proportions(net: PoolingNetwork, q: Mapping[Tuple[str, str], float],
                              y: Mapping, z: Mapping) -> PoolingSolution:
    K = net.attributes
    x, p, v = {}, {}, {}
    for pool in net.pools:
        l = pool.id
        through = sum(y.get((l, j), 0.0) for j in net.pool_outputs(l))
        for i in net.pool_inputs(l):
            x[(i, l)] = q.get((i, l), 0.0) * through
            for j in net.pool_outputs(l):
                v[(i, l, j)] = q.get((i, l), 0.0) * y.get((l, j), 0.0)
        for k in K:
            p[(l, k)] = sum(q.get((i, l), 0.0) * net.input(i).quality[k] for i in net.pool_inputs(l))
    sol = PoolingSolution(x=x, y=dict(y), z=dict(z), p=p,
                          q={a: q.get(a, 0.0) for a in net.x_arcs}, v=v)
    return _with_objective(net, sol)


def solution_from_flows(net: PoolingNetwork, x: Mapping, y: Mapping, z: Mapping,
                        p: Mapping, fallback_q: Optional[Mapping] = None) -> PoolingSolution:
    """Complete a P-formulation point with proportions and path flows."""
    q, v = {}, {}
    for pool in net.pools:
        l = pool.id
        ins = net.pool_inputs(l)
        total = sum(x.get((i, l), 0.0) for i in ins)
        for i in ins:
            if total > 1e-12:
                q[(i, l)] = x.get((i, l), 0.0) / total
            elif fallback_q is not None:
                q[(i, l)] = fallback_q.get((i, l), 0.0)
            else:
                q[(i, l)] = 1.0 / len(ins)
        for i in ins:
            for j in net.pool_outputs(l):
                v[(i, l, j)] = q[(i, l)] * y.get((l, j), 0.0)
    sol = PoolingSolution(x=dict(x), y=dict(y), z=dict(z), p=dict(p), q=q, v=v)
    return _with_objective(net, sol)


def _with_objective(net: PoolingNetwork, sol: PoolingSolution) -> PoolingSolution:
    obj = sum(net.input(i).cost * val for (i, l), val in sol.x.items())
    obj -= sum(net.output(j).profit * val for (l, j), val in sol.y.items())
    obj -= sum((net.output(j).profit - net.input(i).cost) * val for (i, j), val in sol.z.items())
    return PoolingSolution(sol.x, sol.y, sol.z, sol.p, sol.q, sol.v, obj)


__all__ = [
    "DegeneratePoolError", "build_p_formulation", "build_pq_formulation", "fixed_proportion_lp",
    "fixed_quality_lp", "p_assignment", "pq_assignment", "solution_from_flows",
    "solution_from_proportions", "solution_objective", "evaluate_expression",
]
