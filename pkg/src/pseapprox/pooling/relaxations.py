"""McCormick relaxations and proportion discretisation for pooling models.

``piecewise_mccormick_relax`` works on any :class:`BilinearModel`.  With
one piece every product ``a*b`` becomes an auxiliary ``w<a*b>`` bounded by
the four classical envelope rows.  With ``N > 1`` pieces the domain of the
first factor ``a`` is split into ``N`` equal intervals selected by binaries
``lam<a,n>``; the second factor is disaggregated into ``bh<a*b,n>`` and the
envelope rows are written in the compact form

    w >= sum_n a_n  bh_n + bL (a - sum_n a_n  lam_n)
    w >= sum_n a_n+1 bh_n + bU (a - sum_n a_n+1 lam_n)
    w <= sum_n a_n+1 bh_n + bL (a - sum_n a_n+1 lam_n)
    w <= sum_n a_n  bh_n + bU (a - sum_n a_n  lam_n)

which reduces to the single-piece envelope of the active interval.
Uniform partitions are nested when one piece count divides another, so
the relaxation value is monotone along such refinements.
"""
from __future__ import annotations

import math
from typing import Dict, Mapping, Optional, Tuple

from ..model import (OBJECTIVE, BilinearModel, Integrality, LinearModel, ModelBuilder,
                     ModelError)
from ..solvers import solve_lp, solve_milp
from .formulations import (build_p_formulation, build_pq_formulation, qv, solution_from_proportions,
                           vv, yv, zv, _paths)
from .network import PoolingNetwork, PoolingSolution

Bounds = Mapping[str, Tuple[float, float]]


class UnboundedProductError(ModelError):
    pass


def bilinear_bounds(net: PoolingNetwork, model: BilinearModel) -> Dict[str, Tuple[float, float]]:
    """Finite boxes for every variable that appears in a product of ``model``.

    Pool qualities lie between the extreme input qualities of the pool,
    proportions in ``[0, 1]`` and pool outflows below :meth:`flow_cap`.
    """
    out = {}
    for t in model.bilinear_terms():
        for var in (t.a, t.b):
            if var in out:
                continue
            kind, args = var[0], var[2:-1].split(",")
            declared = model.variable_map[var]
            if kind == "p":
                lo, hi = net.quality_range(*args)
            elif kind == "q":
                lo, hi = 0.0, 1.0
            elif kind == "y":
                lo, hi = 0.0, net.flow_cap(*args)
            else:
                lo, hi = declared.lower, declared.upper
            out[var] = (max(lo, declared.lower), min(hi, declared.upper))
    return out


def _product_name(a: str, b: str) -> str:
    return f"w<{a}*{b}>"


def piecewise_mccormick_relax(model: BilinearModel, pieces: int = 1,
                              bounds: Optional[Bounds] = None) -> LinearModel:
    """Replace every product by an auxiliary bounded by (piecewise) envelopes."""
    if pieces < 1:
        raise ValueError("pieces must be >= 1")
    if not isinstance(model, BilinearModel):
        return model
    bounds = dict(bounds or {})
    var_map = model.variable_map

    def box(var):
        lo, hi = var_map[var].lower, var_map[var].upper
        if var in bounds:
            lo, hi = max(lo, bounds[var][0]), min(hi, bounds[var][1])
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise UnboundedProductError(f"variable {var!r} in a product needs finite bounds")
        return lo, hi

    products = []
    for t in model.bilinear_terms():
        if (t.a, t.b) not in products:
            products.append((t.a, t.b))
    boxes = {v: box(v) for pair in products for v in pair}

    mb = ModelBuilder(f"{model.name}-mccormick{pieces}" if model.name else f"mccormick{pieces}")
    for var in model.variables:
        lo, hi = boxes.get(var.id, (var.lower, var.upper))
        mb.add_var(var.id, lo, hi, var.integrality)
    for a, b in products:
        (aL, aU), (bL, bU) = boxes[a], boxes[b]
        corners = (aL * bL, aL * bU, aU * bL, aU * bU)
        mb.add_var(_product_name(a, b), min(corners), max(corners))

    def linearised(label, expr):
        terms = dict(expr.terms)
        for t in model.products.get(label, ()):
            w = _product_name(t.a, t.b)
            terms[w] = terms.get(w, 0.0) + t.coefficient
        return terms

    for con in model.constraints:
        mb.add_constraint(con.label, linearised(con.label, con.expr), con.sense, con.rhs,
                          constant=con.expr.constant)
    mb.set_objective(linearised(OBJECTIVE, model.objective), model.sense,
                     model.objective.constant)

    if pieces == 1:
        for a, b in products:
            (aL, aU), (bL, bU) = boxes[a], boxes[b]
            w = _product_name(a, b)
            tag = f"{a}*{b}"
            mb.add_constraint(f"mc_lo1<{tag}>", {w: 1, b: -aL, a: -bL}, ">=", -aL * bL)
            mb.add_constraint(f"mc_lo2<{tag}>", {w: 1, b: -aU, a: -bU}, ">=", -aU * bU)
            mb.add_constraint(f"mc_hi1<{tag}>", {w: 1, b: -aU, a: -bL}, "<=", -aU * bL)
            mb.add_constraint(f"mc_hi2<{tag}>", {w: 1, b: -aL, a: -bU}, "<=", -aL * bU)
        return mb.build()

    breaks = {}
    for a in dict.fromkeys(a for a, _ in products):
        aL, aU = boxes[a]
        pts = [aL + (aU - aL) * n / pieces for n in range(pieces + 1)]
        breaks[a] = pts
        lams = [mb.add_var(f"lam<{a},{n}>", 0.0, 1.0, Integrality.BINARY) for n in range(pieces)]
        mb.add_constraint(f"pick<{a}>", {lam: 1.0 for lam in lams}, "=", 1.0)
        lo_terms = {a: 1.0}
        hi_terms = {a: 1.0}
        for n, lam in enumerate(lams):
            lo_terms[lam] = -pts[n]
            hi_terms[lam] = -pts[n + 1]
        mb.add_constraint(f"piece_lo<{a}>", lo_terms, ">=", 0.0)
        mb.add_constraint(f"piece_hi<{a}>", hi_terms, "<=", 0.0)
    for a, b in products:
        (bL, bU) = boxes[b]
        pts = breaks[a]
        w = _product_name(a, b)
        tag = f"{a}*{b}"
        bh = []
        for n in range(pieces):
            lam = f"lam<{a},{n}>"
            v = mb.add_var(f"bh<{tag},{n}>", min(0.0, bL), max(0.0, bU))
            bh.append(v)
            mb.add_constraint(f"bh_lo<{tag},{n}>", {v: 1.0, lam: -bL}, ">=", 0.0)
            mb.add_constraint(f"bh_hi<{tag},{n}>", {v: 1.0, lam: -bU}, "<=", 0.0)
        split = {v: 1.0 for v in bh}
        split[b] = -1.0
        mb.add_constraint(f"bh_sum<{tag}>", split, "=", 0.0)
        for name, sense, shift, edge in (("mc_lo1", ">=", 0, bL), ("mc_lo2", ">=", 1, bU),
                                         ("mc_hi1", "<=", 1, bL), ("mc_hi2", "<=", 0, bU)):
            terms = {w: 1.0, a: -edge}
            for n in range(pieces):
                terms[bh[n]] = -pts[n + shift]
                lam = f"lam<{a},{n}>"
                terms[lam] = terms.get(lam, 0.0) + edge * pts[n + shift]
            mb.add_constraint(f"{name}<{tag}>", terms, sense, 0.0)
    return mb.build()


def relaxation_bound(model: BilinearModel, pieces: int = 1, bounds: Optional[Bounds] = None,
                     node_limit: int = 20_000) -> float:
    """Optimal value of the piecewise McCormick relaxation (a lower bound when minimising)."""
    relax = piecewise_mccormick_relax(model, pieces, bounds)
    if relax.is_mip:
        out = solve_milp(relax, node_limit=node_limit)
        if out.status == "infeasible":
            return math.inf
        return out.best_bound
    out = solve_lp(relax)
    if out.status == "infeasible":
        return math.inf
    return out.objective


def mccormick_bound(net: PoolingNetwork, formulation: str = "pq", pieces: int = 1) -> float:
    """Relaxation bound of the P or PQ formulation of ``net``."""
    builder = {"p": build_p_formulation, "pq": build_pq_formulation}[formulation]
    model = builder(net)
    if not isinstance(model, BilinearModel):
        out = solve_lp(model)
        return out.objective if out.optimal else math.inf
    return relaxation_bound(model, pieces, bilinear_bounds(net, model))


def _beta(i, l, r):
    return f"beta({i},{l},{r})"


def _u(i, l, j, r):
    return f"u({i},{l},{j},{r})"


def discretize_proportions(net: PoolingNetwork, resolution: int) -> LinearModel:
    """Restrict every proportion to ``{0, 1/R, ..., 1}`` and linearise exactly.

    ``beta(i,l,r)`` selects the level ``r/R`` of ``q(i,l)``; the product with
    ``y(l,j)`` is carried by ``u(i,l,j,r) = beta(i,l,r) y(l,j)``, enforced by
    ``0 <= u <= cap(l,j) beta`` and ``sum_r u = y``.  All remaining rows are
    the linear rows of the PQ formulation, so every feasible point maps back
    to a PQ-feasible point.
    """
    R = int(resolution)
    if R < 1:
        raise ValueError("resolution must be >= 1")
    pq = build_pq_formulation(net)
    products = pq.products if isinstance(pq, BilinearModel) else {}
    mb = ModelBuilder(f"pooling-discrete{R}")
    for var in pq.variables:
        mb.add_var(var.id, var.lower, var.upper, var.integrality)
    for con in pq.constraints:
        if con.label not in products:
            mb.add_constraint(con.label, con.expr.terms, con.sense, con.rhs,
                              constant=con.expr.constant)
    mb.set_objective(pq.objective.terms, pq.sense, pq.objective.constant)
    for i, l in net.x_arcs:
        betas = [mb.add_var(_beta(i, l, r), 0.0, 1.0, Integrality.BINARY) for r in range(R + 1)]
        mb.add_constraint(f"level({i},{l})", {b: 1.0 for b in betas}, "=", 1.0)
        terms = {b: r / R for r, b in enumerate(betas)}
        terms[qv(i, l)] = -1.0
        mb.add_constraint(f"qlevel({i},{l})", terms, "=", 0.0)
    for i, l, j in _paths(net):
        cap = net.flow_cap(l, j)
        if not math.isfinite(cap):
            raise UnboundedProductError(f"flow on ({l},{j}) needs a finite bound to discretise")
        us = []
        for r in range(R + 1):
            u = mb.add_var(_u(i, l, j, r), 0.0, cap)
            us.append(u)
            mb.add_constraint(f"ucap({i},{l},{j},{r})", {u: 1.0, _beta(i, l, r): -cap}, "<=", 0.0)
        terms = {u: 1.0 for u in us}
        terms[yv(l, j)] = -1.0
        mb.add_constraint(f"usum({i},{l},{j})", terms, "=", 0.0)
        terms = {u: r / R for r, u in enumerate(us)}
        terms[vv(i, l, j)] = -1.0
        mb.add_constraint(f"upath({i},{l},{j})", terms, "=", 0.0)
    return mb.build()


def discrete_to_solution(net: PoolingNetwork, primal: Mapping[str, float]) -> PoolingSolution:
    """Map a point of :func:`discretize_proportions` back to a pooling solution."""
    q = {(i, l): primal[qv(i, l)] for i, l in net.x_arcs}
    y = {(l, j): max(0.0, primal[yv(l, j)]) for l, j in net.y_arcs}
    z = {(i, j): max(0.0, primal[zv(i, j)]) for i, j in net.z_arcs}
    return solution_from_proportions(net, q, y, z)


__all__ = [
    "UnboundedProductError", "bilinear_bounds", "discrete_to_solution", "discretize_proportions",
    "mccormick_bound", "piecewise_mccormick_relax", "relaxation_bound",
]
