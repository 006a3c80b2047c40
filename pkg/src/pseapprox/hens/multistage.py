"""Multistage minimum utility cost: bilinear model, checker and alternating heuristic.

Hot streams pass stages ``1..l`` in increasing order and cold streams in
decreasing order.  ``t(i,k)`` is the temperature of hot stream ``i`` after
stage ``k`` (``t(i,0)`` is its inlet); ``t(j,k)`` is the temperature of cold
stream ``j`` entering stage ``k`` from below (``t(j,l)`` is its inlet, and
``t(j,k-1)`` is where it leaves stage ``k``).

Monotonicity defaults to ``"boundary"``: temperatures never increase with
the stage index, which agrees with the inlet and outlet rows.  The
alternative ``"printed"`` orientation (non-decreasing) is kept for
comparison; together with the boundary rows it pins every temperature.
A stream with no partner side passes every stage unchanged.  Without
``driving_force`` the model carries no approach-temperature rows;
with it, each exchanger keeps the hot side at least as hot as the cold side
at both ends, written with products so it only binds on used substreams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from ..model import (INF, BilinearModel, FeasibilityReport, HeuristicResult, ModelBuilder,
                     ObjectiveSense, check_feasibility, make_certificate)
from ..solvers import solve_lp
from .streams import HensInstance, utility_energy_lower_bound

MONOTONICITY = ("boundary", "printed")
CHECK_TOL = 1e-6
ZERO_FLOW = 1e-10


def t_var(stream: str, k: int) -> str:
    return f"t({stream},{k})"


def _ijk(name, i, j, k):
    return f"{name}({i},{j},{k})"


@dataclass(frozen=True)
class _Row:
    label: str
    terms: Dict[str, float]
    products: Tuple[Tuple[str, str, float], ...]
    sense: str
    rhs: float


@dataclass(frozen=True)
class _Spec:
    variables: Tuple[Tuple[str, float, float], ...]
    rows: Tuple[_Row, ...]
    objective: Dict[str, float]


def _spec(inst: HensInstance, stages: int, monotonicity: str, driving_force: bool) -> _Spec:
    if stages < 1:
        raise ValueError("stages must be at least 1")
    if monotonicity not in MONOTONICITY:
        raise ValueError(f"monotonicity must be one of {MONOTONICITY}")
    S = range(1, stages + 1)
    H, C = inst.hot, inst.cold
    variables: List[Tuple[str, float, float]] = []
    for s in H + C:
        for k in range(stages + 1):
            variables.append((t_var(s.id, k), 0.0, INF))
    for i in H:
        for j in C:
            for k in S:
                for name in ("fH", "fC", "tH", "tC", "q"):
                    variables.append((_ijk(name, i.id, j.id, k), 0.0, INF))
    for i in H:
        variables.append((f"QCU({i.id})", 0.0, INF))
    for j in C:
        variables.append((f"QHU({j.id})", 0.0, INF))
    objective = {f"QCU({i.id})": inst.cost_cu for i in H}
    objective.update({f"QHU({j.id})": inst.cost_hu for j in C})

    rows: List[_Row] = []
    add = lambda label, terms, sense, rhs, products=(): rows.append(
        _Row(label, dict(terms), tuple(products), sense, float(rhs)))
    for i in H:
        add(f"cold_utility({i.id})", {f"QCU({i.id})": 1.0, t_var(i.id, stages): -i.F}, "=",
            -i.F * i.t_out)
    for j in C:
        add(f"hot_utility({j.id})", {f"QHU({j.id})": 1.0, t_var(j.id, 0): j.F}, "=", j.F * j.t_out)
    for k in S:
        if C:
            for i in H:
                add(f"hot_split({i.id},{k})", {_ijk("fH", i.id, j.id, k): 1.0 for j in C}, "=", i.F)
        if H:
            for j in C:
                add(f"cold_split({j.id},{k})", {_ijk("fC", i.id, j.id, k): 1.0 for i in H}, "=", j.F)
    for i in H:
        for j in C:
            for k in S:
                q, fh, fc = (_ijk("q", i.id, j.id, k), _ijk("fH", i.id, j.id, k),
                             _ijk("fC", i.id, j.id, k))
                th, tc = _ijk("tH", i.id, j.id, k), _ijk("tC", i.id, j.id, k)
                add(f"hot_heat({i.id},{j.id},{k})", {q: 1.0}, "=", 0.0,
                    [(fh, t_var(i.id, k - 1), -1.0), (fh, th, 1.0)])
                add(f"cold_heat({i.id},{j.id},{k})", {q: 1.0}, "=", 0.0,
                    [(fc, tc, -1.0), (fc, t_var(j.id, k), 1.0)])
                if driving_force:
                    add(f"approach_out({i.id},{j.id},{k})", {}, ">=", 0.0,
                        [(fh, th, 1.0), (fh, t_var(j.id, k), -1.0)])
                    add(f"approach_in({i.id},{j.id},{k})", {}, ">=", 0.0,
                        [(fc, t_var(i.id, k - 1), 1.0), (fc, tc, -1.0)])
    for k in S:
        if not C:
            for i in H:
                add(f"hot_pass({i.id},{k})", {t_var(i.id, k): 1.0, t_var(i.id, k - 1): -1.0}, "=", 0.0)
        if not H:
            for j in C:
                add(f"cold_pass({j.id},{k})", {t_var(j.id, k - 1): 1.0, t_var(j.id, k): -1.0}, "=", 0.0)
        if C:
            for i in H:
                add(f"hot_mixing({i.id},{k})", {t_var(i.id, k): i.F}, "=", 0.0,
                    [(_ijk("fH", i.id, j.id, k), _ijk("tH", i.id, j.id, k), -1.0) for j in C])
        if H:
            for j in C:
                add(f"cold_mixing({j.id},{k})", {t_var(j.id, k - 1): j.F}, "=", 0.0,
                    [(_ijk("fC", i.id, j.id, k), _ijk("tC", i.id, j.id, k), -1.0) for i in H])
    sign = 1.0 if monotonicity == "boundary" else -1.0
    for s, kind in [(i, "hot") for i in H] + [(j, "cold") for j in C]:
        for k in S:
            add(f"{kind}_monotonicity({s.id},{k})",
                {t_var(s.id, k - 1): sign, t_var(s.id, k): -sign}, ">=", 0.0)
    for i in H:
        add(f"hot_inlet({i.id})", {t_var(i.id, 0): 1.0}, "=", i.t_in)
        add(f"hot_span({i.id})", {t_var(i.id, 0): 1.0, t_var(i.id, stages): -1.0}, ">=", 0.0)
        add(f"hot_target({i.id})", {t_var(i.id, stages): 1.0}, ">=", i.t_out)
    for j in C:
        add(f"cold_target({j.id})", {t_var(j.id, 0): 1.0}, "<=", j.t_out)
        add(f"cold_span({j.id})", {t_var(j.id, 0): 1.0, t_var(j.id, stages): -1.0}, ">=", 0.0)
        add(f"cold_inlet({j.id})", {t_var(j.id, stages): 1.0}, "=", j.t_in)
    return _Spec(tuple(variables), tuple(rows), objective)


def build_multistage_qp(inst: HensInstance, stages: int, monotonicity: str = "boundary",
                        driving_force: bool = False) -> BilinearModel:
    spec = _spec(inst, stages, monotonicity, driving_force)
    mb = ModelBuilder(f"multistage-{stages}")
    for vid, lo, hi in spec.variables:
        mb.add_var(vid, lo, hi)
    mb.set_objective(spec.objective)
    for row in spec.rows:
        mb.add_constraint(row.label, row.terms, row.sense, row.rhs, products=row.products)
    return mb.build()


@dataclass(frozen=True)
class MultistageCandidate:
    """Values for every model variable, keyed by variable id."""

    stages: int
    values: Mapping[str, float] = field(default_factory=dict)

    def cost(self, inst: HensInstance) -> float:
        return (inst.cost_cu * sum(self.values[f"QCU({i.id})"] for i in inst.hot)
                + inst.cost_hu * sum(self.values[f"QHU({j.id})"] for j in inst.cold))

    def get(self, name: str, *idx) -> float:
        return self.values[f"{name}({','.join(str(x) for x in idx)})"]


def check_multistage_solution(inst: HensInstance, cand: MultistageCandidate,
                              tol: float = CHECK_TOL, monotonicity: str = "boundary",
                              driving_force: bool = False) -> FeasibilityReport:
    model = build_multistage_qp(inst, cand.stages, monotonicity, driving_force)
    return check_feasibility(model, cand.values, tol)


def _linear_step(spec: _Spec, fixed: Mapping[str, float], t_max: float):
    """LP obtained by fixing ``fixed``; products of two free variables become ``g`` columns.

    Each ``g[a*b]`` stands for ``a * b`` with ``a`` a substream capacity and
    ``b`` a temperature, so ``0 <= g <= t_max * a`` keeps it recoverable.
    """
    mb = ModelBuilder("multistage-step")
    for vid, lo, hi in spec.variables:
        if vid not in fixed:
            mb.add_var(vid, lo, hi)
    aux: Dict[str, Tuple[str, str]] = {}

    def linear(terms, products):
        out: Dict[str, float] = {}
        const = 0.0
        for v, c in terms.items():
            if v in fixed:
                const += c * fixed[v]
            else:
                out[v] = out.get(v, 0.0) + c
        for a, b, c in products:
            if a in fixed and b in fixed:
                const += c * fixed[a] * fixed[b]
            elif a in fixed:
                out[b] = out.get(b, 0.0) + c * fixed[a]
            elif b in fixed:
                out[a] = out.get(a, 0.0) + c * fixed[b]
            else:
                g = f"g[{a}*{b}]"
                if g not in aux:
                    aux[g] = (a, b)
                    mb.add_var(g)
                out[g] = out.get(g, 0.0) + c
        return out, const

    for row in spec.rows:
        terms, const = linear(row.terms, row.products)
        if not terms:
            if ((row.sense == "=" and abs(row.rhs - const) > 1e-9)
                    or (row.sense == ">=" and const < row.rhs - 1e-9)
                    or (row.sense == "<=" and const > row.rhs + 1e-9)):
                return None, aux
            continue
        mb.add_constraint(row.label, terms, row.sense, row.rhs - const)
    for g, (a, _) in aux.items():
        mb.add_constraint(f"link[{g}]", {g: 1.0, a: -t_max}, "<=", 0.0)
    obj, _ = linear(spec.objective, ())
    mb.set_objective(obj)
    return mb.build(), aux


def _complete(spec: _Spec, inst: HensInstance, stages: int, fixed: Mapping[str, float],
              primal: Mapping[str, float], aux) -> MultistageCandidate:
    vals = {vid: float(fixed[vid]) if vid in fixed else float(primal[vid])
            for vid, _, _ in spec.variables}
    for g, (a, b) in aux.items():
        f = vals[a]
        vals[b] = primal[g] / f if f > ZERO_FLOW else 0.0
    for i in inst.hot:
        for j in inst.cold:
            for k in range(1, stages + 1):
                fh, fc = _ijk("fH", i.id, j.id, k), _ijk("fC", i.id, j.id, k)
                q = _ijk("q", i.id, j.id, k)
                if vals[fh] <= ZERO_FLOW:
                    vals[fh] = 0.0
                    vals[_ijk("tH", i.id, j.id, k)] = vals[t_var(i.id, k - 1)]
                if vals[fc] <= ZERO_FLOW:
                    vals[fc] = 0.0
                    vals[_ijk("tC", i.id, j.id, k)] = vals[t_var(j.id, k)]
                if vals[fh] == 0.0 or vals[fc] == 0.0:
                    vals[q] = 0.0
    return MultistageCandidate(stages, vals)


def _split_fixing(inst: HensInstance, stages: int, shares: Mapping[Tuple[str, str, int], float]):
    fixed = {}
    for k in range(1, stages + 1):
        for i in inst.hot:
            fixed.update({_ijk("fH", i.id, j.id, k): i.F * shares[(i.id, j.id, k)][0]
                          for j in inst.cold})
        for j in inst.cold:
            fixed.update({_ijk("fC", i.id, j.id, k): j.F * shares[(i.id, j.id, k)][1]
                          for i in inst.hot})
    return fixed


def alternating_multistage_heuristic(inst: HensInstance, stages: int = 1, max_iters: int = 10,
                                     monotonicity: str = "boundary",
                                     driving_force: bool = False, seed: int = 0) -> HeuristicResult:
    """Alternate two LPs and keep the cheapest checker-clean candidate.

    Step A fixes every substream capacity, which leaves an LP in the
    temperatures, heats and utilities.  Step B fixes the stage temperatures
    except the hot outlets and cold outlets, and substitutes the
    capacity-times-temperature products, which leaves an LP in the
    capacities.  Starts: an even split, then ``seed``-driven random splits.
    """
    spec = _spec(inst, stages, monotonicity, driving_force)
    t_max = max([1.0] + [max(s.t_in, s.t_out) for s in inst.hot + inst.cold])
    rng = np.random.default_rng(seed)
    H, C = inst.hot, inst.cold
    starts = []
    even = {(i.id, j.id, k): (1.0 / len(C), 1.0 / len(H))
            for i in H for j in C for k in range(1, stages + 1)}
    starts.append(even)
    for _ in range(2):
        raw = {key: (rng.random() + 0.05, rng.random() + 0.05) for key in even}
        norm_h = {(i.id, k): sum(raw[(i.id, j.id, k)][0] for j in C) for i in H
                  for k in range(1, stages + 1)}
        norm_c = {(j.id, k): sum(raw[(i.id, j.id, k)][1] for i in H) for j in C
                  for k in range(1, stages + 1)}
        starts.append({(i, j, k): (v[0] / norm_h[(i, k)], v[1] / norm_c[(j, k)])
                       for (i, j, k), v in raw.items()})
    if not H or not C:
        starts = starts[:1]

    best: Optional[MultistageCandidate] = None
    best_cost = math.inf
    iterations = 0
    stage_temps = ([t_var(i.id, k) for i in H for k in range(stages)]
                   + [t_var(j.id, k) for j in C for k in range(1, stages + 1)])

    def consider(cand):
        nonlocal best, best_cost
        if not check_multistage_solution(inst, cand, CHECK_TOL, monotonicity, driving_force):
            return False
        c = cand.cost(inst)
        if c < best_cost - 1e-9:
            best, best_cost = cand, c
        return True

    for shares in starts:
        fixed = _split_fixing(inst, stages, shares)
        prev = math.inf
        for it in range(max_iters):
            model, aux = _linear_step(spec, fixed, t_max)
            iterations += 1
            if model is None:
                break
            out = solve_lp(model)
            if not out.optimal:
                break
            cand = _complete(spec, inst, stages, fixed, out.primal, aux)
            consider(cand)
            temps = {v: cand.values[v] for v in stage_temps}
            model, aux = _linear_step(spec, temps, t_max)
            iterations += 1
            if model is None:
                break
            out = solve_lp(model)
            if not out.optimal:
                break
            cand = _complete(spec, inst, stages, temps, out.primal, aux)
            consider(cand)
            cost = cand.cost(inst)
            fixed = {v: cand.values[v] for v, _, _ in spec.variables if v[:3] in ("fH(", "fC(")}
            if cost >= prev - 1e-9:
                break
            prev = cost
    if best is None:
        return HeuristicResult("failed", None, None, "no checker-clean iterate found", iterations)
    bound = utility_energy_lower_bound(inst)
    return HeuristicResult("ok", best, make_certificate(ObjectiveSense.MIN, best_cost, bound),
                           "", iterations)


def energy_balance_optimum(inst: HensInstance, stages: int = 1) -> MultistageCandidate:
    """Optimal candidate when no approach rows are imposed, built in closed form.

    Without approach rows any heat split is thermally admissible, so the
    optimum exchanges ``min(total hot, total cold)``: heat is allotted by a
    northwest-corner transportation rule in the first stage and capacities
    are split in proportion to the heat each substream carries, which makes
    every substream leave at its mixed outlet temperature.
    """
    H, C = inst.hot, inst.cold
    supply = {i.id: i.load for i in H}
    demand = {j.id: j.load for j in C}
    exchange = min(sum(supply.values()), sum(demand.values())) if H and C else 0.0
    q: Dict[Tuple[str, str], float] = {}
    left = exchange
    hs, cs = dict(supply), dict(demand)
    for i in H:
        for j in C:
            x = min(hs[i.id], cs[j.id], left)
            q[(i.id, j.id)] = x
            hs[i.id] -= x
            cs[j.id] -= x
            left -= x
    vals: Dict[str, float] = {}
    sent = {i.id: sum(q[(i.id, j.id)] for j in C) for i in H}
    got = {j.id: sum(q[(i.id, j.id)] for i in H) for j in C}
    for i in H:
        out = i.t_in - sent[i.id] / i.F
        for k in range(stages + 1):
            vals[t_var(i.id, k)] = i.t_in if k == 0 else out
        vals[f"QCU({i.id})"] = i.F * (out - i.t_out)
    for j in C:
        out = j.t_in + got[j.id] / j.F
        for k in range(stages + 1):
            vals[t_var(j.id, k)] = out if k == 0 else j.t_in
        vals[f"QHU({j.id})"] = j.F * (j.t_out - out)
    for i in H:
        for j in C:
            for k in range(1, stages + 1):
                first = k == 1
                x = q[(i.id, j.id)] if first else 0.0
                if first and sent[i.id] > 0:
                    fh = i.F * x / sent[i.id]
                else:
                    fh = i.F / len(C)
                if first and got[j.id] > 0:
                    fc = j.F * x / got[j.id]
                else:
                    fc = j.F / len(H)
                vals[_ijk("fH", i.id, j.id, k)] = fh
                vals[_ijk("fC", i.id, j.id, k)] = fc
                vals[_ijk("q", i.id, j.id, k)] = x
                vals[_ijk("tH", i.id, j.id, k)] = vals[t_var(i.id, k)]
                vals[_ijk("tC", i.id, j.id, k)] = vals[t_var(j.id, k - 1)]
    return MultistageCandidate(stages, vals)


__all__ = [
    "MONOTONICITY", "MultistageCandidate", "alternating_multistage_heuristic",
    "build_multistage_qp", "check_multistage_solution", "energy_balance_optimum", "t_var",
]
