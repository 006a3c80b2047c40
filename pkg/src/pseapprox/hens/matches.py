"""Minimum number of matches: MILP, bounds, heuristics and exact oracles.

A :class:`MatchInstance` lists per-interval heat supplies ``sigma`` of hot
streams and demands ``delta`` of cold streams over intervals ``0..r-1``
ordered from hottest to coldest.  Heat may move from interval ``s`` to
interval ``t`` only when ``s <= t``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from ..model import (HeuristicResult, Integrality, LinearModel, ModelBuilder, ObjectiveSense,
                     ValidationReport, make_certificate)
from ..solvers import solve_lp, solve_milp
from .streams import HensInstance, build_temperature_intervals, min_utility_cascade

BALANCE_TOL = 1e-6
HOT_UTILITY, COLD_UTILITY = "HU", "CU"

Pair = Tuple[str, str]
Route = Tuple[str, int, str, int]


class UnbalancedInstanceError(ValueError):
    pass


@dataclass(frozen=True)
class MatchInstance:
    hot: Tuple[str, ...]
    cold: Tuple[str, ...]
    sigma: Mapping[str, Tuple[float, ...]]
    delta: Mapping[str, Tuple[float, ...]]

    def __post_init__(self):
        object.__setattr__(self, "hot", tuple(self.hot))
        object.__setattr__(self, "cold", tuple(self.cold))
        object.__setattr__(self, "sigma", {k: tuple(float(x) for x in v)
                                           for k, v in self.sigma.items()})
        object.__setattr__(self, "delta", {k: tuple(float(x) for x in v)
                                           for k, v in self.delta.items()})
        lengths = {len(v) for v in list(self.sigma.values()) + list(self.delta.values())}
        if len(lengths) > 1:
            raise ValueError("every stream needs one heat value per interval")

    @classmethod
    def single_interval(cls, hot_loads: Sequence[float], cold_loads: Sequence[float],
                        hot_ids: Optional[Sequence[str]] = None,
                        cold_ids: Optional[Sequence[str]] = None) -> "MatchInstance":
        hot_ids = list(hot_ids or [f"h{k + 1}" for k in range(len(hot_loads))])
        cold_ids = list(cold_ids or [f"c{k + 1}" for k in range(len(cold_loads))])
        return cls(hot_ids, cold_ids, {i: (h,) for i, h in zip(hot_ids, hot_loads)},
                   {j: (c,) for j, c in zip(cold_ids, cold_loads)})

    @property
    def intervals(self) -> int:
        for v in list(self.sigma.values()) + list(self.delta.values()):
            return len(v)
        return 0

    def h(self, i: str) -> float:
        return sum(self.sigma[i])

    def c(self, j: str) -> float:
        return sum(self.delta[j])

    def residuals(self) -> List[float]:
        """Cumulative surplus after each interval; all must be >= 0 to route."""
        out, acc = [], 0.0
        for t in range(self.intervals):
            acc += sum(self.sigma[i][t] for i in self.hot) - sum(self.delta[j][t] for j in self.cold)
            out.append(acc)
        return out

    def check_routable(self) -> None:
        res = self.residuals()
        scale = max([1.0] + [self.h(i) for i in self.hot])
        if res and abs(res[-1]) > BALANCE_TOL * scale:
            raise UnbalancedInstanceError(
                f"total supply and demand differ by {res[-1]:g}; place utilities with "
                "min_utility_cascade (see match_instance_from_streams)")
        if any(r < -BALANCE_TOL * scale for r in res):
            raise UnbalancedInstanceError(
                "some demand cannot be reached by hotter supply; place utilities with "
                "min_utility_cascade (see match_instance_from_streams)")

    def useful_pairs(self) -> List[Pair]:
        """Pairs that can exchange heat at all (some supply at or above some demand)."""
        out = []
        for i in self.hot:
            for j in self.cold:
                if any(self.sigma[i][s] > 0 and self.delta[j][t] > 0
                       for s in range(self.intervals) for t in range(s, self.intervals)):
                    out.append((i, j))
        return out


def match_instance_from_streams(inst: HensInstance) -> MatchInstance:
    """Interval heats of ``inst`` plus utility streams sized by the cascade.

    A hot utility supplies its load in the hottest interval and a cold
    utility absorbs its load in the coldest interval; each is added only
    when its load is positive.
    """
    grid = build_temperature_intervals(inst)
    target = min_utility_cascade(inst)
    r = grid.intervals
    sigma = dict(grid.sigma)
    delta = dict(grid.delta)
    hot = [s.id for s in inst.hot]
    cold = [s.id for s in inst.cold]
    if target.hot_utility > 0 and r:
        sigma[HOT_UTILITY] = (target.hot_utility,) + (0.0,) * (r - 1)
        hot.append(HOT_UTILITY)
    if target.cold_utility > 0 and r:
        delta[COLD_UTILITY] = (0.0,) * (r - 1) + (target.cold_utility,)
        cold.append(COLD_UTILITY)
    return MatchInstance(hot, cold, sigma, delta)


@dataclass(frozen=True)
class MatchPlan:
    matches: Tuple[Pair, ...]
    q: Mapping[Route, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "matches", tuple(sorted(set(self.matches))))

    @property
    def count(self) -> int:
        return len(self.matches)


def _qv(i, s, j, t):
    return f"q({i},{s + 1},{j},{t + 1})"


def _yv(i, j):
    return f"y({i},{j})"


def build_matches_milp(mi: MatchInstance) -> LinearModel:
    """Transportation MILP: one binary per (hot, cold) pair, big-M ``min(h, c)``."""
    mi.check_routable()
    r = mi.intervals
    mb = ModelBuilder("min-matches")
    for i in mi.hot:
        for j in mi.cold:
            mb.add_var(_yv(i, j), 0, 1, Integrality.BINARY)
    routes = [(i, s, j, t) for i in mi.hot for s in range(r) if mi.sigma[i][s] > 0
              for j in mi.cold for t in range(r) if mi.delta[j][t] > 0]
    for key in routes:
        mb.add_var(_qv(*key))
    mb.set_objective({_yv(i, j): 1.0 for i in mi.hot for j in mi.cold})
    for i in mi.hot:
        for s in range(r):
            if mi.sigma[i][s] > 0:
                mb.add_constraint(f"hot({i},{s + 1})",
                                  {_qv(*k): 1.0 for k in routes if k[0] == i and k[1] == s},
                                  "=", mi.sigma[i][s])
    for j in mi.cold:
        for t in range(r):
            if mi.delta[j][t] > 0:
                mb.add_constraint(f"cold({j},{t + 1})",
                                  {_qv(*k): 1.0 for k in routes if k[2] == j and k[3] == t},
                                  "=", mi.delta[j][t])
    for i in mi.hot:
        for j in mi.cold:
            terms = {_qv(*k): 1.0 for k in routes if k[0] == i and k[2] == j}
            terms[_yv(i, j)] = -min(mi.h(i), mi.c(j))
            mb.add_constraint(f"bigM({i},{j})", terms, "<=", 0.0)
    for k in routes:
        if k[1] > k[3]:
            mb.add_constraint(f"thermo{_qv(*k)[1:]}", {_qv(*k): 1.0}, "=", 0.0)
    return mb.build()


def _plan_from_primal(mi: MatchInstance, primal: Mapping[str, float], tol: float = 1e-9) -> MatchPlan:
    q = {}
    for i in mi.hot:
        for s in range(mi.intervals):
            for j in mi.cold:
                for t in range(s, mi.intervals):
                    val = primal.get(_qv(i, s, j, t), 0.0)
                    if val > tol:
                        q[(i, s, j, t)] = val
    matches = {(i, j) for (i, _, j, _), val in q.items()}
    return MatchPlan(tuple(matches), q)


def solve_matches_exact(mi: MatchInstance, node_limit: int = 200_000) -> Tuple[Optional[MatchPlan], str]:
    out = solve_milp(build_matches_milp(mi), node_limit=node_limit)
    if not out.has_solution:
        return None, out.status
    return _plan_from_primal(mi, out.primal), out.status


def lower_bound_matches(mi: MatchInstance) -> int:
    model = build_matches_milp(mi)
    out = solve_lp(model.relaxed())
    lp = math.ceil(out.objective - 1e-6) if out.optimal else 0
    hot = sum(1 for i in mi.hot if mi.h(i) > 0)
    cold = sum(1 for j in mi.cold if mi.c(j) > 0)
    return max(lp, hot, cold)


# --- routing on a fixed match set ------------------------------------------------

def route_on_matches(mi: MatchInstance, pairs: Iterable[Pair]) -> Optional[MatchPlan]:
    """Transportation LP restricted to ``pairs``; None when not routable."""
    pairs = set(pairs)
    r = mi.intervals
    routes = [(i, s, j, t) for i, j in sorted(pairs) for s in range(r) if mi.sigma[i][s] > 0
              for t in range(s, r) if mi.delta[j][t] > 0]
    mb = ModelBuilder("routing")
    for k in routes:
        mb.add_var(_qv(*k))
    for i in mi.hot:
        for s in range(r):
            if mi.sigma[i][s] > 0:
                mb.add_constraint(f"hot({i},{s + 1})",
                                  {_qv(*k): 1.0 for k in routes if k[0] == i and k[1] == s},
                                  "=", mi.sigma[i][s])
    for j in mi.cold:
        for t in range(r):
            if mi.delta[j][t] > 0:
                mb.add_constraint(f"cold({j},{t + 1})",
                                  {_qv(*k): 1.0 for k in routes if k[2] == j and k[3] == t},
                                  "=", mi.delta[j][t])
    out = solve_lp(mb.build())
    if not out.optimal:
        return None
    plan = _plan_from_primal(mi, out.primal)
    return MatchPlan(plan.matches, plan.q)


def routable_by_flow(mi: MatchInstance, pairs: Iterable[Pair], tol: float = 1e-7) -> bool:
    """Max-flow test of whether ``pairs`` can carry all the heat (independent of the LP engine)."""
    g = nx.DiGraph()
    total = 0.0
    r = mi.intervals
    for i in mi.hot:
        for s in range(r):
            if mi.sigma[i][s] > 0:
                g.add_edge("src", ("h", i, s), capacity=mi.sigma[i][s])
                total += mi.sigma[i][s]
    for j in mi.cold:
        for t in range(r):
            if mi.delta[j][t] > 0:
                g.add_edge(("c", j, t), "snk", capacity=mi.delta[j][t])
    for i, j in pairs:
        for s in range(r):
            if mi.sigma[i][s] <= 0:
                continue
            for t in range(s, r):
                if mi.delta[j][t] > 0:
                    g.add_edge(("h", i, s), ("c", j, t))
    if total <= tol:
        return True
    if "snk" not in g or "src" not in g:
        return False
    value = nx.maximum_flow_value(g, "src", "snk")
    return value >= total - tol * max(1.0, total)


def min_matches_subset_oracle(mi: MatchInstance, max_pairs: int = 20) -> int:
    """Smallest routable match set, by enumeration in order of size."""
    mi.check_routable()
    active_hot = [i for i in mi.hot if mi.h(i) > 0]
    active_cold = [j for j in mi.cold if mi.c(j) > 0]
    if not active_hot and not active_cold:
        return 0
    pairs = [p for p in mi.useful_pairs() if p[0] in active_hot and p[1] in active_cold]
    if len(pairs) > max_pairs:
        raise ValueError(f"subset oracle limited to {max_pairs} candidate pairs")
    start = max(len(active_hot), len(active_cold))
    for size in range(start, len(pairs) + 1):
        for subset in itertools.combinations(pairs, size):
            if {i for i, _ in subset} != set(active_hot) or {j for _, j in subset} != set(active_cold):
                continue
            if routable_by_flow(mi, subset):
                return size
    raise UnbalancedInstanceError("no match set routes all heat")


def min_matches_single_interval_exact(hot_loads: Sequence[float], cold_loads: Sequence[float],
                                      tol: float = 1e-7) -> int:
    """Exact optimum for one interval: streams minus the most zero-sum groups.

    Any optimal plan decomposes into trees over groups whose supplies equal
    their demands, and a group of ``g`` streams needs ``g - 1`` matches.
    The best partition is found by a subset recursion that adds one stream
    at a time and scores a group whenever the running set sums to zero.
    """
    vals = [h for h in hot_loads if h > tol] + [-c for c in cold_loads if c > tol]
    n = len(vals)
    if n == 0:
        return 0
    if n > 20:
        raise ValueError("subset recursion limited to 20 streams")
    size = 1 << n
    sums = [0.0] * size
    best = [0] * size
    scale = max(1.0, max(abs(v) for v in vals))
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        sums[mask] = sums[mask & (mask - 1)] + vals[low]
        top = 0
        m = mask
        while m:
            b = m & -m
            top = max(top, best[mask ^ b])
            m ^= b
        best[mask] = top + (1 if abs(sums[mask]) <= tol * scale else 0)
    if abs(sums[size - 1]) > tol * scale:
        raise UnbalancedInstanceError("loads are not balanced")
    return n - best[size - 1]


# --- validation -------------------------------------------------------------------

@dataclass(frozen=True)
class MatchPlanReport(ValidationReport):
    match_count: int = 0


def validate_match_plan(mi: MatchInstance, plan: MatchPlan, tol: float = 1e-6) -> MatchPlanReport:
    errors = []
    r = mi.intervals
    open_pairs = set(plan.matches)
    out_hot: Dict[Tuple[str, int], float] = {}
    in_cold: Dict[Tuple[str, int], float] = {}
    for (i, s, j, t), val in sorted(plan.q.items()):
        if i not in mi.sigma or j not in mi.delta or not (0 <= s < r and 0 <= t < r):
            errors.append(f"route q({i},{s + 1},{j},{t + 1}) refers to unknown streams or intervals")
            continue
        if val < -tol:
            errors.append(f"negative heat on q({i},{s + 1},{j},{t + 1})")
        if s > t and abs(val) > tol:
            errors.append(f"heat flows to a hotter interval on q({i},{s + 1},{j},{t + 1})")
        if abs(val) > tol and (i, j) not in open_pairs:
            errors.append(f"heat on closed match ({i},{j}) via q({i},{s + 1},{j},{t + 1})")
        out_hot[(i, s)] = out_hot.get((i, s), 0.0) + val
        in_cold[(j, t)] = in_cold.get((j, t), 0.0) + val
    for i in mi.hot:
        for s in range(r):
            got = out_hot.get((i, s), 0.0)
            if abs(got - mi.sigma[i][s]) > tol * max(1.0, mi.sigma[i][s]):
                errors.append(f"hot conservation ({i},{s + 1}): routes {got:g} of {mi.sigma[i][s]:g}")
    for j in mi.cold:
        for t in range(r):
            got = in_cold.get((j, t), 0.0)
            if abs(got - mi.delta[j][t]) > tol * max(1.0, mi.delta[j][t]):
                errors.append(f"cold conservation ({j},{t + 1}): receives {got:g} of {mi.delta[j][t]:g}")
    for i, j in plan.matches:
        if i not in mi.sigma or j not in mi.delta:
            errors.append(f"match ({i},{j}) refers to unknown streams")
    return MatchPlanReport(tuple(errors), (), plan.count)


# --- heuristics ----------------------------------------------------------------------

def _certify(mi: MatchInstance, plan: MatchPlan, lb: Optional[int] = None) -> HeuristicResult:
    report = validate_match_plan(mi, plan)
    if not report.ok:
        return HeuristicResult("failed", None, None, "; ".join(report.errors))
    bound = lower_bound_matches(mi) if lb is None else lb
    return HeuristicResult("ok", plan, make_certificate(ObjectiveSense.MIN, plan.count, bound))


def lp_round_matches(mi: MatchInstance) -> HeuristicResult:
    """Open matches in decreasing LP value until routable, then drop redundant ones."""
    model = build_matches_milp(mi)
    out = solve_lp(model.relaxed())
    if not out.optimal:
        return HeuristicResult("failed", None, None, f"LP relaxation {out.status}")
    order = sorted(((out.primal[_yv(i, j)], i, j) for i in mi.hot for j in mi.cold),
                   key=lambda e: (-e[0], e[1], e[2]))
    opened: List[Pair] = []
    plan = route_on_matches(mi, opened)
    for _, i, j in order:
        if plan is not None:
            break
        opened.append((i, j))
        plan = route_on_matches(mi, opened)
    if plan is None:
        return HeuristicResult("failed", None, None, "instance is not routable")
    for pair in sorted(opened, key=lambda p: (out.primal[_yv(*p)], p[0], p[1])):
        trial = [p for p in plan.matches if p != pair]
        if len(trial) < plan.count:
            smaller = route_on_matches(mi, trial)
            if smaller is not None:
                plan = smaller
    return _certify(mi, plan)


def _rank(mi: MatchInstance, i: str, j: str) -> Tuple[int, int]:
    return i, j


def water_filling_matches(mi: MatchInstance) -> HeuristicResult:
    """Fill each interval's demands top-down from the heat cascaded so far.

    Within an interval, open matches are used first; otherwise the pair
    with the largest ``min(available supply, remaining demand)`` is opened.
    Supply is drawn from the hottest origin interval first.
    """
    mi.check_routable()
    r = mi.intervals
    avail = {i: [0.0] * r for i in mi.hot}
    opened: set = set()
    q: Dict[Route, float] = {}
    eps = 1e-12
    for t in range(r):
        for i in mi.hot:
            avail[i][t] = mi.sigma[i][t]
        need = {j: mi.delta[j][t] for j in mi.cold}
        while any(v > eps for v in need.values()):
            supply = {i: sum(avail[i][:t + 1]) for i in mi.hot}
            cands = [(min(supply[i], need[j]), i, j) for i in mi.hot for j in mi.cold
                     if supply[i] > eps and need[j] > eps]
            if not cands:
                return HeuristicResult("failed", None, None, f"interval {t + 1} cannot be served")
            reuse = [c for c in cands if (c[1], c[2]) in opened]
            pool = reuse or cands
            amount, i, j = min(pool, key=lambda c: (-c[0],) + _rank(mi, c[1], c[2]))
            opened.add((i, j))
            left = amount
            for s in range(t + 1):
                take = min(avail[i][s], left)
                if take > 0:
                    q[(i, s, j, t)] = q.get((i, s, j, t), 0.0) + take
                    avail[i][s] -= take
                    left -= take
            need[j] -= amount
            if need[j] < 1e-9 * max(1.0, mi.delta[j][t]):
                need[j] = 0.0
    return _certify(mi, MatchPlan(tuple(opened), q))


def _pair_transfer(mi: MatchInstance, i: str, j: str, sig: Dict[str, List[float]],
                   dem: Dict[str, List[float]], cum: List[float]) -> Tuple[float, Dict[Route, float]]:
    """Largest heat ``i`` can pass to ``j`` while the rest stays routable.

    Moving ``x`` from interval ``s`` to ``t > s`` lowers the cumulative
    surplus of intervals ``s..t-1`` by ``x``; keeping those surpluses
    nonnegative keeps the remaining instance routable.
    """
    r = mi.intervals
    s_left = list(sig[i])
    cum = list(cum)
    moved: Dict[Route, float] = {}
    total = 0.0
    for t in range(r):
        want = dem[j][t]
        for s in range(t, -1, -1):
            if want <= 1e-12:
                break
            if s_left[s] <= 1e-12:
                continue
            cap = min((cum[u] for u in range(s, t)), default=math.inf)
            x = min(s_left[s], want, cap)
            if x <= 1e-12:
                continue
            moved[(i, s, j, t)] = moved.get((i, s, j, t), 0.0) + x
            s_left[s] -= x
            want -= x
            total += x
            for u in range(s, t):
                cum[u] -= x
    return total, moved


def greedy_packing_matches(mi: MatchInstance) -> HeuristicResult:
    """Repeatedly open the pair that can exchange the most heat and route it."""
    mi.check_routable()
    sig = {i: list(mi.sigma[i]) for i in mi.hot}
    dem = {j: list(mi.delta[j]) for j in mi.cold}
    opened: set = set()
    q: Dict[Route, float] = {}
    scale = max([1.0] + [mi.h(i) for i in mi.hot])
    for _ in range(len(mi.hot) * len(mi.cold) * max(1, mi.intervals) * 4 + 8):
        if all(v <= 1e-9 * scale for vals in dem.values() for v in vals):
            break
        cum, acc = [], 0.0
        for t in range(mi.intervals):
            acc += sum(sig[i][t] for i in mi.hot) - sum(dem[j][t] for j in mi.cold)
            cum.append(max(acc, 0.0))
        best = None
        for i in mi.hot:
            for j in mi.cold:
                amount, moved = _pair_transfer(mi, i, j, sig, dem, cum)
                key = (-amount,) + _rank(mi, i, j)
                if amount > 1e-12 and (best is None or key < best[0]):
                    best = (key, i, j, moved)
        if best is None:
            return HeuristicResult("failed", None, None, "no pair can exchange heat")
        _, i, j, moved = best
        opened.add((i, j))
        for (a, s, b, t), x in moved.items():
            q[(a, s, b, t)] = q.get((a, s, b, t), 0.0) + x
            sig[a][s] -= x
            dem[b][t] -= x
    else:
        return HeuristicResult("failed", None, None, "greedy packing did not converge")
    return _certify(mi, MatchPlan(tuple(opened), q))


def single_interval_matches(mi: MatchInstance) -> HeuristicResult:
    """Pair the largest remaining hot load with the largest remaining cold load."""
    if mi.intervals != 1:
        raise ValueError(f"single_interval_matches needs exactly one interval, got {mi.intervals}")
    mi.check_routable()
    hot = {i: mi.sigma[i][0] for i in mi.hot}
    cold = {j: mi.delta[j][0] for j in mi.cold}
    scale = max([1.0] + list(hot.values()))
    opened: set = set()
    q: Dict[Route, float] = {}
    while True:
        live_h = [i for i in mi.hot if hot[i] > 1e-9 * scale]
        live_c = [j for j in mi.cold if cold[j] > 1e-9 * scale]
        if not live_h or not live_c:
            break
        i = min(live_h, key=lambda k: (-hot[k], k))
        j = min(live_c, key=lambda k: (-cold[k], k))
        x = min(hot[i], cold[j])
        q[(i, 0, j, 0)] = q.get((i, 0, j, 0), 0.0) + x
        opened.add((i, j))
        hot[i] -= x
        cold[j] -= x
    return _certify(mi, MatchPlan(tuple(opened), q))


__all__ = [
    "COLD_UTILITY", "HOT_UTILITY", "MatchInstance", "MatchPlan", "MatchPlanReport",
    "UnbalancedInstanceError", "build_matches_milp", "greedy_packing_matches",
    "lower_bound_matches", "lp_round_matches", "match_instance_from_streams",
    "min_matches_single_interval_exact", "min_matches_subset_oracle", "random_match_instance",
    "route_on_matches",
    "routable_by_flow", "single_interval_matches", "solve_matches_exact", "validate_match_plan",
    "water_filling_matches",
]


def random_match_instance(rng, n_hot: int, n_cold: int, intervals: int,
                          max_load: int = 9) -> MatchInstance:
    """Balanced, routable instance built by scattering integer heat downhill."""
    hot = [f"h{k + 1}" for k in range(n_hot)]
    cold = [f"c{k + 1}" for k in range(n_cold)]
    sigma = {i: [0.0] * intervals for i in hot}
    delta = {j: [0.0] * intervals for j in cold}
    for i in hot:
        for s in range(intervals):
            if s == 0 or rng.random() < 0.5:
                sigma[i][s] = float(rng.integers(1, max_load + 1))
    for i in hot:
        for s in range(intervals):
            for _ in range(int(sigma[i][s])):
                delta[cold[int(rng.integers(n_cold))]][int(rng.integers(s, intervals))] += 1.0
    return MatchInstance(hot, cold, sigma, delta)
