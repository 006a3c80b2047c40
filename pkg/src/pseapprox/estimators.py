"""Estimator-style wrappers over the functional operations, plus the method registry.

Each class keeps its hyperparameters as constructor arguments and exposes
``fit(instance)``, which stores ``result_`` (a :class:`SolveOutcome`) and
the convenience attributes ``status_``, ``objective_``, ``bound_``,
``ratio_``, ``certificate_`` and ``solution_``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Type

from sklearn.base import BaseEstimator

from .hens import (HensInstance, alternating_multistage_heuristic, energy_balance_optimum,
                   greedy_packing_matches, lower_bound_matches, lp_round_matches,
                   match_instance_from_streams, min_utility_cascade, single_interval_matches,
                   solve_matches_exact, transshipment_utility_lp, utility_energy_lower_bound,
                   water_filling_matches)
from .model import ApproximationCertificate, HeuristicResult, ObjectiveSense, make_certificate
from .pooling import (alternating_heuristic, discrete_to_solution, discretize_proportions,
                      grid_oracle_pooling, mccormick_bound)
from .pooling.network import PoolingNetwork
from .scheduling import (StateTaskNetwork, build_discrete_time_model, greedy_list_schedule,
                         lp_relaxation_bound, lp_round_schedule, schedule_from_assignment)
from .solvers import solve_milp

PROBLEMS = ("pooling", "stn", "hens-matches", "hens-utility", "hens-multistage")
PROBLEM_KIND = {"pooling": "pooling", "stn": "stn", "hens-matches": "hens",
                "hens-utility": "hens", "hens-multistage": "hens"}


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    objective: Optional[float] = None
    bound: Optional[float] = None
    certificate: Optional[ApproximationCertificate] = None
    solution: Any = None
    message: str = ""

    @property
    def ratio(self) -> Optional[float]:
        return self.certificate.ratio if self.certificate is not None else None

    @classmethod
    def from_heuristic(cls, res: HeuristicResult, objective: Optional[float] = None) -> "SolveOutcome":
        if not res.ok:
            return cls("failed", message=res.message)
        cert = res.certificate
        obj = cert.incumbent if objective is None else objective
        return cls("ok", obj, cert.bound, cert, res.solution, res.message)


class BaseSolver(BaseEstimator):
    problem: str = ""
    method: str = ""
    instance_type: Type = object

    def fit(self, X, y=None):
        if not isinstance(X, self.instance_type):
            raise TypeError(f"{type(self).__name__} expects a {self.instance_type.__name__}")
        try:
            self.result_ = self._solve(X)
        except (ValueError, ArithmeticError) as exc:
            self.result_ = SolveOutcome("failed", message=str(exc))
        r = self.result_
        self.status_, self.objective_, self.bound_ = r.status, r.objective, r.bound
        self.ratio_, self.certificate_, self.solution_ = r.ratio, r.certificate, r.solution
        return self

    def _solve(self, X) -> SolveOutcome:
        raise NotImplementedError


# --- pooling --------------------------------------------------------------------------------

class _PoolingSolver(BaseSolver):
    problem = "pooling"
    instance_type = PoolingNetwork


class McCormickBound(_PoolingSolver):
    method = "mccormick"

    def __init__(self, formulation: str = "pq"):
        self.formulation = formulation

    def _solve(self, net):
        return SolveOutcome("ok", bound=mccormick_bound(net, self.formulation, 1))


class PiecewiseBound(_PoolingSolver):
    method = "piecewise"

    def __init__(self, pieces: int = 2, formulation: str = "pq"):
        self.pieces = pieces
        self.formulation = formulation

    def _solve(self, net):
        return SolveOutcome("ok", bound=mccormick_bound(net, self.formulation, self.pieces))


class DiscretizedPooling(_PoolingSolver):
    method = "discretize"

    def __init__(self, resolution: int = 4, time_limit: Optional[float] = None):
        self.resolution = resolution
        self.time_limit = time_limit

    def _solve(self, net):
        out = solve_milp(discretize_proportions(net, self.resolution), time_limit=self.time_limit)
        if not out.has_solution:
            return SolveOutcome("failed", message=f"discretized model {out.status}")
        sol = discrete_to_solution(net, out.primal)
        bound = mccormick_bound(net, "pq", 1)
        cert = make_certificate(ObjectiveSense.MIN, sol.objective, bound)
        return SolveOutcome("ok", sol.objective, bound, cert, sol)


class AlternatingPooling(_PoolingSolver):
    method = "alternating"

    def __init__(self, max_iters: int = 20):
        self.max_iters = max_iters

    def _solve(self, net):
        return SolveOutcome.from_heuristic(alternating_heuristic(net, max_iters=self.max_iters))


class GridOraclePooling(_PoolingSolver):
    method = "grid-oracle"

    def __init__(self, resolution: int = 10):
        self.resolution = resolution

    def _solve(self, net):
        return SolveOutcome.from_heuristic(grid_oracle_pooling(net, self.resolution))


# --- scheduling -------------------------------------------------------------------------------

class _StnSolver(BaseSolver):
    problem = "stn"
    instance_type = StateTaskNetwork


class LpRoundSchedule(_StnSolver):
    method = "lp-round"

    def _solve(self, stn):
        return SolveOutcome.from_heuristic(lp_round_schedule(stn))


class GreedySchedule(_StnSolver):
    method = "greedy"

    def _solve(self, stn):
        return SolveOutcome.from_heuristic(greedy_list_schedule(stn))


class ExactSchedule(_StnSolver):
    method = "exact"

    def __init__(self, time_limit: Optional[float] = None, seed: int = 0):
        self.time_limit = time_limit
        self.seed = seed

    def _solve(self, stn):
        out = solve_milp(build_discrete_time_model(stn), time_limit=self.time_limit, seed=self.seed)
        if not out.has_solution:
            return SolveOutcome("failed", message=f"discrete-time model {out.status}")
        schedule = schedule_from_assignment(stn, out.primal)
        bound = out.best_bound if math.isfinite(out.best_bound) else lp_relaxation_bound(stn)
        cert = make_certificate(ObjectiveSense.MIN, schedule.makespan, bound)
        return SolveOutcome("ok", schedule.makespan, bound, cert, schedule, out.status)


# --- heat exchanger networks ------------------------------------------------------------------

class _MatchesSolver(BaseSolver):
    problem = "hens-matches"
    instance_type = HensInstance
    heuristic = None

    def _solve(self, inst):
        res = type(self).heuristic(match_instance_from_streams(inst))
        return SolveOutcome.from_heuristic(res)


class LpRoundMatches(_MatchesSolver):
    method = "lp-round"
    heuristic = staticmethod(lp_round_matches)


class WaterFillingMatches(_MatchesSolver):
    method = "water-filling"
    heuristic = staticmethod(water_filling_matches)


class GreedyPackingMatches(_MatchesSolver):
    method = "greedy-packing"
    heuristic = staticmethod(greedy_packing_matches)


class SingleIntervalMatches(_MatchesSolver):
    method = "single-interval"
    heuristic = staticmethod(single_interval_matches)


class ExactMatches(_MatchesSolver):
    method = "exact"

    def __init__(self, time_limit: Optional[float] = None):
        self.time_limit = time_limit

    def _solve(self, inst):
        mi = match_instance_from_streams(inst)
        plan, status = solve_matches_exact(mi)
        if plan is None:
            return SolveOutcome("failed", message=f"matches model {status}")
        bound = lower_bound_matches(mi)
        if status == "optimal":
            bound = plan.count
        cert = make_certificate(ObjectiveSense.MIN, plan.count, bound)
        return SolveOutcome("ok", float(plan.count), float(bound), cert, plan, status)


class CascadeUtility(BaseSolver):
    problem = "hens-utility"
    method = "cascade"
    instance_type = HensInstance

    def _solve(self, inst):
        target = min_utility_cascade(inst)
        bound = utility_energy_lower_bound(inst)
        cert = make_certificate(ObjectiveSense.MIN, target.cost, bound)
        return SolveOutcome("ok", target.cost, bound, cert, target)


class TransshipmentUtility(CascadeUtility):
    method = "exact"

    def _solve(self, inst):
        target = transshipment_utility_lp(inst)
        cert = make_certificate(ObjectiveSense.MIN, target.cost, target.cost)
        return SolveOutcome("ok", target.cost, target.cost, cert, target)


class AlternatingMultistage(BaseSolver):
    problem = "hens-multistage"
    method = "alternating"
    instance_type = HensInstance

    def __init__(self, stages: int = 1, max_iters: int = 10, monotonicity: str = "boundary",
                 driving_force: bool = False, seed: int = 0):
        self.stages = stages
        self.max_iters = max_iters
        self.monotonicity = monotonicity
        self.driving_force = driving_force
        self.seed = seed

    def _solve(self, inst):
        res = alternating_multistage_heuristic(inst, self.stages, self.max_iters,
                                               self.monotonicity, self.driving_force, self.seed)
        return SolveOutcome.from_heuristic(res)


class ExactMultistage(AlternatingMultistage):
    """Closed-form optimum, valid only without approach-temperature rows."""

    method = "exact"

    def _solve(self, inst):
        if self.driving_force or self.monotonicity != "boundary":
            return SolveOutcome("failed", message="exact multistage needs the default model")
        cand = energy_balance_optimum(inst, self.stages)
        cost = cand.cost(inst)
        bound = utility_energy_lower_bound(inst)
        return SolveOutcome("ok", cost, bound, make_certificate(ObjectiveSense.MIN, cost, bound),
                            cand)


METHODS: Dict[Tuple[str, str], Type[BaseSolver]] = {
    (cls.problem, cls.method): cls for cls in (
        McCormickBound, PiecewiseBound, DiscretizedPooling, AlternatingPooling,
        GridOraclePooling, LpRoundSchedule, GreedySchedule, LpRoundMatches,
        WaterFillingMatches, GreedyPackingMatches, SingleIntervalMatches, CascadeUtility,
        AlternatingMultistage)
}

EXACT: Dict[str, Type[BaseSolver]] = {
    "pooling": GridOraclePooling,
    "stn": ExactSchedule,
    "hens-matches": ExactMatches,
    "hens-utility": TransshipmentUtility,
    "hens-multistage": ExactMultistage,
}


def make_solver(problem: str, method: str, **options) -> BaseSolver:
    """Build a registered solver, keeping only the options it accepts."""
    key = (problem, method)
    cls = EXACT[problem] if method == "exact" and problem in EXACT else METHODS.get(key)
    if cls is None:
        known = sorted(m for p, m in METHODS if p == problem)
        raise KeyError(f"unknown method {method!r} for {problem}; choose from {known} or exact")
    params = cls._get_param_names()
    return cls(**{k: v for k, v in options.items() if k in params and v is not None})


__all__ = [
    "AlternatingMultistage", "AlternatingPooling", "BaseSolver", "CascadeUtility",
    "DiscretizedPooling", "EXACT", "ExactMatches", "ExactMultistage", "ExactSchedule",
    "GreedyPackingMatches", "GreedySchedule", "GridOraclePooling", "LpRoundMatches",
    "LpRoundSchedule", "METHODS", "McCormickBound", "PROBLEMS", "PROBLEM_KIND", "PiecewiseBound",
    "SingleIntervalMatches", "SolveOutcome", "TransshipmentUtility", "WaterFillingMatches",
    "make_solver",
]
