"""Pooling: network model, P/PQ formulations, relaxations, heuristics, classifier."""
from .classify import ComplexityClass, classify_pooling_instance
from .formulations import (DegeneratePoolError, build_p_formulation, build_pq_formulation,
                           fixed_proportion_lp, fixed_quality_lp, p_assignment, pq_assignment,
                           solution_objective)
from .heuristics import GridSizeError, alternating_heuristic, grid_oracle_pooling
from .network import Pool, PoolingNetwork, PoolingSolution, PoolInput, PoolOutput, validate_network
from .relaxations import (UnboundedProductError, bilinear_bounds, discrete_to_solution,
                          discretize_proportions, mccormick_bound, piecewise_mccormick_relax,
                          relaxation_bound)

__all__ = [
    "ComplexityClass", "DegeneratePoolError", "GridSizeError", "Pool", "PoolInput", "PoolOutput",
    "PoolingNetwork", "PoolingSolution", "UnboundedProductError", "alternating_heuristic",
    "bilinear_bounds", "build_p_formulation", "build_pq_formulation",
    "classify_pooling_instance", "discrete_to_solution", "discretize_proportions",
    "fixed_proportion_lp", "fixed_quality_lp", "grid_oracle_pooling", "mccormick_bound",
    "p_assignment", "piecewise_mccormick_relax", "pq_assignment", "relaxation_bound",
    "solution_objective", "validate_network",
]
