"""LP and MILP engines plus exhaustive oracles."""
from .bnb import MilpOutcome, UnboundedRelaxationError, solve_milp
from .oracles import OracleSizeError, brute_force_binary_oracle, enumerate_vertices_oracle
from .simplex import LpOutcome, solve_lp, solve_matrix

__all__ = [
    "LpOutcome", "MilpOutcome", "OracleSizeError", "UnboundedRelaxationError",
    "brute_force_binary_oracle", "enumerate_vertices_oracle", "solve_lp", "solve_matrix",
    "solve_milp",
]
