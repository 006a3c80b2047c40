"""Approximation heuristics, relaxations and exact oracles for pooling,
state-task-network scheduling and heat exchanger network synthesis."""
from .model import (INF, OBJECTIVE, ApproximationCertificate, BilinearModel, BilinearTerm,
                    FeasibilityReport, HeuristicResult, Integrality, LinearConstraint,
                    LinearExpression, LinearModel, ModelBuilder, ObjectiveSense, Sense,
                    ValidationReport, VariableDef, check_feasibility, evaluate_expression,
                    make_certificate)
from .lpformat import export_lp_text

__version__ = "0.1.0"

__all__ = [
    "INF", "OBJECTIVE", "ApproximationCertificate", "BilinearModel", "BilinearTerm",
    "FeasibilityReport", "HeuristicResult", "Integrality", "LinearConstraint",
    "LinearExpression", "LinearModel", "ModelBuilder", "ObjectiveSense", "Sense",
    "ValidationReport", "VariableDef", "check_feasibility", "evaluate_expression",
    "export_lp_text", "make_certificate",
]
