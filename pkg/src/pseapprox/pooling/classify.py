"""Rule-based complexity classification of pooling instances.

Rules are checked in a fixed order, polynomial cases first, and the first
match wins.  Each rule has a stable id so callers can report which special
case applied.  ``kappa`` is the constant standing in for "bounded by a
constant" in the single-pool cardinality rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

from .network import PoolingNetwork

POLYNOMIAL = "P"
STRONGLY_NP_HARD = "strongly NP-hard"
WEAKLY_NP_HARD = "weakly NP-hard"
NP_HARD = "NP-hard"


@dataclass(frozen=True)
class ComplexityClass:
    complexity: str
    rule: str
    reduction: str = ""

    def __str__(self) -> str:
        return f"{self.complexity} ({self.rule})"

    @property
    def table_class(self) -> str:
        """``P`` or ``NP-hard``, dropping the strong/weak qualifier."""
        return POLYNOMIAL if self.complexity == POLYNOMIAL else NP_HARD


def _no_quality(net: PoolingNetwork) -> bool:
    for out in net.outputs:
        for k in net.attributes:
            lo, hi = net.quality_bound(out.id, k)
            if lo > 0 or math.isfinite(hi):
                return False
    return True


def _single_pool_no_bypass(net: PoolingNetwork) -> bool:
    return len(net.pools) == 1 and not net.z_arcs


def _fixed_demand(net: PoolingNetwork) -> bool:
    return (len(net.pools) == 1 and len(net.attributes) == 1
            and all(i.supply[0] == 0 and math.isinf(i.supply[1]) for i in net.inputs)
            and all(math.isinf(p.capacity) for p in net.pools)
            and all(o.demand[0] == o.demand[1] for o in net.outputs))


def _rules(kappa: int) -> List[Tuple[str, str, str, Callable[[PoolingNetwork], bool]]]:
    def card(n):
        return len(n.attributes)

    return [
        ("no-pools", POLYNOMIAL, "", lambda n: len(n.pools) == 0),
        ("no-quality", POLYNOMIAL, "", _no_quality),
        ("|I|=1", POLYNOMIAL, "", lambda n: len(n.inputs) == 1),
        ("|J|=1", POLYNOMIAL, "", lambda n: len(n.outputs) == 1),
        ("min-pool-degree=1", POLYNOMIAL, "",
         lambda n: all(min(n.pool_out_degree(p.id), n.pool_in_degree(p.id)) == 1
                       for p in n.pools)),
        ("|L|=1,Z=0,|I|=O(1)", POLYNOMIAL, "",
         lambda n: _single_pool_no_bypass(n) and len(n.inputs) <= kappa),
        ("|L|=1,Z=0,|J|=O(1)", POLYNOMIAL, "",
         lambda n: _single_pool_no_bypass(n) and len(n.outputs) <= kappa),
        ("|L|=1,Z=0,|K|=O(1)", POLYNOMIAL, "",
         lambda n: _single_pool_no_bypass(n) and card(n) <= kappa),
        ("|L|=1,|K|=1,fixed-demand", POLYNOMIAL, "", _fixed_demand),
        ("|L|=1,Z=0", STRONGLY_NP_HARD, "independent set", _single_pool_no_bypass),
        ("|I|=|J|=2,|K|=1", WEAKLY_NP_HARD, "partition",
         lambda n: len(n.inputs) == 2 and len(n.outputs) == 2 and card(n) == 1),
        ("|I|=2,|K|=1", NP_HARD, "exact cover by 3-sets",
         lambda n: len(n.inputs) == 2 and card(n) == 1),
        ("|J|=2,|K|=1", NP_HARD, "exact cover by 3-sets",
         lambda n: len(n.outputs) == 2 and card(n) == 1),
        ("|K|=1", NP_HARD, "exact cover by 3-sets", lambda n: card(n) == 1),
        ("out-degree<=2", NP_HARD, "maximum satisfiability",
         lambda n: all(n.input_out_degree(i.id) <= 2 for i in n.inputs)
         and all(n.pool_out_degree(p.id) <= 2 for p in n.pools)),
        ("in-degree<=2", NP_HARD, "minimum satisfiability",
         lambda n: all(n.pool_in_degree(p.id) <= 2 for p in n.pools)
         and all(n.output_in_degree(o.id) <= 2 for o in n.outputs)),
    ]


RULE_IDS = tuple(r[0] for r in _rules(2)) + ("general",)


def classify_pooling_instance(net: PoolingNetwork, kappa: int = 2) -> ComplexityClass:
    for rule, cls, reduction, test in _rules(kappa):
        if test(net):
            return ComplexityClass(cls, rule, reduction)
    return ComplexityClass(NP_HARD, "general", "")


__all__ = ["ComplexityClass", "NP_HARD", "POLYNOMIAL", "RULE_IDS", "STRONGLY_NP_HARD",
           "WEAKLY_NP_HARD", "classify_pooling_instance"]
