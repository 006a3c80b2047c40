"""Pooling networks: inputs feed pools and outputs, pools feed outputs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Tuple

from ..model import INF, ValidationReport

Arc = Tuple[str, str]


@dataclass(frozen=True)
class PoolInput:
    id: str
    cost: float
    supply: Tuple[float, float] = (0.0, INF)
    quality: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Pool:
    id: str
    capacity: float = INF


@dataclass(frozen=True)
class PoolOutput:
    id: str
    profit: float
    demand: Tuple[float, float] = (0.0, INF)
    quality_bounds: Mapping[str, Tuple[float, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class PoolingNetwork:
    """Directed network ``I -> L -> J`` with direct ``I -> J`` bypass arcs.

    ``x_arcs`` are input-to-pool, ``y_arcs`` pool-to-output and ``z_arcs``
    input-to-output arcs.  Quality attributes are keyed by name; every
    input carries a value for each attribute and an output may bound any
    subset of them (missing bounds mean unconstrained).
    """

    inputs: Tuple[PoolInput, ...]
    pools: Tuple[Pool, ...]
    outputs: Tuple[PoolOutput, ...]
    x_arcs: Tuple[Arc, ...] = ()
    y_arcs: Tuple[Arc, ...] = ()
    z_arcs: Tuple[Arc, ...] = ()

    def __post_init__(self):
        for name in ("inputs", "pools", "outputs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ("x_arcs", "y_arcs", "z_arcs"):
            object.__setattr__(self, name, tuple(tuple(a) for a in getattr(self, name)))

    @property
    def attributes(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for node in self.inputs:
            for k in node.quality:
                seen.setdefault(k, None)
        for node in self.outputs:
            for k in node.quality_bounds:
                seen.setdefault(k, None)
        return tuple(seen)

    def input(self, i: str) -> PoolInput:
        return self._inputs[i]

    def output(self, j: str) -> PoolOutput:
        return self._outputs[j]

    def pool(self, l: str) -> Pool:
        return self._pools[l]

    @cached_property
    def _inputs(self):
        return {n.id: n for n in self.inputs}

    @cached_property
    def _outputs(self):
        return {n.id: n for n in self.outputs}

    @cached_property
    def _pools(self):
        return {n.id: n for n in self.pools}

    def pool_inputs(self, l: str) -> Tuple[str, ...]:
        return tuple(i for i, ll in self.x_arcs if ll == l)

    def pool_outputs(self, l: str) -> Tuple[str, ...]:
        return tuple(j for ll, j in self.y_arcs if ll == l)

    def input_out_degree(self, i: str) -> int:
        return sum(1 for a, _ in self.x_arcs if a == i) + sum(1 for a, _ in self.z_arcs if a == i)

    def pool_out_degree(self, l: str) -> int:
        return len(self.pool_outputs(l))

    def pool_in_degree(self, l: str) -> int:
        return len(self.pool_inputs(l))

    def output_in_degree(self, j: str) -> int:
        return sum(1 for _, b in self.y_arcs if b == j) + sum(1 for _, b in self.z_arcs if b == j)

    def is_degenerate(self, l: str) -> bool:
        return self.pool_in_degree(l) == 0 or self.pool_out_degree(l) == 0

    def quality_bound(self, j: str, k: str) -> Tuple[float, float]:
        return tuple(self._outputs[j].quality_bounds.get(k, (0.0, INF)))

    def quality_range(self, l: str, k: str) -> Tuple[float, float]:
        """Smallest interval containing every blend of the inputs of pool ``l``."""
        vals = [self._inputs[i].quality[k] for i in self.pool_inputs(l)]
        if not vals:
            return (0.0, 0.0)
        return (min(vals), max(vals))

    def flow_cap(self, l: str, j: str) -> float:
        """Upper bound on the flow on pool-output arc ``(l, j)`` implied by the data."""
        supply = sum(self._inputs[i].supply[1] for i in self.pool_inputs(l))
        return min(self._pools[l].capacity, self._outputs[j].demand[1], supply)


def validate_network(net: PoolingNetwork) -> ValidationReport:
    errors, warnings = [], []
    ids: Dict[str, str] = {}
    for kind, nodes in (("input", net.inputs), ("pool", net.pools), ("output", net.outputs)):
        for node in nodes:
            if node.id in ids:
                errors.append(f"node id {node.id!r} used by both {ids[node.id]} and {kind}")
            ids[node.id] = kind
    inputs = {n.id for n in net.inputs}
    pools = {n.id for n in net.pools}
    outputs = {n.id for n in net.outputs}
    for name, arcs, tail_set, head_set, tail_kind, head_kind in (
            ("x", net.x_arcs, inputs, pools, "input", "pool"),
            ("y", net.y_arcs, pools, outputs, "pool", "output"),
            ("z", net.z_arcs, inputs, outputs, "input", "output")):
        seen = set()
        for arc in arcs:
            if len(arc) != 2:
                errors.append(f"{name} arc {arc!r} must have two endpoints")
                continue
            a, b = arc
            if a not in tail_set:
                errors.append(f"{name} arc ({a}, {b}): {a!r} is not an {tail_kind}")
            if b not in head_set:
                errors.append(f"{name} arc ({a}, {b}): {b!r} is not an {head_kind}")
            if arc in seen:
                errors.append(f"{name} arc ({a}, {b}) declared twice")
            seen.add(arc)
    attrs = net.attributes
    for node in net.inputs:
        lo, hi = node.supply
        if lo > hi:
            errors.append(f"input {node.id}: supply bounds out of order ({lo} > {hi})")
        if lo < 0:
            errors.append(f"input {node.id}: negative supply lower bound")
        for k in attrs:
            if k not in node.quality:
                errors.append(f"input {node.id}: missing value for attribute {k!r}")
            elif node.quality[k] < 0 or not math.isfinite(node.quality[k]):
                errors.append(f"input {node.id}: attribute {k!r} must be finite and >= 0")
    for node in net.pools:
        if node.capacity < 0:
            errors.append(f"pool {node.id}: negative capacity")
    for node in net.outputs:
        lo, hi = node.demand
        if lo > hi:
            errors.append(f"output {node.id}: demand bounds out of order ({lo} > {hi})")
        for k, (qlo, qhi) in node.quality_bounds.items():
            if qlo > qhi:
                errors.append(f"output {node.id}: bounds for {k!r} out of order")
    for node in net.pools:
        if node.id in pools and net.is_degenerate(node.id):
            warnings.append(f"pool {node.id} is degenerate (needs an in-arc and an out-arc)")
    if not net.pools:
        warnings.append("network has no pools (|L| = 0): pure blending")
    return ValidationReport(tuple(errors), tuple(warnings))


@dataclass(frozen=True)
class PoolingSolution:
    """Flows, pool qualities and (optionally) proportions and path flows."""

    x: Mapping[Arc, float]
    y: Mapping[Arc, float]
    z: Mapping[Arc, float]
    p: Mapping[Tuple[str, str], float]
    q: Optional[Mapping[Arc, float]] = None
    v: Optional[Mapping[Tuple[str, str, str], float]] = None
    objective: float = math.nan
