"""Instance files, random generators and CSV run reports.

An instance file is JSON ``{"kind", "version", "payload"}``; infinite
bounds are written as the string ``"inf"``.  Output is key-sorted so equal
envelopes serialise to identical text.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema
import numpy as np

from .hens.streams import COLD, HOT, HensInstance, Stream
from .pooling.network import Pool, PoolingNetwork, PoolInput, PoolOutput
from .scheduling.stn import State, StateTaskNetwork, Task, UnitOption

SCHEMA_VERSION = 1
KINDS = ("pooling", "stn", "hens")
REPORT_HEADER = ("instance", "problem", "method", "status", "objective", "bound", "ratio",
                 "time_ms", "seed")


class InstanceError(ValueError):
    pass


class InstanceParseError(InstanceError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {msg}")
        self.line, self.column = line, column


class InstanceSchemaError(InstanceError):
    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = tuple(errors)


_num = {"oneOf": [{"type": "number"}, {"const": "inf"}, {"const": "-inf"}]}
_range = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_id = {"type": "string", "minLength": 1}
_arcs = {"type": "array", "items": {"type": "array", "items": _id, "minItems": 2, "maxItems": 2}}


def _obj(props: Dict[str, Any], required: Sequence[str]) -> Dict[str, Any]:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_stream = _obj({"id": _id, "t_in": _num, "t_out": _num, "F": _num}, ["id", "t_in", "t_out", "F"])

PAYLOAD_SCHEMAS: Dict[str, Dict[str, Any]] = {
    "pooling": _obj({
        "inputs": {"type": "array", "items": _obj(
            {"id": _id, "cost": _num, "supply": _range,
             "quality": {"type": "object", "additionalProperties": _num}}, ["id", "cost"])},
        "pools": {"type": "array", "items": _obj({"id": _id, "capacity": _num}, ["id"])},
        "outputs": {"type": "array", "items": _obj(
            {"id": _id, "profit": _num, "demand": _range,
             "quality_bounds": {"type": "object", "additionalProperties": _range}},
            ["id", "profit"])},
        "arcs": _obj({"x": _arcs, "y": _arcs, "z": _arcs}, []),
    }, ["inputs", "pools", "outputs", "arcs"]),
    "stn": _obj({
        "states": {"type": "array", "items": _obj({"id": _id, "demand": _num}, ["id"])},
        "tasks": {"type": "array", "items": _obj({
            "id": _id,
            "units": {"type": "array", "minItems": 1, "items": _obj(
                {"unit": _id, "p": {"type": "integer", "minimum": 1}, "b": _range},
                ["unit", "p", "b"])},
            "consume": {"type": "object", "additionalProperties": _num},
            "produce": {"type": "object", "additionalProperties": _num},
            "alpha": _num, "beta": _num}, ["id", "units", "produce"])},
        "horizon": {"type": "integer", "minimum": 1},
        "bigH": {"oneOf": [_num, {"type": "null"}]},
    }, ["states", "tasks", "horizon"]),
    "hens": _obj({
        "hot": {"type": "array", "items": _stream},
        "cold": {"type": "array", "items": _stream},
        "dt_min": _num, "cost_hu": _num, "cost_cu": _num,
    }, ["hot", "cold"]),
}

ENVELOPE_SCHEMA = _obj({"kind": {"enum": list(KINDS)}, "version": {"const": SCHEMA_VERSION},
                        "payload": {"type": "object"}}, ["kind", "version", "payload"])


@dataclass(frozen=True)
class InstanceEnvelope:
    kind: str
    version: int
    payload: Dict[str, Any]
    name: str = ""

    def __eq__(self, other):
        if not isinstance(other, InstanceEnvelope):
            return NotImplemented
        return (self.kind, self.version, _encode(self.payload)) == \
            (other.kind, other.version, _encode(other.payload))


def _decode(obj):
    if isinstance(obj, dict):
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    if obj == "inf":
        return math.inf
    if obj == "-inf":
        return -math.inf
    return obj


def _encode(obj):
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return int(x) if x.is_integer() and abs(x) < 2 ** 53 else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _path(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def validate_envelope_dict(data: Any) -> List[str]:
    errors = [f"{_path(e)}: {e.message}" for e in
              sorted(jsonschema.Draft202012Validator(ENVELOPE_SCHEMA).iter_errors(data),
                     key=lambda e: list(map(str, e.absolute_path)))]
    if errors:
        return errors
    schema = PAYLOAD_SCHEMAS[data["kind"]]
    found = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data["payload"]),
                   key=lambda e: list(map(str, e.absolute_path)))
    return [f"/payload{_path(e) if e.absolute_path else ''}: {e.message}" for e in found]


def parse_instance(text: str, name: str = "") -> InstanceEnvelope:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(exc.msg, exc.lineno, exc.colno) from None
    errors = validate_envelope_dict(data)
    if errors:
        raise InstanceSchemaError(errors)
    return InstanceEnvelope(data["kind"], data["version"], _decode(data["payload"]), name)


def write_instance(env: InstanceEnvelope) -> str:
    data = {"kind": env.kind, "version": env.version, "payload": _encode(env.payload)}
    errors = validate_envelope_dict(data)
    if errors:
        raise InstanceSchemaError(errors)
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def read_instance_file(path: str) -> InstanceEnvelope:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), name=_stem(path))


def _stem(path: str) -> str:
    base = path.replace("\\", "/").rsplit("/", 1)[-1]
    return base[:-5] if base.endswith(".json") else base


# --- payload <-> domain objects ----------------------------------------------------

def network_from_payload(p: Dict[str, Any]) -> PoolingNetwork:
    inputs = [PoolInput(d["id"], float(d["cost"]), tuple(d.get("supply", (0.0, math.inf))),
                        {k: float(v) for k, v in d.get("quality", {}).items()})
              for d in p["inputs"]]
    pools = [Pool(d["id"], float(d.get("capacity", math.inf))) for d in p["pools"]]
    outputs = [PoolOutput(d["id"], float(d["profit"]), tuple(d.get("demand", (0.0, math.inf))),
                          {k: tuple(v) for k, v in d.get("quality_bounds", {}).items()})
               for d in p["outputs"]]
    arcs = p.get("arcs", {})
    return PoolingNetwork(inputs, pools, outputs, arcs.get("x", ()), arcs.get("y", ()),
                          arcs.get("z", ()))


def payload_from_network(net: PoolingNetwork) -> Dict[str, Any]:
    return {
        "inputs": [{"id": i.id, "cost": i.cost, "supply": list(i.supply),
                    "quality": dict(i.quality)} for i in net.inputs],
        "pools": [{"id": l.id, "capacity": l.capacity} for l in net.pools],
        "outputs": [{"id": j.id, "profit": j.profit, "demand": list(j.demand),
                     "quality_bounds": {k: list(v) for k, v in j.quality_bounds.items()}}
                    for j in net.outputs],
        "arcs": {"x": [list(a) for a in net.x_arcs], "y": [list(a) for a in net.y_arcs],
                 "z": [list(a) for a in net.z_arcs]},
    }


def stn_from_payload(p: Dict[str, Any]) -> StateTaskNetwork:
    states = [State(d["id"], float(d.get("demand", 0.0))) for d in p["states"]]
    tasks = [Task(d["id"], [UnitOption(u["unit"], int(u["p"]), tuple(u["b"])) for u in d["units"]],
                  {k: float(v) for k, v in d.get("consume", {}).items()},
                  {k: float(v) for k, v in d.get("produce", {}).items()},
                  float(d.get("alpha", 0.0)), float(d.get("beta", 0.0)))
             for d in p["tasks"]]
    big_h = p.get("bigH")
    return StateTaskNetwork(states, tasks, int(p["horizon"]),
                            None if big_h is None else float(big_h))


def payload_from_stn(stn: StateTaskNetwork) -> Dict[str, Any]:
    return {
        "states": [{"id": s.id, "demand": s.demand} for s in stn.states],
        "tasks": [{"id": t.id, "units": [{"unit": o.unit, "p": o.p, "b": list(o.b)} for o in t.units],
                   "consume": dict(t.consume), "produce": dict(t.produce),
                   "alpha": t.alpha, "beta": t.beta} for t in stn.tasks],
        "horizon": stn.horizon,
        "bigH": stn.big_h,
    }


def hens_from_payload(p: Dict[str, Any]) -> HensInstance:
    hot = [Stream(d["id"], HOT, float(d["t_in"]), float(d["t_out"]), float(d["F"])) for d in p["hot"]]
    cold = [Stream(d["id"], COLD, float(d["t_in"]), float(d["t_out"]), float(d["F"]))
            for d in p["cold"]]
    return HensInstance(hot, cold, float(p.get("dt_min", 0.0)), float(p.get("cost_hu", 1.0)),
                        float(p.get("cost_cu", 1.0)))


def payload_from_hens(inst: HensInstance) -> Dict[str, Any]:
    side = lambda ss: [{"id": s.id, "t_in": s.t_in, "t_out": s.t_out, "F": s.F} for s in ss]
    return {"hot": side(inst.hot), "cold": side(inst.cold), "dt_min": inst.dt_min,
            "cost_hu": inst.cost_hu, "cost_cu": inst.cost_cu}


def to_domain(env: InstanceEnvelope):
    return {"pooling": network_from_payload, "stn": stn_from_payload,
            "hens": hens_from_payload}[env.kind](env.payload)


def envelope_for(obj, name: str = "") -> InstanceEnvelope:
    if isinstance(obj, PoolingNetwork):
        return InstanceEnvelope("pooling", SCHEMA_VERSION, payload_from_network(obj), name)
    if isinstance(obj, StateTaskNetwork):
        return InstanceEnvelope("stn", SCHEMA_VERSION, payload_from_stn(obj), name)
    if isinstance(obj, HensInstance):
        return InstanceEnvelope("hens", SCHEMA_VERSION, payload_from_hens(obj), name)
    raise TypeError(f"no instance kind for {type(obj).__name__}")


# --- generators -----------------------------------------------------------------------

def _check_sizes(**sizes):
    for key, (val, lo, hi) in sizes.items():
        if not (lo <= val <= hi):
            raise ValueError(f"{key} must lie in [{lo}, {hi}], got {val}")


def random_pooling_network(seed: int, n_inputs: int = 3, n_pools: int = 2, n_outputs: int = 2,
                           n_attributes: int = 1) -> PoolingNetwork:
    """Random net with complete I-L and L-J arcs plus one bypass arc per output.

    Demands and supplies start at zero, so the zero flow is always
    feasible; at least one input meets every output bound, so positive
    flow is possible too.
    """
    _check_sizes(n_inputs=(n_inputs, 1, 12), n_pools=(n_pools, 0, 6),
                 n_outputs=(n_outputs, 1, 12), n_attributes=(n_attributes, 0, 4))
    rng = np.random.default_rng(seed)
    attrs = [f"k{a + 1}" for a in range(n_attributes)]
    inputs = []
    for a in range(n_inputs):
        quality = {k: float(rng.integers(0, 5)) for k in attrs}
        if a == 0:
            quality = {k: 0.0 for k in attrs}
        inputs.append(PoolInput(f"i{a + 1}", float(rng.integers(1, 16)),
                                (0.0, float(rng.integers(50, 201))), quality))
    pools = [Pool(f"l{b + 1}", float(rng.integers(50, 151))) for b in range(n_pools)]
    outputs = [PoolOutput(f"j{c + 1}", float(rng.integers(6, 21)),
                          (0.0, float(rng.integers(50, 151))),
                          {k: (0.0, float(rng.integers(1, 4))) for k in attrs})
               for c in range(n_outputs)]
    x = [(i.id, l.id) for i in inputs for l in pools]
    y = [(l.id, j.id) for l in pools for j in outputs]
    z = [(inputs[int(rng.integers(n_inputs))].id, j.id) for j in outputs] if n_pools else \
        [(i.id, j.id) for i in inputs for j in outputs]
    return PoolingNetwork(inputs, pools, outputs, x, y, sorted(set(z)))


def random_stn(seed: int, n_tasks: int = 2, n_units: int = 1, demand: float = 10.0) -> StateTaskNetwork:
    """Chain ``s0 -> T1 -> s1 -> ... -> s_n`` with demand on the last state."""
    _check_sizes(n_tasks=(n_tasks, 1, 6), n_units=(n_units, 1, 3))
    rng = np.random.default_rng(seed)
    states = [State(f"s{k}", demand if k == n_tasks else 0.0) for k in range(n_tasks + 1)]
    tasks = []
    slots = 0
    for k in range(1, n_tasks + 1):
        units = []
        for u in range(n_units):
            b_hi = float(rng.integers(5, 16))
            units.append(UnitOption(f"U{u + 1}", int(rng.integers(1, 3)), (0.0, b_hi)))
        tasks.append(Task(f"T{k}", units, {f"s{k - 1}": 1.0}, {f"s{k}": 1.0},
                          float(rng.integers(1, 4)), float(rng.integers(0, 3)) / 10.0))
        worst = max(o.p for o in units)
        slots += worst * math.ceil(demand / min(o.b[1] for o in units))
    return StateTaskNetwork(states, tasks, slots + 1)


def random_hens(seed: int, n_hot: int = 3, n_cold: int = 3, balanced: bool = True) -> HensInstance:
    """Integer temperatures; when ``balanced``, cold loads split the hot total exactly.

    Cold spans are powers of two so ``F = load / span`` is exact in binary.
    """
    _check_sizes(n_hot=(n_hot, 1, 8), n_cold=(n_cold, 0 if not balanced else 1, 8))
    rng = np.random.default_rng(seed)
    hot = []
    for a in range(n_hot):
        t_out = int(rng.integers(40, 120))
        t_in = t_out + int(rng.integers(10, 110))
        hot.append(Stream(f"h{a + 1}", HOT, float(t_in), float(t_out), float(rng.integers(1, 5))))
    total = int(round(sum(s.load for s in hot)))
    if balanced:
        cuts = sorted(int(c) for c in rng.choice(np.arange(1, total), size=n_cold - 1, replace=False))
        loads = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    else:
        loads = [int(rng.integers(20, 400)) for _ in range(n_cold)]
    cold = []
    for b, load in enumerate(loads):
        span = 2 ** int(rng.integers(4, 7))
        t_in = int(rng.integers(20, 100))
        cold.append(Stream(f"c{b + 1}", COLD, float(t_in), float(t_in + span), load / span))
    return HensInstance(hot, cold)


def generate_random(kind: str, seed: int, **sizes) -> InstanceEnvelope:
    gen = {"pooling": random_pooling_network, "stn": random_stn, "hens": random_hens}
    if kind not in gen:
        raise ValueError(f"kind must be one of {KINDS}")
    return envelope_for(gen[kind](seed, **sizes), name=f"{kind}-{seed}")


# --- reports -------------------------------------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    instance: str
    problem: str
    method: str
    status: str
    objective: Optional[float] = None
    bound: Optional[float] = None
    ratio: Optional[float] = None
    time_ms: Optional[float] = None
    seed: Optional[int] = None

    def row(self) -> List[str]:
        return [self.instance, self.problem, self.method, self.status, _fmt(self.objective),
                _fmt(self.bound), _fmt(self.ratio),
                "" if self.time_ms is None else f"{self.time_ms:.3f}",
                "" if self.seed is None else str(self.seed)]


def _fmt(x: Optional[float]) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    x = float(x)
    if abs(x) < 5e-13:
        x = 0.0
    return format(x, ".10g")


def write_report(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


__all__ = [
    "ENVELOPE_SCHEMA", "InstanceEnvelope", "InstanceError", "InstanceParseError",
    "InstanceSchemaError", "KINDS", "PAYLOAD_SCHEMAS", "REPORT_HEADER", "RunRecord",
    "SCHEMA_VERSION", "envelope_for", "generate_random", "hens_from_payload",
    "network_from_payload", "parse_instance", "payload_from_hens", "payload_from_network",
    "payload_from_stn", "random_hens", "random_pooling_network", "random_stn",
    "read_instance_file", "stn_from_payload", "to_domain", "write_instance", "write_report",
]
