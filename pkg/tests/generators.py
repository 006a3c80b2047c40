"""Seeded instance generators and independent oracles shared by the tests."""
from __future__ import annotations

import itertools
import math

import numpy as np

from pseapprox import ModelBuilder
from pseapprox.hens import HensInstance, Stream
from pseapprox.instances import random_pooling_network

SENSES = ("<=", ">=", "=")


def random_lp(rng: np.random.Generator, max_vars: int = 6, max_rows: int = 8,
              integer_ids: int = 0):
    """Bounded LP (or MILP when ``integer_ids`` > 0) that is usually feasible.

    Rows are built around a random anchor point so most draws are feasible;
    about one draw in eight gets an arbitrary right-hand side instead.
    """
    n_cont = int(rng.integers(1 if not integer_ids else 0, max_vars + 1))
    n = n_cont + integer_ids
    m = int(rng.integers(1, max_rows + 1))
    mb = ModelBuilder("rand")
    names, anchor = [], []
    for k in range(integer_ids):
        names.append(mb.add_var(f"b{k}", 0, 1, "binary"))
        anchor.append(float(rng.integers(0, 2)))
    for k in range(n_cont):
        lo = float(rng.integers(-4, 1))
        hi = lo + float(rng.integers(1, 8))
        names.append(mb.add_var(f"x{k}", lo, hi))
        anchor.append(float(rng.uniform(lo, hi)))
    anchor = np.array(anchor)
    wild = rng.random() < 0.125
    n_eq = 0
    for r in range(m):
        coef = rng.integers(-5, 6, size=n).astype(float)
        if not coef.any():
            coef[int(rng.integers(n))] = 1.0
        sense = SENSES[int(rng.integers(0, 3))]
        if sense == "=":
            n_eq += 1
            if n_eq > 2:
                sense = "<="
        act = float(coef @ anchor)
        slack = float(rng.integers(0, 6))
        rhs = {"<=": act + slack, ">=": act - slack, "=": act}[sense]
        if wild:
            rhs = float(rng.integers(-10, 11))
        mb.add_constraint(f"r{r}", dict(zip(names, coef)), sense, rhs)
    obj = rng.integers(-6, 7, size=n).astype(float)
    mb.set_objective(dict(zip(names, obj)), "max" if rng.random() < 0.5 else "min")
    return mb.build()


def pooling_net_small(seed: int, rng: np.random.Generator):
    """|I| <= 3, |L| <= 2, |J| <= 2, one attribute."""
    return random_pooling_network(seed, int(rng.integers(1, 4)), int(rng.integers(1, 3)),
                                  int(rng.integers(1, 3)), 1)


def random_stream_set(rng: np.random.Generator, allow_empty_cold: bool = True) -> HensInstance:
    nh = int(rng.integers(1, 3))
    nc = int(rng.integers(0 if allow_empty_cold else 1, 3))
    hot = [Stream(f"h{a}", "hot", float(rng.integers(100, 200)), float(rng.integers(30, 90)),
                  float(rng.integers(1, 4))) for a in range(nh)]
    cold = [Stream(f"c{a}", "cold", float(rng.integers(20, 80)), float(rng.integers(100, 190)),
                   float(rng.integers(1, 4))) for a in range(nc)]
    return HensInstance(hot, cold, dt_min=float(rng.integers(0, 3) * 5))


# --- exhaustive schedule oracle ----------------------------------------------------------

def enumerate_min_makespan(stn, batch_grid=None):
    """Smallest makespan over every set of (task, unit, start) runs and grid batches.

    Independent of the MILP: a run consumes its inputs at its start and
    credits its outputs at its end; stock starts empty and raw states are
    unlimited.  Returns ``math.inf`` when nothing meets the demands.
    """
    L = stn.horizon
    slots = [(t.id, o.unit, s, o) for t in stn.tasks for o in t.units for s in range(L)
             if s + o.p <= L]
    raw = {s.id for s in stn.states if stn.is_raw(s.id)}
    best = math.inf
    for k in range(0, len(slots) + 1):
        for combo in itertools.combinations(slots, k):
            span = max((s + o.p for _, _, s, o in combo), default=0)
            if span >= best:
                continue
            if _overlaps(combo):
                continue
            grids = [batch_grid or _grid(o.b) for *_, o in combo]
            for batches in itertools.product(*grids):
                if _simulate(stn, combo, batches, raw, L):
                    best = span
                    break
    return best


def _grid(b):
    lo, hi = b
    return sorted({lo, hi} | {float(v) for v in range(int(math.ceil(lo)), int(hi) + 1)})


def _overlaps(combo) -> bool:
    by_unit = {}
    for task, unit, s, o in combo:
        by_unit.setdefault(unit, []).append((s, s + o.p))
    for spans in by_unit.values():
        spans.sort()
        for (a0, a1), (b0, _) in zip(spans, spans[1:]):
            if b0 < a1:
                return True
    return False


def _simulate(stn, combo, batches, raw, L) -> bool:
    stock = {s.id: [0.0] * (L + 1) for s in stn.states}
    for (task_id, _, s, o), b in zip(combo, batches):
        task = stn.task_map[task_id]
        for st, f in task.consume.items():
            for t in range(s, L + 1):
                stock[st][t] -= f * b
        for st, f in task.produce.items():
            for t in range(s + o.p, L + 1):
                stock[st][t] += f * b
    for st in stn.states:
        if st.id in raw:
            continue
        if min(stock[st.id]) < -1e-9 or stock[st.id][L] < st.demand - 1e-9:
            return False
    return True
