"""Exhaustive reference solvers for desk-scale cross-checks."""
from __future__ import annotations

import itertools
import math
from typing import Optional, Sequence

import numpy as np

from ..model import Integrality, LinearModel, Sense
from .bnb import MilpOutcome
from .simplex import LpOutcome, solve_matrix

MAX_VERTEX_VARS = 8
MAX_ORACLE_BINARIES = 16


class OracleSizeError(ValueError):
    pass


def enumerate_vertices_oracle(model: LinearModel, tol: float = 1e-7,
                              chunk: int = 20_000) -> LpOutcome:
    """Optimise an LP by visiting every basic point of its bounded polytope.

    Each candidate vertex is the solution of ``n`` linearly independent
    active constraints, chosen among the rows and the variable bounds.
    Candidates are solved in batches; singular systems are skipped.
    """
    mf = model.matrix
    n = len(mf.var_ids)
    if n > MAX_VERTEX_VARS:
        raise OracleSizeError(f"vertex enumeration limited to {MAX_VERTEX_VARS} variables")
    if not (np.all(np.isfinite(mf.lb)) and np.all(np.isfinite(mf.ub))):
        raise OracleSizeError("vertex enumeration needs finite bounds on every variable")
    eye = np.eye(n)
    planes = [(mf.A[r], mf.b[r], -1) for r in range(mf.A.shape[0])]
    planes += [(eye[j], mf.lb[j], j) for j in range(n)]
    planes += [(eye[j], mf.ub[j], j) for j in range(n)]
    H = np.array([p[0] for p in planes]).reshape(len(planes), n)
    h = np.array([p[1] for p in planes])
    owner = [p[2] for p in planes]

    def valid(combo):
        seen = set()
        for k in combo:
            if owner[k] >= 0:
                if owner[k] in seen:
                    return False
                seen.add(owner[k])
        return True

    combos = (cb for cb in itertools.combinations(range(len(planes)), n) if valid(cb))
    sign = -1.0 if mf.maximize else 1.0
    best_val, best_x = math.inf, None
    count = 0
    if n == 0:
        best_x = np.zeros(0) if _feasible(mf, np.zeros(0), tol) else None
        best_val = 0.0
    while True:
        block = list(itertools.islice(combos, chunk)) if n else []
        if not block:
            break
        idx = np.array(block)
        mats = H[idx]
        rhs = h[idx]
        det = np.linalg.det(mats)
        ok = np.abs(det) > 1e-10
        if not ok.any():
            continue
        xs = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
        count += len(xs)
        feas = _feasible_many(mf, xs, tol)
        if feas.any():
            vals = sign * (xs[feas] @ mf.c)
            k = int(np.argmin(vals))
            if vals[k] < best_val - 1e-12:
                best_val, best_x = float(vals[k]), xs[feas][k]
    if best_x is None:
        return LpOutcome("infeasible", math.nan, None, count)
    obj = float(mf.c @ best_x) + mf.c0
    return LpOutcome("optimal", obj, dict(zip(mf.var_ids, best_x.tolist())), count)


def _feasible_many(mf, xs: np.ndarray, tol: float) -> np.ndarray:
    ok = np.all(xs >= mf.lb - tol, axis=1) & np.all(xs <= mf.ub + tol, axis=1)
    if mf.A.shape[0]:
        act = xs @ mf.A.T
        for r, s in enumerate(mf.senses):
            if s is Sense.LE:
                ok &= act[:, r] <= mf.b[r] + tol
            elif s is Sense.GE:
                ok &= act[:, r] >= mf.b[r] - tol
            else:
                ok &= np.abs(act[:, r] - mf.b[r]) <= tol
    return ok


def _feasible(mf, x: np.ndarray, tol: float) -> bool:
    return bool(_feasible_many(mf, x[None, :], tol)[0])


def brute_force_binary_oracle(model: LinearModel,
                              binary_ids: Optional[Sequence[str]] = None) -> MilpOutcome:
    """Fix every binary combination in turn and solve the remaining LP."""
    mf = model.matrix
    if binary_ids is None:
        binary_ids = [v.id for v in model.variables if v.integrality is Integrality.BINARY]
    binary_ids = list(binary_ids)
    if len(binary_ids) > MAX_ORACLE_BINARIES:
        raise OracleSizeError(f"brute force limited to {MAX_ORACLE_BINARIES} binaries")
    idx = [model.index[v] for v in binary_ids]
    stray = [v.id for v in model.variables if v.is_integer and v.id not in set(binary_ids)]
    if stray:
        raise OracleSizeError(f"integer variables outside the enumeration: {stray}")
    sign = -1.0 if mf.maximize else 1.0
    best_val, best = math.inf, None
    tried = 0
    for bits in itertools.product((0.0, 1.0), repeat=len(idx)):
        lb = np.array(mf.lb, dtype=float)
        ub = np.array(mf.ub, dtype=float)
        if any(bit < lb[j] or bit > ub[j] for j, bit in zip(idx, bits)):
            continue
        lb[idx] = bits
        ub[idx] = bits
        tried += 1
        out = solve_matrix(mf, lb, ub)
        if out.status != "optimal":
            continue
        val = sign * out.objective
        if val < best_val - 1e-9:
            best_val, best = val, out
    if best is None:
        return MilpOutcome("infeasible", math.nan, None, math.nan, tried)
    return MilpOutcome("optimal", best.objective, best.primal, best.objective, tried)
