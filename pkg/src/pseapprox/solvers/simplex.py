"""Dense two-phase tableau simplex.

Models are converted to ``min c'x, Ax = b, x >= 0, b >= 0`` by shifting
and splitting variables, turning finite upper bounds into rows and adding
slack columns.  Phase 1 minimises the sum of artificial variables, phase 2
optimises the real objective from the resulting basis.

Entering variables follow the most-negative reduced cost until a run of
degenerate pivots exceeds ``STALL_LIMIT``; after that Bland's rule is used
for the rest of the phase, which guarantees termination.  Outside Bland
mode the leaving row among near-ties is the one with the largest pivot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import BilinearModel, LinearModel, MatrixForm, Sense

PIVOT_TOL = 1e-9
OPT_TOL = 1e-9
FEAS_TOL = 1e-7
STALL_LIMIT = 30
REL_PIVOT_TOL = 1e-7


@dataclass(frozen=True)
class LpOutcome:
    status: str
    objective: float
    primal: Optional[dict]
    iteration_count: int

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Unbounded(Exception):
    pass


REINVERT_EVERY = 50


def _reinvert(T: np.ndarray, basis: list, A0: np.ndarray, b0: np.ndarray,
              cost: np.ndarray) -> None:
    """Rebuild ``T`` from the original rows for the current basis."""
    m = T.shape[0] - 1
    if m == 0:
        return
    n = T.shape[1] - 1
    try:
        X = np.linalg.solve(A0[:, basis], np.column_stack([A0[:, :n], b0]))
    except np.linalg.LinAlgError:
        return
    if not np.all(np.isfinite(X)):
        return
    X[np.abs(X) < 1e-13] = 0.0
    T[:m] = X
    cb = cost[basis]
    T[-1, :n] = cost - cb @ X[:, :n]
    T[-1, -1] = -(cb @ X[:, -1])


def _run_simplex(T: np.ndarray, basis: list, n_cols: int, iters: list,
                 refresh=None) -> None:
    """Pivot ``T`` to optimality over the first ``n_cols`` columns.

    The last row of ``T`` holds reduced costs and ``-objective``; the last
    column holds the basic values.  Raises ``_Unbounded`` when an entering
    column has no positive entry.  ``refresh(T, basis)``, when given, is
    called every ``REINVERT_EVERY`` pivots to wash out round-off.
    """
    m = T.shape[0] - 1
    bland = False
    stall = 0
    limit = 200 * (m + n_cols) + 5000
    since = 0
    if n_cols == 0:
        return
    while True:
        if refresh is not None and since >= REINVERT_EVERY:
            refresh(T, basis)
            since = 0
        rc = T[-1, :n_cols]
        if bland:
            cand = np.flatnonzero(rc < -OPT_TOL)
            if cand.size == 0:
                return
            e = int(cand[0])
        else:
            e = int(np.argmin(rc))
            if rc[e] >= -OPT_TOL:
                return
        col = T[:m, e]
        pos = np.flatnonzero(col > PIVOT_TOL)
        if pos.size == 0:
            raise _Unbounded()
        # entries far below the column scale are round-off, not pivots
        pos = pos[col[pos] >= REL_PIVOT_TOL * col[pos].max()]
        vals = np.maximum(T[pos, -1], 0.0)
        ratios = vals / col[pos]
        best = ratios.min()
        if bland:
            ties = pos[ratios <= best + 1e-9 * max(1.0, abs(best))]
            r = int(min(ties, key=lambda row: basis[row]))
        else:
            # two-pass ratio test: allow a FEAS_TOL overshoot, then take the
            # largest pivot inside that step to keep the basis well conditioned
            cap = ((vals + FEAS_TOL) / col[pos]).min()
            ties = pos[ratios <= cap]
            r = int(ties[np.argmax(col[ties])])
            best = ratios[np.searchsorted(pos, r)]
        if best <= 1e-12:
            stall += 1
            if stall > STALL_LIMIT:
                bland = True
        else:
            stall = 0
        _pivot(T, r, e)
        basis[r] = e
        iters[0] += 1
        since += 1
        if iters[0] > limit:
            raise RuntimeError("simplex iteration limit exceeded; numerical trouble")


def _pivot(T: np.ndarray, r: int, e: int) -> None:
    T[r] /= T[r, e]
    col = T[:, e].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[np.abs(T) < 1e-13] = 0.0


def solve_matrix(mf: MatrixForm, lb: Optional[np.ndarray] = None,
                 ub: Optional[np.ndarray] = None) -> LpOutcome:
    """Solve the LP given in array form, optionally with replacement bounds."""
    lb = np.array(mf.lb if lb is None else lb, dtype=float)
    ub = np.array(mf.ub if ub is None else ub, dtype=float)
    n = lb.size
    A, b = mf.A, np.array(mf.b, dtype=float)
    sign = -1.0 if mf.maximize else 1.0
    c = sign * mf.c

    def infeasible():
        return LpOutcome("infeasible", math.nan, None, 0)

    # singleton and empty rows become bound updates
    keep = []
    for r in range(A.shape[0]):
        nz = np.flatnonzero(A[r])
        s = mf.senses[r]
        if nz.size == 0:
            if (s is Sense.LE and b[r] < -FEAS_TOL) or (s is Sense.GE and b[r] > FEAS_TOL) \
                    or (s is Sense.EQ and abs(b[r]) > FEAS_TOL):
                return infeasible()
            continue
        if nz.size == 1:
            j = int(nz[0])
            a = A[r, j]
            val = b[r] / a
            if s is Sense.EQ:
                lb[j] = max(lb[j], val)
                ub[j] = min(ub[j], val)
            elif (s is Sense.LE) == (a > 0):
                ub[j] = min(ub[j], val)
            else:
                lb[j] = max(lb[j], val)
            continue
        keep.append(r)
    if np.any(lb > ub + FEAS_TOL):
        return infeasible()
    ub = np.maximum(ub, lb)

    # variable substitution: x_j = offset_j + sum(coef * column)
    offset = np.zeros(n)
    col_map = []          # (var index, coefficient) per standard-form column
    ub_rows = []          # (column, bound) for finite shifted upper bounds
    for j in range(n):
        lo, hi = lb[j], ub[j]
        if hi - lo <= 1e-12:
            offset[j] = lo
        elif math.isfinite(lo):
            offset[j] = lo
            col_map.append((j, 1.0))
            if math.isfinite(hi):
                ub_rows.append((len(col_map) - 1, hi - lo))
        elif math.isfinite(hi):
            offset[j] = hi
            col_map.append((j, -1.0))
        else:
            col_map.append((j, 1.0))
            col_map.append((j, -1.0))
    n_struct = len(col_map)
    cols_var = np.array([j for j, _ in col_map], dtype=int)
    cols_coef = np.array([s for _, s in col_map], dtype=float)

    A_k = A[keep] if keep else np.zeros((0, n))
    b_k = b[keep] - A_k @ offset if keep else np.zeros(0)
    senses = [mf.senses[r] for r in keep]
    m = len(keep) + len(ub_rows)
    M = np.zeros((m, n_struct))
    if n_struct and keep:
        M[:len(keep)] = A_k[:, cols_var] * cols_coef
    rhs = np.zeros(m)
    rhs[:len(keep)] = b_k
    row_sense = list(senses)
    for k, (col, bound) in enumerate(ub_rows):
        M[len(keep) + k, col] = 1.0
        rhs[len(keep) + k] = bound
        row_sense.append(Sense.LE)
    c_std = c[cols_var] * cols_coef if n_struct else np.zeros(0)
    c_const = float(c @ offset)

    n_slack = sum(1 for s in row_sense if s is not Sense.EQ)
    flip = rhs < 0
    slack_cols = {}
    S = np.zeros((m, n_slack))
    k = 0
    for r, s in enumerate(row_sense):
        if s is Sense.EQ:
            continue
        S[r, k] = 1.0 if s is Sense.LE else -1.0
        slack_cols[r] = k
        k += 1
    M = np.hstack([M, S])
    M[flip] *= -1.0
    rhs[flip] *= -1.0
    scale = np.abs(M).max(axis=1, initial=0.0)
    scale[scale == 0.0] = 1.0
    M /= scale[:, None]
    rhs /= scale
    n_real = n_struct + n_slack

    basis = [-1] * m
    for r, k in slack_cols.items():
        if M[r, n_struct + k] > 0:
            basis[r] = n_struct + k
    art_rows = [r for r in range(m) if basis[r] < 0]
    n_art = len(art_rows)
    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n_real] = M
    T[:m, -1] = rhs
    for k, r in enumerate(art_rows):
        T[r, n_real + k] = 1.0
        basis[r] = n_real + k
    iters = [0]
    A0 = T[:m, :-1].copy()
    b0 = rhs.copy()

    if n_art:
        T[-1, :n_real] = -M[art_rows].sum(axis=0)
        T[-1, -1] = -rhs[art_rows].sum()
        cost1 = np.concatenate([np.zeros(n_real), np.ones(n_art)])
        _run_simplex(T, basis, n_real + n_art, iters,
                     lambda T_, B_: _reinvert(T_, B_, A0, b0, cost1))
        if -T[-1, -1] > FEAS_TOL * (1.0 + np.abs(rhs).max(initial=0.0)) / max(1.0, scale.max()):
            return LpOutcome("infeasible", math.nan, None, iters[0])
        drop = []
        for r in range(m):
            if basis[r] >= n_real:
                cand = np.flatnonzero(np.abs(T[r, :n_real]) > PIVOT_TOL)
                if cand.size:
                    e = int(cand[np.argmax(np.abs(T[r, cand]))])
                    _pivot(T, r, e)
                    basis[r] = e
                else:
                    drop.append(r)
        if drop:
            keep_rows = [r for r in range(m) if r not in drop]
            T = T[keep_rows + [m]]
            basis = [basis[r] for r in keep_rows]
            m = len(keep_rows)
            A0, b0 = A0[keep_rows], b0[keep_rows]
        T = np.hstack([T[:, :n_real], T[:, -1:]])
    A0 = A0[:, :n_real]

    c_full = np.concatenate([c_std, np.zeros(n_slack)])
    cb = c_full[basis] if m else np.zeros(0)
    T[-1, :n_real] = c_full - cb @ T[:m, :n_real]
    T[-1, -1] = -(cb @ T[:m, -1]) if m else 0.0
    try:
        _run_simplex(T, basis, n_real, iters,
                     lambda T_, B_: _reinvert(T_, B_, A0, b0, c_full))
    except _Unbounded:
        return LpOutcome("unbounded", -math.inf * sign, None, iters[0])

    z = np.zeros(n_real)
    for r, col in enumerate(basis):
        z[col] = T[r, -1]
    x = offset.copy()
    np.add.at(x, cols_var, cols_coef * z[:n_struct])
    x = np.clip(x, lb, ub)
    obj = float(mf.c @ x) + mf.c0
    return LpOutcome("optimal", obj, dict(zip(mf.var_ids, x.tolist())), iters[0])


def solve_lp(model: LinearModel, lower=None, upper=None) -> LpOutcome:
    """Solve the continuous relaxation of ``model`` (integrality ignored)."""
    if isinstance(model, BilinearModel):
        raise TypeError("solve_lp needs a linear model; relax the bilinear rows first")
    return solve_matrix(model.matrix, lower, upper)
