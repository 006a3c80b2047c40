"""Deterministic LP-style text rendering of models.

The grammar is documented in ``docs/lp_format.md``.  Output depends only
on the model contents, so exporting the same model twice gives
byte-identical text.
"""
from __future__ import annotations

import math
from typing import Iterable, List, Sequence, Tuple

from .model import (OBJECTIVE, AnyModel, BilinearModel, BilinearTerm, Integrality,
                    ObjectiveSense, Sense)


def format_number(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def _terms(linear: Sequence[Tuple[str, float]], products: Iterable[BilinearTerm] = (),
           constant: float = 0.0) -> str:
    parts: List[Tuple[float, str]] = [(c, v) for v, c in linear]
    parts += [(t.coefficient, f"[{t.a} * {t.b}]") for t in products]
    out = []
    for k, (coef, token) in enumerate(parts):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = token if mag == 1 else f"{format_number(mag)} {token}"
        if k == 0:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    if constant:
        sign = "-" if constant < 0 else "+"
        out.append(f"{sign} {format_number(abs(constant))}" if out
                   else format_number(constant))
    return " ".join(out) if out else "0"


def _bound_line(var) -> str:
    lo, hi = var.lower, var.upper
    if var.integrality is Integrality.BINARY and lo == 0 and hi == 1:
        return ""
    if lo == 0 and math.isinf(hi):
        return ""
    if math.isinf(lo) and math.isinf(hi):
        return f" {var.id} free"
    if lo == hi:
        return f" {var.id} = {format_number(lo)}"
    if math.isinf(hi):
        return f" {var.id} >= {format_number(lo)}"
    if lo == 0:
        return f" {var.id} <= {format_number(hi)}"
    return f" {format_number(lo)} <= {var.id} <= {format_number(hi)}"


_SENSE_TOKEN = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}


def export_lp_text(model: AnyModel) -> str:
    products = model.products if isinstance(model, BilinearModel) else {}
    lines = []
    if model.name:
        lines.append(f"\\ {model.name}")
    lines.append("maximize" if model.sense is ObjectiveSense.MAX else "minimize")
    obj = model.objective
    lines.append(f" obj: {_terms(obj.terms, products.get(OBJECTIVE, ()), obj.constant)}")
    if model.constraints:
        lines.append("subject to")
        for con in model.constraints:
            body = _terms(con.expr.terms, products.get(con.label, ()))
            rhs = con.rhs - con.expr.constant
            lines.append(f" {con.label}: {body} {_SENSE_TOKEN[con.sense]} {format_number(rhs)}")
    bounds = [ln for ln in (_bound_line(v) for v in model.variables) if ln]
    if bounds:
        lines.append("bounds")
        lines.extend(bounds)
    binaries = [v.id for v in model.variables if v.integrality is Integrality.BINARY]
    generals = [v.id for v in model.variables if v.integrality is Integrality.INTEGER]
    if binaries:
        lines.append("binary")
        lines.extend(f" {v}" for v in binaries)
    if generals:
        lines.append("general")
        lines.extend(f" {v}" for v in generals)
    lines.append("end")
    return "\n".join(lines) + "\n"
