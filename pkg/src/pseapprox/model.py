"""Linear, mixed-integer and bilinear model representation.

Every problem builder in the package emits one of two immutable model
types: :class:`LinearModel` (optionally with integer variables) or
:class:`BilinearModel`, which adds explicit products of two variables to
named rows of a linear base model.  Models are plain data; solvers and
relaxations consume them without mutating anything.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Generic, Iterable, Mapping, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

INF = math.inf
OBJECTIVE = "__objective__"
DEFAULT_TOL = 1e-7


class Integrality(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    INTEGER = "integer"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class ObjectiveSense(str, Enum):
    MIN = "min"
    MAX = "max"


class MissingVariableError(KeyError):
    """Raised when an assignment lacks a value for a referenced variable."""

    def __init__(self, var_id: str):
        super().__init__(var_id)
        self.var_id = var_id

    def __str__(self) -> str:
        return f"no value assigned to variable {self.var_id!r}"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class VariableDef:
    id: str
    lower: float = 0.0
    upper: float = INF
    integrality: Integrality = Integrality.CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "integrality", Integrality(self.integrality))
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if self.lower > self.upper:
            raise ModelError(f"variable {self.id!r}: lower {self.lower} > upper {self.upper}")
        if self.integrality is Integrality.BINARY and (self.lower < 0 or self.upper > 1):
            raise ModelError(f"binary variable {self.id!r} must have bounds within [0, 1]")

    @property
    def is_integer(self) -> bool:
        return self.integrality is not Integrality.CONTINUOUS


@dataclass(frozen=True)
class LinearExpression:
    """Sum of ``coefficient * variable`` terms plus a constant.

    Duplicate variables are merged on construction and exact zeros are
    dropped, so ``terms`` holds each variable at most once, in order of
    first appearance.
    """

    terms: Tuple[Tuple[str, float], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        merged: dict = {}
        for var, coef in self.terms:
            merged[var] = merged.get(var, 0.0) + float(coef)
        object.__setattr__(self, "terms", tuple((v, c) for v, c in merged.items() if c != 0.0))
        object.__setattr__(self, "constant", float(self.constant))

    @classmethod
    def of(cls, terms: Union[Mapping[str, float], Iterable[Tuple[str, float]], None] = None,
           constant: float = 0.0) -> "LinearExpression":
        if terms is None:
            return cls((), constant)
        if isinstance(terms, Mapping):
            terms = terms.items()
        return cls(tuple(terms), constant)

    def variables(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "LinearExpression") -> "LinearExpression":
        if isinstance(other, (int, float)):
            return LinearExpression(self.terms, self.constant + other)
        return LinearExpression(self.terms + other.terms, self.constant + other.constant)

    __radd__ = __add__

    def __neg__(self) -> "LinearExpression":
        return self * -1.0

    def __sub__(self, other: "LinearExpression") -> "LinearExpression":
        return self + (-other)

    def __mul__(self, scalar: float) -> "LinearExpression":
        s = float(scalar)
        return LinearExpression(tuple((v, c * s) for v, c in self.terms), self.constant * s)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LinearConstraint:
    label: str
    expr: LinearExpression
    sense: Sense
    rhs: float

    def __post_init__(self):
        object.__setattr__(self, "sense", Sense(self.sense))
        object.__setattr__(self, "rhs", float(self.rhs))


@dataclass(frozen=True)
class BilinearTerm:
    a: str
    b: str
    coefficient: float = 1.0


@dataclass(frozen=True)
class MatrixForm:
    """Dense array view of a linear model, in declaration order."""

    var_ids: Tuple[str, ...]
    c: np.ndarray
    c0: float
    maximize: bool
    A: np.ndarray
    senses: Tuple[Sense, ...]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray


@dataclass(frozen=True)
class LinearModel:
    variables: Tuple[VariableDef, ...]
    constraints: Tuple[LinearConstraint, ...]
    objective: LinearExpression = field(default_factory=LinearExpression)
    sense: ObjectiveSense = ObjectiveSense.MIN
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "sense", ObjectiveSense(self.sense))
        seen = set()
        for v in self.variables:
            if v.id in seen:
                raise ModelError(f"duplicate variable {v.id!r}")
            seen.add(v.id)
        labels = set()
        for con in self.constraints:
            if con.label in labels or con.label == OBJECTIVE:
                raise ModelError(f"duplicate or reserved constraint label {con.label!r}")
            labels.add(con.label)
            for var in con.expr.variables():
                if var not in seen:
                    raise ModelError(f"row {con.label!r} references undeclared variable {var!r}")
        for var in self.objective.variables():
            if var not in seen:
                raise ModelError(f"objective references undeclared variable {var!r}")

    @cached_property
    def index(self) -> dict:
        return {v.id: k for k, v in enumerate(self.variables)}

    @cached_property
    def variable_map(self) -> dict:
        return {v.id: v for v in self.variables}

    @cached_property
    def constraint_map(self) -> dict:
        return {c.label: c for c in self.constraints}

    @property
    def integer_ids(self) -> Tuple[str, ...]:
        return tuple(v.id for v in self.variables if v.is_integer)

    @property
    def is_mip(self) -> bool:
        return any(v.is_integer for v in self.variables)

    @cached_property
    def matrix(self) -> MatrixForm:
        n, m = len(self.variables), len(self.constraints)
        idx = self.index
        c = np.zeros(n)
        for var, coef in self.objective.terms:
            c[idx[var]] = coef
        A = np.zeros((m, n))
        b = np.zeros(m)
        for r, con in enumerate(self.constraints):
            for var, coef in con.expr.terms:
                A[r, idx[var]] = coef
            b[r] = con.rhs - con.expr.constant
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        integer = np.array([v.is_integer for v in self.variables], dtype=bool)
        for arr in (c, A, b, lb, ub, integer):
            arr.setflags(write=False)
        return MatrixForm(
            var_ids=tuple(v.id for v in self.variables), c=c, c0=self.objective.constant,
            maximize=self.sense is ObjectiveSense.MAX, A=A,
            senses=tuple(con.sense for con in self.constraints), b=b, lb=lb, ub=ub,
            integer=integer)

    def relaxed(self) -> "LinearModel":
        """Copy with every integrality requirement dropped (bounds kept)."""
        variables = tuple(VariableDef(v.id, v.lower, v.upper) for v in self.variables)
        return LinearModel(variables, self.constraints, self.objective, self.sense, self.name)


@dataclass(frozen=True)
class BilinearModel:
    """Linear base model plus bilinear products added to named rows.

    ``bilinear_rows`` maps a constraint label (or :data:`OBJECTIVE`) to the
    products that are added to the linear part of that row.
    """

    base: LinearModel
    bilinear_rows: Tuple[Tuple[str, Tuple[BilinearTerm, ...]], ...] = ()

    def __post_init__(self):
        rows = tuple((label, tuple(terms)) for label, terms in self.bilinear_rows)
        object.__setattr__(self, "bilinear_rows", rows)
        labels = self.base.constraint_map
        declared = self.base.variable_map
        seen = set()
        for label, terms in rows:
            if label != OBJECTIVE and label not in labels:
                raise ModelError(f"bilinear row {label!r} is not a constraint of the base model")
            if label in seen:
                raise ModelError(f"bilinear row {label!r} listed twice")
            seen.add(label)
            for t in terms:
                for var in (t.a, t.b):
                    if var not in declared:
                        raise ModelError(f"bilinear row {label!r} references undeclared {var!r}")

    variables = property(lambda self: self.base.variables)
    constraints = property(lambda self: self.base.constraints)
    objective = property(lambda self: self.base.objective)
    sense = property(lambda self: self.base.sense)
    name = property(lambda self: self.base.name)
    variable_map = property(lambda self: self.base.variable_map)
    is_mip = property(lambda self: self.base.is_mip)

    @cached_property
    def products(self) -> dict:
        return dict(self.bilinear_rows)

    def bilinear_terms(self) -> Tuple[BilinearTerm, ...]:
        return tuple(t for _, terms in self.bilinear_rows for t in terms)


AnyModel = Union[LinearModel, BilinearModel]
Assignment = Mapping[str, float]


def evaluate_expression(expr: LinearExpression, assignment: Assignment) -> float:
    total = expr.constant
    for var, coef in expr.terms:
        try:
            total += coef * assignment[var]
        except KeyError:
            raise MissingVariableError(var) from None
    return total


def evaluate_products(terms: Sequence[BilinearTerm], assignment: Assignment) -> float:
    total = 0.0
    for t in terms:
        for var in (t.a, t.b):
            if var not in assignment:
                raise MissingVariableError(var)
        total += t.coefficient * assignment[t.a] * assignment[t.b]
    return total


def row_activity(model: AnyModel, label: str, assignment: Assignment) -> float:
    """Left-hand side of a row (or the objective) including products."""
    if label == OBJECTIVE:
        value = evaluate_expression(model.objective, assignment)
    else:
        value = evaluate_expression(model.base.constraint_map[label].expr
                                    if isinstance(model, BilinearModel)
                                    else model.constraint_map[label].expr, assignment)
    if isinstance(model, BilinearModel):
        value += evaluate_products(model.products.get(label, ()), assignment)
    return value


def objective_value(model: AnyModel, assignment: Assignment) -> float:
    return row_activity(model, OBJECTIVE, assignment)


@dataclass(frozen=True)
class Violation:
    label: str
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: Tuple[Violation, ...]
    tol: float

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def max_violation(self) -> float:
        return max((abs(v.amount) for v in self.violations), default=0.0)

    def labels(self) -> Tuple[str, ...]:
        return tuple(v.label for v in self.violations)

    def __bool__(self) -> bool:
        return self.feasible


def check_feasibility(model: AnyModel, assignment: Assignment,
                      tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Evaluate every row, bound and integrality requirement at ``assignment``.

    Violation amounts are signed: positive means the row's left-hand side
    is above its right-hand side for ``<=``/``=`` rows, or below it for
    ``>=`` rows.  Bound violations are reported under ``bound:<id>`` and
    integrality violations under ``integrality:<id>``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    missing = [v.id for v in model.variables if v.id not in assignment]
    if missing:
        raise MissingVariableError(missing[0])
    products = model.products if isinstance(model, BilinearModel) else {}
    violations = []
    for con in model.constraints:
        lhs = evaluate_expression(con.expr, assignment)
        if con.label in products:
            lhs += evaluate_products(products[con.label], assignment)
        if con.sense is Sense.LE:
            excess = lhs - con.rhs
            bad = excess > tol
        elif con.sense is Sense.GE:
            excess = con.rhs - lhs
            bad = excess > tol
        else:
            excess = lhs - con.rhs
            bad = abs(excess) > tol
        if bad:
            violations.append(Violation(con.label, excess))
    for v in model.variables:
        val = assignment[v.id]
        if val < v.lower - tol:
            violations.append(Violation(f"bound:{v.id}", v.lower - val))
        elif val > v.upper + tol:
            violations.append(Violation(f"bound:{v.id}", val - v.upper))
        if v.is_integer and abs(val - round(val)) > tol:
            violations.append(Violation(f"integrality:{v.id}", val - round(val)))
    return FeasibilityReport(tuple(violations), tol)


@dataclass(frozen=True)
class ApproximationCertificate:
    """Incumbent value, relaxation bound and the ratio between them.

    For minimisation ``ratio = incumbent / bound``; for maximisation
    ``ratio = bound / incumbent``.  Either way ``ratio >= 1`` when the
    certificate is consistent.  When the ratio is not meaningful
    (non-positive denominator, or a bound on the wrong side of the
    incumbent) it is ``None`` and ``flags`` says why.
    """

    sense: ObjectiveSense
    incumbent: float
    bound: float
    ratio: Optional[float]
    flags: Tuple[str, ...] = ()

    @property
    def defined(self) -> bool:
        return self.ratio is not None


def make_certificate(sense: Union[str, ObjectiveSense], incumbent: float, bound: float,
                     tol: float = 1e-9) -> ApproximationCertificate:
    sense = ObjectiveSense(sense)
    incumbent, bound = float(incumbent), float(bound)
    scale = max(1.0, abs(incumbent), abs(bound))
    flags = []
    if sense is ObjectiveSense.MIN and bound > incumbent + tol * scale:
        flags.append("bound-above-incumbent")
    if sense is ObjectiveSense.MAX and bound < incumbent - tol * scale:
        flags.append("bound-below-incumbent")
    if flags:
        return ApproximationCertificate(sense, incumbent, bound, None, tuple(flags))
    if abs(incumbent - bound) <= tol * scale:
        return ApproximationCertificate(sense, incumbent, bound, 1.0, ("exact",))
    num, den = (incumbent, bound) if sense is ObjectiveSense.MIN else (bound, incumbent)
    if den <= 0 or not math.isfinite(den) or not math.isfinite(num):
        return ApproximationCertificate(sense, incumbent, bound, None, ("ratio-undefined",))
    return ApproximationCertificate(sense, incumbent, bound, num / den)


T = TypeVar("T")


@dataclass(frozen=True)
class HeuristicResult(Generic[T]):
    """Outcome of a heuristic: a solution plus certificate, or a declared failure."""

    status: str
    solution: Optional[T]
    certificate: Optional[ApproximationCertificate]
    message: str = ""
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class ValidationReport:
    errors: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


class ModelBuilder:
    """Mutable helper that accumulates variables and rows, then freezes them.

    >>> mb = ModelBuilder("toy")
    >>> x = mb.add_var("x", upper=10)
    >>> mb.add_constraint("lo", {x: 1}, ">=", 3)
    >>> mb.set_objective({x: 1})
    >>> mb.build().constraints[0].rhs
    3.0
    """

    def __init__(self, name: str = ""):
        self.name = name
        self._vars: dict = {}
        self._rows: list = []
        self._labels: set = set()
        self._products: dict = {}
        self._objective = LinearExpression()
        self._sense = ObjectiveSense.MIN

    def add_var(self, var_id: str, lower: float = 0.0, upper: float = INF,
                integrality: Union[str, Integrality] = Integrality.CONTINUOUS) -> str:
        if var_id in self._vars:
            raise ModelError(f"duplicate variable {var_id!r}")
        self._vars[var_id] = VariableDef(var_id, lower, upper, Integrality(integrality))
        return var_id

    def has_var(self, var_id: str) -> bool:
        return var_id in self._vars

    def add_constraint(self, label: str, terms, sense: Union[str, Sense], rhs: float,
                       products: Sequence[Tuple[str, str, float]] = (),
                       constant: float = 0.0) -> str:
        if label in self._labels:
            raise ModelError(f"duplicate constraint label {label!r}")
        self._labels.add(label)
        self._rows.append(LinearConstraint(label, LinearExpression.of(terms, constant),
                                           Sense(sense), rhs))
        if products:
            self._products[label] = tuple(BilinearTerm(a, b, c) for a, b, c in products)
        return label

    def set_objective(self, terms, sense: Union[str, ObjectiveSense] = ObjectiveSense.MIN,
                      constant: float = 0.0,
                      products: Sequence[Tuple[str, str, float]] = ()) -> None:
        self._objective = LinearExpression.of(terms, constant)
        self._sense = ObjectiveSense(sense)
        if products:
            self._products[OBJECTIVE] = tuple(BilinearTerm(a, b, c) for a, b, c in products)

    def build(self) -> AnyModel:
        base = LinearModel(tuple(self._vars.values()), tuple(self._rows), self._objective,
                           self._sense, self.name)
        if self._products:
            return BilinearModel(base, tuple(self._products.items()))
        return base
