"""Exact polynomial expressions, affine predicates and flow expressions.

Coefficients are kept as :class:`fractions.Fraction` so that composition,
substitution and canonical printing are exact.  Evaluation during simulation
goes through :meth:`Expr.compile`, which lowers to float coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Number = Union[int, float, str, Fraction]

OPS = ("<", "<=", "==", ">=", ">")
_FLIP = {"<": ">", "<=": ">=", "==": "==", ">=": "<=", ">": "<"}


def frac(x: Number) -> Fraction:
    """Convert to Fraction; floats go through their shortest repr (0.03 -> 3/100)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def fmt_num(q: Fraction) -> str:
    """Shortest exact decimal if one exists, otherwise p/q."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = abs(q.numerator) * (10 ** places) // q.denominator
    s = str(scaled).rjust(places + 1, "0")
    s = s[:-places] + "." + s[-places:]
    s = s.rstrip("0").rstrip(".")
    return ("-" if q < 0 else "") + s


Monomial = tuple  # sorted tuple of variable names, () is the constant


@dataclass(frozen=True)
class Expr:
    """Polynomial with rational coefficients.

    ``terms`` maps monomials to coefficients and is stored as a sorted tuple
    of pairs so instances are hashable and compare structurally.
    """

    terms: tuple = ()

    # construction -----------------------------------------------------
    @staticmethod
    def _make(d: Mapping[Monomial, Fraction]) -> "Expr":
        items = [(m, c) for m, c in d.items() if c != 0]
        items.sort(key=lambda mc: (len(mc[0]), mc[0]))
        return Expr(tuple(items))

    @staticmethod
    def const(c: Number) -> "Expr":
        return Expr._make({(): frac(c)})

    @staticmethod
    def var(name: str, coef: Number = 1) -> "Expr":
        return Expr._make({(name,): frac(coef)})

    @staticmethod
    def lift(x: "Expr | Number | str") -> "Expr":
        """Numbers become constants; strings are parsed as variable names."""
        if isinstance(x, Expr):
            return x
        if isinstance(x, str):
            try:
                return Expr.const(Fraction(x))
            except ValueError:
                return Expr.var(x)
        return Expr.const(x)

    @staticmethod
    def affine(coeffs: Mapping[str, Number], const: Number = 0) -> "Expr":
        d = {(v,): frac(c) for v, c in coeffs.items()}
        d[()] = frac(const)
        return Expr._make(d)

    # algebra ----------------------------------------------------------
    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other):
        other = Expr.lift(other)
        d = self.as_dict()
        for m, c in other.terms:
            d[m] = d.get(m, Fraction(0)) + c
        return Expr._make(d)

    __radd__ = __add__

    def __neg__(self):
        return Expr(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other):
        return self + (-Expr.lift(other))

    def __rsub__(self, other):
        return Expr.lift(other) - self

    def __mul__(self, other):
        other = Expr.lift(other)
        d: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(sorted(m1 + m2))
                d[m] = d.get(m, Fraction(0)) + c1 * c2
        return Expr._make(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Expr.lift(other)
        if not other.is_constant():
            raise ValueError("division only by constants")
        c = other.constant()
        if c == 0:
            raise ZeroDivisionError("division by zero in expression")
        return self * Expr.const(1 / c)

    # inspection -------------------------------------------------------
    def variables(self) -> frozenset:
        return frozenset(v for m, _ in self.terms for v in m)

    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def is_affine(self) -> bool:
        return self.degree() <= 1

    def is_constant(self) -> bool:
        return self.degree() == 0

    def constant(self) -> Fraction:
        for m, c in self.terms:
            if m == ():
                return c
        return Fraction(0)

    def coeff(self, name: str) -> Fraction:
        for m, c in self.terms:
            if m == (name,):
                return c
        return Fraction(0)

    def linear_part(self) -> "Expr":
        return Expr(tuple((m, c) for m, c in self.terms if m != ()))

    # transformation ---------------------------------------------------
    def substitute(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        if not mapping or not (self.variables() & mapping.keys()):
            return self
        out = Expr()
        for m, c in self.terms:
            t = Expr.const(c)
            for v in m:
                t = t * (mapping[v] if v in mapping else Expr.var(v))
            out = out + t
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Expr":
        if not mapping:
            return self
        d: dict = {}
        for m, c in self.terms:
            nm = tuple(sorted(mapping.get(v, v) for v in m))
            d[nm] = d.get(nm, Fraction(0)) + c
        return Expr._make(d)

    # evaluation -------------------------------------------------------
    def evaluate(self, valuation: Mapping[str, float]) -> float:
        total = 0.0
        for m, c in self.terms:
            t = float(c)
            for v in m:
                t *= valuation[v]
            total += t
        return total

    def evaluate_exact(self, valuation: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms:
            t = c
            for v in m:
                t *= valuation[v]
            total += t
        return total

    def compile(self, index: Mapping[str, int]) -> tuple:
        """Lower to ``((coef, (i, j, ...)), ...)`` over a variable index."""
        return tuple((float(c), tuple(index[v] for v in m)) for m, c in self.terms)

    def __str__(self) -> str:
        return format_expr(self)

    def __repr__(self) -> str:
        return f"Expr({format_expr(self)!r})"


def eval_compiled(prog: tuple, vals) -> float:
    total = 0.0
    for c, idx in prog:
        for i in idx:
            c *= vals[i]
        total += c
    return total


def format_expr(e: Expr) -> str:
    if not e.terms:
        return "0"
    ordered = [mc for mc in e.terms if mc[0] != ()] + [mc for mc in e.terms if mc[0] == ()]
    parts = []
    for i, (m, c) in enumerate(ordered):
        neg = c < 0
        mag = -c if neg else c
        if m == ():
            body = fmt_num(mag)
        elif mag == 1:
            body = "*".join(m)
        else:
            body = fmt_num(mag) + "*" + "*".join(m)
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


# predicates ------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    """``expr op 0`` with an affine ``expr``."""

    expr: Expr
    op: str

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        lin = [c for m, c in self.expr.terms if m != ()]
        # normal form: leading non-constant coefficient is positive
        if lin and lin[0] < 0:
            object.__setattr__(self, "expr", -self.expr)
            object.__setattr__(self, "op", _FLIP[self.op])

    @staticmethod
    def compare(lhs, op: str, rhs) -> "Atom":
        return Atom(Expr.lift(lhs) - Expr.lift(rhs), op)

    def holds(self, valuation: Mapping[str, float], tol: float = 0.0) -> bool:
        return op_holds(self.op, self.expr.evaluate(valuation), tol)

    def substitute(self, mapping) -> "Atom":
        return Atom(self.expr.substitute(mapping), self.op)

    def rename(self, mapping) -> "Atom":
        return Atom(self.expr.rename(mapping), self.op)

    def __str__(self) -> str:
        lhs = self.expr.linear_part()
        rhs = -self.expr.constant()
        if not lhs.terms:
            return f"0 {self.op} {fmt_num(rhs)}"
        return f"{format_expr(lhs)} {self.op} {fmt_num(rhs)}"


def op_holds(op: str, value: float, tol: float = 0.0) -> bool:
    """Closure semantics: strict comparisons are relaxed by ``tol``."""
    if op == "<=":
        return value <= tol
    if op == ">=":
        return value >= -tol
    if op == "<":
        return value < 0 if tol == 0 else value <= tol
    if op == ">":
        return value > 0 if tol == 0 else value >= -tol
    return abs(value) <= tol


def op_holds_strict(op: str, value: float) -> bool:
    if op == "<=":
        return value <= 0
    if op == ">=":
        return value >= 0
    if op == "<":
        return value < 0
    if op == ">":
        return value > 0
    return value == 0


@dataclass(frozen=True)
class Predicate:
    """Conjunction of atoms; the empty conjunction is ``true``."""

    atoms: tuple = ()

    @staticmethod
    def of(*atoms: Atom) -> "Predicate":
        return Predicate(tuple(atoms))

    def __and__(self, other: "Predicate") -> "Predicate":
        seen = list(self.atoms)
        for a in other.atoms:
            if a not in seen:
                seen.append(a)
        return Predicate(tuple(seen))

    def is_true(self) -> bool:
        return not self.atoms

    def holds(self, valuation: Mapping[str, float], tol: float = 0.0) -> bool:
        return all(a.holds(valuation, tol) for a in self.atoms)

    def variables(self) -> frozenset:
        out: frozenset = frozenset()
        for a in self.atoms:
            out |= a.expr.variables()
        return out

    def is_affine(self) -> bool:
        return all(a.expr.is_affine() for a in self.atoms)

    def substitute(self, mapping) -> "Predicate":
        return Predicate(tuple(a.substitute(mapping) for a in self.atoms))

    def rename(self, mapping) -> "Predicate":
        return Predicate(tuple(a.rename(mapping) for a in self.atoms))

    def canonical(self) -> "Predicate":
        return Predicate(tuple(sorted(set(self.atoms), key=lambda a: (str(a), a.op))))

    def __str__(self) -> str:
        if not self.atoms:
            return "true"
        return " & ".join(str(a) for a in self.atoms)


TRUE = Predicate()


# flows -------------------------------------------------------------------

@dataclass(frozen=True)
class FlowTerm:
    """``coef * value(var)`` or ``coef * rate(var) [* value(scale)]``."""

    kind: str  # "value" | "rate"
    var: str
    coef: Fraction
    scale: str | None = None

    def __post_init__(self):
        if self.kind not in ("value", "rate"):
            raise ValueError(f"flow term kind must be value or rate, got {self.kind!r}")
        if self.kind == "value" and self.scale is not None:
            raise ValueError("value terms cannot carry a scale variable")


@dataclass(frozen=True)
class FlowExpr:
    """Right-hand side of ``x' = ...``: constant plus value/rate terms."""

    const: Fraction = Fraction(0)
    terms: tuple = ()

    @staticmethod
    def constant(c: Number) -> "FlowExpr":
        return FlowExpr(frac(c), ())

    @staticmethod
    def build(const: Number = 0, value: Mapping[str, Number] | None = None,
              rate: Iterable | None = None) -> "FlowExpr":
        """``rate`` items are ``(var, coef)`` or ``(var, coef, scale)``."""
        terms = []
        for v, c in (value or {}).items():
            terms.append(FlowTerm("value", v, frac(c)))
        for item in rate or ():
            v, c, *rest = item
            terms.append(FlowTerm("rate", v, frac(c), rest[0] if rest else None))
        return FlowExpr(frac(const), _norm_terms(terms))

    def is_zero(self) -> bool:
        return self.const == 0 and not self.terms

    def value_vars(self) -> frozenset:
        vs = {t.var for t in self.terms if t.kind == "value"}
        vs |= {t.scale for t in self.terms if t.scale is not None}
        return frozenset(vs)

    def rate_vars(self) -> frozenset:
        return frozenset(t.var for t in self.terms if t.kind == "rate")

    def variables(self) -> frozenset:
        return self.value_vars() | self.rate_vars()

    def rename(self, mapping: Mapping[str, str]) -> "FlowExpr":
        terms = [FlowTerm(t.kind, mapping.get(t.var, t.var), t.coef,
                          None if t.scale is None else mapping.get(t.scale, t.scale))
                 for t in self.terms]
        return FlowExpr(self.const, _norm_terms(terms))

    def __str__(self) -> str:
        e = Expr.const(self.const)
        for t in self.terms:
            name = t.var + "'" if t.kind == "rate" else t.var
            mono = Expr.var(name, t.coef)
            if t.scale is not None:
                mono = mono * Expr.var(t.scale)
            e = e + mono
        return format_expr(e)


def _norm_terms(terms) -> tuple:
    acc: dict = {}
    for t in terms:
        key = (t.kind, t.var, t.scale)
        acc[key] = acc.get(key, Fraction(0)) + t.coef
    out = [FlowTerm(k, v, c, s) for (k, v, s), c in acc.items() if c != 0]
    out.sort(key=lambda t: (t.kind, t.var, t.scale or ""))
    return tuple(out)


def flow_from_expr(e: Expr) -> FlowExpr:
    """Read a polynomial written over ``x`` and ``x'`` symbols as a flow."""
    terms = []
    const = Fraction(0)
    for m, c in e.terms:
        primed = [v for v in m if v.endswith("'")]
        plain = [v for v in m if not v.endswith("'")]
        if not m:
            const += c
        elif len(m) == 1 and not primed:
            terms.append(FlowTerm("value", plain[0], c))
        elif len(m) == 1:
            terms.append(FlowTerm("rate", primed[0][:-1], c))
        elif len(m) == 2 and len(primed) == 1:
            terms.append(FlowTerm("rate", primed[0][:-1], c, plain[0]))
        else:
            raise ValueError(f"flow term {format_expr(Expr(((m, c),)))} is not of the form c*x, c*x' or c*x'*s")
    return FlowExpr(const, _norm_terms(terms))
