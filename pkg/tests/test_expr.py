from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from hawkmc.expr import TRUE, Atom, Expr, FlowExpr, Predicate, flow_from_expr, fmt_num, frac, op_holds

fractions = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
names = st.sampled_from(["x", "y", "z"])


@st.composite
def affine(draw):
    coeffs = draw(st.dictionaries(names, fractions, max_size=3))
    return Expr.affine(coeffs, draw(fractions))


valuations = st.fixed_dictionaries({n: st.integers(-50, 50) for n in ("x", "y", "z")})


@given(fractions)
def test_fmt_num_round_trips(q):
    assert Fraction(fmt_num(q)) == q


def test_fmt_num_prefers_decimals():
    assert fmt_num(Fraction(3, 100)) == "0.03"
    assert fmt_num(Fraction(-1, 2)) == "-0.5"
    assert fmt_num(Fraction(1, 3)) == "1/3"
    assert fmt_num(Fraction(7)) == "7"


def test_frac_uses_shortest_float_repr():
    assert frac(0.03) == Fraction(3, 100)
    assert frac("2/7") == Fraction(2, 7)
    with pytest.raises(ValueError):
        frac(float("nan"))
    with pytest.raises(TypeError):
        frac(True)


@given(affine(), affine(), valuations)
def test_arithmetic_agrees_with_evaluation(e, f, v):
    ex = {k: Fraction(x) for k, x in v.items()}
    assert (e + f).evaluate_exact(ex) == e.evaluate_exact(ex) + f.evaluate_exact(ex)
    assert (e - f).evaluate_exact(ex) == e.evaluate_exact(ex) - f.evaluate_exact(ex)
    assert (e * f).evaluate_exact(ex) == e.evaluate_exact(ex) * f.evaluate_exact(ex)
    assert (e * 3).evaluate_exact(ex) == 3 * e.evaluate_exact(ex)


@given(affine(), affine(), valuations)
def test_substitution_is_composition(e, f, v):
    ex = {k: Fraction(x) for k, x in v.items()}
    inner = dict(ex, x=f.evaluate_exact(ex))
    assert e.substitute({"x": f}).evaluate_exact(ex) == e.evaluate_exact(inner)


def test_products_are_polynomial_and_division_by_constants_only():
    x, y = Expr.var("x"), Expr.var("y")
    p = x * y + 1
    assert p.degree() == 2 and not p.is_affine()
    assert (x / 4).coeff("x") == Fraction(1, 4)
    with pytest.raises((ValueError, ZeroDivisionError, TypeError)):
        x / y


@given(affine(), st.sampled_from(["<", "<=", "==", ">=", ">"]), valuations)
def test_atom_normal_form_preserves_truth(e, op, v):
    a = Atom(e, op)
    lin = [c for m, c in a.expr.terms if m != ()]
    assert not lin or lin[0] > 0
    assert a.holds(v) == op_holds(op, e.evaluate(v))


def test_atom_compare_and_printing():
    a = Atom.compare(Expr.var("temp"), "<=", 20)
    assert str(a) == "temp <= 20"
    assert a.holds({"temp": 20}) and not a.holds({"temp": 20.1})
    flipped = Atom.compare(20, ">=", Expr.var("temp"))
    assert flipped == a


def test_closure_semantics_relaxes_strict_atoms():
    a = Atom.compare(Expr.var("x"), ">", 1)
    assert not a.holds({"x": 1.0})
    assert a.holds({"x": 1.0}, tol=1e-9)
    assert not a.holds({"x": 1.0 - 1e-6}, tol=1e-9)


def test_predicate_conjunction():
    x = Expr.var("x")
    p = Predicate.of(Atom.compare(x, ">=", 0)) & Predicate.of(Atom.compare(x, "<=", 1))
    assert p.holds({"x": 0.5}) and not p.holds({"x": 2})
    assert TRUE.is_true() and (TRUE & p) == p
    assert p.variables() == {"x"}


def test_flow_from_expr_reads_rate_and_value_terms():
    e = Expr.var("a'") * 2 + Expr.var("b") - Expr.var("c'") * Expr.var("s") + 3
    f = flow_from_expr(e)
    assert f.const == 3
    assert f.value_vars() == {"b", "s"} and f.rate_vars() == {"a", "c"}
    assert f == FlowExpr.build(3, {"b": 1}, [("a", 2), ("c", -1, "s")])
    with pytest.raises(ValueError):
        flow_from_expr(Expr.var("a") * Expr.var("b"))
