"""Foundation tests: polynomials, series, quotient rings, traces."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hurwitztr.poly import Poly
from hurwitztr.quotient import DynEvalElement, SplitEvent, dyneval_invert, trace_over_roots
from hurwitztr.series import (
    DivisionByNonUnit,
    NotInvertible,
    Series,
    SeriesRing,
    divide_diff,
    reversion,
    series_arith,
)

fracs = st.fractions(
    min_value=-4, max_value=4, max_denominator=6
)


# ---------------------------------------------------------------------------
# Poly
# ---------------------------------------------------------------------------

def test_poly_divmod_roundtrip():
    a = Poly([1, 2, 0, 3])
    b = Poly([2, 1])
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.degree < b.degree


def test_poly_gcd_and_squarefree():
    p = Poly([-1, 0, 1])  # z^2 - 1
    q = Poly([1, 1])      # z + 1
    assert p.gcd(q) == q.monic()
    assert p.is_squarefree()
    assert not (q * q).is_squarefree()


def test_poly_rational_roots():
    p = Poly([-1, 0, 1])
    assert p.rational_roots() == [Fraction(-1), Fraction(1)]
    p2 = Poly([1, 0, -2])  # 1 - 2z^2: roots irrational
    assert p2.rational_roots() == []
    p3 = Poly([0, -1, 2])  # z(2z - 1)
    assert set(p3.rational_roots()) == {Fraction(0), Fraction(1, 2)}


def test_poly_power_sums():
    p = Poly([-2, 0, 1])  # t^2 - 2: roots +-sqrt(2)
    s = p.power_sums(4)
    assert s[0] == 2 and s[1] == 0 and s[2] == 4 and s[3] == 0 and s[4] == 8


def test_poly_shift():
    p = Poly([0, 0, 1])  # z^2
    assert p.shift(1) == Poly([1, 2, 1])


# ---------------------------------------------------------------------------
# Series arithmetic
# ---------------------------------------------------------------------------

def _ring(**caps):
    return SeriesRing(tuple(caps), caps={k: v for k, v in caps.items()})


def test_series_mul_difference_of_squares():
    R = SeriesRing(("g",), caps={"g": 4})
    g = R.var("g")
    left = (R.one() + g) * (R.one() - g)
    assert left == R.one() - g * g


def test_series_geometric_inverse():
    # (sum_k g^k) * (1 - g) = 1 at order 6  [oracle: direct convolution]
    R = SeriesRing(("g",), caps={"g": 6})
    geo = R.zero()
    for k in range(7):
        geo = geo + R.var("g", k)
    assert series_arith(geo, R.one() - R.var("g"), "mul") == R.one()


def test_series_div_self_is_one():
    R = SeriesRing(("g", "x"), caps={"g": 5, "x": 5})
    f = R.one() + R.var("g") * 3 + R.var("x", 2) - R.monomial(Fraction(1, 7), g=1, x=1)
    assert series_arith(f, f, "div") == R.one()


def test_series_div_nonunit_raises():
    R = SeriesRing(("g", "x"), caps={"g": 3, "x": 3})
    f = R.var("g") + R.var("x")  # no single minimal monomial divides both
    with pytest.raises(DivisionByNonUnit):
        f.invert()


def test_series_beta_grading_mul():
    R = SeriesRing(("x",), caps={"x": 4}, beta_cap=8)
    a = R.beta(2) * R.var("x")
    b = R.beta(-3)
    assert (a * b).terms == {(-1, (1,)): Fraction(1)}


def test_series_exp_log_roundtrip():
    R = SeriesRing(("g",), caps={"g": 6})
    f = R.var("g") + R.var("g", 3) * Fraction(2, 3)
    assert f.exp().log() == f


@settings(max_examples=25, deadline=None)
@given(st.lists(fracs, min_size=2, max_size=5))
def test_series_unit_inverse_property(coeffs):
    # random unit f: f * (1/f) == 1 to truncation order
    R = SeriesRing(("g",), caps={"g": 6})
    f = R.one()
    for k, c in enumerate(coeffs, start=1):
        f = f + R.var("g", k) * c
    assert f * f.invert() == R.one()


@settings(max_examples=15, deadline=None)
@given(
    st.lists(fracs, min_size=1, max_size=4),
    st.lists(fracs, min_size=1, max_size=4),
    st.lists(fracs, min_size=1, max_size=4),
)
def test_series_ring_axioms(a_, b_, c_):
    R = SeriesRing(("g", "x"), caps={"g": 4, "x": 4}, beta_cap=6)

    def mk(cs):
        f = R.zero()
        for k, c in enumerate(cs):
            f = f + R.monomial(c, beta=(k % 2) * -1, g=k, x=(k * 2) % 3)
        return f

    a, b, c = mk(a_), mk(b_), mk(c_)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


# ---------------------------------------------------------------------------
# Reversion
# ---------------------------------------------------------------------------

def test_reversion_identity_and_linear():
    R = SeriesRing(("x",), caps={"x": 8})
    x = R.var("x")
    assert reversion(x, "x", 6) == x
    assert reversion(2 * x, "x", 6) == x / 2


def test_reversion_fixed_point_oracle():
    # reversion of z/(1+z^2) is x + x^3 + 2x^5 + O(x^7):
    # the inverse g satisfies g = x * (1 + g^2), iterate as the oracle.
    R = SeriesRing(("x",), caps={"x": 6})
    x = R.var("x")
    f = x * (R.one() + x * x).invert()
    g = reversion(f, "x", 6)
    oracle = R.zero()
    for _ in range(8):
        oracle = x * (R.one() + oracle * oracle)
    assert g == oracle
    assert g.coeff(x=1) == 1 and g.coeff(x=3) == 1 and g.coeff(x=5) == 2


def test_reversion_requires_unit_slope():
    R = SeriesRing(("x",), caps={"x": 6})
    with pytest.raises(NotInvertible):
        reversion(R.var("x", 2), "x", 4)


@settings(max_examples=50, deadline=None)
@given(st.lists(fracs, min_size=1, max_size=5), st.fractions(min_value=1, max_value=3, max_denominator=4))
def test_reversion_composition_identity(cs, lead):
    R = SeriesRing(("x",), caps={"x": 7})
    f = R.var("x") * lead
    for k, c in enumerate(cs, start=2):
        f = f + R.var("x", k) * c
    g = reversion(f, "x", 7)
    comp = R.zero()
    # f(g)
    for k in range(8):
        comp = comp + R.const(f.coeff(x=k)) * g ** k
    assert comp == R.var("x")


# ---------------------------------------------------------------------------
# divide_diff
# ---------------------------------------------------------------------------

def test_divide_diff_exact():
    R = SeriesRing(("x", "y"), caps={"x": 6, "y": 6})
    x, y = R.var("x"), R.var("y")
    f = x ** 3 - y ** 3
    g = divide_diff(f, "x", "y")
    expect = x * x + x * y + y * y
    assert g == expect


def test_divide_diff_with_spectators():
    R = SeriesRing(("x", "y", "g"), caps={"x": 5, "y": 5, "g": 3})
    x, y, g = R.var("x"), R.var("y"), R.var("g")
    h = (x - y) * (R.one() + g * x * y + x * 2)
    q = divide_diff(h, "x", "y")
    # valid through total (x,y)-degree 4
    diff = q - (R.one() + g * x * y + x * 2)
    assert all(e[0] + e[1] > 4 for (_, e) in diff.terms)


# ---------------------------------------------------------------------------
# Quotient ring / dynamic evaluation
# ---------------------------------------------------------------------------

def test_dyneval_invert_basics():
    P = Poly([-2, 0, 1], var="t")  # t^2 - 2
    one = DynEvalElement.of(P, 1)
    assert one.invert() == one
    t = DynEvalElement.generator(P)
    tinv = t.invert()
    assert tinv == DynEvalElement(P, Poly([0, Fraction(1, 2)], var="t"))
    assert t * tinv == one


def test_dyneval_split_event():
    P = Poly([-1, 0, 1], var="t")  # t^2 - 1 = (t-1)(t+1)
    e = DynEvalElement(P, Poly([-1, 1], var="t"))  # t - 1, a zero divisor
    result = dyneval_invert(e)
    assert isinstance(result, SplitEvent)
    factors = sorted(result.factors, key=lambda f: f.coeffs)
    assert factors[0] == Poly([-1, 1], var="t") or factors[1] == Poly([-1, 1], var="t")
    prod = factors[0] * factors[1]
    assert prod.monic() == P


def test_trace_over_roots_examples():
    P = Poly([-2, 0, 1], var="t")
    # sum of roots
    assert trace_over_roots(P, Poly([0, 1], var="t")) == 0
    # sum of squares: Newton p2 = e1 p1 - 2 e2 = 4
    assert trace_over_roots(P, Poly([0, 0, 1], var="t")) == 4
    # sum 1/(a - 3) = -P'(3)/P(3) = -6/7
    assert trace_over_roots(
        P, Poly([1], var="t"), Poly([-3, 1], var="t")
    ) == Fraction(-6, 7)


def test_trace_matches_direct_evaluation_on_rational_roots():
    # P with all-rational roots: direct sum comparison
    roots = [Fraction(1), Fraction(-2), Fraction(1, 2)]
    P = Poly([1], var="t")
    for r in roots:
        P = P * Poly([-r, 1], var="t")
    num = Poly([1, 2, 3], var="t")
    den = Poly([5, 1], var="t")
    direct = sum(num(r) / den(r) for r in roots)
    assert trace_over_roots(P, num, den) == direct


def test_trace_dynamic_split_path():
    # denominator invertible only after splitting (t^2-1)(t^2-2)
    P = (Poly([-1, 0, 1], var="t") * Poly([-2, 0, 1], var="t")).monic()
    num = Poly([0, 1], var="t")
    den = Poly([3, 1], var="t")  # t + 3, fine on all roots
    roots_exact = [1, -1]
    val = trace_over_roots(P, num, den)
    # direct: sum over rational roots + quadratic pair
    direct = Fraction(1, 4) + Fraction(-1, 2)
    # sqrt2/(sqrt2+3) + (-sqrt2)/(3-sqrt2) = (a(3-a) - a(3+a))/((3+a)(3-a)), a=sqrt2
    direct += Fraction(-2 * 2, 7)
    assert val == direct
