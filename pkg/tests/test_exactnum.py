from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genexp.exactnum import (
    ALPHA,
    CertifiedInterval,
    Ordinal,
    OrdinalError,
    Quad,
    format_scalar,
    interval_refine,
    ord_compare,
    ord_kind,
    ord_max,
    parse_ordinal,
    parse_scalar,
)

W = Ordinal.omega()
rationals = st.fractions(max_denominator=10**6).filter(lambda f: abs(f) < 10**6)
quads = st.builds(Quad, rationals, rationals)


def test_ordinal_compare_examples():
    assert ord_compare(W, Ordinal.of(3)) == "greater"
    assert ord_compare(Ordinal.of(2), Ordinal.of(2)) == "equal"
    assert ord_compare(W + 1, parse_ordinal("w*2")) == "less"


def test_ordinal_kind_examples():
    assert ord_kind(Ordinal()) == "zero"
    assert ord_kind(parse_ordinal("w*2+3")) == "successor"
    assert ord_kind(Ordinal.omega(2)) == "limit"


def test_ordinal_text_round_trip():
    for text in ["0", "1", "7", "w", "w+1", "w*2+3", "w^2", "w^3*2+w*5+1"]:
        assert str(parse_ordinal(text)) == text


def test_ordinal_arithmetic():
    assert Ordinal.of(3) + W == W  # finite terms are absorbed
    assert W + 1 + 1 == parse_ordinal("w+2")
    assert (W + 1).predecessor() == W
    assert Ordinal.of(4).next_limit() == W
    assert parse_ordinal("w*2+4").next_limit() == parse_ordinal("w*3")
    assert ord_max([Ordinal.of(2), W, Ordinal.of(9)]) == W
    with pytest.raises(OrdinalError):
        W.predecessor()
    with pytest.raises(OrdinalError):
        parse_ordinal("w^x")


cnf_below_w3 = st.lists(st.integers(0, 4), min_size=3, max_size=3).map(
    lambda cs: Ordinal(tuple((e, c) for e, c in zip((2, 1, 0), cs) if c))
)


@settings(max_examples=300)
@given(cnf_below_w3, cnf_below_w3, cnf_below_w3)
def test_ordinal_order_is_total_and_transitive(a, b, c):
    ab, ba = ord_compare(a, b), ord_compare(b, a)
    assert {ab, ba} in ({"equal"}, {"less", "greater"})
    assert (ab == "equal") == (a == b)
    if a < b and b < c:
        assert a < c


@given(cnf_below_w3, cnf_below_w3)
def test_ordinal_addition_is_monotone_on_the_right(a, b):
    assert a <= a + b
    assert b <= a + b


@given(rationals, rationals)
def test_rational_compare_matches_cross_multiplication(x, y):
    assert (x < y) == (x.numerator * y.denominator < y.numerator * x.denominator)


@settings(max_examples=1000)
@given(quads)
def test_quad_sign_matches_interval(q):
    s = q.sign()
    assert (s == 0) == (q.a == 0 and q.b == 0)
    iv = interval_refine(q, 64)
    if iv.lo > 0:
        assert s > 0
    if iv.hi < 0:
        assert s < 0


@settings(max_examples=200)
@given(quads, quads)
def test_quad_order_matches_floats_when_far_apart(p, q):
    fp, fq = float(p), float(q)
    if abs(fp - fq) > 1e-6 * (1 + abs(fp) + abs(fq)):
        assert (p < q) == (fp < fq)


def test_quad_arithmetic():
    r2 = Quad(0, 1)
    assert r2 * r2 == 2
    assert (Quad(1, 1) * Quad(-1, 1)) == 1  # (1+√2)(√2−1) = 1
    assert Quad(3, 2) / Quad(3, 2) == 1
    assert ALPHA.frac() == ALPHA
    assert (ALPHA * 3).__floor__() == 1  # 3(√2−1) ≈ 1.243


def test_interval_refine_examples():
    iv = interval_refine(Fraction(1, 3), 4)
    assert iv.contains(Fraction(1, 3)) and iv.width <= Fraction(1, 16)
    iv = interval_refine(ALPHA, 8)
    assert iv.width <= Fraction(1, 256)
    # consecutive continued-fraction convergents bracket √2−1
    lo, hi = Fraction(70, 169), Fraction(29, 70)
    assert lo < ALPHA < hi
    assert iv.lo <= hi and iv.hi >= lo
    assert iv.lo < Fraction(41421, 100000) < iv.hi
    for b in (1, 7, 40):
        assert interval_refine(Fraction(0), b) == CertifiedInterval.point(0)


@given(st.one_of(rationals, quads), st.integers(1, 60))
def test_interval_refine_is_nested(x, b):
    coarse, fine = interval_refine(x, b), interval_refine(x, b + 3)
    assert coarse.lo <= fine.lo <= fine.hi <= coarse.hi
    assert fine.width <= Fraction(1, 2 ** (b + 3))


def test_scalar_text_encoding():
    assert format_scalar(Fraction(3, 4)) == "3/4"
    assert format_scalar(ALPHA) == "-1/1+1/1*sqrt2"
    for x in [Fraction(-5, 7), ALPHA, Quad(Fraction(1, 2), Fraction(-3, 5))]:
        assert parse_scalar(format_scalar(x)) == x


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        CertifiedInterval(Fraction(1), Fraction(0))
    with pytest.raises(ValueError):
        interval_refine(Fraction(1), 0)
