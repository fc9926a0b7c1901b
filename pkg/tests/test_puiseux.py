from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridyn.puiseux import (FieldExtensionError, GaussQ, PrecisionError, PuiseuxNumber,
                              newton_puiseux_roots, parse_puiseux, poly_eval, poly_mul,
                              taylor_shift)

PN = PuiseuxNumber

gauss = st.builds(lambda a, b, c, e: GaussQ(F(a, c), F(b, e)),
                  st.integers(-5, 5), st.integers(-5, 5), st.integers(1, 4), st.integers(1, 4))
exps = st.sampled_from([F(-2), F(-1), F(-1, 2), F(0), F(1, 3), F(1, 2), F(1), F(3, 2)])


@st.composite
def series(draw, max_terms=3):
    items = draw(st.lists(st.tuples(exps, gauss), min_size=0, max_size=max_terms))
    return PN([(e, c) for e, c in items if not c.is_zero()])


def poly_from_roots(roots, lead=GaussQ(1)):
    p = [PN.coerce(lead)]
    for r in roots:
        p = poly_mul(p, [-r, PN.coerce(1)])
    return p


def test_gauss_field_basics():
    a = GaussQ(F(1, 2), F(3))
    assert a * a.inverse() == GaussQ(1)
    assert GaussQ(-4).sqrt() in (GaussQ(0, 2), GaussQ(0, -2))
    assert GaussQ(2).sqrt() is None


def test_ord_and_lead():
    x = parse_puiseux("3*t^(-1/2) + (1+2*i)*t^(1)")
    assert x.ord() == F(-1, 2)
    assert x.lead() == GaussQ(3)
    assert PN.zero().ord() == float("inf") or PN.zero().is_zero()


@settings(max_examples=200, deadline=None)
@given(series())
def test_format_parse_round_trip(x):
    assert parse_puiseux(str(x)) == x


@settings(max_examples=100, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a - a == PN.zero()


@settings(max_examples=100, deadline=None)
@given(series(), series())
def test_valuation_is_multiplicative(a, b):
    if a.is_zero() or b.is_zero():
        return
    assert (a * b).ord() == a.ord() + b.ord()


@settings(max_examples=60, deadline=None)
@given(series())
def test_inverse_to_order(a):
    if a.is_zero():
        return
    inv = a.inverse(order=4)
    prod = (a * inv).truncate(4 + a.ord())
    assert (prod - PN.coerce(1)).truncate(3).is_known_zero()


def test_roots_of_known_product():
    r = [parse_puiseux("-2*t^(1)"), parse_puiseux("(-3-2*i)*t^(1/2)"),
         parse_puiseux("(-1+2*i)*t^(-1) + 1*i*t^(1/2)")]
    got = newton_puiseux_roots(poly_from_roots(r, GaussQ(F(-1), F(1, 2))))
    assert sorted(str(z) for z, _ in got) == sorted(str(z) for z in r)
    assert all(m == 1 for _, m in got)


def test_roots_on_edge_with_off_lattice_points():
    # both roots have valuation 1/2, and the middle coefficient sits on the edge
    r = [parse_puiseux("(-1/2+1/2*i)*t^(1/2) + (-3/2+1*i)*t^(1)"), parse_puiseux("(-2-2*i)*t^(1/2)")]
    got = newton_puiseux_roots(poly_from_roots(r))
    assert sorted(str(z) for z, _ in got) == sorted(str(z) for z in r)


def test_ramified_root():
    # z^2 - t has roots +- t^(1/2)
    got = newton_puiseux_roots([parse_puiseux("-1*t^(1)"), PN.zero(), PN.coerce(1)])
    assert sorted(str(z) for z, _ in got) == ["-1*t^(1/2)", "1*t^(1/2)"]


def test_multiple_root():
    x = parse_puiseux("2*t^(-1)")
    got = newton_puiseux_roots(poly_from_roots([x, x, parse_puiseux("1")]))
    assert dict((str(z), m) for z, m in got) == {str(x): 2, "1": 1}


def test_root_outside_field():
    with pytest.raises(FieldExtensionError):
        newton_puiseux_roots([PN.coerce(-2), PN.zero(), PN.coerce(1)])


def test_truncated_coefficients_raise_precision_error():
    # the constant term is only known to order 1, the roots need more
    c = PN([(F(2), GaussQ(1))], prec=F(2)) + PN.zero(prec=F(2))
    with pytest.raises(PrecisionError):
        newton_puiseux_roots([c.truncate(1), PN.zero(), PN.coerce(1)], order=F(3))


@settings(max_examples=40, deadline=None)
@given(st.lists(series(2), min_size=1, max_size=3), gauss)
def test_roots_satisfy_polynomial(roots, lead):
    if lead.is_zero():
        return
    p = poly_from_roots(roots, lead)
    try:
        got = newton_puiseux_roots(p)
    except FieldExtensionError:
        return
    assert sum(m for _, m in got) == len(roots)
    for z, _ in got:
        if z.is_exact():
            assert poly_eval(p, z).is_zero()


@settings(max_examples=60, deadline=None)
@given(st.lists(series(2), min_size=2, max_size=4), series(2), series(2))
def test_taylor_shift_evaluates_consistently(p, a, x):
    shifted = taylor_shift(p, a)
    assert poly_eval(shifted, x) == poly_eval(p, x + a)
