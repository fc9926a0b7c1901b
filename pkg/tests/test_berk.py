import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridyn import berk
from hybridyn.berk import GAUSS, INFINITY, Type1, Type2, parse_point
from hybridyn.puiseux import parse_puiseux
from hybridyn.ratmap import RationalMap
from splitmaps import split_case

P = parse_puiseux


def zeta(a, q):
    return Type2(P(a), F(q))


def fmap(P_, Q_):
    return RationalMap(P_, Q_, "puiseux")


CANON = fmap(["1", "0", "1*t^(-1)"], ["0", "0", "1"])
SQUARE = fmap(["1", "0", "0"], ["0", "0", "1"])


# -- points and geometry ------------------------------------------------------

def test_center_is_canonical():
    assert zeta("1 + 5*t^(2)", 1) == zeta("1", 1)
    assert zeta("1 + 5*t^(2)", 3) != zeta("1", 3)
    assert str(parse_point("zeta(0, 1/2)")) == "zeta(0, 1/2)"
    assert parse_point("inf") is INFINITY


def test_tree_distance_examples():
    assert berk.tree_distance(GAUSS, zeta("0", 1)) == 1
    assert berk.tree_distance(zeta("1", 1), zeta("0", 1)) == 2
    assert berk.tree_distance(zeta("t^(-1)", -1), zeta("0", 1)) == 2
    assert berk.tree_distance(zeta("t^(1)", 2), zeta("2*t^(1)", 2)) == 2


def test_meet_examples():
    assert berk.meet(Type1(P("t^(1)")), Type1(P("2*t^(1)"))) == zeta("0", 1)
    assert berk.meet(Type1(P("t^(-1)")), Type1(P("0"))) == GAUSS
    assert berk.meet(zeta("0", 2), zeta("t^(1)", 3)) == zeta("0", 1)
    assert berk.meet(INFINITY, zeta("t^(-2)", 0)) == zeta("0", -2)


pts = st.builds(lambda a, e, q: zeta(f"{a}*t^({e})", q),
                st.integers(-3, 3), st.sampled_from(["-1", "0", "1/2", "1"]),
                st.sampled_from([F(-2), F(-1), F(0), F(1, 2), F(1), F(2)]))


@settings(max_examples=150, deadline=None)
@given(pts, pts, pts)
def test_tree_metric_axioms(x, y, z):
    d = berk.tree_distance
    assert d(x, y) == d(y, x) >= 0
    assert (d(x, y) == 0) == (x == y)
    assert d(x, z) <= d(x, y) + d(y, z)
    # four-point (0-hyperbolicity) condition with z and GAUSS
    s = sorted([d(x, y) + d(z, GAUSS), d(x, z) + d(y, GAUSS), d(x, GAUSS) + d(y, z)])
    assert s[2] == s[1]


@settings(max_examples=100, deadline=None)
@given(pts, pts)
def test_meet_lies_on_both_segments(x, y):
    m = berk.meet(x, y)
    d = berk.tree_distance
    assert d(GAUSS, m) + d(m, x) == d(GAUSS, x)
    assert d(GAUSS, m) + d(m, y) == d(GAUSS, y)
    assert d(x, m) + d(m, y) == d(x, y)


# -- action of maps -----------------------------------------------------------

def test_images_of_canonical_fiber():
    assert berk.image_with_degree(CANON, GAUSS) == (zeta("t^(-1)", 0), 2)
    assert berk.image_with_degree(CANON, zeta("0", F(-1, 2))) == (zeta("0", -1), 2)
    assert berk.image_point(SQUARE, zeta("0", 3)) == zeta("0", 6)
    assert berk.image_point(SQUARE, Type1(P("t^(1)"))) == Type1(P("t^(2)"))


def test_preimages_of_gauss_point():
    pre = berk.preimage_point(CANON, GAUSS)
    assert dict(pre) == {zeta("1*i*t^(-1/2)", F(1, 2)): 1, zeta("-1*i*t^(-1/2)", F(1, 2)): 1}
    assert berk.preimage_point(SQUARE, zeta("0", 2)) == [(zeta("0", 1), 2)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_preimage_degree_conservation(seed):
    f, y = split_case(random.Random(seed))
    pre = berk.preimage_point(f, y)
    assert sum(m for _, m in pre) == f.degree
    for x, m in pre:
        assert berk.image_with_degree(f, x) == (y, m)


def test_pushforward_of_pullback_is_identity():
    mu = berk.TreeMeasure([(zeta("t^(-1)", 0), F(1, 3)), (zeta("0", 1), F(2, 3))])
    back = berk.pushforward(CANON, berk.pullback(CANON, mu))
    assert back.as_dict() == mu.as_dict()


# -- reduction and ordres -------------------------------------------------------

def test_good_reduction_verdicts():
    assert berk.good_reduction(SQUARE)
    assert berk.good_reduction(fmap(["1", "0", "1*t^(1)"], ["0", "0", "1"]))
    assert not berk.good_reduction(CANON)


def test_ordres_along_axis():
    lit = [berk.ordres(CANON, zeta("0", F(k, 2))) for k in range(4)]
    rum = [berk.ordres(CANON, zeta("0", F(k, 2)), "rumely") for k in range(4)]
    assert lit == [4, 1, 2, 3]
    assert rum == [4, 7, 10, 13]
    assert berk.ordres(SQUARE, GAUSS) == 0


def test_ordres_minimum():
    res = berk.ordres_minimize(CANON)
    assert res.value == 1
    assert res.point == zeta("0", F(1, 2))


def test_ordres_convex_along_paths():
    # Rumely's function is convex on every segment; the literal one is its
    # pullback under z -> -a t^-q, a geodesic only along the vertical axis
    qs = [F(k, 4) for k in range(-8, 9)]
    cases = [("rumely", c) for c in ["0", "1*i*t^(-1/2)", "t^(-1)", "1 + t^(1)"]]
    cases.append(("literal", "0"))
    for conv, center in cases:
        vals = [berk.ordres(CANON, Type2(P(center), q), conv) for q in qs]
        second = [vals[i - 1] - 2 * vals[i] + vals[i + 1] for i in range(1, len(vals) - 1)]
        assert all(s >= 0 for s in second), (conv, center)
        assert all(v >= 0 for v in vals)


def test_literal_is_rumely_at_reflected_point():
    for a, q in [("1", F(1, 2)), ("t^(-1)", F(1)), ("2*i", F(-1))]:
        x = Type2(P(a), q)
        y = Type2(-P(a) * berk.PuiseuxNumber.t(-q), -q)
        assert berk.ordres(CANON, x) == berk.ordres(CANON, y, "rumely")


# -- potential theory -----------------------------------------------------------

def test_potential_laplacian():
    rho = berk.TreeMeasure([(zeta("0", 1), F(1))])
    tree = berk.FiniteSubtree.spanned_by([zeta("0", 1), zeta("1", 2), zeta("t^(-1)", -1)])
    g = {v: berk.potential(rho, v) for v in tree.vertices}
    assert berk.laplacian_pl(tree, g).as_dict() == {zeta("0", 1): 1, GAUSS: -1}


def test_laplacian_of_tent():
    tree = berk.FiniteSubtree.spanned_by([zeta("0", 1), zeta("0", 2), zeta("1", 1)])
    vals = {GAUSS: 0, zeta("0", 1): 1, zeta("0", 2): 0, zeta("1", 1): 0}
    lap = berk.laplacian_pl(tree, vals).as_dict()
    assert lap[zeta("0", 1)] == -2
    assert sum(lap.values()) == 0


def test_lyapunov_na():
    assert berk.lyapunov_na(CANON, 2) == F(1, 2)
    assert berk.lyapunov_na(CANON, 3) == F(1, 2)
    assert berk.lyapunov_na(SQUARE, 3) == 0


def test_equilibrium_approximation_is_probability():
    mu = berk.equilibrium_pullback(CANON, 3)
    assert mu.total_mass() == 1
    assert len(mu.atoms) == 8
    assert berk.TreeMeasure.from_json(mu.to_json()).as_dict() == mu.as_dict()


def test_model_function_values():
    assert berk.log_model_fn([["1", "0"], ["0", "1"]], GAUSS) == 0
    assert berk.log_model_fn([["0", "1"]], zeta("0", F(1, 2))) == 0
    assert berk.log_model_fn([["1", "0"]], zeta("0", F(1, 2))) == F(-1, 2)
    assert berk.log_model_fn([["1", "0"]], zeta("t^(-1)", 0)) == 0
