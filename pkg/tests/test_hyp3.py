import math

import numpy as np
import pytest
from scipy import integrate, stats

from hybridyn.cxdyn import make_rng
from hybridyn.hyp3 import (X_STAR, H3Point, associated_disk, ball_to_h3, conformal_measure,
                           h3_distance, h3_to_ball, integral_log_linear, integral_log_max,
                           mass_outside_disk, mobius_h3)


def arccosh_distance(x, y):
    # direct formula, fine away from overflow
    return math.acosh(1 + (abs(x.z - y.z) ** 2 + (x.h - y.h) ** 2) / (2 * x.h * y.h))


def random_mobius(rng):
    while True:
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(M)) > 0.1:
            return M


def random_point(rng):
    return H3Point(complex(*rng.normal(size=2)), float(rng.uniform(-3, 3)))


def test_distance_examples():
    assert h3_distance(X_STAR, H3Point(0j, 3.0)) == pytest.approx(3.0, abs=1e-14)
    assert h3_distance(X_STAR, H3Point(0j, -2.5)) == pytest.approx(2.5, abs=1e-14)
    assert h3_distance(H3Point(1 + 0j, 0.0), X_STAR) == pytest.approx(0.962424, abs=1e-6)
    assert h3_distance(X_STAR, X_STAR) == 0


def test_distance_agrees_with_arccosh_formula():
    rng = make_rng(0, 1)
    for _ in range(200):
        x, y = random_point(rng), random_point(rng)
        assert h3_distance(x, y) == pytest.approx(arccosh_distance(x, y), rel=1e-9, abs=1e-9)


def test_distance_at_extreme_heights():
    # log-height storage keeps these finite
    assert h3_distance(X_STAR, H3Point(0j, 1600.0)) == pytest.approx(1600.0, rel=1e-12)
    x, y = H3Point(0j, -800.0), H3Point(1e-300 + 0j, -800.0)
    assert math.isfinite(h3_distance(x, y))


def test_isometry_on_random_triples():
    rng = make_rng(1, 1)
    for _ in range(1000):
        M = random_mobius(rng)
        x, y = random_point(rng), random_point(rng)
        d = h3_distance(x, y)
        assert abs(h3_distance(mobius_h3(M, x), mobius_h3(M, y)) - d) <= 1e-10 * (1 + d)


def test_mobius_examples_and_composition():
    x = H3Point(0.3 + 0.1j, 0.4)
    y = mobius_h3([[2j, 1], [0, 1]], x)
    assert y.z == pytest.approx(2j * x.z + 1) and y.log_h == pytest.approx(x.log_h + math.log(2))
    inv = mobius_h3([[0, 1], [1, 0]], X_STAR)
    assert abs(inv.z) < 1e-15 and abs(inv.log_h) < 1e-15
    rng = make_rng(2, 1)
    for _ in range(100):
        A, B = random_mobius(rng), random_mobius(rng)
        p = random_point(rng)
        lhs, rhs = mobius_h3(A @ B, p), mobius_h3(A, mobius_h3(B, p))
        assert h3_distance(lhs, rhs) < 1e-9


def test_ball_round_trip():
    rng = make_rng(3, 1)
    for _ in range(200):
        x = random_point(rng)
        b = h3_to_ball(x)
        assert np.linalg.norm(b) < 1
        assert h3_distance(ball_to_h3(b), x) < 1e-8
    assert np.allclose(h3_to_ball(X_STAR), 0)
    # huge heights approach the north pole instead of overflowing
    assert h3_to_ball(H3Point(0j, 1600.0))[2] == pytest.approx(1.0)


def test_fubini_study_has_mass_one():
    mu = conformal_measure(X_STAR)
    mass, _ = integrate.quad(lambda r: 2 * math.pi * r * float(mu.density(r)), 0, math.inf)
    assert abs(mass - 1) < 1e-9


def test_mass_outside_associated_disk():
    t = 0.01
    mu = conformal_measure(H3Point.make(0, t))
    q, _ = integrate.quad(lambda r: 2 * math.pi * r * float(mu.density(r)), math.sqrt(t), math.inf)
    assert q == pytest.approx(mass_outside_disk(t), abs=1e-12)
    assert abs(q - 0.009901) < 1e-6


def test_mass_bound_constant():
    ratios = []
    for k in range(1, 7):
        t = 10.0 ** -k
        mu = conformal_measure(H3Point.make(0, t))
        r0 = associated_disk(H3Point.make(0, t))["euclidean_radius_at_0"]
        q, _ = integrate.quad(lambda r: 2 * math.pi * r * float(mu.density(r)), r0, math.inf)
        ratios.append(q / t)
    assert max(ratios) <= 1.01


def test_sampler_radial_moments_match_quadrature():
    x = H3Point.make(0, 0.3)
    mu = conformal_measure(x)
    N = 100000
    z0, z1 = mu.sample(N, make_rng(4, 1))
    r = np.abs(z0 / z1)
    rho = r / np.sqrt(1 + r * r)  # bounded radial statistic
    for k in (1, 2):
        want, _ = integrate.quad(
            lambda s: (s / math.sqrt(1 + s * s)) ** k * 2 * math.pi * s * float(mu.density(s)),
            0, math.inf)
        assert abs(np.mean(rho ** k) - want) < 3 / math.sqrt(N)


def test_sampler_equivariance():
    rng = make_rng(5, 1)
    M = np.array([[1 + 1j, 0.5], [0.3j, 2.0]])
    x = H3Point(0.2 - 0.4j, -0.7)
    a0, a1 = conformal_measure(mobius_h3(M, x)).sample(20000, rng)
    b0, b1 = conformal_measure(x).sample(20000, rng)
    pushed = (M[0, 0] * b0 + M[0, 1] * b1) / (M[1, 0] * b0 + M[1, 1] * b1)
    assert stats.ks_2samp(np.abs(a0 / a1), np.abs(pushed)).pvalue > 0.01


def test_associated_disk():
    x = H3Point(0j, -2.0)
    disk = associated_disk(x)
    assert disk["euclidean_radius_at_0"] == pytest.approx(math.exp(-1))
    assert disk["distance"] == pytest.approx(2.0)
    assert disk["center"] == 0
    # cosh d = 1 + (t-1)^2 / (2t)
    t = 0.2
    d = associated_disk(H3Point.make(0, t))["distance"]
    assert math.cosh(d) == pytest.approx(1 + (t - 1) ** 2 / (2 * t))
    with pytest.raises(ValueError):
        associated_disk(X_STAR)


def test_associated_disk_radius_is_rotation_invariant():
    x = H3Point(0j, -1.5)
    r0 = associated_disk(x)["spherical_radius"]
    c, s = math.cos(0.4), math.sin(0.4)
    y = mobius_h3([[c, -s * 1j], [-s * 1j, c]], x)
    assert associated_disk(y)["spherical_radius"] == pytest.approx(r0, rel=1e-12)


def test_closed_form_integrals_match_quadrature():
    x = H3Point.make(0, 0.5)
    mu = conformal_measure(x)
    for root in (0.3, 2.0):
        q = integrate.dblquad(lambda th, r: r * math.log(abs(r * np.exp(1j * th) - root))
                              * float(mu.density(r)), 0, 50, 0, 2 * math.pi)[0]
        tail = integral_log_linear(x, root) - q
        assert abs(tail) < 5e-3  # truncated at r = 50
    q, _ = integrate.quad(lambda r: 2 * math.pi * r * math.log(max(r, 1)) * float(mu.density(r)),
                          0, math.inf, limit=200)
    assert integral_log_max(x) == pytest.approx(q, abs=1e-8)
