import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridyn import cxdyn
from hybridyn.ratmap import RationalMap


def quad(c):
    return RationalMap([1, 0, c], [0, 0, 1])


def test_square_equilibrium_is_the_unit_circle():
    s = cxdyn.sample_equilibrium(quad(0), 5000, depth=10, seed=1)
    z = s.affine()
    assert np.max(np.abs(np.abs(z) - 1)) < 1e-12
    # Haar: the angle is uniform, so the mean of z is near 0
    assert abs(np.mean(z)) < 5 / math.sqrt(5000)


def test_chebyshev_equilibrium_is_the_arcsine_law():
    s = cxdyn.sample_equilibrium(quad(-2), 20000, depth=25, seed=2)
    z = s.affine()
    assert np.max(np.abs(z.imag)) < 1e-6
    assert np.max(np.abs(z.real)) <= 2 + 1e-9
    # second moment of the arcsine law on [-2, 2] is 2
    x2 = z.real ** 2
    assert abs(x2.mean() - 2) < 5 * x2.std() / math.sqrt(len(x2))


@pytest.mark.parametrize("c", [0, -2])
def test_lyapunov_of_connected_julia_sets(c):
    chi, se = cxdyn.lyapunov_mc(quad(c), N=20000, depth=25, seed=0)
    assert abs(chi - math.log(2)) < max(5 * se, 1e-10)


def test_lyapunov_matches_critical_orbit_formula():
    for c in (3.0, 1j * 5, math.exp(6)):
        f = quad(c)
        chi, se = cxdyn.lyapunov_mc(f, N=20000, depth=25, seed=3)
        assert abs(chi - cxdyn.polynomial_lyapunov(f)) < 5 * se + 1e-3


def test_green_function_examples():
    assert cxdyn.green_escape_rate(quad(0), 3.0) == pytest.approx(math.log(3), abs=1e-12)
    assert cxdyn.green_escape_rate(quad(0), 0.5) == 0.0
    assert cxdyn.green_escape_rate(quad(-2), 0.3) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=6, allow_nan=False,
                          allow_infinity=False))
def test_green_function_is_equivariant(c, z):
    f = quad(c)
    fz = z * z + c
    assert cxdyn.green_escape_rate(f, fz) == pytest.approx(2 * cxdyn.green_escape_rate(f, z),
                                                           rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("a", [0.5, 3.0, 2j])
def test_jensen_probe_on_the_circle(a):
    s = cxdyn.sample_equilibrium(quad(0), 20000, depth=12, seed=4)
    v, se = cxdyn.integrate_model_fn(s, [[1, -a]])
    assert abs(v - math.log(max(abs(a), 1))) < 5 * se + 1e-3


def test_equilibrium_is_invariant():
    f = quad(-1 + 0.2j)
    s = cxdyn.sample_equilibrium(f, 20000, depth=25, seed=5)
    phi = lambda m: 1 / (1 + np.abs(m.affine()) ** 2)
    a, b = phi(s), phi(cxdyn.push_forward(f, s))
    assert abs(a.mean() - b.mean()) < 5 * math.hypot(a.std(), b.std()) / math.sqrt(len(a))


def test_sampling_is_deterministic_per_seed():
    f = quad(0.3)
    a = cxdyn.sample_equilibrium(f, 100, depth=5, seed=7)
    b = cxdyn.sample_equilibrium(f, 100, depth=5, seed=7)
    c = cxdyn.sample_equilibrium(f, 100, depth=5, seed=8)
    assert np.array_equal(a.z0, b.z0) and np.array_equal(a.z1, b.z1)
    assert not np.array_equal(a.z0, c.z0)


def test_batched_roots_match_numpy():
    rng = np.random.default_rng(0)
    for d in (1, 2, 3):
        R = rng.normal(size=(20, d + 1)) + 1j * rng.normal(size=(20, d + 1))
        z0, z1 = cxdyn._batched_roots(R)
        for k in range(20):
            vals = cxdyn.eval_form(R[k], z0[k], z1[k])
            scale = np.abs(R[k]).sum() * np.maximum(np.abs(z0[k]), np.abs(z1[k])) ** d
            assert np.all(np.abs(vals) < 1e-10 * scale)


def test_jackknife_of_constant_and_known_variance():
    m, se = cxdyn.jackknife_mean(np.ones(10))
    assert m == 1 and se == 0
    x = np.arange(100.0)
    m, se = cxdyn.jackknife_mean(x)
    assert se == pytest.approx(x.std(ddof=1) / 10)


def test_csv_export():
    s = cxdyn.sample_equilibrium(quad(0), 4, depth=3, seed=0)
    lines = s.to_csv().splitlines()
    assert lines[0] == "re,im,weight"
    assert len(lines) == 5
    assert all(line.endswith(",0.25") for line in lines[1:])


def test_argument_validation():
    with pytest.raises(ValueError):
        cxdyn.sample_equilibrium(RationalMap([1, 0], [0, 1]), 10)
    with pytest.raises(ValueError):
        cxdyn.green_escape_rate(RationalMap([1, 0, 0], [0, 1, 1]), 2.0)
