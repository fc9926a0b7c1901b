"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``python3 -m pytest tests/test_acceptance.py -v``.  The whole
file takes about a quarter of an hour on one core, most of it in the Luo
radii and the two full degeneration runs.
"""
import math
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from hybridyn import barycenter, berk, hybrid, moduli
from hybridyn.cxdyn import haar_circle, make_rng
from hybridyn.hyp3 import X_STAR, H3Point, conformal_measure, h3_distance, mobius_h3
from hybridyn.puiseux import GaussQ
from hybridyn.ratmap import RationalMap, form_mul
from splitmaps import split_case

NS = list(range(5, 41))
PROBES = [[["0", "1"]], [["1", "-2"]], [["1", "0", "1*t^(-1)"]]]
REGIME_PROBES = [[1, -2], [1, 0], [0, 1]]
CONES = [([["1*t^(-1)", "0"], ["0", "1"]], "1"),
         ([["1", "0"], ["0", "1"]], "0"),
         ([["1", "1*t^(-1)"], ["0", "1"]], "2")]


@pytest.fixture
def report(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return emit


def canon_puiseux():
    return RationalMap(["1", "0", "1*t^(-1)"], ["0", "0", "1"], "puiseux")


# -- 1 ----------------------------------------------------------------------------

def _gauss(rng):
    return GaussQ(F(rng.randint(-9, 9), rng.randint(1, 5)), F(rng.randint(-9, 9), rng.randint(1, 5)))


def _linear(rng):
    # occasionally a root at infinity
    return (GaussQ(0), GaussQ(1)) if rng.random() < 0.1 else (GaussQ(1), _gauss(rng))


def test_c1_exact_resultant(report):
    rng = random.Random(1)
    t0 = time.perf_counter()
    ok = True
    for _ in range(100):
        d = rng.randint(1, 3)
        u, v = _gauss(rng), _gauss(rng)
        if u.is_zero() or v.is_zero():
            u, v = GaussQ(1), GaussQ(2)
        Lp = [_linear(rng) for _ in range(d)]
        Lq = [_linear(rng) for _ in range(d)]
        P, Q = [u], [v]
        for a, b in Lp:
            P = form_mul(P, [a, b], GaussQ(0))
        for a, b in Lq:
            Q = form_mul(Q, [a, b], GaussQ(0))
        want = u ** d * v ** d
        for a, b in Lp:
            for c, e in Lq:
                want = want * (a * e - b * c)
        got = RationalMap(P, Q, "rational", check=False).resultant()
        ok &= got == want
    dt = time.perf_counter() - t0
    assert report(1, ok and dt < 10, f"100 maps exact, {dt:.2f}s")


# -- 2 ----------------------------------------------------------------------------

def test_c2_minimal_resultant_bounds(report):
    t0 = time.perf_counter()
    vals = {n: moduli.minimize_neg_log_res(RationalMap([1, 0, math.exp(n)], [0, 0, 1])).neg_log
            for n in range(4, 21)}
    dt = time.perf_counter() - t0
    ok = all(n - 3 <= v <= n + 3 for n, v in vals.items()) and dt < 120
    worst = max(abs(v - n) for n, v in vals.items())
    assert report(2, ok, f"max |value - n| = {worst:.3f}, {dt:.1f}s")


# -- 3 ----------------------------------------------------------------------------

def test_c3_non_archimedean_exactness(report):
    t0 = time.perf_counter()
    conserved = 0
    for seed in range(500):
        f, y = split_case(random.Random(seed))
        conserved += sum(m for _, m in berk.preimage_point(f, y)) == f.degree
    f = canon_puiseux()
    om = berk.ordres_minimize(f)
    ordres_ok = om.value == 1 and om.point == berk.Type2(berk.PuiseuxNumber.zero(), F(1, 2))
    fams = [RationalMap(["1", "0", c], ["0", "0", "1"], "puiseux") for c in ("0", "1*t^(1)", "1*t^(-1)")]
    good = [berk.good_reduction(g) for g in fams]
    chis = [berk.lyapunov_na(f, depth) for depth in range(2, 7)]
    dt = time.perf_counter() - t0
    ok = (conserved == 500 and ordres_ok and good == [True, True, False]
          and all(c == F(1, 2) for c in chis) and dt < 60)
    assert report(3, ok, f"{conserved}/500 conserved, min ordres {om.value} at {om.point}, "
                         f"good reduction {good}, chi {[str(c) for c in chis]}, {dt:.1f}s")


# -- 4, 5, 10 -----------------------------------------------------------------------

def _run(kappa):
    t0 = time.perf_counter()
    rep = hybrid.run_degeneration(hybrid.canonical_family(), NS,
                                  {"N": 100000, "depth": 25, "seed": 0, "probes": PROBES,
                                   "eps_multiplier": kappa})
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="module")
def canonical_runs():
    return {1: _run(1.0), 2: _run(2.0)}


def test_c4_lyapunov_continuity(canonical_runs, report):
    rep, dt = canonical_runs[1]
    v = rep.verdicts
    ok = (rep.na.chi == F(1, 2) and v["chi_omega_scaled"] == 0.5
          and v["lyapunov_gap_final"] <= 0.05
          and v["lyapunov_gap_final"] < v["lyapunov_gap_reference"] and dt < 600)
    assert report(4, ok, f"gap at n=40 {v['lyapunov_gap_final']:.4f}, "
                         f"at n=10 {v['lyapunov_gap_reference']:.4f}, {dt:.0f}s")


def test_c5_equilibrium_measure_continuity(canonical_runs, report):
    rep, dt = canonical_runs[1]
    gaps = rep.verdicts["probe_gaps"]
    ok = len(gaps) == 3 and all(g <= 0.05 for g in gaps) and dt < 600
    assert report(5, ok, f"probe gaps {[round(g, 4) for g in gaps]}, exact "
                         f"{[str(x) for x in rep.na.probe_values]}")


# -- 6 -------------------------------------------------------------------------------

def _regimes(kappa, tol=0.05):
    eps = [kappa / n for n in NS]
    seqs = {"2a": [0.0] * len(NS), "2b": [float(n) for n in NS],
            "2c": [float(n * n) for n in NS], "2c-": [-float(n * n) for n in NS]}
    out = {}
    for name, logs in seqs.items():
        xs = [H3Point(0j, v) for v in logs]
        out[name] = hybrid.measure_convergence_check(xs, eps, NS, REGIME_PROBES, tol)
    return out


def _regime_ok(res, kappa):
    return (res["2a"]["regime"] == "2a" and res["2a"]["limit_point"] == "zeta(0, 0)"
            and res["2b"]["regime"] == "2b" and res["2b"]["limit_point"] == f"zeta(0, {-kappa})"
            and res["2c"]["regime"] == "2c" and res["2c"]["limit_point"] == "inf"
            and res["2c-"]["regime"] == "2c" and res["2c-"]["limit_point"] == "pt(0)"
            and all(r["verdict"] == "pass" for r in res.values()))


def test_c6_conformal_measure_convergence(report):
    res = _regimes(1)
    gaps = {k: [round(p.get("gap", math.nan), 4) for p in r["probes"]] for k, r in res.items()}
    detail = " ".join(f"{k}->{r['regime']}@{r['limit_point']}" for k, r in res.items())
    assert report(6, _regime_ok(res, 1), f"{detail}; gaps {gaps}")


# -- 7 -------------------------------------------------------------------------------

def _cones(kappa):
    eps = [kappa / n for n in NS]
    return [(hybrid.cone_isometry_check(M, NS, eps), rhs) for M, rhs in CONES]


def _cone_ok(res, kappa):
    return all(r["gap"] <= 0.02 * kappa and F(r["rhs"]) == kappa * F(rhs)
               and F(r["rhs_formula"]) == F(r["rhs"]) for r, rhs in res)


def test_c7_cone_isometry(report):
    res = _cones(1)
    detail = ", ".join(f"rhs {r['rhs']} gap {r['gap']:.1e}" for r, _ in res)
    assert report(7, _cone_ok(res, 1), detail)


# -- 8 -------------------------------------------------------------------------------

def test_c8_barycenter(report):
    N = 100000
    tol = 5 / math.sqrt(N)
    t0 = time.perf_counter()
    rng = make_rng(0, 8)
    targets = [H3Point(complex(x), float(s)) for x in (-1, 0, 1) for s in (-1, 0, 1)]
    for _ in range(5):
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        targets.append(mobius_h3(M, X_STAR))
    errs = []
    for x in targets:
        z0, z1 = conformal_measure(x).sample(N, rng)
        errs.append(h3_distance(barycenter.barycenter_homogeneous(z0, z1).point, x))
    R = 3.0
    u0, u1 = haar_circle(N, rng)
    errs.append(h3_distance(barycenter.barycenter_homogeneous(R * u0, u1).point, H3Point.make(0, R)))
    dt = time.perf_counter() - t0
    ok = max(errs) < tol and dt < 120
    assert report(8, ok, f"max error {max(errs):.4f} < {tol:.4f} over {len(errs)} cases, {dt:.1f}s")


# -- 9 -------------------------------------------------------------------------------

def test_c9_luo_equivalence(report):
    t0 = time.perf_counter()
    fam = hybrid.canonical_family()
    runs = [hybrid.luo_ratio_check(fam, list(range(4, 13)), N=20000, seed=s) for s in (0, 1)]
    dt = time.perf_counter() - t0
    a, b = (np.array(r["ratios"]) for r in runs)
    drift = float(np.max(np.abs(a / b - 1)))
    ok = all(r["bounded"] for r in runs) and drift <= 0.05 and dt < 1800
    assert report(9, ok, f"band width {runs[0]['band_width']:.3f}, seed drift {drift:.4f}, {dt:.0f}s")


# -- 10 ------------------------------------------------------------------------------

def test_c10_epsilon_robustness(canonical_runs, report):
    (r1, _), (r2, _) = canonical_runs[1], canonical_runs[2]
    keys = ["degenerates", "reduction_consistent", "lyapunov_converges", "probes_converge"]
    flips = [k for k in keys if r1.verdicts[k] != r2.verdicts[k]]
    if _regime_ok(_regimes(1), 1) != _regime_ok(_regimes(2), 2):
        flips.append("regimes")
    if _cone_ok(_cones(1), 1) != _cone_ok(_cones(2), 2):
        flips.append("cones")
    assert report(10, not flips, f"flipped verdicts: {flips or 'none'}; doubled-eps gap at n=40 "
                                 f"{r2.verdicts['lyapunov_gap_final']:.4f}")
