"""Conformal barycenters, the barycentric extension and Luo radii.

The barycenter of a sphere measure is the ball point ``w`` where
``V_mu(w) = (1-|w|^2)/2 int g_{-w}(x) dmu`` vanishes.  We solve it by
Newton steps taken at the origin after pulling the samples back by the
current estimate, so every step works with a centered measure:
``V(0) = m/2`` and ``DV(0) = -(I - C)/2`` with ``m``, ``C`` the first and
second moments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .cxdyn import _coeffs, _normalize_h, eval_form, make_rng
from .hyp3 import (X_STAR, H3Point, ball_to_h3, fs_sample, h3_distance, mobius_h3,
                   sphere_from_homogeneous)
from .ratmap import MobiusRep, RationalMap


class BarycenterError(RuntimeError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


@dataclass
class BarycenterResult:
    point: H3Point
    residual: float
    iterations: int


def g_map(w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Ball isometry ``g_w`` (sends 0 to ``w``), applied to rows of ``x``."""
    w = np.asarray(w, float)
    ww = float(w @ w)
    xx = np.sum(x * x, axis=-1)
    wx = x @ w
    num = x * (1 - ww) + np.outer(1 + xx + 2 * wx, w)
    return num / (1 + ww * xx + 2 * wx)[:, None]


def vector_field(samples: np.ndarray, w) -> np.ndarray:
    """``V_mu(w)`` for the empirical measure of unit vectors ``samples``."""
    w = np.asarray(w, float)
    if w @ w >= 1:
        raise ValueError("w must lie in the open unit ball")
    return (1 - w @ w) / 2 * g_map(-w, samples).mean(axis=0)


def homogeneous_from_sphere(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = x[:, 0] + 1j * x[:, 1]
    x3 = x[:, 2]
    south = x3 <= 0
    # z = c/(1-x3) = (1+x3)/conj(c)
    z0 = np.where(south, c, 1 + x3 + 0j)
    z1 = np.where(south, 1 - x3 + 0j, np.conj(c))
    return z0, z1


def _atom_guard(z0, z1):
    a, b = _normalize_h(z0, z1)
    key = np.round(sphere_from_homogeneous(a, b), 12)
    _, counts = np.unique(key, axis=0, return_counts=True)
    if counts.max() * 2 >= len(a):
        raise ValueError("an atom carries at least half of the mass")


def barycenter_homogeneous(z0: np.ndarray, z1: np.ndarray, tol: float = 1e-8,
                           max_steps: int = 500, start: H3Point | None = None,
                           guard: bool = True) -> BarycenterResult:
    """Barycenter of the empirical measure of homogeneous points."""
    if guard:
        _atom_guard(z0, z1)
    z = 0j if start is None else start.z
    L = 0.0 if start is None else start.log_h
    best = None
    for k in range(max_steps):
        # pull back by u -> z + e^L u
        a, b = _normalize_h(z0 - z * z1, math.exp(L) * z1)
        p = sphere_from_homogeneous(a, b)
        m = p.mean(axis=0)
        res = float(np.linalg.norm(m)) / 2
        if best is None or res < best.residual:
            best = BarycenterResult(H3Point(z, L), res, k)
        if res <= tol:
            return BarycenterResult(H3Point(z, L), res, k)
        C = p.T @ p / len(p)
        w = np.linalg.solve(np.eye(3) - C, m) / 2
        if not float(np.linalg.norm(w)) <= 0.5 or w @ m <= 0:
            # far from the zero or ill-conditioned: move along the mean
            w = 0.5 * m / np.linalg.norm(m)
        step = ball_to_h3(w)
        z = z + math.exp(L) * step.z
        L = L + step.log_h
    raise BarycenterError("barycenter iteration did not converge", best)


def barycenter(samples: np.ndarray, **kw) -> BarycenterResult:
    """Barycenter of an empirical measure given as unit vectors."""
    z0, z1 = homogeneous_from_sphere(np.asarray(samples, float))
    return barycenter_homogeneous(z0, z1, **kw)


# ---------------------------------------------------------------------------
# barycentric extension


def _pushed_samples(f: RationalMap, x: H3Point, u0: np.ndarray, u1: np.ndarray):
    P, Q = _coeffs(f)
    a, b = _normalize_h(x.z * u1 + math.exp(x.log_h) * u0, u1 + 0j)
    return eval_form(P, a, b), eval_form(Q, a, b)


def barycentric_extension(f: RationalMap, x: H3Point, N: int = 100000, seed: int = 0,
                          samples=None, start: H3Point | None = None,
                          tol: float = 1e-8) -> H3Point:
    """``E(f)(x) = B(f_* mu(x))`` by Monte Carlo over Fubini-Study samples."""
    if samples is None:
        samples = fs_sample(N, make_rng(seed, 11))
    u0, u1 = samples
    p, q = _pushed_samples(f, x, u0, u1)
    return barycenter_homogeneous(p, q, tol=tol, start=start, guard=False).point


@dataclass
class LuoRadius:
    value: float
    preimages_found: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    certified: bool = False
    seed: int = 0

    def to_json(self) -> dict:
        return {"value": self.value,
                "preimages": [[y.z.real, y.z.imag, y.log_h] for y in self.preimages_found],
                "residuals": self.residuals, "seed": self.seed, "certified": self.certified}


def _params(y: H3Point) -> np.ndarray:
    return np.array([y.z.real, y.z.imag, y.log_h])


def _point(p: np.ndarray) -> H3Point:
    return H3Point(complex(p[0], p[1]), float(p[2]))


def solve_preimage(f: RationalMap, samples, y0: H3Point, target: H3Point = X_STAR,
                   tol: float = 1e-4, max_iter: int = 40, fd: float = 1e-6):
    """Damped Newton for ``E(f)(y) = target`` in ``(Re z, Im z, log h)``.

    Returns ``(y, residual distance)``; ``y`` is None on failure.
    """
    def resid(p, start=None):
        e = barycentric_extension(f, _point(p), samples=samples, start=start)
        r = np.array([(e.z - target.z).real, (e.z - target.z).imag, e.log_h - target.log_h])
        return r, e

    p = _params(y0)
    try:
        r, e = resid(p)
    except Exception:
        return None, math.inf
    for _ in range(max_iter):
        dist = h3_distance(e, target)
        if dist <= tol:
            return _point(p), dist
        J = np.empty((3, 3))
        scale = max(1.0, abs(p[0]), abs(p[1])) * math.exp(min(p[2], 0.0))
        for j in range(3):
            dp = np.zeros(3)
            dp[j] = fd * (scale if j < 2 else 1.0)
            try:
                rj, _ = resid(p + dp, e)
            except Exception:
                return None, math.inf
            J[:, j] = (rj - r) / dp[j]
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None, math.inf
        lam = 1.0
        for _ in range(12):
            q = p + lam * step
            try:
                rq, eq = resid(q, e)
            except Exception:
                rq, eq = None, None
            if rq is not None and np.linalg.norm(rq) < np.linalg.norm(r):
                p, r, e = q, rq, eq
                break
            lam /= 2
        else:
            return None, math.inf
    dist = h3_distance(e, target)
    return (_point(p), dist) if dist <= tol else (None, dist)


def _random_ball_point(radius: float, rng: np.random.Generator) -> H3Point:
    """Uniform direction, distance uniform in ``[0, radius]`` from ``x_star``."""
    r = rng.uniform(0, radius)
    # a random rotation fixing x_star applied to (0, e^r)
    th, ph = math.acos(rng.uniform(-1, 1)) / 2, rng.uniform(0, 2 * math.pi)
    c, s = math.cos(th), math.sin(th)
    rot = [[c, -np.exp(1j * ph) * s], [np.exp(-1j * ph) * s, c]]
    return mobius_h3(rot, H3Point(0j, r))


def preimage_seeds(f: RationalMap, rng: np.random.Generator, n_random: int = 16,
                   heights=range(-3, 4)) -> list[H3Point]:
    """Vertical lifts of zeros and poles plus random points near ``x_star``."""
    P, Q = _coeffs(f)
    seeds = []
    for form in (P, Q):
        aff = form[::-1]
        while len(aff) > 1 and aff[-1] == 0:
            aff = aff[:-1]
        for q in (np.roots(aff[::-1]) if len(aff) > 1 else []):
            seeds += [H3Point(complex(q), float(k)) for k in heights]
    radius = 2 * (1 + max(float(f.neg_log_norm_resultant()), 0.0))
    seeds += [_random_ball_point(radius, rng) for _ in range(n_random)]
    return seeds


def luo_radius(f: RationalMap, N: int = 20000, seed: int = 0, starts=None,
               tol: float = 1e-4, dedup: float = 1e-3, n_random: int = 16) -> LuoRadius:
    """Largest ``d_H(y, x_star)`` over found solutions of ``E(f)(y) = x_star``."""
    rng = make_rng(seed, 21)
    samples = fs_sample(N, make_rng(seed, 11))
    if starts is None:
        starts = preimage_seeds(f, rng, n_random)
    found: list[H3Point] = []
    residuals: list[float] = []
    for y0 in starts:
        y, res = solve_preimage(f, samples, y0, tol=tol)
        if y is None:
            continue
        if any(h3_distance(y, other) < dedup for other in found):
            continue
        found.append(y)
        residuals.append(res)
    if not found:
        raise RuntimeError("no preimage of the base point found; add starts")
    order = sorted(range(len(found)), key=lambda i: -h3_distance(found[i], X_STAR))
    found = [found[i] for i in order]
    residuals = [residuals[i] for i in order]
    return LuoRadius(h3_distance(found[0], X_STAR), found, residuals, False, seed)


def luo_radius_min(f: RationalMap, budget: int = 20, N: int = 5000, seed: int = 0) -> float:
    """Estimate of the conjugation-minimized Luo radius (outer Nelder-Mead)."""
    P, Q = _coeffs(f)

    def value(x):
        M = np.array([[1.0 + x[0] + 1j * x[1], x[2] + 1j * x[3]], [0.0, 1.0]])
        rep = MobiusRep(complex(M[0, 0]), complex(M[0, 1]), 0j, 1.0 + 0j)
        if abs(rep.a) < 1e-8:
            return 1e6
        g = RationalMap(list(P), list(Q), check=False).conjugate(rep)
        try:
            return luo_radius(g, N=N, seed=seed, n_random=4).value
        except RuntimeError:
            return 1e6

    res = minimize(value, np.zeros(4), method="Nelder-Mead", options={"maxfev": budget})
    return float(min(res.fun, value(np.zeros(4))))


def lipschitz_ratios(f: RationalMap, pairs, N: int = 20000, seed: int = 0) -> list[float]:
    """Empirical ``d(E x, E y) / d(x, y)`` over point pairs."""
    samples = fs_sample(N, make_rng(seed, 11))
    out = []
    for x, y in pairs:
        ex = barycentric_extension(f, x, samples=samples)
        ey = barycentric_extension(f, y, samples=samples)
        out.append(h3_distance(ex, ey) / h3_distance(x, y))
    return out
