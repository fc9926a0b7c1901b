"""Complex dynamics at one parameter.

Equilibrium samples come from random backward orbits of Haar samples on
the unit circle.  Points are stored homogeneously as ``(z0, z1)`` so that
infinity needs no special casing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ratmap import RationalMap


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator with an independent stream per index."""
    ss = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(ss))


def _coeffs(f: RationalMap) -> tuple[np.ndarray, np.ndarray]:
    return (np.array([complex(x) for x in f.P]), np.array([complex(x) for x in f.Q]))


def _normalize_h(z0: np.ndarray, z1: np.ndarray):
    s = np.maximum(np.abs(z0), np.abs(z1))
    s[s == 0] = 1.0
    return z0 / s, z1 / s


def eval_form(coeffs: np.ndarray, z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """``sum c_i z0^(k-i) z1^i`` evaluated pointwise."""
    k = len(coeffs) - 1
    out = np.zeros(np.broadcast(z0, z1).shape, dtype=complex)
    for i, c in enumerate(coeffs):
        if c != 0:
            out = out + c * z0 ** (k - i) * z1 ** i
    return out


def _batched_roots(R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All roots of binary forms, one per row of ``R`` (shape (N, d+1)).

    Each form is solved in the chart whose leading coefficient is the larger
    end coefficient.  Returns homogeneous coordinates of shape (N, d).
    """
    N, dp1 = R.shape
    d = dp1 - 1
    use_z = np.abs(R[:, 0]) >= np.abs(R[:, d])
    # affine z = z0/z1: sum R_i z^(d-i); monic after dividing by R_0
    lead = np.where(use_z, R[:, 0], R[:, d])
    lead = np.where(lead == 0, 1.0, lead)
    # coefficients of the chart polynomial, highest degree first
    poly = np.where(use_z[:, None], R, R[:, ::-1]) / lead[:, None]
    if d == 1:
        roots = -poly[:, 1:2]
    elif d == 2:
        b, c = poly[:, 1], poly[:, 2]
        disc = np.sqrt(b * b - 4 * c)
        # pick the sign avoiding cancellation, then use Vieta
        s = np.where((np.conj(b) * disc).real >= 0, 1.0, -1.0)
        r1 = -(b + s * disc) / 2
        safe = np.where(r1 == 0, 1.0, r1)
        r2 = np.where(r1 == 0, 0.0, c / safe)
        roots = np.stack([r1, r2], axis=1)
    else:
        comp = np.zeros((N, d, d), dtype=complex)
        comp[:, 0, :] = -poly[:, 1:]
        idx = np.arange(d - 1)
        comp[:, idx + 1, idx] = 1.0
        roots = np.linalg.eigvals(comp)
    one = np.ones_like(roots)
    z0 = np.where(use_z[:, None], roots, one)
    z1 = np.where(use_z[:, None], one, roots)
    return z0, z1


@dataclass
class MeasureSample:
    """Equally weighted homogeneous points with provenance."""

    z0: np.ndarray
    z1: np.ndarray
    depth: int
    seed: int

    @property
    def n(self) -> int:
        return len(self.z0)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def affine(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.z1 != 0, self.z0 / np.where(self.z1 == 0, 1, self.z1), np.inf)

    def to_csv(self) -> str:
        z = self.affine()
        w = 1.0 / self.n
        lines = ["re,im,weight"]
        for v in z:
            if np.isfinite(v):
                lines.append(f"{v.real!r},{v.imag!r},{w!r}")
            else:
                lines.append(f"inf,inf,{w!r}")
        return "\n".join(lines) + "\n"


def haar_circle(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    th = rng.uniform(0.0, 2 * math.pi, n)
    return np.exp(1j * th), np.ones(n, dtype=complex)


def pull_back(f: RationalMap, z0: np.ndarray, z1: np.ndarray, rng: np.random.Generator):
    """One uniform random preimage (by multiplicity) of each point."""
    P, Q = _coeffs(f)
    R = z1[:, None] * P[None, :] - z0[:, None] * Q[None, :]
    r0, r1 = _batched_roots(R)
    pick = rng.integers(0, f.degree, size=len(z0))
    rows = np.arange(len(z0))
    return _normalize_h(r0[rows, pick], r1[rows, pick])


def sample_equilibrium(f: RationalMap, N: int, depth: int = 25, seed: int = 0,
                       max_failures: int = 100) -> MeasureSample:
    """``N`` samples of ``d^-n f^{n*}`` Haar by independent backward chains."""
    if f.degree < 2:
        raise ValueError("degree must be at least 2")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    rng = make_rng(seed)
    z0, z1 = haar_circle(N, rng)
    failures = 0
    for _ in range(depth):
        a, b = pull_back(f, z0, z1, rng)
        bad = ~(np.isfinite(a) & np.isfinite(b)) | ((a == 0) & (b == 0))
        while bad.any():
            failures += int(bad.sum())
            if failures > max_failures:
                raise RuntimeError("root extraction failed too often")
            a2, b2 = pull_back(f, z0[bad], z1[bad], rng)
            a[bad], b[bad] = a2, b2
            bad = ~(np.isfinite(a) & np.isfinite(b)) | ((a == 0) & (b == 0))
        z0, z1 = a, b
    return MeasureSample(z0, z1, depth, seed)


def log_spherical_derivative(f: RationalMap, z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """``log|df|`` (chordal metric) at homogeneous points."""
    z0, z1 = _normalize_h(np.asarray(z0, complex), np.asarray(z1, complex))
    P, Q = _coeffs(f)
    W = np.array([complex(c) for c in f.wronskian()])
    w = eval_form(W, z0, z1)
    p = eval_form(P, z0, z1)
    q = eval_form(Q, z0, z1)
    with np.errstate(divide="ignore"):
        return (np.log(np.abs(w)) + np.log(np.abs(z0) ** 2 + np.abs(z1) ** 2)
                - math.log(f.degree) - np.log(np.abs(p) ** 2 + np.abs(q) ** 2))


def jackknife_mean(x: np.ndarray) -> tuple[float, float]:
    """Mean and leave-one-out jackknife standard error."""
    n = len(x)
    s = float(np.sum(x))
    loo = (s - x) / (n - 1)
    est = s / n
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return est, se


def lyapunov_mc(f: RationalMap, N: int = 100000, depth: int = 25, seed: int = 0,
                sample: MeasureSample | None = None) -> tuple[float, float]:
    """Monte Carlo ``int log|df| d mu_f`` with jackknife standard error."""
    if sample is None:
        sample = sample_equilibrium(f, N, depth, seed)
    z0, z1 = sample.z0.copy(), sample.z1.copy()
    vals = log_spherical_derivative(f, z0, z1)
    rng = make_rng(seed, 1)
    W = np.array([complex(c) for c in f.wronskian()])
    for _ in range(100):
        a, b = _normalize_h(z0, z1)
        near_crit = np.abs(eval_form(W, a, b)) < 1e-12
        if not near_crit.any():
            break
        # resample those chains from scratch
        k = int(near_crit.sum())
        s2 = sample_equilibrium(f, k, sample.depth, int(rng.integers(2 ** 31)))
        z0[near_crit], z1[near_crit] = s2.z0, s2.z1
        vals[near_crit] = log_spherical_derivative(f, s2.z0, s2.z1)
    return jackknife_mean(vals)


def green_escape_rate(f: RationalMap, z: complex, escape: float = 1e100,
                      max_iter: int = 2000) -> float:
    """``G(z) = lim d^-n log|f^n(z)|`` for a polynomial map.

    Iterates until ``|f^n(z)| > escape``; the remainder of the limit is
    then below double precision.  Orbits that stay bounded give 0.
    """
    P, Q = _coeffs(f)
    d = f.degree
    if np.any(Q[:-1] != 0) or Q[-1] == 0:
        raise ValueError("green_escape_rate needs a polynomial (Q = const * z1^d)")
    a = P[::-1] / Q[-1]  # affine coefficients, lowest first
    z = complex(z)
    scale = 1.0
    for _ in range(max_iter):
        if abs(z) > escape:
            # correct for a non-monic leading coefficient: G ~ log|z| + log|a_d|/(d-1)
            return scale * (math.log(abs(z)) + math.log(abs(a[-1])) / (d - 1))
        z = complex(np.polyval(a[::-1], z))
        scale /= d
        if not np.isfinite(z):
            raise OverflowError("orbit overflowed before reaching the escape radius")
    return 0.0


def polynomial_lyapunov(f: RationalMap) -> float:
    """Oracle ``log d + sum_c G(c)`` over finite critical points (with multiplicity)."""
    P, Q = _coeffs(f)
    d = f.degree
    a = P[::-1] / Q[-1]
    der = np.polyder(a[::-1])
    crit = np.roots(der) if len(der) > 1 else []
    return math.log(abs(a[-1]) * d) + sum(green_escape_rate(f, c) for c in crit)


# ---------------------------------------------------------------------------
# model functions


def log_model_fn(sections: Sequence[Sequence], z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """``log max_i |P_i| / max(|z0|,|z1|)^l`` at homogeneous points."""
    z0, z1 = _normalize_h(np.asarray(z0, complex), np.asarray(z1, complex))
    l = len(sections[0]) - 1
    best = None
    for s in sections:
        v = np.abs(eval_form(np.array([complex(c) for c in s]), z0, z1))
        best = v if best is None else np.maximum(best, v)
    with np.errstate(divide="ignore"):
        return np.log(best) - l * np.log(np.maximum(np.abs(z0), np.abs(z1)))


def integrate_model_fn(sample: MeasureSample, sections: Sequence[Sequence], e: float = 1.0,
                       f: RationalMap | None = None, max_resample: int = 10) -> tuple[float, float]:
    """Monte Carlo ``e * int log model_fn``; base-point hits are resampled."""
    z0, z1 = sample.z0.copy(), sample.z1.copy()
    vals = log_model_fn(sections, z0, z1)
    bad = ~np.isfinite(vals)
    tries = 0
    while bad.any():
        if f is None or tries >= max_resample:
            raise RuntimeError("sample hit a common zero of the sections")
        s2 = sample_equilibrium(f, int(bad.sum()), sample.depth, sample.seed + 7919 * (tries + 1))
        z0[bad], z1[bad] = s2.z0, s2.z1
        vals[bad] = log_model_fn(sections, s2.z0, s2.z1)
        bad = ~np.isfinite(vals)
        tries += 1
    m, se = jackknife_mean(vals)
    return e * m, abs(e) * se


def push_forward(f: RationalMap, sample: MeasureSample) -> MeasureSample:
    P, Q = _coeffs(f)
    a, b = _normalize_h(sample.z0, sample.z1)
    p, q = _normalize_h(eval_form(P, a, b), eval_form(Q, a, b))
    return MeasureSample(p, q, sample.depth, sample.seed)
