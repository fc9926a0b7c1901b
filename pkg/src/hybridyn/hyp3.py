"""Hyperbolic 3-space in the upper half-space model.

Heights are stored as ``log h`` so that points like ``(0, e^1600)`` from
degenerating sequences are representable.  Conformal measures are
probability measures: ``mu((0,1))`` is the Fubini-Study measure and
``mu(M x) = M_* mu(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ratmap import MobiusRep


@dataclass(frozen=True)
class H3Point:
    z: complex
    log_h: float

    @classmethod
    def make(cls, z, h: float) -> "H3Point":
        if not h > 0:
            raise ValueError("height must be positive")
        return cls(complex(z), math.log(h))

    @classmethod
    def from_log_height(cls, z, log_h: float) -> "H3Point":
        return cls(complex(z), float(log_h))

    @property
    def h(self) -> float:
        return math.exp(self.log_h)

    def __repr__(self):
        return f"H3Point(z={self.z!r}, h=exp({self.log_h!r}))"


X_STAR = H3Point(0j, 0.0)


def _log_sinh(x: float) -> float:
    x = abs(x)
    if x == 0:
        return -math.inf
    if x > 20:
        return x - math.log(2) + math.log1p(-math.exp(-2 * x))
    return math.log(math.sinh(x))


def h3_distance(x: H3Point, y: H3Point) -> float:
    """Hyperbolic distance.

    Uses ``sinh^2(d/2) = sinh^2(dL/2) + |dz|^2 e^-(L1+L2) / 4``, evaluated in
    log space.
    """
    dz = abs(x.z - y.z)
    terms = []
    if x.log_h != y.log_h:
        terms.append(2 * _log_sinh((x.log_h - y.log_h) / 2))
    if dz > 0:
        terms.append(2 * math.log(dz) - (x.log_h + y.log_h) - math.log(4))
    if not terms:
        return 0.0
    log_s = terms[0] if len(terms) == 1 else float(np.logaddexp(terms[0], terms[1]))
    if log_s > 40:
        return math.log(4) + log_s
    return 2 * math.asinh(math.exp(log_s / 2))


def _as_matrix(M) -> tuple[complex, complex, complex, complex]:
    if isinstance(M, MobiusRep):
        return complex(M.a), complex(M.b), complex(M.c), complex(M.d)
    (a, b), (c, d) = M
    return complex(a), complex(b), complex(c), complex(d)


def mobius_h3(M, x: H3Point) -> H3Point:
    """Poincare extension of ``z -> (az+b)/(cz+d)``."""
    a, b, c, d = _as_matrix(M)
    det = a * d - b * c
    if det == 0:
        raise ValueError("singular Mobius matrix")
    w = c * x.z + d
    if c == 0:
        return H3Point((a * x.z + b) / d, math.log(abs(a / d)) + x.log_h)
    parts = [2 * math.log(abs(c)) + 2 * x.log_h]
    if w != 0:
        parts.append(2 * math.log(abs(w)))
    log_den = float(np.logaddexp(*parts)) if len(parts) == 2 else parts[0]
    log_h = math.log(abs(det)) + x.log_h - log_den
    zn = (a * x.z + b) * w.conjugate() * math.exp(-log_den) \
        + a * c.conjugate() * math.exp(2 * x.log_h - log_den)
    return H3Point(zn, log_h)


def affine_to(x: H3Point) -> MobiusRep:
    """The Mobius map ``u -> z + h u`` sending ``x_star`` to ``x``."""
    return MobiusRep(complex(x.h), x.z, 0j, 1.0 + 0j)


# ---------------------------------------------------------------------------
# ball model


def h3_to_ball(x: H3Point) -> np.ndarray:
    """Unit-ball coordinates; boundary ``z`` goes to ``(2z, |z|^2-1)/(|z|^2+1)``."""
    # divide through by sigma^2 with sigma = max(h, |z|, 1) to avoid overflow
    log_sig = max(x.log_h, math.log(abs(x.z)) if x.z != 0 else 0.0, 0.0)
    h = math.exp(x.log_h - log_sig)
    z = x.z * math.exp(-log_sig)
    one = math.exp(-log_sig)
    den = abs(z) ** 2 + (one + h) ** 2
    return np.array([2 * one * z.real / den, 2 * one * z.imag / den,
                     (abs(z) ** 2 + h * h - one * one) / den])


def ball_to_h3(b: np.ndarray) -> H3Point:
    bc = complex(b[0], b[1])
    bz = float(b[2])
    den = abs(bc) ** 2 + (1 - bz) ** 2
    h = (1 - float(np.dot(b, b))) / den
    return H3Point.make(bc * 2 / den, h)


def sphere_from_homogeneous(z0: np.ndarray, z1: np.ndarray) -> np.ndarray:
    """Unit vectors for homogeneous points (same convention as the ball)."""
    n0 = np.abs(z0) ** 2
    n1 = np.abs(z1) ** 2
    s = n0 + n1
    c = 2 * z0 * np.conj(z1) / s
    return np.stack([c.real, c.imag, (n0 - n1) / s], axis=-1)


# ---------------------------------------------------------------------------
# conformal measures


@dataclass(frozen=True)
class ConformalMeasure:
    base: H3Point

    def density(self, z) -> np.ndarray:
        """Probability density against Lebesgue area in the plane."""
        z = np.asarray(z, dtype=complex)
        w = (z - self.base.z) / self.base.h
        return 1.0 / (math.pi * (1 + np.abs(w) ** 2) ** 2) / self.base.h ** 2

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Homogeneous samples ``M(u)`` with ``u`` Fubini-Study distributed."""
        u0, u1 = fs_sample(n, rng)
        return self.base.z * u1 + self.base.h * u0, u1


def conformal_measure(x: H3Point) -> ConformalMeasure:
    return ConformalMeasure(x)


def fs_sample(n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Fubini-Study samples: ``|u|^2/(1+|u|^2)`` is uniform."""
    U = rng.uniform(0.0, 1.0, n)
    th = rng.uniform(0.0, 2 * math.pi, n)
    return np.sqrt(U) * np.exp(1j * th), np.sqrt(1 - U) + 0j


def mass_outside_disk(t: float) -> float:
    """Mass of ``mu((0,t))`` outside ``|z| <= sqrt(t)``: ``t/(t+1)``."""
    return t / (t + 1)


def associated_disk(x: H3Point) -> dict:
    """Closed disk attached to ``x != x_star``.

    The center is the endpoint of the ray from ``x_star`` through ``x``
    and the disk has chordal radius ``sqrt(s)/sqrt(1+s)`` with
    ``s = exp(-d(x, x_star))``; for ``x = (0, t)``, ``t < 1``, this is the
    Euclidean disk ``|z| <= sqrt(t)``.
    """
    d = h3_distance(x, X_STAR)
    if d == 0:
        raise ValueError("associated disk undefined at the base point")
    b = h3_to_ball(x)
    nb = float(np.linalg.norm(b))
    u = b / nb
    if u[2] >= 1 - 1e-15:
        center = complex("inf")
    else:
        center = complex(u[0], u[1]) / (1 - u[2])
    s = math.exp(-d)
    chordal = math.sqrt(s) / math.sqrt(1 + s)
    return {"center": center, "spherical_radius": chordal, "euclidean_radius_at_0": math.sqrt(s),
            "distance": d}


# ---------------------------------------------------------------------------
# closed-form integrals against conformal measures


def integral_log_max(x: H3Point) -> float:
    """``int log max(|z|, 1) d mu(x)`` for ``x`` on the vertical axis."""
    if x.z != 0:
        raise ValueError("closed form needs x on the vertical axis")
    # z = h u and int log max(|u|, r) dFS = log(1 + r^2)/2 with r = 1/h
    return 0.5 * float(np.logaddexp(0.0, 2 * x.log_h))


def integral_log_linear(x: H3Point, root: complex) -> float:
    """``int log|z - root| d mu(x)``: ``L + log(1 + |root - z_x|^2/h^2)/2``."""
    r = abs(complex(root) - x.z)
    if r == 0:
        return x.log_h
    lr = math.log(r) - x.log_h
    return x.log_h + 0.5 * float(np.logaddexp(0.0, 2 * lr))


def integrate_section(x: H3Point, section) -> float:
    """``int log(|P| / max(|z0|,|z1|)^l) d mu(x)`` for one homogeneous section.

    Exact via linear factors; ``x`` must lie on the vertical axis.
    """
    s = [complex(c) for c in section]
    l = len(s) - 1
    aff = s[::-1]  # lowest first
    while len(aff) > 1 and aff[-1] == 0:
        aff = aff[:-1]
    if all(c == 0 for c in aff):
        raise ValueError("zero section")
    roots = np.roots(aff[::-1]) if len(aff) > 1 else []
    val = math.log(abs(aff[-1])) + sum(integral_log_linear(x, r) for r in roots)
    return val - l * integral_log_max(x)
