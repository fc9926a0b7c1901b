"""Rational maps of P^1 in homogeneous coordinates.

A degree-d map is a pair ``(P, Q)`` of binary forms stored as coefficient
lists ``a_0..a_d`` with ``P = sum a_i z0^(d-i) z1^i``.  In the affine
coordinate ``z = z0/z1`` the map reads ``z -> P(z, 1)/Q(z, 1)``.

Scalars live in one of three fields:

``complex``   double precision, Archimedean
``rational``  exact Gaussian rationals embedded in C, Archimedean
``puiseux``   truncated Puiseux series, non-Archimedean with ``|x| = e^-ord x``

For the Puiseux field "log" quantities are returned as exact rationals.
"""
from __future__ import annotations

import json
import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .puiseux import (INF, GaussQ, PrecisionError, PuiseuxNumber, as_puiseux,
                      min_ord, parse_gauss)


class DegenerateMapError(ValueError):
    """P and Q share a root (zero resultant)."""


class ResourceError(RuntimeError):
    """A configured size budget would be exceeded."""


# ---------------------------------------------------------------------------
# scalar fields


class Field:
    name = ""
    exact = False
    archimedean = True

    def coerce(self, x):
        raise NotImplementedError

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def is_zero(self, x) -> bool:
        raise NotImplementedError

    def neglog(self, x):
        """``-log|x|`` (``inf`` at zero)."""
        raise NotImplementedError

    def dump(self, x):
        raise NotImplementedError


class ComplexField(Field):
    name = "complex"

    def coerce(self, x):
        if isinstance(x, str):
            return complex(x.replace(" ", "").replace("i", "j"))
        if isinstance(x, (list, tuple)) and len(x) == 2:
            return complex(float(x[0]), float(x[1]))
        if isinstance(x, PuiseuxNumber):
            raise TypeError("cannot coerce a Puiseux series to complex")
        return complex(x)

    def is_zero(self, x) -> bool:
        return x == 0

    def neglog(self, x):
        a = abs(x)
        return INF if a == 0 else -math.log(a)

    def dump(self, x):
        x = complex(x)
        return x.real if x.imag == 0 else [x.real, x.imag]


class RationalField(Field):
    name = "rational"
    exact = True

    def coerce(self, x):
        if isinstance(x, GaussQ):
            return x
        if isinstance(x, str):
            return parse_gauss(x)
        if isinstance(x, float):
            return GaussQ(Fraction(x))
        if isinstance(x, (list, tuple)) and len(x) == 2:
            return GaussQ(Fraction(x[0]), Fraction(x[1]))
        return GaussQ(x)

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def neglog(self, x):
        if x.is_zero():
            return INF
        n = x.norm2()  # logs of the integers avoid float underflow
        return -0.5 * (math.log(n.numerator) - math.log(n.denominator))

    def dump(self, x):
        return str(x) if x.im != 0 or x.re.denominator != 1 else int(x.re)


class PuiseuxField(Field):
    name = "puiseux"
    exact = True
    archimedean = False

    def coerce(self, x):
        return as_puiseux(x)

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def neglog(self, x):
        return x.ord()

    def dump(self, x):
        return str(x)


COMPLEX = ComplexField()
RATIONAL = RationalField()
PUISEUX = PuiseuxField()
FIELDS = {f.name: f for f in (COMPLEX, RATIONAL, PUISEUX)}


def get_field(name) -> Field:
    if isinstance(name, Field):
        return name
    try:
        return FIELDS[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}") from None


# ---------------------------------------------------------------------------
# binary forms as coefficient lists (index i <-> z0^(k-i) z1^i)


def form_mul(p: Sequence, q: Sequence, zero) -> list:
    out = [zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def form_add(p: Sequence, q: Sequence) -> list:
    return [a + b for a, b in zip(p, q)]


def form_scale(p: Sequence, c) -> list:
    return [c * a for a in p]


def form_eval(p: Sequence, z0, z1):
    k = len(p) - 1
    acc = None
    # Horner in z0 with z1 weights
    for i, a in enumerate(p):
        term = a * (z0 ** (k - i)) * (z1 ** i)
        acc = term if acc is None else acc + term
    return acc


def form_d0(p: Sequence) -> list:
    k = len(p) - 1
    return [a * (k - i) for i, a in enumerate(p[:-1])]


def form_d1(p: Sequence) -> list:
    return [a * i for i, a in enumerate(p)][1:]


def form_compose(p: Sequence, f0: Sequence, f1: Sequence, zero, one) -> list:
    """``p(f0, f1)`` for binary forms f0, f1 of equal degree."""
    k = len(p) - 1
    pow0 = [[one]]
    pow1 = [[one]]
    for _ in range(k):
        pow0.append(form_mul(pow0[-1], f0, zero))
        pow1.append(form_mul(pow1[-1], f1, zero))
    out = None
    for i, a in enumerate(p):
        term = form_scale(form_mul(pow0[k - i], pow1[i], zero), a)
        out = term if out is None else form_add(out, term)
    return out


def affine_coeffs(p: Sequence) -> list:
    """Coefficients of ``p(z, 1)``, lowest degree first."""
    return list(reversed(p))


# ---------------------------------------------------------------------------
# determinants


def _bareiss(m: list[list], field: Field):
    n = len(m)
    a = [row[:] for row in m]
    sign = 1
    prev = field.one()
    for k in range(n - 1):
        piv = None
        if field is PUISEUX:
            best = None
            for i in range(k, n):
                if a[i][k].terms:
                    v = a[i][k].ord()
                    if best is None or v < best:
                        best, piv = v, i
            if piv is None and any(not a[i][k].is_zero() for i in range(k, n)):
                raise PrecisionError("pivot indistinguishable from zero")
        else:
            for i in range(k, n):
                if not field.is_zero(a[i][k]):
                    piv = i
                    break
        if piv is None:
            return field.zero()
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev
            a[i][k] = field.zero()
        prev = a[k][k]
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det


def scale_pow2(a: np.ndarray, big: float) -> tuple[np.ndarray, int]:
    """``a * 2^-e`` with ``2^e`` near ``big``; exact, and safe for subnormals."""
    e = math.frexp(big)[1]
    return np.ldexp(a.real, -e) + 1j * np.ldexp(a.imag, -e), e


def log_abs_det(m: np.ndarray) -> tuple[complex, float]:
    """Full-pivot elimination; returns (phase, log|det|)."""
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    phase = 1.0 + 0j
    big = float(np.max(np.abs(a))) if a.size else 1.0
    if big == 0:
        return 0j, -math.inf
    a, e = scale_pow2(a, big)
    logabs = n * e * math.log(2)
    for k in range(n):
        sub = np.abs(a[k:, k:])
        idx = np.unravel_index(np.argmax(sub), sub.shape)
        i, j = idx[0] + k, idx[1] + k
        p = a[i, j]
        if p == 0:
            return 0j, -math.inf
        if i != k:
            a[[k, i]] = a[[i, k]]
            phase = -phase
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            phase = -phase
        phase *= cmath.exp(1j * cmath.phase(p))
        logabs += math.log(abs(p))
        if k + 1 < n:
            f = a[k + 1:, k] / p
            a[k + 1:, k + 1:] -= np.outer(f, a[k, k + 1:])
    return phase, logabs


def sylvester(P: Sequence, Q: Sequence, zero) -> list[list]:
    d = len(P) - 1
    e = len(Q) - 1
    n = d + e
    rows = []
    for r in range(e):
        rows.append([zero] * r + list(P) + [zero] * (n - d - 1 - r))
    for r in range(d):
        rows.append([zero] * r + list(Q) + [zero] * (n - e - 1 - r))
    return rows


# ---------------------------------------------------------------------------
# points and Mobius maps


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """Homogeneous point ``[z0 : z1]``; equality is scale invariant."""

    z0: object
    z1: object
    field: Field = COMPLEX

    @classmethod
    def make(cls, z0, z1, field=COMPLEX) -> "ProjPoint":
        field = get_field(field)
        z0, z1 = field.coerce(z0), field.coerce(z1)
        if field.is_zero(z0) and field.is_zero(z1):
            raise ValueError("[0:0] is not a point")
        return cls(z0, z1, field)._normalized()

    @classmethod
    def affine(cls, z, field=COMPLEX) -> "ProjPoint":
        return cls.make(z, 1, field)

    @classmethod
    def infinity(cls, field=COMPLEX) -> "ProjPoint":
        return cls.make(1, 0, field)

    def _normalized(self) -> "ProjPoint":
        f = self.field
        z0, z1 = self.z0, self.z1
        if f is PUISEUX:
            v = min(z0.ord_lower(), z1.ord_lower())
            return ProjPoint(z0.shift(-v), z1.shift(-v), f)
        big = z0 if abs(complex(z0)) >= abs(complex(z1)) else z1
        return ProjPoint(z0 / big, z1 / big, f)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        cross = self.z0 * other.z1 - self.z1 * other.z0
        if self.field is COMPLEX:
            return abs(cross) <= 1e-12
        if self.field is PUISEUX:
            return cross.is_known_zero()
        return cross.is_zero()

    def __hash__(self):
        return 0

    def is_infinity(self) -> bool:
        return self.field.is_zero(self.z1)

    def value(self):
        """Affine coordinate ``z0/z1`` (``None`` at infinity)."""
        return None if self.is_infinity() else self.z0 / self.z1

    def neglog_norm(self):
        """``-log max(|z0|, |z1|)``."""
        return min(self.field.neglog(self.z0), self.field.neglog(self.z1))

    def __repr__(self):
        return f"[{self.z0} : {self.z1}]"


@dataclass(frozen=True)
class MobiusRep:
    """``z -> (a z + b)/(c z + d)``."""

    a: object
    b: object
    c: object
    d: object
    field: Field = COMPLEX

    @classmethod
    def make(cls, a, b, c, d, field=COMPLEX) -> "MobiusRep":
        field = get_field(field)
        m = cls(*(field.coerce(x) for x in (a, b, c, d)), field)
        if field.is_zero(m.det()):
            raise DegenerateMapError("singular Mobius matrix")
        return m

    @classmethod
    def identity(cls, field=COMPLEX) -> "MobiusRep":
        return cls.make(1, 0, 0, 1, field)

    def det(self):
        return self.a * self.d - self.b * self.c

    def matrix(self):
        return ((self.a, self.b), (self.c, self.d))

    def __matmul__(self, other: "MobiusRep") -> "MobiusRep":
        return MobiusRep(self.a * other.a + self.b * other.c,
                         self.a * other.b + self.b * other.d,
                         self.c * other.a + self.d * other.c,
                         self.c * other.b + self.d * other.d, self.field)

    def inverse(self) -> "MobiusRep":
        # adjugate; projectively the inverse
        return MobiusRep(self.d, -self.b, -self.c, self.a, self.field)

    def apply(self, x: ProjPoint) -> ProjPoint:
        return ProjPoint.make(self.a * x.z0 + self.b * x.z1,
                              self.c * x.z0 + self.d * x.z1, self.field)

    def as_map(self) -> "RationalMap":
        return RationalMap([self.a, self.b], [self.c, self.d], self.field)


# ---------------------------------------------------------------------------
# rational maps


class RationalMap:
    """Degree-d rational map ``[z0:z1] -> [P:Q]``.

    Parameters
    ----------
    P, Q : sequence
        Coefficients ``a_0..a_d`` of ``sum a_i z0^(d-i) z1^i``.
    field : str or Field
    check : bool
        Reject pairs with vanishing resultant.
    """

    def __init__(self, P: Sequence, Q: Sequence, field="complex", check: bool = True,
                 normalized: bool = False):
        self.field = get_field(field)
        if len(P) != len(Q) or len(P) < 2:
            raise ValueError("P and Q must have equal length d+1 >= 2")
        self.P = tuple(self.field.coerce(x) for x in P)
        self.Q = tuple(self.field.coerce(x) for x in Q)
        self.degree = len(P) - 1
        self.normalized = normalized
        if check:
            r = self.resultant()
            if self.field is COMPLEX:
                if abs(r) == 0 and log_abs_det(sylvester(self.P, self.Q, 0j))[1] == -math.inf:
                    raise DegenerateMapError("resultant vanishes")
            elif self.field is PUISEUX:
                if r.is_known_zero():
                    raise DegenerateMapError("resultant vanishes (to known precision)")
            elif r.is_zero():
                raise DegenerateMapError("resultant vanishes")

    # construction
    @classmethod
    def from_json(cls, data) -> "RationalMap":
        if isinstance(data, str):
            data = json.loads(data)
        for key in ("degree", "P", "Q"):
            if key not in data:
                raise ValueError(f"map JSON lacks field {key!r}")
        d = int(data["degree"])
        if len(data["P"]) != d + 1 or len(data["Q"]) != d + 1:
            raise ValueError("map JSON field 'P'/'Q' must have degree+1 entries")
        return cls(data["P"], data["Q"], data.get("field", "complex"))

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "P": [self.field.dump(x) for x in self.P],
                "Q": [self.field.dump(x) for x in self.Q],
                "field": self.field.name}

    def __repr__(self):
        return f"RationalMap({json.dumps(self.to_json())})"

    def coefficients(self) -> list:
        return list(self.P) + list(self.Q)

    def with_coefficients(self, P, Q, normalized=False) -> "RationalMap":
        return RationalMap(P, Q, self.field, check=False, normalized=normalized)

    # resultants
    def resultant(self):
        """Sylvester determinant of (P, Q)."""
        m = sylvester(self.P, self.Q, self.field.zero())
        if self.field is COMPLEX:
            phase, logabs = log_abs_det(m)
            return 0j if logabs == -math.inf else phase * math.exp(logabs)
        return _bareiss(m, self.field)

    def log_abs_resultant(self):
        """``log|Res(P,Q)|``; exact ``-ord`` for Puiseux."""
        if self.field is COMPLEX:
            return log_abs_det(sylvester(self.P, self.Q, 0j))[1]
        r = self.resultant()
        if self.field is PUISEUX:
            return -r.ord()
        return -self.field.neglog(r)

    def max_neglog_coeff(self):
        """``-log max |coefficient|``."""
        return min(self.field.neglog(x) for x in self.coefficients())

    def neg_log_norm_resultant(self):
        """``-log|Res(f)|`` with the scale-invariant exponent 2d."""
        return -self.log_abs_resultant() - 2 * self.degree * self.max_neglog_coeff()

    def norm_resultant(self) -> float:
        return math.exp(-float(self.neg_log_norm_resultant()))

    # normalization and conjugation
    def normalize(self) -> "RationalMap":
        f = self.field
        if f is PUISEUX:
            v = self.max_neglog_coeff()
            return self.with_coefficients([x.shift(-v) for x in self.P],
                                          [x.shift(-v) for x in self.Q], True)
        big = max(self.coefficients(), key=lambda x: abs(complex(x)))
        return self.with_coefficients([x / big for x in self.P], [x / big for x in self.Q], True)

    def compose_forms(self, f0: Sequence, f1: Sequence):
        z, o = self.field.zero(), self.field.one()
        return (form_compose(self.P, f0, f1, z, o), form_compose(self.Q, f0, f1, z, o))

    def conjugate(self, M: MobiusRep, normalize: bool = True) -> "RationalMap":
        """Representation of ``M o f o M^-1``."""
        inv = M.inverse()
        P1, Q1 = self.compose_forms([inv.a, inv.b], [inv.c, inv.d])
        P2 = form_add(form_scale(P1, M.a), form_scale(Q1, M.b))
        Q2 = form_add(form_scale(P1, M.c), form_scale(Q1, M.d))
        g = self.with_coefficients(P2, Q2)
        return g.normalize() if normalize else g

    def post_compose(self, M: MobiusRep) -> "RationalMap":
        """``M o f``."""
        P2 = form_add(form_scale(self.P, M.a), form_scale(self.Q, M.b))
        Q2 = form_add(form_scale(self.P, M.c), form_scale(self.Q, M.d))
        return self.with_coefficients(P2, Q2)

    def pre_compose(self, M: MobiusRep) -> "RationalMap":
        """``f o M``."""
        P2, Q2 = self.compose_forms([M.a, M.b], [M.c, M.d])
        return self.with_coefficients(P2, Q2)

    # dynamics
    def evaluate(self, x: ProjPoint) -> ProjPoint:
        return ProjPoint.make(form_eval(self.P, x.z0, x.z1), form_eval(self.Q, x.z0, x.z1),
                              self.field)

    def compose(self, other: "RationalMap") -> "RationalMap":
        """``self o other``."""
        P2, Q2 = self.compose_forms(other.P, other.Q)
        return RationalMap(P2, Q2, self.field, check=False)

    def iterate(self, n: int, max_degree: int = 4096) -> "RationalMap":
        if n < 1:
            raise ValueError("n must be >= 1")
        if self.degree ** n > max_degree:
            raise ResourceError(f"degree {self.degree}^{n} exceeds budget {max_degree}")
        g = self
        for _ in range(n - 1):
            g = self.compose(g)
        return g

    def wronskian(self) -> list:
        z = self.field.zero()
        return form_add(form_mul(form_d0(self.P), form_d1(self.Q), z),
                        form_scale(form_mul(form_d1(self.P), form_d0(self.Q), z),
                                   self.field.coerce(-1)))

    def spherical_derivative(self, x: ProjPoint):
        """``|df|`` at x for the chordal metric (float)."""
        if self.field.archimedean:
            z0, z1 = complex(x.z0), complex(x.z1)
            W = complex(form_eval([complex(c) for c in self.wronskian()], z0, z1))
            p = complex(form_eval([complex(c) for c in self.P], z0, z1))
            q = complex(form_eval([complex(c) for c in self.Q], z0, z1))
            return abs(W) * (abs(z0) ** 2 + abs(z1) ** 2) / (self.degree * (abs(p) ** 2 + abs(q) ** 2))
        return math.exp(float(self.log_spherical_derivative(x)))

    def log_spherical_derivative(self, x: ProjPoint):
        """``log|df|``; exact rational over the Puiseux field."""
        if self.field.archimedean:
            v = self.spherical_derivative(x)
            return -math.inf if v == 0 else math.log(v)
        W = form_eval(self.wronskian(), x.z0, x.z1)
        p = form_eval(self.P, x.z0, x.z1)
        q = form_eval(self.Q, x.z0, x.z1)
        if W.is_zero():
            return -INF
        return -W.ord() - 2 * x.neglog_norm() + 2 * min_ord([p, q])


def model_fn_eval(sections: Sequence[Sequence], x: ProjPoint, e=1, field=None):
    """``e * log max_i |P_i(x)| / max(|z0|,|z1|)^l``; ``-inf`` on common zeros."""
    if not sections:
        raise ValueError("need at least one section")
    field = x.field if field is None else get_field(field)
    l = len(sections[0]) - 1
    if any(len(s) - 1 != l for s in sections):
        raise ValueError("sections must have equal degree")
    best = None
    for s in sections:
        val = form_eval([field.coerce(c) for c in s], x.z0, x.z1)
        lg = -field.neglog(val)
        best = lg if best is None else max(best, lg)
    if best == -INF:
        return -INF
    return e * (best + l * x.neglog_norm())


def mobius_from_complex(m) -> MobiusRep:
    (a, b), (c, d) = m
    return MobiusRep.make(a, b, c, d, COMPLEX)


def to_complex_map(f: RationalMap) -> RationalMap:
    if f.field is PUISEUX:
        raise TypeError("specialize Puiseux maps through a family")
    return RationalMap([complex(x) for x in f.P], [complex(x) for x in f.Q], COMPLEX)


__all__ = [
    "COMPLEX", "RATIONAL", "PUISEUX", "Field", "get_field", "RationalMap", "MobiusRep",
    "ProjPoint", "DegenerateMapError", "ResourceError", "model_fn_eval", "log_abs_det",
    "sylvester", "form_eval", "form_mul", "form_compose", "affine_coeffs",
]
