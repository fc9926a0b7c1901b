"""Truncated Puiseux series over the Gaussian rationals.

A :class:`PuiseuxNumber` is a finite sum of terms ``c * t^e`` with ``c`` a
Gaussian rational and ``e`` rational, together with a truncation order
``prec``: every exponent at or above ``prec`` is unknown.  ``prec=None``
marks an exact value.  The valuation is ``ord`` and the absolute value is
``|x| = exp(-ord x)``.

Arithmetic tracks precision conservatively, so a reported digit is never a
guess.  Roots of polynomials are computed with Newton polygons; residual
equations are solved over Q(i) and a root outside Q(i) raises
:class:`FieldExtensionError`.
"""
from __future__ import annotations

import math
import re
from contextlib import contextmanager
from contextvars import ContextVar
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

INF = math.inf

# number of ramified steps kept when an expansion has to be cut
_DEFAULT_TERMS: ContextVar[int] = ContextVar("puiseux_default_terms", default=24)


def default_terms() -> int:
    return _DEFAULT_TERMS.get()


@contextmanager
def truncation_terms(n: int):
    """Temporarily change the default truncation (``n/N`` beyond the lead)."""
    if n < 1:
        raise ValueError("truncation must be positive")
    token = _DEFAULT_TERMS.set(int(n))
    try:
        yield
    finally:
        _DEFAULT_TERMS.reset(token)


class PrecisionError(ArithmeticError):
    """Known digits do not determine the requested quantity."""

    def __init__(self, msg: str, required_order: Fraction | None = None):
        super().__init__(msg)
        self.required_order = required_order


class FieldExtensionError(ArithmeticError):
    """A root lies outside the Gaussian rationals."""


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussQ:
    """Exact element ``re + im*i`` of Q(i)."""

    __slots__ = ("re", "im")

    def __init__(self, re_=0, im=0):
        if isinstance(re_, GaussQ):
            self.re, self.im = re_.re, re_.im
            return
        if isinstance(re_, complex):
            re_, im = Fraction(re_.real), Fraction(re_.imag) + Fraction(im)
        self.re = Fraction(re_)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussQ":
        return x if isinstance(x, GaussQ) else cls(x)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, complex, GaussQ)):
            other = GaussQ.coerce(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __add__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return GaussQ(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return GaussQ(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self) -> "GaussQ":
        return GaussQ(self.re, -self.im)

    def inverse(self) -> "GaussQ":
        n = self.norm2()
        if n == 0:
            raise ZeroDivisionError("GaussQ division by zero")
        return GaussQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _as_gauss(other)
        if other is None:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = GaussQ(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def sqrt(self) -> "GaussQ | None":
        """A square root in Q(i), or None if there is none."""
        if self.is_zero():
            return GaussQ(0)
        modulus = _frac_sqrt(self.norm2())
        if modulus is None:
            return None
        x = _frac_sqrt((modulus + self.re) / 2)
        if x is None:
            return None
        if x != 0:
            return GaussQ(x, self.im / (2 * x))
        y = _frac_sqrt((modulus - self.re) / 2)
        if y is None:
            return None
        return GaussQ(0, y if self.im >= 0 else -y)

    def __repr__(self):
        return f"GaussQ({self})"

    def __str__(self):
        return format_gauss(self)


def _as_gauss(x):
    if isinstance(x, GaussQ):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussQ(x)
    if isinstance(x, complex) and float(x.real).is_integer() and float(x.imag).is_integer():
        return GaussQ(x)
    return None


def _frac_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        return None
    return Fraction(rn, rd)


def format_gauss(c: GaussQ) -> str:
    if c.im == 0:
        return str(c.re)
    if c.re == 0:
        return f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    return f"({c.re}{sign}{abs(c.im)}*i)"


_RAT = r"\d+(?:/\d+)?"
_G_REAL = re.compile(rf"^[+-]?{_RAT}$")
_G_IMAG = re.compile(rf"^(?P<s>[+-]?)(?P<c>{_RAT})?\*?i$")
_G_BOTH = re.compile(rf"^(?P<r>[+-]?{_RAT})(?P<s>[+-])(?P<c>{_RAT})?\*?i$")


def parse_gauss(s: str) -> GaussQ:
    """Parse ``a/b``, ``c/d*i`` or ``a/b+c/d*i`` (optionally parenthesized)."""
    s = s.replace(" ", "")
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    if _G_REAL.match(s):
        return GaussQ(Fraction(s))
    m = _G_IMAG.match(s)
    if m:
        im = Fraction(m.group("c")) if m.group("c") else Fraction(1)
        return GaussQ(0, -im if m.group("s") == "-" else im)
    m = _G_BOTH.match(s)
    if m:
        im = Fraction(m.group("c")) if m.group("c") else Fraction(1)
        return GaussQ(Fraction(m.group("r")), -im if m.group("s") == "-" else im)
    raise ValueError(f"not a Gaussian rational: {s!r}")


# ---------------------------------------------------------------------------
# Puiseux numbers


def _lcm_den(values: Iterable[Fraction]) -> int:
    n = 1
    for v in values:
        n = n * v.denominator // math.gcd(n, v.denominator)
    return n


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class PuiseuxNumber:
    """Immutable truncated Puiseux series ``sum c_k t^{e_k} + O(t^prec)``."""

    __slots__ = ("_terms", "_prec")

    def __init__(self, terms: Iterable = (), prec=None):
        acc: dict[Fraction, GaussQ] = {}
        for e, c in terms:
            e = Fraction(e)
            c = GaussQ.coerce(c)
            acc[e] = acc[e] + c if e in acc else c
        prec = None if prec is None else Fraction(prec)
        self._terms = tuple(
            (e, acc[e]) for e in sorted(acc)
            if not acc[e].is_zero() and (prec is None or e < prec))
        self._prec = prec

    # construction helpers
    @classmethod
    def _raw(cls, terms: tuple, prec):
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._prec = prec
        return obj

    @classmethod
    def coerce(cls, x) -> "PuiseuxNumber":
        if isinstance(x, PuiseuxNumber):
            return x
        if isinstance(x, str):
            return parse_puiseux(x)
        g = _as_gauss(x)
        if g is None:
            raise TypeError(f"cannot coerce {x!r} to PuiseuxNumber")
        return cls._raw(((Fraction(0), g),) if g else (), None)

    @classmethod
    def monomial(cls, c, e) -> "PuiseuxNumber":
        return cls([(Fraction(e), c)])

    @classmethod
    def t(cls, e=1) -> "PuiseuxNumber":
        return cls.monomial(1, e)

    @classmethod
    def zero(cls, prec=None) -> "PuiseuxNumber":
        return cls((), prec)

    # accessors
    @property
    def terms(self) -> tuple:
        return self._terms

    @property
    def prec(self) -> Fraction | None:
        return self._prec

    truncation_order = prec

    @property
    def ramification(self) -> int:
        vals = [e for e, _ in self._terms]
        if self._prec is not None:
            vals.append(self._prec)
        return _lcm_den(vals)

    def is_exact(self) -> bool:
        return self._prec is None

    def is_zero(self) -> bool:
        """Exact zero."""
        return not self._terms and self._prec is None

    def is_known_zero(self) -> bool:
        """No known nonzero term (possibly only zero up to truncation)."""
        return not self._terms

    def ord(self):
        """Valuation; ``INF`` for exact zero."""
        if self._terms:
            return self._terms[0][0]
        if self._prec is None:
            return INF
        raise PrecisionError("valuation undetermined: zero up to truncation",
                             required_order=self._prec)

    def ord_lower(self):
        """A guaranteed lower bound for the valuation."""
        if self._terms:
            return self._terms[0][0]
        return INF if self._prec is None else self._prec

    def lead(self) -> GaussQ:
        if not self._terms:
            self.ord()
            return GaussQ(0)
        return self._terms[0][1]

    def coefficient(self, e) -> GaussQ:
        e = Fraction(e)
        if self._prec is not None and e >= self._prec:
            raise PrecisionError(f"coefficient of t^{e} is beyond truncation",
                                 required_order=e)
        for ee, c in self._terms:
            if ee == e:
                return c
        return GaussQ(0)

    def truncate(self, order) -> "PuiseuxNumber":
        order = Fraction(order)
        return PuiseuxNumber(self._terms, _min_prec(self._prec, order))

    def exact_part(self) -> "PuiseuxNumber":
        """Drop the truncation marker (treat the known terms as exact)."""
        return PuiseuxNumber._raw(self._terms, None)

    def abs(self) -> float:
        v = self.ord()
        return 0.0 if v == INF else math.exp(-float(v))

    def residue(self) -> GaussQ:
        """Reduction modulo the maximal ideal (requires ord >= 0)."""
        if self.ord_lower() < 0 and self._terms and self._terms[0][0] < 0:
            raise ValueError("residue of an element with negative valuation")
        if self._prec is not None and self._prec <= 0:
            raise PrecisionError("residue undetermined", required_order=Fraction(1))
        return self.coefficient(0)

    def evaluate(self, t: complex) -> complex:
        """Specialize at a complex ``t`` (principal branch for fractional powers)."""
        return sum((complex(c) * complex(t) ** float(e) for e, c in self._terms), 0j)

    # comparisons
    def __eq__(self, other):
        try:
            other = PuiseuxNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms and self._prec == other._prec

    def __hash__(self):
        return hash((self._terms, self._prec))

    def agrees_with(self, other, order=None) -> bool:
        """True when both agree on every exponent known in both (below ``order``)."""
        other = PuiseuxNumber.coerce(other)
        bound = _min_prec(_min_prec(self._prec, other._prec),
                          None if order is None else Fraction(order))
        diff = PuiseuxNumber._raw((self - other)._terms, None)
        return diff.ord_lower() >= (bound if bound is not None else INF)

    # arithmetic
    def __neg__(self):
        return PuiseuxNumber._raw(tuple((e, -c) for e, c in self._terms), self._prec)

    def __add__(self, other):
        try:
            other = PuiseuxNumber.coerce(other)
        except TypeError:
            return NotImplemented
        prec = _min_prec(self._prec, other._prec)
        acc = dict(self._terms)
        for e, c in other._terms:
            acc[e] = acc[e] + c if e in acc else c
        terms = tuple((e, acc[e]) for e in sorted(acc)
                      if not acc[e].is_zero() and (prec is None or e < prec))
        return PuiseuxNumber._raw(terms, prec)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = PuiseuxNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return PuiseuxNumber.coerce(other) - self

    def __mul__(self, other):
        try:
            other = PuiseuxNumber.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PuiseuxNumber.zero()
        la, lb = self.ord_lower(), other.ord_lower()
        pa = None if self._prec is None else self._prec + lb
        pb = None if other._prec is None else other._prec + la
        prec = _min_prec(pa, pb)
        acc: dict[Fraction, GaussQ] = {}
        for ea, ca in self._terms:
            for eb, cb in other._terms:
                e = ea + eb
                if prec is not None and e >= prec:
                    break
                p = ca * cb
                acc[e] = acc[e] + p if e in acc else p
        terms = tuple((e, acc[e]) for e in sorted(acc) if not acc[e].is_zero())
        return PuiseuxNumber._raw(terms, prec)

    __rmul__ = __mul__

    def inverse(self, order=None) -> "PuiseuxNumber":
        """Multiplicative inverse.

        ``order`` is an absolute truncation for expansions that do not
        terminate; by default ``default_terms()/N`` beyond the leading term.
        """
        if not self._terms:
            raise PrecisionError("division by a number indistinguishable from 0",
                                 required_order=self._prec)
        v, c0 = self._terms[0]
        inv0 = c0.inverse()
        if len(self._terms) == 1 and self._prec is None:
            return PuiseuxNumber._raw(((-v, inv0),), None)
        n = self.ramification
        if self._prec is not None:
            rel = self._prec - v
        else:
            rel = Fraction(default_terms(), n)
        if order is not None:
            req = Fraction(order) + v
            rel = req if self._prec is None else min(rel, req)
        if order is not None:
            n = _lcm_den([Fraction(1, n), rel])
        # work on the integer grid k/N for u = self / (c0 t^v) - 1
        steps = math.ceil(rel * n)
        u = {}
        for e, c in self._terms[1:]:
            k = (e - v) * n
            u[int(k)] = c * inv0
        r = [GaussQ(0)] * steps
        if steps:
            r[0] = GaussQ(1)
        for k in range(1, steps):
            s = GaussQ(0)
            for j, uc in u.items():
                if j > k:
                    continue
                s = s + uc * r[k - j]
            r[k] = -s
        terms = tuple((Fraction(k, n) - v, rk * inv0) for k, rk in enumerate(r) if not rk.is_zero())
        return PuiseuxNumber(terms, rel - v)

    def __truediv__(self, other):
        try:
            other = PuiseuxNumber.coerce(other)
        except TypeError:
            return NotImplemented
        if self.is_zero():
            if not other._terms:
                raise PrecisionError("division by a number indistinguishable from 0")
            return PuiseuxNumber.zero()
        return self * other.inverse()

    def __rtruediv__(self, other):
        return PuiseuxNumber.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = PuiseuxNumber.coerce(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, e) -> "PuiseuxNumber":
        """Multiply by ``t^e`` exactly."""
        e = Fraction(e)
        return PuiseuxNumber._raw(tuple((x + e, c) for x, c in self._terms),
                                  None if self._prec is None else self._prec + e)

    def __repr__(self):
        return f"PuiseuxNumber('{self}')"

    def __str__(self):
        return format_puiseux(self)


def as_puiseux(x) -> PuiseuxNumber:
    return PuiseuxNumber.coerce(x)


def min_ord(values: Iterable[PuiseuxNumber]):
    """``min ord`` over values, raising if truncation could hide the minimum."""
    known, bounds = [], []
    for x in values:
        if x.terms:
            known.append(x.ord())
        elif x.prec is not None:
            bounds.append(x.prec)
    m = min(known, default=INF)
    if any(b <= m for b in bounds):
        raise PrecisionError("minimum valuation hidden by truncation", required_order=m)
    return m


# ---------------------------------------------------------------------------
# text form


def _format_term(c: GaussQ, e: Fraction) -> str:
    cs = format_gauss(c)
    return cs if e == 0 else f"{cs}*t^({e})"


def format_puiseux(x: PuiseuxNumber) -> str:
    parts: list[str] = []
    for e, c in x.terms:
        s = _format_term(c, e)
        if not parts:
            parts.append(s)
        elif s.startswith("-"):
            parts.append(" - " + s[1:])
        else:
            parts.append(" + " + s)
    if x.prec is not None:
        o = f"O(t^({x.prec}))"
        parts.append(o if not parts else " + " + o)
    return "".join(parts) if parts else "0"


_EXP = r"(?:\^\(\s*(?P<{0}a>[+-]?{1})\s*\)|\^(?P<{0}b>[+-]?\d+))?"
_TERM = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:"
    r"(?P<big>O)\(\s*t" + _EXP.format("o", _RAT) + r"\s*\)"
    r"|(?P<coef>\([^()]*\)|" + _RAT + r"\s*\*\s*i|" + _RAT + r"|i)"
    r"(?:\s*\*\s*(?P<t1>t)" + _EXP.format("x", _RAT) + r")?"
    r"|(?P<t2>t)" + _EXP.format("y", _RAT) + r")\s*")


def _exp_of(m, tag) -> Fraction:
    a, b = m.group(tag + "a"), m.group(tag + "b")
    if a is not None:
        return Fraction(a)
    if b is not None:
        return Fraction(int(b))
    return Fraction(1)


def parse_puiseux(s: str) -> PuiseuxNumber:
    """Inverse of :func:`format_puiseux` (also accepts light variations)."""
    text = s.strip()
    if text == "0":
        return PuiseuxNumber.zero()
    pos, terms, prec = 0, [], None
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse Puiseux series at {text[pos:]!r}")
        if not first and m.group("sign") is None:
            raise ValueError(f"missing operator before {text[pos:]!r}")
        neg = m.group("sign") == "-"
        if m.group("big"):
            prec = _exp_of(m, "o")
        else:
            if m.group("coef") is not None:
                c = parse_gauss(m.group("coef").replace(" ", ""))
                e = _exp_of(m, "x") if m.group("t1") else Fraction(0)
            else:
                c = GaussQ(1)
                e = _exp_of(m, "y")
            terms.append((e, -c if neg else c))
        first = False
        pos = m.end()
    return PuiseuxNumber(terms, prec)


# ---------------------------------------------------------------------------
# polynomials with Puiseux coefficients (lists, lowest degree first)


def poly_eval(coeffs: Sequence[PuiseuxNumber], x) -> PuiseuxNumber:
    x = as_puiseux(x)
    acc = PuiseuxNumber.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_derivative(coeffs: Sequence[PuiseuxNumber]) -> list[PuiseuxNumber]:
    return [as_puiseux(c) * k for k, c in enumerate(coeffs)][1:]


def taylor_shift(coeffs: Sequence, a) -> list[PuiseuxNumber]:
    """Coefficients of ``P(a + x)``."""
    a = as_puiseux(a)
    out = [as_puiseux(c) for c in coeffs]
    n = len(out)
    if a.is_zero():
        return out
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + a * out[j + 1]
    return out


def poly_mul(p: Sequence, q: Sequence) -> list[PuiseuxNumber]:
    out = [PuiseuxNumber.zero() for _ in range(len(p) + len(q) - 1)]
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + as_puiseux(a) * b
    return out


def newton_function(coeffs: Sequence[PuiseuxNumber]):
    """Vertices ``(i, ord c_i)`` of the exact PL map ``q -> min_i(ord c_i + i q)``."""
    return [(i, c.ord()) for i, c in enumerate(coeffs) if not c.is_zero()]


# ---------------------------------------------------------------------------
# residual equations over Q(i)


@lru_cache(maxsize=4096)
def _gauss_roots(coeffs: tuple) -> tuple:
    """Roots in Q(i) with multiplicity of sum coeffs[k] Y^k; raise if it does not split."""
    deg = len(coeffs) - 1
    while deg > 0 and coeffs[deg].is_zero():
        deg -= 1
    coeffs = coeffs[:deg + 1]
    if deg == 0:
        return ()
    low = 0
    while coeffs[low].is_zero():
        low += 1
    out: list[tuple[GaussQ, int]] = []
    if low:
        out.append((GaussQ(0), low))
        coeffs = coeffs[low:]
        deg -= low
    if deg == 1:
        out.append((-coeffs[0] / coeffs[1], 1))
        return tuple(out)
    if deg == 2:
        a, b, c = coeffs[2], coeffs[1], coeffs[0]
        disc = b * b - a * c * 4
        r = disc.sqrt()
        if r is None:
            raise FieldExtensionError("residual quadratic does not split over Q(i)")
        if r.is_zero():
            out.append((-b / (a * 2), 2))
        else:
            out.append(((-b + r) / (a * 2), 1))
            out.append(((-b - r) / (a * 2), 1))
        return tuple(out)
    import sympy as sp
    from sympy.polys.domains import QQ_I

    Y = sp.Symbol("Y")
    expr = sum((sp.Rational(c.re.numerator, c.re.denominator)
                + sp.I * sp.Rational(c.im.numerator, c.im.denominator)) * Y ** k
               for k, c in enumerate(coeffs))
    _, factors = sp.Poly(expr, Y, domain=QQ_I).factor_list()
    for fac, mult in factors:
        if fac.degree() != 1:
            raise FieldExtensionError("residual polynomial does not split over Q(i)")
        a1, a0 = fac.all_coeffs()
        root = -sp.nsimplify(a0) / sp.nsimplify(a1)
        re_, im_ = sp.re(root), sp.im(root)
        out.append((GaussQ(Fraction(int(re_.p), int(re_.q)), Fraction(int(im_.p), int(im_.q))), mult))
    return tuple(out)


def residual_roots(coeffs: Sequence[GaussQ]) -> list[tuple[GaussQ, int]]:
    """Nonzero roots of the edge polynomial ``sum coeffs[j] X^j`` over Q(i).

    Every index may occur: once the coefficients carry fractional exponents,
    points off the ``q``-spaced lattice can sit on an edge of slope ``p/q``.
    """
    return [(x, m) for x, m in _gauss_roots(tuple(GaussQ.coerce(c) for c in coeffs))
            if not x.is_zero()]


# ---------------------------------------------------------------------------
# Newton-Puiseux root finding


def _lower_hull(points: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point when it is on or above the chord
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _strip_leading(coeffs: list[PuiseuxNumber]) -> list[PuiseuxNumber]:
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs = coeffs[:-1]
    return coeffs


def _check_hull(coeffs, hull):
    """Inexact-zero coefficients must sit above the polygon."""
    for i, c in enumerate(coeffs):
        if c.is_known_zero() and not c.is_exact():
            for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
                if x1 <= i <= x2:
                    level = y1 + (y2 - y1) * Fraction(i - x1, x2 - x1)
                    if c.prec <= level:
                        raise PrecisionError(
                            "coefficient precision insufficient to fix the Newton polygon",
                            required_order=level + 1)


def _newton_refine(coeffs, approx: PuiseuxNumber, goal: Fraction, strict: bool):
    """Newton refinement of an isolated simple root seeded by ``approx``.

    The accuracy of an exact iterate z is ``ord P(z) - ord P'(z)``, which is
    valid because the seed already separates the root from the others.
    """
    deriv = poly_derivative(coeffs)
    z = approx.exact_part()
    acc = None
    for _ in range(64):
        val = poly_eval(coeffs, z)
        if val.is_zero():
            return z
        dval = poly_eval(deriv, z)
        dv = dval.ord()
        if val.is_known_zero():
            acc = val.prec - dv
            break
        acc = val.ord() - dv
        if acc >= goal:
            break
        step = val * dval.inverse(order=goal - val.ord() + 1)
        newz = (z - step).truncate(goal).exact_part()
        if newz == z:
            break
        z = newz
    if strict and acc < goal:
        raise PrecisionError("root precision limited by coefficient precision",
                             required_order=goal)
    return z.truncate(min(acc, goal))


def _solve(coeffs: list[PuiseuxNumber], floor, target, prefix: PuiseuxNumber):
    """Roots ``prefix + y`` where y ranges over roots of ``coeffs`` with ord y > floor."""
    coeffs = _strip_leading(coeffs)
    d = len(coeffs) - 1
    out: list[tuple[PuiseuxNumber, int]] = []
    if d <= 0:
        return out
    k = 0
    while k < d and coeffs[k].is_zero():
        k += 1
    if k:
        out.append((prefix, k))
        coeffs = coeffs[k:]
        d -= k
        if d == 0:
            return out
    if coeffs[0].is_known_zero():
        # roots near 0 cannot be separated at this precision
        j = 0
        while coeffs[j].is_known_zero():
            j += 1
        lead_ord = coeffs[j].ord()
        # exact zeros constrain nothing
        bound = min(((coeffs[i].prec - lead_ord) / (j - i) for i in range(j)
                     if coeffs[i].prec is not None), default=None)
        if bound is None:
            bound = target if target is not None else Fraction(0)
        if target is not None and bound >= target:
            out.append((prefix.truncate(target), j))
            coeffs = coeffs[j:]
            d -= j
        else:
            raise PrecisionError("cannot separate roots near the current center",
                                 required_order=target)
    pts = [(i, c.ord()) for i, c in enumerate(coeffs) if c.terms]
    hull = _lower_hull(pts)
    _check_hull(coeffs, hull)
    for (i0, v0), (i1, v1) in zip(hull, hull[1:]):
        gamma = (v0 - v1) / (i1 - i0)
        if floor is not None and gamma <= floor:
            continue
        if target is not None and gamma >= target:
            out.append((prefix.truncate(target), i1 - i0))
            continue
        base = v0 + i0 * gamma
        res = [GaussQ(0)] * (i1 - i0 + 1)
        for i in range(i0, i1 + 1):
            c = coeffs[i]
            if c.terms and c.ord() + i * gamma == base:
                res[i - i0] = c.lead()
        for c, m in residual_roots(res):
            approx = PuiseuxNumber.monomial(c, gamma)
            if m == 1:
                if target is not None:
                    goal, strict = target, True
                else:
                    lead = prefix.ord() if prefix.terms else gamma
                    n = _lcm_den([gamma] + [e for cc in coeffs for e, _ in cc.terms])
                    goal, strict = lead + Fraction(default_terms(), n), False
                y = _newton_refine(coeffs, approx, goal, strict)
                z = prefix + y
                out.append((z if y.prec is None else z.truncate(y.prec), 1))
            else:
                sub = taylor_shift(coeffs, approx)
                out.extend(_solve(sub, gamma, target, prefix + approx))
    return out


def newton_puiseux_roots(coeffs: Sequence, order=None) -> list[tuple[PuiseuxNumber, int]]:
    """Roots with multiplicity of ``sum coeffs[i] z^i``.

    Parameters
    ----------
    coeffs : sequence
        Coefficients, lowest degree first; the last one must be nonzero.
    order : rational, optional
        Absolute truncation order each root must reach.  When omitted,
        each simple root is refined to ``default_terms()/N`` beyond its
        leading exponent or as far as coefficient precision allows.

    Raises
    ------
    PrecisionError
        When the coefficients do not determine the roots to ``order``.
    FieldExtensionError
        When a root needs coefficients outside Q(i).
    """
    cs = _strip_leading([as_puiseux(c) for c in coeffs])
    if len(cs) < 2:
        raise ValueError("need a polynomial of degree >= 1")
    if cs[-1].is_known_zero():
        raise PrecisionError("leading coefficient indistinguishable from 0")
    target = None if order is None else Fraction(order)
    roots = _solve(cs, None, target, PuiseuxNumber.zero())
    merged: list[list] = []
    for r, m in roots:
        for item in merged:
            if item[0] == r:
                item[1] += m
                break
        else:
            merged.append([r, m])
    return [(r, m) for r, m in merged]
