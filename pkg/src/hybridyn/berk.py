"""The Berkovich projective line over the Puiseux field.

Points of Type 1 (classical, including infinity) and Type 2 (closed disks
with rational log-radius) are supported.  ``zeta(a, q)`` denotes the disk
of center ``a`` and radius ``exp(-q)``; the Gauss point is ``zeta(0, 0)``.
All valuations, distances, weights and Lyapunov exponents are exact
rationals.

The image of a Type-2 point is computed by reduction: after moving the
point to the Gauss point, a map either has nonconstant reduction (the image
is the Gauss point and the degree of the reduction is the local degree) or
reduces to a constant, which is peeled off one residue class at a time.
This works whether or not the disk contains poles.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .puiseux import (INF, FieldExtensionError, GaussQ, PrecisionError, PuiseuxNumber,
                      as_puiseux, min_ord, newton_puiseux_roots, parse_puiseux,
                      taylor_shift)
from .ratmap import PUISEUX, MobiusRep, RationalMap, affine_coeffs

# ---------------------------------------------------------------------------
# points


class BerkPoint:
    """Base class; use :class:`Type1` or :class:`Type2`."""

    kind = 0


@dataclass(frozen=True)
class Type1(BerkPoint):
    """A classical point; ``value=None`` is infinity."""

    value: PuiseuxNumber | None

    kind = 1

    def __post_init__(self):
        if self.value is not None:
            object.__setattr__(self, "value", as_puiseux(self.value))

    def is_infinity(self) -> bool:
        return self.value is None

    def __str__(self):
        return "inf" if self.value is None else f"pt({self.value})"


INFINITY = Type1(None)


@dataclass(frozen=True)
class Type2(BerkPoint):
    """``zeta(center, q)``: the closed disk of radius ``exp(-q)``.

    The center is stored as its class modulo ``t^q`` (terms of exponent
    ``< q``), so structural equality is equality of points.
    """

    center: PuiseuxNumber
    q: Fraction

    kind = 2

    def __post_init__(self):
        q = Fraction(self.q)
        c = as_puiseux(self.center)
        if c.prec is not None and c.prec < q:
            raise PrecisionError("center known below the disk radius", required_order=q)
        c = PuiseuxNumber([(e, v) for e, v in c.terms if e < q])
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "q", q)

    @property
    def logradius(self) -> Fraction:
        return self.q

    def __str__(self):
        return f"zeta({self.center}, {self.q})"


GAUSS = Type2(PuiseuxNumber.zero(), Fraction(0))


def parse_point(s: str) -> BerkPoint:
    s = s.strip()
    if s == "inf":
        return INFINITY
    m = re.fullmatch(r"zeta\((.*),\s*([^,()]+)\)", s)
    if m:
        return Type2(parse_puiseux(m.group(1)), Fraction(m.group(2).strip()))
    m = re.fullmatch(r"pt\((.*)\)", s)
    if m:
        return Type1(parse_puiseux(m.group(1)))
    raise ValueError(f"cannot parse Berkovich point {s!r}")


def _ord_diff(a: PuiseuxNumber, b: PuiseuxNumber):
    diff = a - b
    if diff.is_zero():
        return INF
    if not diff.terms:
        return diff.prec  # lower bound; enough for disk comparisons below it
    return diff.ord()


# ---------------------------------------------------------------------------
# seminorms and tree geometry


def _affine(poly: Sequence) -> list[PuiseuxNumber]:
    """Homogeneous coefficient list -> affine coefficients, lowest first."""
    return [as_puiseux(c) for c in affine_coeffs(poly)]


def pl_min(coeffs: Sequence[PuiseuxNumber], q, shift: int = 0):
    """``min_i (ord c_i + (i + shift) q)`` with truncation checks."""
    known, bounds = [], []
    for i, c in enumerate(coeffs):
        if c.terms:
            known.append(c.ord() + (i + shift) * q)
        elif c.prec is not None:
            bounds.append(c.prec + (i + shift) * q)
    m = min(known, default=INF)
    if any(b <= m for b in bounds):
        raise PrecisionError("seminorm hidden by truncation", required_order=m)
    return m


def seminorm(P: Sequence, x: BerkPoint):
    """``-log |P|_x`` for a homogeneous polynomial on the chart ``z1 = 1``."""
    coeffs = _affine(P)
    if isinstance(x, Type1):
        if x.value is None:
            # leading behaviour at infinity is not a finite seminorm
            raise ValueError("seminorm at infinity is not finite")
        acc = PuiseuxNumber.zero()
        for c in reversed(coeffs):
            acc = acc * x.value + c
        return acc.ord() if acc.terms or acc.is_zero() else min_ord([acc])
    shifted = taylor_shift(coeffs, x.center)
    return pl_min(shifted, x.q)


def _to_type2(x: BerkPoint, depth: Fraction) -> Type2:
    if isinstance(x, Type2):
        return x
    if x.value is None:
        return Type2(PuiseuxNumber.zero(), -depth)
    return Type2(x.value.truncate(depth) if x.value.prec is None or x.value.prec >= depth else x.value,
                 depth)


def tree_distance(x: Type2, y: Type2) -> Fraction:
    """Path distance ``2 max(-q1, -q2, -ord(a1-a2)) + q1 + q2``."""
    if not (isinstance(x, Type2) and isinstance(y, Type2)):
        raise ValueError("tree_distance needs Type-2 points")
    od = _ord_diff(x.center, y.center)
    m = max(-x.q, -y.q, -od if od != INF else -INF)
    return 2 * m + x.q + y.q


def join(x: Type2, y: Type2) -> Type2:
    """Smallest disk containing both disks."""
    od = _ord_diff(x.center, y.center)
    return Type2(x.center, min(x.q, y.q, od))


def _path_point(x: Type2, y: Type2, s: Fraction) -> Type2:
    """Point at distance s from x on the segment [x, y]."""
    j = join(x, y)
    up = x.q - j.q
    if s <= up:
        return Type2(x.center, x.q - s)
    return Type2(y.center, j.q + (s - up))


def meet(x: BerkPoint, y: BerkPoint, base: Type2 = GAUSS) -> Type2:
    """Where the segments ``[base, x]`` and ``[base, y]`` separate."""
    qs = [abs(base.q), 0]
    for p in (x, y):
        if isinstance(p, Type2):
            qs.append(abs(p.q))
            qs.append(abs(p.center.ord_lower()) if p.center.terms else 0)
        elif p.value is not None and p.value.terms:
            qs.append(abs(p.value.ord()))
    if isinstance(x, Type1) and isinstance(y, Type1) and x.value is not None and y.value is not None:
        od = _ord_diff(x.value, y.value)
        if od != INF:
            qs.append(abs(od))
    depth = Fraction(max(qs)) + 1
    if isinstance(x, Type1) and isinstance(y, Type1) and x == y:
        raise ValueError("meet of a Type-1 point with itself is that point")
    X, Y = _to_type2(x, depth), _to_type2(y, depth)
    s = (tree_distance(X, Y) + tree_distance(X, base) - tree_distance(Y, base)) / 2
    return _path_point(X, Y, s)


def is_below(x: Type2, y: Type2) -> bool:
    """True when the disk of x is contained in the disk of y."""
    return x.q >= y.q and _ord_diff(x.center, y.center) >= y.q


# ---------------------------------------------------------------------------
# residue field helpers (polynomials over Q(i), lowest degree first)


def _trim(p: list[GaussQ]) -> list[GaussQ]:
    while p and p[-1].is_zero():
        p = p[:-1]
    return p


def _poly_divmod(a: list[GaussQ], b: list[GaussQ]):
    a = list(a)
    b = _trim(list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [GaussQ(0)] * max(len(a) - len(b) + 1, 1)
    inv = b[-1].inverse()
    while len(_trim(a)) >= len(b):
        a = _trim(a)
        k = len(a) - len(b)
        c = a[-1] * inv
        q[k] = c
        for i, bc in enumerate(b):
            a[i + k] = a[i + k] - c * bc
        a = a[:-1]
    return q, _trim(a)


def _poly_gcd(a: list[GaussQ], b: list[GaussQ]) -> list[GaussQ]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    return a


def _residues(coeffs: Sequence[PuiseuxNumber]) -> list[GaussQ]:
    out = []
    for c in coeffs:
        if c.prec is not None and c.prec <= 0:
            raise PrecisionError("reduction undetermined", required_order=Fraction(1))
        out.append(c.coefficient(0) if not c.is_zero() else GaussQ(0))
    return out


def reduced_degree(P_aff: Sequence[PuiseuxNumber], Q_aff: Sequence[PuiseuxNumber], d: int):
    """Degree of the reduction of a normalized pair, and the constant if it is 0.

    Returns ``(degree, constant)`` with ``constant`` a GaussQ (``None`` for
    infinity) when the degree is 0, else ``None``.
    """
    A = _trim(_residues(P_aff))
    B = _trim(_residues(Q_aff))
    if not A and not B:
        raise PrecisionError("both reductions vanish")
    if not A:
        return 0, GaussQ(0)
    if not B:
        return 0, None
    g = _poly_gcd(A, B)
    low = min(d - (len(A) - 1), d - (len(B) - 1))
    deg = d - (len(g) - 1) - low
    if deg > 0:
        return deg, None
    # constant map: A = c B
    return 0, A[-1] / B[-1]


def _normalize_pair(A: list[PuiseuxNumber], B: list[PuiseuxNumber]):
    v = min_ord(list(A) + list(B))
    return [c.shift(-v) for c in A], [c.shift(-v) for c in B]


# ---------------------------------------------------------------------------
# map action


def _coerce_map(f: RationalMap) -> RationalMap:
    if f.field is not PUISEUX:
        return RationalMap([as_puiseux(c) for c in f.P], [as_puiseux(c) for c in f.Q],
                           PUISEUX, check=False)
    return f


def _image_type2(f: RationalMap, x: Type2, max_steps: int = 200):
    d = f.degree
    lam = PuiseuxNumber.t(x.q)
    g = f.pre_compose(MobiusRep(lam, x.center, PuiseuxNumber.zero(), PuiseuxNumber.coerce(1), PUISEUX))
    A, B = _affine(g.P), _affine(g.Q)
    v = min_ord(A) - min_ord(B)
    A = [c.shift(-v) for c in A]
    acc = v
    center = PuiseuxNumber.zero()
    A, B = _normalize_pair(A, B)
    for _ in range(max_steps):
        deg, const = reduced_degree(A, B, d)
        if deg > 0:
            return Type2(center, acc), deg
        if const is None or const.is_zero():
            raise PrecisionError("reduction lost the image (unexpected constant)")
        center = center + PuiseuxNumber.monomial(const, acc)
        A = [a - b * const for a, b in zip(A, B)]
        nv = min_ord(A) - min_ord(B)
        if nv <= 0:
            raise PrecisionError("image refinement did not progress")
        A = [c.shift(-nv) for c in A]
        acc += nv
        A, B = _normalize_pair(A, B)
    raise PrecisionError("image center not determined within step budget")


def image_point(f: RationalMap, x: BerkPoint) -> BerkPoint:
    """``f(x)`` for Type-1 and Type-2 points."""
    return image_with_degree(f, x)[0]


def image_with_degree(f: RationalMap, x: BerkPoint):
    """``(f(x), deg_x f)``; the degree is ``None`` for Type-1 points."""
    f = _coerce_map(f)
    if isinstance(x, Type2):
        return _image_type2(f, x)
    if x.value is None:
        p, q = f.P[0], f.Q[0]
    else:
        p = PuiseuxNumber.zero()
        q = PuiseuxNumber.zero()
        for a in f.P:
            p = p * x.value + a
        for b in f.Q:
            q = q * x.value + b
    if q.is_zero() or (not q.terms and not p.is_known_zero()):
        return INFINITY, None
    return Type1(p / q), None


def _breakpoints(lines: list[tuple]) -> list[Fraction]:
    """Pairwise intersections of affine functions ``(value0, slope)``."""
    out = set()
    for (a0, s0), (a1, s1) in combinations(lines, 2):
        if s0 != s1:
            out.add(Fraction(a1 - a0) / (s0 - s1))
    return sorted(out)


def _lines(coeffs: Sequence[PuiseuxNumber], shift: int = 0) -> list[tuple]:
    return [(c.ord(), i + shift) for i, c in enumerate(coeffs) if c.terms]


def _pl_value(lines, q):
    return min(a + s * q for a, s in lines)


def _path_candidates(A, B):
    """Candidate q on the path above a zero for ``N_A(q) - N_B(q) = 0``."""
    la, lb = _lines(A), _lines(B)
    bps = sorted(set(_breakpoints(la)) | set(_breakpoints(lb)))
    phi = lambda q: _pl_value(la, q) - _pl_value(lb, q)
    cands = set()
    probes = [bps[0] - 1] if bps else [Fraction(0)]
    probes += bps + ([bps[-1] + 1] if bps else [])
    pts = sorted(set(probes))
    for q in bps:
        if phi(q) == 0:
            cands.add(q)
    for q0, q1 in zip(pts, pts[1:]):
        f0, f1 = phi(q0), phi(q1)
        if f0 != f1 and (f0 == 0 or f1 == 0 or (f0 < 0) != (f1 < 0)):
            cands.add(q0 + (q1 - q0) * f0 / (f0 - f1))
    # unbounded ends: affine beyond the outer probes
    if len(pts) >= 2:
        for qa, qb in ((pts[0], pts[1]), (pts[-2], pts[-1])):
            fa, fb = phi(qa), phi(qb)
            if fa != fb:
                cands.add(qa + (qb - qa) * fa / (fa - fb))
    else:
        q0 = pts[0]
        for qa, qb in ((q0 - 1, q0), (q0, q0 + 1)):
            fa, fb = phi(qa), phi(qb)
            if fa != fb:
                cands.add(qa + (qb - qa) * fa / (fa - fb))
    return sorted(cands)


def _fiber_roots(f: RationalMap, b: PuiseuxNumber, order=None):
    """Finite roots of ``P - b Q`` (affine), with multiplicity."""
    R = [p - b * q for p, q in zip(_affine(f.P), _affine(f.Q))]
    while len(R) > 1 and R[-1].is_zero():
        R = R[:-1]
    if len(R) < 2:
        return []
    return newton_puiseux_roots(R, order=order)


def _bound_lines(coeffs: Sequence[PuiseuxNumber], shift: int = 0) -> list[tuple]:
    return [(c.prec, i + shift) for i, c in enumerate(coeffs)
            if not c.terms and c.prec is not None]


def _preimages_once(f: RationalMap, y: Type2, order) -> dict:
    d = f.degree
    found: dict[Type2, int] = {}
    F_num = [p - y.center * q for p, q in zip(_affine(f.P), _affine(f.Q))]
    for b in (y.center, y.center + PuiseuxNumber.t(y.q)):
        for z, _m in _fiber_roots(f, b, order):
            A = taylor_shift(F_num, z)
            B = [c.shift(y.q) for c in taylor_shift(_affine(f.Q), z)]
            bounds = _bound_lines(A) + _bound_lines(B)
            la, lb = _lines(A), _lines(B)
            for q in _path_candidates(A, B):
                level = min(_pl_value(la, q), _pl_value(lb, q))
                if (z.prec is not None and z.prec <= q) or any(p + k * q <= level for p, k in bounds):
                    raise PrecisionError("fiber root known below the preimage radius",
                                         required_order=q)
                x = Type2(z, q)
                if x in found:
                    continue
                img, deg = _image_type2(f, x)
                if img == y:
                    found[x] = deg
        if sum(found.values()) == d:
            break
    return found


def preimage_point(f: RationalMap, y: Type2) -> list[tuple[Type2, int]]:
    """Type-2 preimages of ``y`` with local degrees (summing to ``deg f``).

    Fiber roots are computed to an absolute order that starts just past the
    target radius and grows until no truncated coefficient can move a
    candidate.
    """
    f = _coerce_map(f)
    if not isinstance(y, Type2):
        raise ValueError("preimage_point expects a Type-2 target")
    d = f.degree
    extra = Fraction(2)
    for _ in range(8):
        order = max(y.q, Fraction(0)) + extra
        try:
            found = _preimages_once(f, y, order)
            break
        except PrecisionError:
            extra *= 2
    else:
        raise PrecisionError("preimages not resolved at the truncation budget")
    total = sum(found.values())
    if total != d:
        raise RuntimeError(f"preimage degrees sum to {total}, expected {d}")
    return sorted(found.items(), key=lambda kv: _sort_key(kv[0]))


def _sort_key(x: Type2):
    v = x.center.ord() if x.center.terms else INF
    return (v, x.q, str(x.center))


# ---------------------------------------------------------------------------
# reduction and resultants


def good_reduction(f: RationalMap) -> bool:
    """Coefficientwise reduction of the normalized map has degree d."""
    f = _coerce_map(f).normalize()
    A = _residues(f.P)
    B = _residues(f.Q)
    from .ratmap import RATIONAL
    g = RationalMap(A, B, RATIONAL, check=False)
    return not g.resultant().is_zero()


def _affine_mobius(a: PuiseuxNumber, q: Fraction) -> MobiusRep:
    return MobiusRep(PuiseuxNumber.t(q), as_puiseux(a), PuiseuxNumber.zero(),
                     PuiseuxNumber.coerce(1), PUISEUX)


def ordres(f: RationalMap, x: Type2, convention: str = "literal") -> Fraction:
    """``-log|Res|`` attached to ``x = M(x_g)``, ``M(z) = a + t^q z``.

    ``literal`` evaluates ``M . f = M o f o M^-1``; ``rumely`` evaluates
    ``M^-1 o f o M``, the representative-independent version.
    """
    f = _coerce_map(f)
    M = _affine_mobius(x.center, x.q)
    if convention == "literal":
        g = f.conjugate(M, normalize=False)
    elif convention == "rumely":
        g = f.conjugate(M.inverse(), normalize=False)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return g.neg_log_norm_resultant()


@dataclass
class OrdResMin:
    point: Type2
    value: Fraction
    rumely_point: Type2
    certified: bool
    candidates: list = dc_field(default_factory=list)


def _profile_lines(f: RationalMap, w: PuiseuxNumber):
    """Affine pieces of ``q -> ordres_rumely(zeta(w, q))``."""
    d = f.degree
    Pa, Qa = _affine(f.P), _affine(f.Q)
    A = taylor_shift([p - w * q for p, q in zip(Pa, Qa)], w)
    B = taylor_shift(Qa, w)
    lines = _lines(A) + _lines(B, shift=1)
    bounds = [(c.prec, i) for i, c in enumerate(A) if not c.terms and c.prec is not None]
    bounds += [(c.prec, i + 1) for i, c in enumerate(B) if not c.terms and c.prec is not None]
    base = -f.log_abs_resultant()
    return d, base, lines, bounds


def _profile_min(f: RationalMap, w: PuiseuxNumber, lo, hi):
    d, base, lines, bounds = _profile_lines(f, w)
    value = lambda q: base + (d * d + d) * q - 2 * d * _pl_value(lines, q)
    qs = [q for q in _breakpoints(lines) if (lo is None or q >= lo) and (hi is None or q <= hi)]
    qs += [q for q in (lo, hi) if q is not None]
    if not qs:
        qs = [Fraction(0)]
    best = min(qs, key=lambda q: (value(q), abs(q)))
    for p, s in bounds:
        if p + s * best <= _pl_value(lines, best):
            raise PrecisionError("profile hidden by truncation", required_order=p + 1)
    return best, value(best)


def ordres_minimize(f: RationalMap, max_candidates: int = 64) -> OrdResMin:
    """Minimize ordres over the tree spanned by fixed points and their preimages.

    The search runs with the representative-independent profile and the
    minimizer is reported in the labelling of :func:`ordres` (``literal``):
    a Rumely minimizer ``zeta(w, q)`` corresponds to ``zeta(-w t^-q, -q)``.
    """
    f = _coerce_map(f)
    d = f.degree
    certified = True
    g0 = -f.log_abs_resultant() - 2 * d * f.max_neglog_coeff()
    if g0 == 0:
        return OrdResMin(GAUSS, Fraction(0), GAUSS, True, [])
    pts: list[PuiseuxNumber | None] = []
    try:
        # fixed points: P - z Q = 0 in the affine chart
        Pa, Qa = _affine(f.P), _affine(f.Q)
        fix = [PuiseuxNumber.zero()] * (d + 2)
        for i, c in enumerate(Pa):
            fix[i] = fix[i] + c
        for i, c in enumerate(Qa):
            fix[i + 1] = fix[i + 1] - c
        while len(fix) > 1 and fix[-1].is_zero():
            fix = fix[:-1]
        fixed = [r for r, _ in newton_puiseux_roots(fix)] if len(fix) > 1 else []
        if len(fix) - 1 < d + 1:
            pts.append(None)
        pts.extend(fixed)
        seed = fixed[0] if fixed else None
        if seed is not None:
            pts.extend(r for r, _ in _fiber_roots(f, seed))
        else:
            R = list(_affine(f.P))
            if any(not c.is_zero() for c in R[1:]):
                pts.extend(r for r, _ in newton_puiseux_roots(R))
    except FieldExtensionError:
        certified = False
    pts = pts[:max_candidates]
    best = (g0, Fraction(0), PuiseuxNumber.zero())
    tried = []
    for w in pts:
        if w is None:
            q, val = _profile_min(f, PuiseuxNumber.zero(), None, Fraction(0))
            tried.append(("inf", q, val))
            cand = (val, q, PuiseuxNumber.zero())
        else:
            wo = w.ord() if w.terms else INF
            top = min(Fraction(0), wo) if wo != INF else Fraction(0)
            q1, v1 = _profile_min(f, w, top, None)
            q2, v2 = _profile_min(f, PuiseuxNumber.zero(), top, Fraction(0))
            tried.append((str(w), q1, v1))
            cand = min((v1, q1, w), (v2, q2, PuiseuxNumber.zero()), key=lambda c: (c[0], abs(c[1])))
        if (cand[0], abs(cand[1])) < (best[0], abs(best[1])):
            best = cand
    val, q, w = best
    if w.prec is not None and w.prec < q:
        raise PrecisionError("minimizer center below required precision", required_order=q)
    rum = Type2(w, q)
    lit = Type2(-(w.exact_part().shift(-q)), -q)
    return OrdResMin(lit, val, rum, certified, tried)


# ---------------------------------------------------------------------------
# measures


@dataclass
class TreeMeasure:
    """Finite atomic measure with exact rational weights."""

    atoms: list = dc_field(default_factory=list)

    def total_mass(self) -> Fraction:
        return sum((w for _, w in self.atoms), Fraction(0))

    def as_dict(self) -> dict:
        return dict(self.atoms)

    def integrate(self, func) -> Fraction:
        return sum((w * func(x) for x, w in self.atoms), Fraction(0))

    def to_json(self) -> list:
        return [[str(x), str(w)] for x, w in self.atoms]

    @classmethod
    def from_json(cls, data) -> "TreeMeasure":
        return cls([(parse_point(p), Fraction(w)) for p, w in data])


def pullback(f: RationalMap, mu: TreeMeasure) -> TreeMeasure:
    """``d^-1 f^* mu`` for a measure on Type-2 points."""
    f = _coerce_map(f)
    d = f.degree
    acc: dict[Type2, Fraction] = {}
    for y, w in mu.atoms:
        for x, m in preimage_point(f, y):
            acc[x] = acc.get(x, Fraction(0)) + w * Fraction(m, d)
    return TreeMeasure(sorted(acc.items(), key=lambda kv: _sort_key(kv[0])))


def equilibrium_pullback(f: RationalMap, depth: int) -> TreeMeasure:
    """``d^-n f^{n*} delta_{x_g}``."""
    mu = TreeMeasure([(GAUSS, Fraction(1))])
    for _ in range(depth):
        mu = pullback(f, mu)
    return mu


def pushforward(f: RationalMap, mu: TreeMeasure) -> TreeMeasure:
    """``f_* mu`` (mass preserving)."""
    acc: dict = {}
    for x, w in mu.atoms:
        y = image_point(f, x)
        acc[y] = acc.get(y, Fraction(0)) + w
    return TreeMeasure(sorted(acc.items(), key=lambda kv: _sort_key(kv[0])))


def log_abs_z(x: Type2) -> Fraction:
    """``log |z|_x = -min(ord a, q)``."""
    oa = x.center.ord() if x.center.terms else INF
    return -min(oa, x.q)


def log_df(f: RationalMap, x: Type2) -> Fraction:
    """``log|df|`` at a Type-2 point (no 1/d prefactor)."""
    f = _coerce_map(f)
    W = f.wronskian()
    lw = -seminorm(W, x)
    lp = -seminorm(f.P, x)
    lq = -seminorm(f.Q, x)
    return lw + 2 * max(log_abs_z(x), Fraction(0)) - 2 * max(lp, lq)


def lyapunov_na(f: RationalMap, depth: int, mu: TreeMeasure | None = None) -> Fraction:
    """``sum_x w_x log|df|_x`` over the depth-n equilibrium approximation."""
    if mu is None:
        mu = equilibrium_pullback(f, depth)
    return mu.integrate(lambda x: log_df(f, x))


def log_model_fn(sections: Sequence[Sequence], x: BerkPoint) -> Fraction:
    """``log max_i |P_i|_x / max(|z|_x, 1)^l`` at a Type-2 (or finite Type-1) point."""
    l = len(sections[0]) - 1
    if isinstance(x, Type1):
        if x.value is None:
            # chart at infinity: swap coordinates
            vals = [as_puiseux(s[0]) for s in sections]
            known = [v for v in vals if not v.is_zero()]
            return -min(v.ord() for v in known) if known else -INF
        best = max(-seminorm(s, x) for s in sections)
        oz = x.value.ord() if not x.value.is_zero() else INF
        return best - l * max(-oz, Fraction(0))
    best = max(-seminorm(s, x) for s in sections)
    return best - l * max(log_abs_z(x), Fraction(0))


# ---------------------------------------------------------------------------
# finite subtrees and PL Laplacians


@dataclass
class FiniteSubtree:
    """Finite subtree rooted at the Gauss point."""

    vertices: list
    edges: list  # (i, j, length)

    @classmethod
    def spanned_by(cls, points: Iterable[Type2], root: Type2 = GAUSS) -> "FiniteSubtree":
        pts = [root] + [p for p in points if p != root]
        verts = list(dict.fromkeys(pts))
        changed = True
        while changed:
            changed = False
            for a, b in combinations(list(verts), 2):
                m = meet(a, b, root)
                if m not in verts:
                    verts.append(m)
                    changed = True
        verts.sort(key=lambda v: (tree_distance(root, v), str(v)))
        edges = []
        for i, v in enumerate(verts):
            if v == root:
                continue
            # parent: the farthest vertex from the root lying on [root, v]
            best = None
            for j, u in enumerate(verts):
                if j == i:
                    continue
                if tree_distance(root, u) + tree_distance(u, v) == tree_distance(root, v):
                    if best is None or tree_distance(root, u) > tree_distance(root, verts[best]):
                        best = j
            edges.append((best, i, tree_distance(verts[best], v)))
        return cls(verts, edges)

    def index(self, v: Type2) -> int:
        return self.vertices.index(v)


def laplacian_pl(tree: FiniteSubtree, values: dict) -> TreeMeasure:
    """Sum of outgoing slopes at each vertex of a PL function."""
    acc = {v: Fraction(0) for v in tree.vertices}
    for i, j, length in tree.edges:
        vi, vj = tree.vertices[i], tree.vertices[j]
        slope = (Fraction(values[vj]) - Fraction(values[vi])) / length
        acc[vi] += slope
        acc[vj] -= slope
    return TreeMeasure([(v, w) for v, w in acc.items() if w != 0])


def potential(rho: TreeMeasure, x: Type2, root: Type2 = GAUSS) -> Fraction:
    """``g_rho(x) = -int d(root, x ^ y) d rho(y)``."""
    return -sum((w * tree_distance(root, meet(x, y, root)) for y, w in rho.atoms), Fraction(0))
