"""Degeneration harness joining the complex fibers and the Puiseux fiber.

A meromorphic family has Laurent-polynomial coefficients in ``t``.  Each
complex fiber ``f_{t_n}`` is measured with the gauge ``eps_n`` and compared
against the non-Archimedean fiber obtained by reading the same
coefficients over the Puiseux field.

Limits along a sequence are estimated by two-point Richardson
extrapolation in ``1/n``.  The valuation of the Puiseux fiber is rescaled by
``s = lim eps_n log(1/|t_n|)``, which equals ``1 / min ordRes`` exactly for
a degenerating family; the numerical estimate is reported alongside.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import berk, cxdyn, moduli
from .barycenter import luo_radius
from .hyp3 import X_STAR, H3Point, associated_disk, h3_distance, integrate_section, mobius_h3
from .puiseux import PuiseuxNumber, as_puiseux, parse_puiseux
from .ratmap import COMPLEX, PUISEUX, MobiusRep, RationalMap

CSV_COLUMNS = ["n", "t_abs", "neg_log_res", "epsilon", "chi", "eps_chi", "r_luo", "ratio"]


def richardson(ns: Sequence[float], values: Sequence[float]) -> float:
    """Two-point extrapolation of ``a(n) = a + c/n`` from the last two entries."""
    if len(values) < 2:
        return float(values[-1])
    n1, n2 = ns[-2], ns[-1]
    a1, a2 = values[-2], values[-1]
    return (n2 * a2 - n1 * a1) / (n2 - n1)


# ---------------------------------------------------------------------------
# families


def _laurent(x) -> PuiseuxNumber:
    if isinstance(x, str):
        return parse_puiseux(x)
    return as_puiseux(x)


@dataclass
class MeromorphicFamily:
    """Map template ``[P_t : Q_t]`` with Laurent-polynomial coefficients."""

    P: list
    Q: list
    name: str = ""

    def __post_init__(self):
        self.P = [_laurent(c) for c in self.P]
        self.Q = [_laurent(c) for c in self.Q]
        if len(self.P) != len(self.Q) or len(self.P) < 2:
            raise ValueError("family 'P' and 'Q' must have equal length >= 2")
        for c in self.P + self.Q:
            if not c.is_exact() or any(e.denominator != 1 for e, _ in c.terms):
                raise ValueError("family coefficients must be Laurent polynomials in t")
        if self.puiseux().resultant().is_zero():
            raise ValueError("family resultant vanishes identically")

    @property
    def degree(self) -> int:
        return len(self.P) - 1

    @classmethod
    def from_json(cls, data: dict) -> "MeromorphicFamily":
        for key in ("P", "Q"):
            if key not in data:
                raise ValueError(f"family JSON lacks field {key!r}")
        return cls(list(data["P"]), list(data["Q"]), data.get("name", ""))

    def to_json(self) -> dict:
        return {"name": self.name, "P": [str(c) for c in self.P], "Q": [str(c) for c in self.Q]}

    def at(self, t: complex) -> RationalMap:
        return RationalMap([c.evaluate(t) for c in self.P], [c.evaluate(t) for c in self.Q], COMPLEX)

    def puiseux(self) -> RationalMap:
        return RationalMap(self.P, self.Q, PUISEUX, check=False)

    def is_constant(self) -> bool:
        return all(all(e == 0 for e, _ in c.terms) for c in self.P + self.Q)


def canonical_family() -> MeromorphicFamily:
    """``z^2 + 1/t``."""
    return MeromorphicFamily(["1", "0", "1*t^(-1)"], ["0", "0", "1"], "z^2+1/t")


def specialize_sections(sections, t: complex) -> list[list[complex]]:
    return [[_laurent(c).evaluate(t) for c in s] for s in sections]


def puiseux_sections(sections) -> list[list[PuiseuxNumber]]:
    return [[_laurent(c) for c in s] for s in sections]


# ---------------------------------------------------------------------------
# non-Archimedean fiber


@dataclass
class NAFiber:
    good_reduction: bool
    ordres_min: Fraction
    ordres_point: str
    potential_good_reduction: bool
    chi: Fraction
    depth: int
    atoms: list
    probe_values: list
    scale: Fraction | None

    def to_json(self) -> dict:
        return {"good_reduction": self.good_reduction,
                "potential_good_reduction": self.potential_good_reduction,
                "ordres_min": str(self.ordres_min), "ordres_point": self.ordres_point,
                "chi_omega": str(self.chi), "depth": self.depth,
                "atoms": self.atoms, "probe_values": [str(v) for v in self.probe_values],
                "scale": None if self.scale is None else str(self.scale)}


def na_fiber(family: MeromorphicFamily, depth: int = 6, probes=()) -> NAFiber:
    f = family.puiseux()
    good = berk.good_reduction(f)
    om = berk.ordres_minimize(f)
    mu = berk.equilibrium_pullback(f, depth)
    chi = berk.lyapunov_na(f, depth, mu)
    vals = [mu.integrate(lambda x, s=puiseux_sections(p): berk.log_model_fn(s, x)) for p in probes]
    scale = Fraction(1) / om.value if om.value > 0 else None
    return NAFiber(good, om.value, str(om.point), om.value == 0, chi, depth, mu.to_json(), vals, scale)


# ---------------------------------------------------------------------------
# degeneration runs


@dataclass
class Row:
    n: float
    t_abs: float
    neg_log_res: float = math.nan
    epsilon: float = math.nan
    chi: float = math.nan
    chi_stderr: float = math.nan
    eps_chi: float = math.nan
    r_luo: float = math.nan
    ratio: float = math.nan
    probes: list = field(default_factory=list)
    error: str | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class DegenerationReport:
    rows: list
    na: NAFiber | None
    fiber_type: str
    verdicts: dict
    config: dict

    def to_json(self) -> dict:
        return {"config": self.config, "fiber_type": self.fiber_type,
                "rows": [r.to_json() for r in self.rows],
                "na_fiber": None if self.na is None else self.na.to_json(),
                "verdicts": self.verdicts}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([repr(getattr(r, c)) if isinstance(getattr(r, c), float) else getattr(r, c)
                        for c in CSV_COLUMNS])
        return buf.getvalue()


DEFAULTS = {"N": 100000, "depth": 25, "seed": 0, "budget": 20000, "na_depth": 6,
            "tolerance": 0.05, "eps_multiplier": 1.0, "luo": False, "luo_N": 20000,
            "probes": [], "compare_n": 10}


def run_degeneration(family: MeromorphicFamily, ns: Sequence[float], config: dict | None = None,
                     ts: Sequence[complex] | None = None) -> DegenerationReport:
    """Complex rows at ``t_n`` (default ``e^-n``) plus the Puiseux fiber.

    ``eps_multiplier`` scales every ``eps_n`` (and with it the rescale of the
    Puiseux valuation); comparison tolerances scale by the same factor since
    both sides of each comparison are multiplied by it.
    """
    cfg = dict(DEFAULTS)
    cfg.update(config or {})
    kappa = float(cfg["eps_multiplier"])
    ns = list(ns)
    ts = [math.exp(-n) for n in ns] if ts is None else list(ts)
    probes = cfg["probes"]
    d = family.degree
    rows = []
    for i, (n, t) in enumerate(zip(ns, ts)):
        row = Row(n, abs(t))
        try:
            f = family.at(t)
            mr = moduli.minimize_neg_log_res(f, budget=cfg["budget"], seed=cfg["seed"])
            row.neg_log_res = mr.neg_log
            row.epsilon = kappa * moduli.epsilon_from_neg_log(mr.neg_log, d).epsilon
            sample = cxdyn.sample_equilibrium(f, cfg["N"], cfg["depth"], cfg["seed"] + i)
            row.chi, row.chi_stderr = cxdyn.lyapunov_mc(f, sample=sample, seed=cfg["seed"] + i)
            row.eps_chi = row.epsilon * row.chi
            for p in probes:
                v, _ = cxdyn.integrate_model_fn(sample, specialize_sections(p, t), row.epsilon, f)
                row.probes.append(v)
            if cfg["luo"]:
                L = luo_radius(f, N=cfg["luo_N"], seed=cfg["seed"])
                row.r_luo = L.value
                row.ratio = (1 + L.value) / (f.neg_log_norm_resultant() + math.log(moduli.c_d(d)))
        except Exception as exc:  # partial report
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    verdicts: dict = {}
    na = None
    if family.is_constant():
        fiber_type = "archimedean"
    else:
        fiber_type = "non-archimedean"
        na = na_fiber(family, cfg["na_depth"], probes)
        good_rows = [r for r in rows if r.error is None]
        eps_ns = [r.n for r in good_rows]
        s_num = richardson(eps_ns, [r.epsilon * math.log(1 / r.t_abs) for r in good_rows]) \
            if good_rows else math.nan
        degenerate = na.scale is not None
        verdicts["degenerates"] = degenerate
        verdicts["scale_estimate"] = s_num
        verdicts["reduction_consistent"] = (not na.potential_good_reduction) == degenerate
        if degenerate:
            s = kappa * float(na.scale)
            verdicts["scale_exact"] = str(Fraction(kappa).limit_denominator(1000) * na.scale)
        else:
            s = s_num
        tol = kappa * cfg["tolerance"]
        target = s * float(na.chi)
        verdicts["chi_omega_scaled"] = target
        if good_rows:
            gaps = [abs(r.eps_chi - target) for r in good_rows]
            cmp_n = cfg["compare_n"]
            ref = next((g for r, g in zip(good_rows, gaps) if r.n == cmp_n), gaps[0])
            verdicts["lyapunov_gap_final"] = gaps[-1]
            verdicts["lyapunov_gap_reference"] = ref
            verdicts["lyapunov_converges"] = gaps[-1] <= tol and gaps[-1] < ref
            pg = []
            for j, v in enumerate(na.probe_values):
                pg.append(abs(good_rows[-1].probes[j] - s * float(v)))
            verdicts["probe_gaps"] = pg
            verdicts["probes_converge"] = all(g <= tol for g in pg)
    cfg_out = dict(cfg)
    cfg_out["family"] = family.to_json()
    cfg_out["ns"] = ns
    return DegenerationReport(rows, na, fiber_type, verdicts, cfg_out)


# ---------------------------------------------------------------------------
# conformal measures along sequences


def classify_regime(ns, a_values, zero_tol: float = 0.05):
    """Regime from ``a_n = eps_n d(x_n, x_star)``: ``2a`` (0), ``2b`` (finite) or ``2c`` (inf)."""
    a = list(a_values)
    lim = richardson(ns, a)
    half = a[len(a) // 2]
    if a[-1] > 5 and a[-1] > 1.5 * max(half, 1e-12) and all(y >= x for x, y in zip(a, a[1:])):
        return "2c", math.inf
    if abs(lim) <= zero_tol and abs(a[-1]) <= 2 * zero_tol + abs(lim):
        return "2a", lim
    if abs(a[-1] - half) <= 0.5 * max(abs(a[-1]), 1e-12):
        return "2b", lim
    return "inconclusive", lim


def _na_probe_at(section, x) -> float:
    return float(berk.log_model_fn(puiseux_sections([section]), x))


def measure_convergence_check(xs: Sequence[H3Point], eps: Sequence[float], ns: Sequence[float],
                              probes: Sequence, tolerance: float = 0.05) -> dict:
    """Limit of ``(s_eps)_* mu(x_n)`` tested on single-section probes.

    Points must lie on the vertical axis ``z = 0``, where the probe
    integrals have closed forms.
    """
    if not (len(xs) == len(eps) == len(ns)):
        raise ValueError("sequences must have the same length")
    if any(x.z != 0 for x in xs):
        raise ValueError("measure_convergence_check supports points on the vertical axis")
    a = [e * h3_distance(x, X_STAR) for x, e in zip(xs, eps)]
    regime, lim = classify_regime(ns, a)
    out = {"regime": regime, "limit": lim, "a_n": a, "probes": []}
    if regime == "inconclusive":
        out["verdict"] = "inconclusive"
        return out
    ok = True
    if regime == "2a":
        point = berk.GAUSS
    elif regime == "2b":
        # x_n = M_n x_star with M_n(z) = h_n z and |h_n|^{eps_n} -> e^{lim eps_n L_n}
        lim_L = richardson(ns, [e * x.log_h for x, e in zip(xs, eps)])
        q = -Fraction(lim_L).limit_denominator(64)
        point = berk.Type2(PuiseuxNumber.zero(), q)
    else:
        centers = [associated_disk(x)["center"] for x in xs[-2:]]
        c = centers[-1]
        point = berk.INFINITY if not np.isfinite(c) else berk.Type1(PuiseuxNumber.coerce(
            Fraction(c.real).limit_denominator(10 ** 6)))
        out["centers"] = [str(z) for z in centers]
    out["limit_point"] = str(point)
    for p in probes:
        vals = [e * integrate_section(x, p) for x, e in zip(xs, eps)]
        expected = _na_probe_at(p, point)
        item = {"section": [str(c) for c in p], "values": vals, "expected": expected}
        if expected == -math.inf:
            diverging = all(y < x for x, y in zip(vals[-3:], vals[-2:][1:] + [vals[-1]])) or \
                (vals[-1] < vals[0] and vals[-1] < -1.0)
            item["diverging"] = diverging
            ok &= diverging
        else:
            gap = abs(vals[-1] - expected)
            item["gap"] = gap
            ok &= gap <= tolerance
        out["probes"].append(item)
    out["verdict"] = "pass" if ok else "fail"
    return out


# ---------------------------------------------------------------------------
# cone isometry


def _laurent_matrix(M) -> list:
    return [[_laurent(c) for c in row] for row in M]


def cone_isometry_check(M: Sequence[Sequence], ns: Sequence[float], eps: Sequence[float],
                        ts: Sequence[complex] | None = None) -> dict:
    """Compare ``lim eps_n d(M(t_n) x_star, x_star)`` with the tree distance.

    The right-hand side ``d(M_omega(x_g), x_g)`` is exact (computed by the
    Puiseux image of the Gauss point) and is multiplied by the valuation
    rescale ``s = lim eps_n log(1/|t_n|)``, rounded to a rational.
    """
    ns = list(ns)
    ts = [math.exp(-n) for n in ns] if ts is None else list(ts)
    Ml = _laurent_matrix(M)
    (a, b), (c, d) = Ml
    lhs_seq = []
    for t, e in zip(ts, eps):
        m = [[x.evaluate(t) for x in row] for row in Ml]
        lhs_seq.append(e * h3_distance(mobius_h3(m, X_STAR), X_STAR))
    lhs = richardson(ns, lhs_seq)
    g = RationalMap([a, b], [c, d], PUISEUX)
    img = berk.image_point(g, berk.GAUSS)
    rhs = berk.tree_distance(img, berk.GAUSS)
    s_num = richardson(ns, [e * math.log(1 / abs(t)) for e, t in zip(eps, ts)])
    s = Fraction(s_num).limit_denominator(64)
    out = {"lhs": lhs, "lhs_sequence": lhs_seq, "rhs": str(rhs * s), "rhs_unscaled": str(rhs),
           "scale": str(s), "gap": abs(lhs - float(rhs * s))}
    if c.is_zero() and not a.is_zero():
        # affine case: 2 log max(|a|,|b|,1) - log|a| with |x| = e^{-ord x}
        la, lb = -a.ord(), (-b.ord() if not b.is_zero() else -math.inf)
        formula = 2 * max(la, lb, 0) - la
        out["rhs_formula"] = str(Fraction(formula) * s)
    return out


# ---------------------------------------------------------------------------
# Luo ratios


def luo_ratio_check(family: MeromorphicFamily, ns: Sequence[float], N: int = 20000,
                    seed: int = 0, band: float = 20.0, ts=None) -> dict:
    """Ratios ``(1 + r_Luo) / (-log(|Res(f_n)|/C_d))`` and whether they stay banded."""
    ns = list(ns)
    ts = [math.exp(-n) for n in ns] if ts is None else list(ts)
    if berk.ordres_minimize(family.puiseux()).value == 0:
        return {"verdict": "not-applicable", "ratios": []}
    d = family.degree
    ratios, radii = [], []
    for t in ts:
        f = family.at(t)
        L = luo_radius(f, N=N, seed=seed)
        den = f.neg_log_norm_resultant() + math.log(moduli.c_d(d))
        radii.append(L.value)
        ratios.append((1 + L.value) / den)
    width = max(ratios) / min(ratios)
    return {"ratios": ratios, "r_luo": radii, "band_width": width, "bounded": width <= band,
            "verdict": "pass" if width <= band else "fail"}
