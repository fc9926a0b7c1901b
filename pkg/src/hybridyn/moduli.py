"""Complex minimal resultant and the degeneration gauge.

``-log|res([f])|`` is the infimum of ``-log|Res(M.f)|`` over Mobius
conjugates, with ``|Res|`` normalized by the 2d-th power of the largest
coefficient.  We run an exact one-parameter scan over diagonal
conjugations first, then a multistart Nelder-Mead search over a 6 real
parameter chart seeded by it and by normal-form charts.

The resultant of the input is computed exactly from its float
coefficients; conjugates use ``Res(M.f) = det(M)^(d^2+d) Res(f)``, so only
the largest conjugated coefficient is a floating-point quantity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .ratmap import COMPLEX, RATIONAL, MobiusRep, RationalMap, scale_pow2


class InternalInconsistencyError(RuntimeError):
    """The optimizer returned a value worse than the exact scan bound."""


def hadamard_bound(d: int) -> float:
    """``H_d = (2d)^d``."""
    return float((2 * d) ** d)


def c_d(d: int) -> float:
    """Surrogate constant ``C_d = e * H_d``."""
    return math.e * hadamard_bound(d)


# ---------------------------------------------------------------------------
# fast complex conjugation


def _linear_powers(l: np.ndarray, d: int) -> list[np.ndarray]:
    out = [np.ones(1, dtype=complex)]
    for _ in range(d):
        out.append(np.convolve(out[-1], l))
    return out


def _compose(P: np.ndarray, l0: np.ndarray, l1: np.ndarray) -> np.ndarray:
    d = len(P) - 1
    p0, p1 = _linear_powers(l0, d), _linear_powers(l1, d)
    out = np.zeros(d + 1, dtype=complex)
    for i, a in enumerate(P):
        if a != 0:
            out += a * np.convolve(p0[d - i], p1[i])
    return out


def _sylvester(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    d = len(P) - 1
    m = np.zeros((2 * d, 2 * d), dtype=complex)
    for r in range(d):
        m[r, r:r + d + 1] = P
        m[d + r, r:r + d + 1] = Q
    return m


def _conj_arrays(P: np.ndarray, Q: np.ndarray, M: np.ndarray):
    """Coefficients of ``M o f o M^-1`` (inverse via the adjugate)."""
    (a, b), (c, dd) = M
    P1 = _compose(P, np.array([dd, -b]), np.array([-c, a]))
    Q1 = _compose(Q, np.array([dd, -b]), np.array([-c, a]))
    return a * P1 + b * Q1, c * P1 + dd * Q1


def log_abs_resultant_exact(P: np.ndarray, Q: np.ndarray) -> float:
    """``log|Res|`` of the binary forms whose coefficients are exactly these floats.

    Evaluated by fraction-free elimination over Q(i); a double-precision
    determinant cannot resolve ``|Res|`` far below the coefficient scale.
    """
    conv = lambda z: [complex(z).real, complex(z).imag]
    g = RationalMap([conv(z) for z in P], [conv(z) for z in Q], RATIONAL, check=False)
    return -float(RATIONAL.neglog(g.resultant()))


def neg_log_res_matrix(P: np.ndarray, Q: np.ndarray, M: np.ndarray,
                       log_res: float | None = None) -> float:
    """``-log|Res(M.f)|`` (normalized) for ``M.f = M o f o M^-1``.

    Uses ``Res(M.f) = det(M)^(d^2+d) Res(f)`` (adjugate inverse), so only the
    largest coefficient of the conjugate is computed in floating point.
    """
    d = len(P) - 1
    if log_res is None:
        log_res = log_abs_resultant_exact(P, Q)
    det = abs(complex(np.linalg.det(M)))
    if det == 0 or log_res == -math.inf:
        return math.inf
    P2, Q2 = _conj_arrays(P, Q, M)
    big = max(np.max(np.abs(P2)), np.max(np.abs(Q2)))
    if big == 0 or not np.isfinite(big):
        return math.inf
    return -log_res - (d * d + d) * math.log(det) + 2 * d * math.log(big)


def neg_log_res(f: RationalMap, M=None) -> float:
    P = np.array([complex(x) for x in f.P])
    Q = np.array([complex(x) for x in f.Q])
    if M is None:
        M = np.eye(2, dtype=complex)
    elif isinstance(M, MobiusRep):
        M = np.array([[complex(M.a), complex(M.b)], [complex(M.c), complex(M.d)]])
    return neg_log_res_matrix(P, Q, np.asarray(M, dtype=complex))


# ---------------------------------------------------------------------------
# exact diagonal scan


def diagonal_profile(f: RationalMap, log_res: float | None = None):
    """Affine pieces of ``s -> -log|Res(diag(e^s,1).f)|`` as ``(offset, slope)``.

    Conjugating by ``z -> lam z`` multiplies ``a_i`` by ``lam^(i+1)`` and
    ``b_i`` by ``lam^i`` while ``Res`` picks up ``lam^(d+d^2)``, so the
    profile is ``base - (d+d^2) s + 2d max(lines)``.
    """
    d = f.degree
    P = [complex(x) for x in f.P]
    Q = [complex(x) for x in f.Q]
    if log_res is None:
        log_res = log_abs_resultant_exact(np.array(P), np.array(Q))
    lines = [(math.log(abs(a)), i + 1) for i, a in enumerate(P) if a != 0]
    lines += [(math.log(abs(b)), i) for i, b in enumerate(Q) if b != 0]
    return d, -log_res, lines


def diagonal_scan(f: RationalMap, log_res: float | None = None) -> tuple[float, float]:
    """Exact minimum over diagonal conjugations: ``(s_star, value)``."""
    d, base, lines = diagonal_profile(f, log_res)
    val = lambda s: base - (d + d * d) * s + 2 * d * max(o + k * s for o, k in lines)
    cands = [0.0]
    for i, (o0, k0) in enumerate(lines):
        for o1, k1 in lines[i + 1:]:
            if k0 != k1:
                cands.append((o1 - o0) / (k0 - k1))
    s_best = min(cands, key=lambda s: (val(s), abs(s)))
    return s_best, val(s_best)


# ---------------------------------------------------------------------------
# multistart search


@dataclass
class MinResResult:
    value: float
    minimizer: MobiusRep
    neg_log: float
    optimizer_trace: list = field(default_factory=list)
    scan_value: float = math.nan
    evaluations: int = 0

    def to_json(self) -> dict:
        M = self.minimizer
        enc = lambda z: [complex(z).real, complex(z).imag]
        return {"neg_log_res": self.neg_log,
                "minimizer": [[enc(M.a), enc(M.b)], [enc(M.c), enc(M.d)]],
                "scan_neg_log_res": self.scan_value,
                "evaluations": self.evaluations,
                "trace": [[i, v] for i, v in self.optimizer_trace]}


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    th, ph = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
    c, s = math.cos(th), math.sin(th)
    return np.array([[c, -np.exp(1j * ph) * s], [np.exp(-1j * ph) * s, c]])


def _form_roots(F: np.ndarray) -> list[tuple[complex, complex]]:
    """Zeros of a binary form as homogeneous pairs (``(1, 0)`` is infinity)."""
    F = np.asarray(F, dtype=complex)
    k = 0
    while k < len(F) - 1 and F[k] == 0:
        k += 1
    out = [(1.0 + 0j, 0j)] * k
    if len(F) - k > 1:
        out += [(complex(r), 1.0 + 0j) for r in np.roots(F[k:])]
    return out


def _wronskian(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    # P_z0 Q_z1 - P_z1 Q_z0 in the affine chart: P(z) Q'(z) - P'(z) Q(z)
    p, q = np.poly1d(P), np.poly1d(Q)
    return (p.deriv() * q - p * q.deriv()).coeffs


def _normal_form_starts(P: np.ndarray, Q: np.ndarray, log_res: float,
                        keep: int = 4) -> list[np.ndarray]:
    """Charts sending a pair of critical or fixed points to ``0, inf``,
    followed by the exact diagonal scan in that chart.

    These seeds do not depend on the coordinates ``f`` is given in.
    """
    d = len(P) - 1
    fixed = np.zeros(d + 2, dtype=complex)
    fixed[:-1] += P
    fixed[1:] -= Q  # z1 P - z0 Q, coefficients in z0^(d+1-i) z1^i
    pts = []
    for F in (_wronskian(P, Q), -fixed):
        roots = _form_roots(F)
        pts.append(roots[:4])
    cands = []
    for group in pts:
        for i, u in enumerate(group):
            for j, v in enumerate(group):
                if i == j:
                    continue
                M = np.array([[u[1], -u[0]], [v[1], -v[0]]], dtype=complex)
                det = abs(np.linalg.det(M))
                if det < 1e-12 * max(1.0, np.max(np.abs(M))) ** 2:
                    continue
                P2, Q2 = _conj_arrays(P, Q, M)
                big = max(np.max(np.abs(P2)), np.max(np.abs(Q2)))
                if not (big > 0 and np.isfinite(big)):
                    continue
                P3, e = scale_pow2(P2, big)
                g = RationalMap(P3, scale_pow2(Q2, big)[0], COMPLEX, check=False)
                lr = log_res + (d * d + d) * math.log(abs(np.linalg.det(M))) \
                    - 2 * d * e * math.log(2)
                try:
                    s_star, val = diagonal_scan(g, lr)
                except (ValueError, OverflowError):
                    continue
                if math.isfinite(val):
                    cands.append((val, np.diag([math.exp(s_star), 1.0]) @ M))
    cands.sort(key=lambda c: c[0])
    return [M for _, M in cands[:keep]]


def _chart(M0: np.ndarray, x: np.ndarray) -> np.ndarray:
    b, c, d = x[0] + 1j * x[1], x[2] + 1j * x[3], 1 + x[4] + 1j * x[5]
    # perturb on the left, in the coordinates where M0.f is well scaled
    return np.array([[1.0, b], [c, d]]) @ M0


def minimize_neg_log_res(f: RationalMap, budget: int = 20000, seed: int = 0,
                         tol: float = 1e-9) -> MinResResult:
    """Best ``-log|Res(M.f)|`` found by scan-seeded multistart Nelder-Mead."""
    if f.degree < 1:
        raise ValueError("degree must be positive")
    P = np.array([complex(x) for x in f.P])
    Q = np.array([complex(x) for x in f.Q])
    rng = np.random.default_rng(seed)
    log_res = log_abs_resultant_exact(P, Q)
    s_star, scan_val = diagonal_scan(f, log_res)
    starts = [np.eye(2, dtype=complex)]
    starts += [_random_rotation(rng) for _ in range(3)]
    starts += [np.diag([math.exp(s_star + ds), 1.0]).astype(complex) for ds in (0.0, -1.0, 1.0, 0.5)]
    starts += _normal_form_starts(P, Q, log_res)
    trace: list = []
    state = {"n": 0, "best": math.inf, "M": starts[0]}

    def obj(x, M0):
        M = _chart(M0, x)
        if abs(np.linalg.det(M)) < 1e-300 * max(1.0, np.max(np.abs(M))) ** 2:
            return 1e300
        v = neg_log_res_matrix(P, Q, M, log_res)
        state["n"] += 1
        if v < state["best"]:
            state["best"], state["M"] = v, M
            trace.append((state["n"], v))
        return v if math.isfinite(v) else 1e300

    per = max(budget // len(starts), 50)
    for M0 in starts:
        if state["n"] >= budget:
            break
        minimize(obj, np.zeros(6), args=(M0,), method="Nelder-Mead",
                 options={"maxfev": min(per, budget - state["n"]), "xatol": tol, "fatol": tol,
                          "initial_simplex": np.vstack([np.zeros(6), 0.5 * np.eye(6)])})
    # restarts from the incumbent with shrinking simplices
    step = 0.5
    while state["n"] < budget - 50:
        before = state["best"]
        minimize(obj, np.zeros(6), args=(state["M"],), method="Nelder-Mead",
                 options={"maxfev": min(per, budget - state["n"]), "xatol": tol, "fatol": tol,
                          "initial_simplex": np.vstack([np.zeros(6), step * np.eye(6)])})
        if before - state["best"] <= tol:
            if step < 1e-3:
                break
            step /= 4
    best = state["best"]
    if best > scan_val + 1e-7 * max(1.0, abs(scan_val)):
        raise InternalInconsistencyError(f"optimizer {best} worse than scan bound {scan_val}")
    M = state["M"]
    big = np.max(np.abs(M))
    M = M / big
    rep = MobiusRep(complex(M[0, 0]), complex(M[0, 1]), complex(M[1, 0]), complex(M[1, 1]), COMPLEX)
    return MinResResult(math.exp(-best), rep, best, trace, scan_val, state["n"])


# ---------------------------------------------------------------------------
# gauge


@dataclass(frozen=True)
class EpsilonGauge:
    C_d: float
    epsilon: float


def epsilon_from_neg_log(neg_log: float, d: int) -> EpsilonGauge:
    """``eps = 1/(-log(|res|/C_d))``, clamped to 1 when ``|res| > C_d/e``."""
    C = c_d(d)
    denom = neg_log + math.log(C)
    eps = 1.0 if denom <= 1.0 else 1.0 / denom
    return EpsilonGauge(C, eps)


def epsilon_gauge(values: Sequence[MinResResult], d: int) -> list[EpsilonGauge]:
    return [epsilon_from_neg_log(v.neg_log, d) for v in values]


def lojasiewicz_diagnostic(f: RationalMap, mats: Sequence[np.ndarray]) -> dict:
    """Log pairs ``(log min(|det M|,|Res f|), log min(|Res(M.f)|,|Res f|))``.

    Matrices are normalized to unit max entry.  Returns the pairs and a
    least-squares exponent; callers only check the two columns move
    together (a nonnegative fitted slope).
    """
    lres = -neg_log_res(f)
    xs, ys = [], []
    for M in mats:
        M = np.asarray(M, dtype=complex)
        M = M / np.max(np.abs(M))
        ld = math.log(max(abs(np.linalg.det(M)), 1e-300))
        xs.append(min(ld, lres))
        ys.append(min(-neg_log_res(f, M), lres))
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(set(xs)) > 1 else math.nan
    return {"pairs": list(zip(xs, ys)), "slope": slope}
