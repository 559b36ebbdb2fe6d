"""Named applications: the digamma bound functions and the K_v ratio results.

Digamma-type functions are evaluated two ways: through digamma itself (with
the asymptotic series of psi(x + h) - ln x for x >= 12, where the leading
terms are cancelled analytically) and as a ratio of two Laplace transforms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import monorules as mr
from .errors import DomainError, NoBracket, ToleranceNotMet
from .quadrature import (COSH, DEFAULT_CONFIG, DecayClass, KernelSpec, QuadConfig, TransformSpec,
                         integrate)
from .specfun import (P1, P2, P3, Q, Q2, bessel_k_d, bessel_k_scaled, cosh_kernel, digamma,
                      eval_inverse_series, hv_rtilde, kernel_hv, kernel_p1, kernel_p2,
                      kernel_p3, psi_minus_log_coeffs)

NOISE_BAND = 1e-9
TIGHT = QuadConfig(rel_tol=1e-13, abs_tol=1e-300)
DEFAULT_V_GRID = (0.0, 0.1, 0.25, 0.49, 0.51, 0.75, 1.0, 1.5, 2.0, 5.0)
DEFAULT_X_GRID = tuple(float(x) for x in np.geomspace(1e-2, 1e2, 33))
_ASYMPTOTIC_FROM = 12.0


def _check_x(x):
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    return float(x)


# ---------------------------------------------------------------- digamma route

def _from_n(coeffs, x, n):
    """sum_{m >= n} coeffs[m-1] x^(2-m) for 1-based coefficient lists."""
    return eval_inverse_series(coeffs[n - 1:], x, start=n - 2)


@lru_cache(maxsize=None)
def _villarino_coeffs() -> tuple:
    # 2 psi(x+1) - ln(x(x+1)) = sum d_n x^-n
    c = psi_minus_log_coeffs(Fraction(1))
    return tuple(2 * cn - Fraction((-1) ** (n + 1), n) for n, cn in enumerate(c, start=1))


def phi_fn(x: float) -> float:
    """Phi(x) = 1/(psi(x + 1/2) - ln x) - 24 x^2."""
    x = _check_x(x)
    if x < _ASYMPTOTIC_FROM:
        return 1.0 / (digamma(x + 0.5) - math.log(x)) - 24.0 * x * x
    c = psi_minus_log_coeffs(Fraction(1, 2))
    return -24.0 * _from_n(c, x, 3) / eval_inverse_series(c, x)


def alzer_A(x: float) -> float:
    """A(x) = 1/(2 (psi(x + 1) - ln x)) - x."""
    x = _check_x(x)
    if x < _ASYMPTOTIC_FROM:
        return 0.5 / (digamma(x + 1.0) - math.log(x)) - x
    c = psi_minus_log_coeffs(Fraction(1))
    return -eval_inverse_series(c[1:], x, start=1) / eval_inverse_series(c, x)


def villarino_L(x: float) -> float:
    """L(x) = 2/(2 psi(x + 1) - ln(x (x + 1))) - 6 x (x + 1)."""
    x = _check_x(x)
    if x < _ASYMPTOTIC_FROM:
        return 2.0 / (2.0 * digamma(x + 1.0) - math.log(x) - math.log1p(x)) - 6.0 * x * (x + 1.0)
    d = _villarino_coeffs()
    paired = [d[n - 1] + d[n - 2] for n in range(3, len(d) + 1)]
    return -6.0 * eval_inverse_series(paired, x, start=1) / eval_inverse_series(d, x)


def qi_Q(x: float) -> float:
    """Q(x) = 1/(ln x + 1/(2x) - psi(x + 1)) - 12 x^2."""
    x = _check_x(x)
    if x < _ASYMPTOTIC_FROM:
        return 1.0 / (math.log(x) + 0.5 / x - digamma(x + 1.0)) - 12.0 * x * x
    c = psi_minus_log_coeffs(Fraction(1))
    return 12.0 * _from_n(c, x, 3) / -eval_inverse_series(c[1:], x, start=2)


# ---------------------------------------------------------------- Laplace route

def _neg_deriv_kernel(fn, name, order_mix):
    """-(sum_k w_k f^(k)) as a bounded kernel."""
    def ev(t):
        return -sum(w * fn(t, k) for k, w in order_mix)
    return KernelSpec(ev, name, small_t_threshold=2.0, decay=DecayClass.bounded(2.0))


PAIRS = {
    "phi": (Q2.scaled(-24.0, "-24q''"), Q),
    "alzer-a": (_neg_deriv_kernel(kernel_p1, "-p1'", [(1, 1.0)]), P1),
    "villarino-l": (_neg_deriv_kernel(kernel_p2, "-6(p2''+p2')", [(2, 6.0), (1, 6.0)]), P2),
    "qi-q": (_neg_deriv_kernel(kernel_p3, "-12p3''", [(2, 12.0)]), P3),
}


def digamma_pair(name: str) -> tuple:
    """(F, G) transform specs whose ratio is the named function."""
    f, g = PAIRS[name]
    return TransformSpec(f), TransformSpec(g)


def laplace_ratio(name: str, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    F, G = digamma_pair(name)
    x = _check_x(x)
    return integrate(F, x, cfg).value / integrate(G, x, cfg).value


DIGAMMA_ROUTE = {"phi": phi_fn, "alzer-a": alzer_A, "villarino-l": villarino_L, "qi-q": qi_Q}


# ---------------------------------------------------------------- Bessel ratios

def lambda_v(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """Lambda(x) = x + x K_v'(x)/K_v(x), computed as -x D/K."""
    x = _check_x(x)
    return -x * bessel_k_d(v, x, cfg) / bessel_k_scaled(v, x, cfg)


def hv_kernel(v: float, sign: float = -1.0, shift: float = 0.0) -> KernelSpec:
    """(shift + sign h_v(t)) cosh(vt), split for the integrator."""
    v = abs(float(v))

    def core(t):
        return shift + sign * kernel_hv(v, t)

    return KernelSpec(
        eval=lambda t: core(t) * np.cosh(v * t),
        name=f"({shift:g}{'+' if sign > 0 else '-'}h_{v:g})cosh({v:g}t)",
        decay=DecayClass.exponential(v, max(abs(shift) + v + 1.0, 1.0)),
        reduced=lambda t: core(t) * 0.5 * (1.0 + np.exp(-2.0 * v * t)),
    )


def lambda_pair(v: float) -> tuple:
    """(F, G) under the cosh weight with F/G = Lambda and f/g = -h_v."""
    v = abs(float(v))
    return TransformSpec(hv_kernel(v), COSH), TransformSpec(cosh_kernel(v), COSH)


def theta_v(v: float, *, tol: float = 1e-12) -> tuple:
    """(t*, h_v(t*)) at the unique interior critical point of h_v, 0 < v < 1, v != 1/2."""
    v = float(v)
    if not (0 < v < 1) or v == 0.5:
        raise DomainError(f"theta_v needs v in (0, 1) without 1/2, got {v}")
    ts = np.geomspace(1e-3, 200.0, 400)
    r = hv_rtilde(v, ts)
    s = np.sign(r)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    if len(idx) == 0:
        raise NoBracket(f"h_v' has no sign change on [1e-3, 200] for v={v}")
    lo, hi = float(ts[idx[0]]), float(ts[idx[0] + 1])
    slo = np.sign(hv_rtilde(v, lo))
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if np.sign(hv_rtilde(v, mid)) == slo:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    return t_star, float(kernel_hv(v, t_star))


def hv_sup_inf(v: float) -> tuple:
    """(sup h_v, inf h_v) over t > 0."""
    v = abs(float(v))
    if v >= 1:
        return v, 0.5
    if v > 0.5:
        return theta_v(v)[1], 0.5
    if v == 0.5:
        return 0.5, 0.5
    if v > 0:
        return 0.5, theta_v(v)[1]
    return 0.5, 0.0


# ---------------------------------------------------------------- bound sweeps

@dataclass
class BoundSweepReport:
    suite_id: str
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, v, x, lhs, rhs, margin, side, y=None):
        self.rows.append({"suite_id": self.suite_id, "v": float(v), "x": float(x),
                          "y": None if y is None else float(y), "side": side,
                          "lhs": float(lhs), "rhs": float(rhs), "margin": float(margin)})

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r["margin"] < -NOISE_BAND]

    @property
    def inconclusive(self) -> list:
        return [r for r in self.rows if abs(r["margin"]) <= NOISE_BAND]

    @property
    def min_margin(self) -> float:
        return min((r["margin"] for r in self.rows), default=math.nan)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.inconclusive

    def to_dict(self) -> dict:
        return {"suite_id": self.suite_id, "passed": self.passed, "params": self.params,
                "points": len(self.rows), "violations": len(self.violations),
                "inconclusive": len(self.inconclusive), "min_margin": self.min_margin,
                "first_violation": self.violations[0] if self.violations else None,
                "grid": self.rows}


SUITES = ("xdkk", "xdkk-improved", "turan", "kratio")


def _map(fn, items, pool):
    return list(pool.map(fn, items)) if pool is not None else [fn(i) for i in items]


def bound_suite(suite_id: str, v_grid: Sequence[float] = DEFAULT_V_GRID,
                x_grid: Sequence[float] = DEFAULT_X_GRID, *, r1: Optional[float] = None,
                r2: Optional[float] = None, cfg: QuadConfig = TIGHT, pool=None) -> BoundSweepReport:
    """Check one family of K_v inequalities on a (v, x) grid.

    Suites: ``xdkk`` (two-sided bound of x K'/K), ``xdkk-improved`` (square
    root lower bound), ``turan`` (K_v^2 - K_{v-1} K_{v+1} against -K_v^2/x,
    direction by |v| vs 1/2) and ``kratio`` (K_v(x)/K_v(y) between
    exp(y - x)(y/x)^r1 and exp(y - x)(y/x)^r2 for x < y).  ``r1``/``r2``
    default to min(|v|, 1/2) and max(|v|, 1/2).  ``pool`` may be an executor
    whose ordered ``map`` is used for the per-point work.
    """
    if suite_id not in SUITES:
        raise DomainError(f"unknown suite {suite_id!r}; choose from {SUITES}")
    rep = BoundSweepReport(suite_id, params={"v_grid": list(map(float, v_grid)),
                                             "x_grid": list(map(float, x_grid)),
                                             "r1": r1, "r2": r2, "rel_tol": cfg.rel_tol})
    points = [(float(v), float(x)) for v in v_grid for x in x_grid]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        if suite_id in ("xdkk", "xdkk-improved"):
            lams = _map(lambda p: lambda_v(p[0], p[1], cfg), points, pool)
            for (v, x), lam in zip(points, lams):
                lo, hi = max(abs(v), 0.5), min(abs(v), 0.5)
                ratio = lam - x
                if suite_id == "xdkk":
                    rep.add(v, x, -x - lo, ratio, lam + lo, "lower")
                    rep.add(v, x, ratio, -x - hi, -hi - lam, "upper")
                else:
                    root = math.sqrt(x * x + x + lo * lo)
                    rep.add(v, x, -root, ratio, lam + (x + lo * lo) / (root + x), "lower")
        elif suite_id == "turan":
            def turan(p):
                v, x = p
                k = bessel_k_scaled(v, x, cfg)
                return bessel_k_scaled(v - 1, x, cfg) * bessel_k_scaled(v + 1, x, cfg) / (k * k)
            ts = _map(turan, points, pool)
            for (v, x), t in zip(points, ts):
                # normalized by K_v^2: 1 - T against -1/x
                left, right = 1.0 - t, -1.0 / x
                if abs(v) > 0.5:
                    rep.add(v, x, right, left, (1.0 + 1.0 / x) - t, "gt")
                elif abs(v) < 0.5:
                    rep.add(v, x, left, right, t - (1.0 + 1.0 / x), "lt")
        else:
            logk = dict(zip(points, _map(lambda p: math.log(bessel_k_scaled(p[0], p[1], cfg)),
                                         points, pool)))
            for v in map(float, v_grid):
                a = min(abs(v), 0.5) if r1 is None else r1
                b = max(abs(v), 0.5) if r2 is None else r2
                xs = [float(x) for x in x_grid]
                for i, x in enumerate(xs):
                    for y in xs[i + 1:]:
                        # ln(K(x)/K(y)) - (y - x) against r ln(y/x)
                        ell = logk[(v, x)] - logk[(v, y)]
                        ly = math.log(y / x)
                        rep.add(v, x, a * ly, ell, ell - a * ly, "lower", y)
                        rep.add(v, x, ell, b * ly, b * ly - ell, "upper", y)
    return rep


# ---------------------------------------------------------------- corollaries

def xr_ex_kv_monotonicity(v: float, r: float, grid: Sequence[float] = DEFAULT_X_GRID,
                          cfg: QuadConfig = DEFAULT_CONFIG) -> mr.MonotoneVerdict:
    """Shape of x^r e^x K_v(x) from the sign of r + Lambda(x) (its log-derivative times x)."""
    xs = [float(x) for x in grid]
    phis = [r + lambda_v(v, x, cfg) for x in xs]
    ev = tuple((x, p, p / x) for x, p in zip(xs, phis))
    signs = [0 if abs(p) <= NOISE_BAND else (1 if p > 0 else -1) for p in phis]
    nz = [(i, s) for i, s in enumerate(signs) if s]
    changes = [(i, j) for (i, s), (j, u) in zip(nz, nz[1:]) if s != u]
    notes = (f"phi(x) = r + x + x K_v'/K_v with r={r}, v={v}",)
    if not changes:
        if all(s >= 0 for s in signs):
            return mr.MonotoneVerdict(mr.INCREASING, evidence=ev, notes=notes)
        if all(s <= 0 for s in signs):
            return mr.MonotoneVerdict(mr.DECREASING, evidence=ev, notes=notes)
    i, j = changes[0]
    lo, hi = xs[i], xs[j]
    s_lo = signs[i]
    for _ in range(80):
        mid = math.sqrt(lo * hi)
        if (r + lambda_v(v, mid, cfg)) * s_lo > 0:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-12:
            break
    kind = mr.UNIMODAL_MIN if s_lo < 0 else mr.UNIMODAL_MAX
    return mr.MonotoneVerdict(kind, x_star=math.sqrt(lo * hi), evidence=ev,
                              sign_changes=len(changes), notes=notes)


def p_lambda(v: float, lam: float, x: float, cfg: QuadConfig = TIGHT) -> float:
    """P_lambda(x) = (x + lambda) e^x K_v(x) + x e^x K_v'(x) as one cosh-weighted integral."""
    spec = TransformSpec(hv_kernel(v, sign=-1.0, shift=lam), COSH)
    return integrate(spec, _check_x(x), cfg, scaled=True).value


CM_GRID = (0.5, 1.0, 2.0, 5.0)
# sign loss near a threshold shows only at the ends: small x probes large t, large x small t
PROBE_GRID = (0.01, 0.05, 0.5, 1.0, 2.0, 5.0, 50.0, 200.0, 1000.0)


def p_lambda_cm(v: float, lam: float, *, order: int = 6, grid: Sequence[float] = CM_GRID,
                cfg: QuadConfig = TIGHT, probe_offset: float = 0.05,
                probe_grid: Sequence[float] = PROBE_GRID) -> dict:
    """CM evidence for P_lambda and -P_lambda with the threshold table.

    P_lambda is CM iff lambda >= sup h_v and -P_lambda is CM iff
    lambda <= inf h_v.  The boundary probes evaluate both sides of each
    threshold at +/- ``probe_offset``.
    """
    v = abs(float(v))
    sup_h, inf_h = hv_sup_inf(v)

    def run(lmb, sign, xs=grid):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ToleranceNotMet)
            return mr.cm_check(lambda x: sign * p_lambda(v, lmb, x, cfg), order, xs)

    pos, neg = run(lam, 1.0), run(lam, -1.0)
    probes = {
        "P_above_sup": run(sup_h + probe_offset, 1.0, probe_grid).passed,
        "P_below_sup": run(sup_h - probe_offset, 1.0, probe_grid).passed,
        "negP_below_inf": run(inf_h - probe_offset, -1.0, probe_grid).passed,
        "negP_above_inf": run(inf_h + probe_offset, -1.0, probe_grid).passed,
    }
    return {
        "v": v, "lambda": lam, "order": order, "grid": list(grid), "probe_grid": list(probe_grid),
        "cm_threshold": sup_h, "neg_cm_threshold": inf_h,
        "expected_P_cm": lam >= sup_h, "expected_negP_cm": lam <= inf_h,
        "P_cm": pos.passed, "negP_cm": neg.passed,
        "P_report": pos.to_dict(), "negP_report": neg.to_dict(),
        "boundary_probes": probes,
    }


def sqrt_ex_kv(v: float, cfg: QuadConfig = TIGHT):
    """x -> sqrt(x) e^x K_v(x)."""
    return lambda x: math.sqrt(x) * bessel_k_scaled(v, x, cfg)
