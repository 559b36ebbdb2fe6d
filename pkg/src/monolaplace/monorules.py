"""Monotonicity rules for ratios of Laplace-type transforms.

Given F = T[f] and G = T[g] (same weight, same interval, g > 0) the shape of
F/G follows from the shape of f/g:

* f/g monotone            -> F/G monotone in the opposite direction;
* f/g up-then-down (cap)  -> F/G decreasing iff H_{F,G}(0+) >= 0, otherwise
                             it rises to a maximum at some x* and then falls;
* f/g down-then-up (cup)  -> mirrored.

where H_{F,G} = (F'/G') G - F.  Everything numeric here is evidence, not
proof; the polynomial routines work in exact rationals when given them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (DivisionDegenerate, LimitNotDetected, NonConvergent, PatternViolated,
                     SequencePatternViolated, ShapeHintViolated, ToleranceNotMet)
from .quadrature import (DEFAULT_CONFIG, _shift, QuadConfig, TransformSpec, integrate,
                         integrate_function, transform_derivative)

INCREASING = "Increasing"
DECREASING = "Decreasing"
UNIMODAL_MAX = "UnimodalMax"
UNIMODAL_MIN = "UnimodalMin"
INDETERMINATE = "Indeterminate"

POSITIVE, NEGATIVE, ZERO, UNRESOLVED = "Positive", "Negative", "Zero", "Unresolved"

SHAPE_GRID = np.geomspace(1e-4, 1e4, 256)
EVIDENCE_GRID = np.geomspace(1e-2, 1e2, 64)
H_ZERO_BAND = 1e-6
H_LEVELS = 9
H_MAX_DEPTH = 40


@dataclass(frozen=True)
class MonotoneVerdict:
    kind: str
    h_zero_sign: str = UNRESOLVED
    x_star: Optional[float] = None
    h_zero_value: Optional[float] = None
    evidence: tuple = ()
    sign_changes: int = 0
    notes: tuple = ()

    def __post_init__(self):
        if self.kind in (UNIMODAL_MAX, UNIMODAL_MIN) and not (self.x_star and self.x_star > 0):
            raise ValueError("unimodal verdicts need x_star > 0")

    @property
    def determinate(self) -> bool:
        return self.kind != INDETERMINATE

    @property
    def multiple_turning_points(self) -> bool:
        return self.sign_changes > 1

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x_star": self.x_star,
            "h_zero_sign": self.h_zero_sign,
            "h_zero_value": self.h_zero_value,
            "sign_changes": self.sign_changes,
            "multiple_turning_points": self.multiple_turning_points,
            "notes": list(self.notes),
            "evidence": [{"x": x, "ratio": r, "dratio": d} for x, r, d in self.evidence],
        }


@dataclass(frozen=True)
class ShapeHint:
    """Declared shape of f/g: ``monotone`` or ``unimodal`` (cap or cup)."""

    kind: str = "monotone"
    t_star_hint: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("monotone", "unimodal"):
            raise ValueError(f"unknown shape hint {self.kind!r}")

    @classmethod
    def unimodal(cls, t_star_hint: Optional[float] = None) -> "ShapeHint":
        return cls("unimodal", t_star_hint)


MONOTONE = ShapeHint()


@dataclass(frozen=True)
class SignChangeReport:
    pattern: str
    t0: Optional[float] = None
    first_positive_index: Optional[int] = None
    first_negative_index: Optional[int] = None
    value_at_r: Optional[float] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


# ---------------------------------------------------------------- H function

def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def transform_pair_values(F: TransformSpec, G: TransformSpec, x: float,
                          cfg: QuadConfig = DEFAULT_CONFIG) -> tuple:
    """(F, F', G, G') at x, all carrying the same exp(x mu(a)) scaling."""
    return (integrate(F, x, cfg, scaled=True).value,
            transform_derivative(F, x, 1, cfg, scaled=True),
            integrate(G, x, cfg, scaled=True).value,
            transform_derivative(G, x, 1, cfg, scaled=True))


def _h_from(f, df, g, dg):
    if not abs(dg) > 1e-300:
        raise DivisionDegenerate("G'(x) vanishes numerically")
    return df / dg * g - f


def aux_H(F: TransformSpec, G: TransformSpec, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """H_{F,G}(x) = (F'/G') G - F from analytic transform derivatives."""
    f, df, g, dg = transform_pair_values(F, G, x, cfg)
    h = _h_from(f, df, g, dg)
    shift = _shift(F.weight, F.interval[0]) + F.weight.mu0
    return h * math.exp(-x * shift) if shift else h


def ratio_and_derivative(F, G, x, cfg=DEFAULT_CONFIG) -> tuple:
    f, df, g, dg = transform_pair_values(F, G, x, cfg)
    r = f / g
    dr = (df * g - f * dg) / (g * g)
    noise = 1e-8 * (abs(df * g) + abs(f * dg)) / (g * g)
    return r, dr, noise


def _aitken(seq):
    out = []
    for a, b, c in zip(seq, seq[1:], seq[2:]):
        den = c - 2 * b + a
        out.append(c if den == 0 else c - (c - b) ** 2 / den)
    return out


def _window_estimate(hs, band):
    """(estimate, converged) from iterated Aitken on one window of H samples."""
    levels = [hs]
    while len(levels[-1]) >= 3:
        levels.append(_aitken(levels[-1]))
    finals = [lvl[-1] for lvl in levels if lvl]
    est, prev = finals[-1], finals[-2]
    mags = np.abs(hs[-5:])
    settled = bool(np.all(np.diff(mags) <= 0) or np.all(np.diff(mags) >= 0))
    converged = math.isfinite(est) and settled and abs(est - prev) <= max(band, 0.1 * abs(est))
    return est, converged


def h_sign_at_zero(F: TransformSpec, G: TransformSpec, cfg: QuadConfig = DEFAULT_CONFIG,
                   *, x0: float = 1.0, levels: int = H_LEVELS,
                   max_depth: int = H_MAX_DEPTH) -> tuple:
    """Sign and extrapolated value of H_{F,G}(0+).

    H is sampled at x0 2^-k on a window of ``levels`` consecutive k and
    extrapolated by repeated Aitken acceleration.  If the window has not yet
    reached its asymptotic regime (|H| not monotone, or the last two
    accelerated values disagree, or two windows 4 levels apart disagree) the
    window slides deeper, down to k = ``max_depth``.  A value inside 1e-6 (|F(x0)| + |G(x0)|) is Zero; a
    geometrically growing sequence returns its sign with value None.
    """
    tight = cfg.tightened(1e-13)
    cache = {}

    def h_at(k):
        if k not in cache:
            cache[k] = _h_from(*transform_pair_values(F, G, x0 * 2.0 ** -k, tight))
        return cache[k]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        scale = abs(integrate(F, x0, tight, scaled=True).value) + abs(integrate(G, x0, tight, scaled=True).value)
        band = H_ZERO_BAND * scale
        est, previous = None, None
        for k0 in range(0, max_depth - levels + 2, 4):
            hs = [h_at(k) for k in range(k0, k0 + levels)]
            tail = np.abs(hs[-4:])
            if np.all(tail[1:] > 1.5 * tail[:-1]) and len({_sign(h) for h in hs[-4:]}) == 1:
                return (POSITIVE if hs[-1] > 0 else NEGATIVE), None
            est, converged = _window_estimate(hs, band)
            agree = (converged and previous is not None
                     and abs(est - previous) <= max(band, 0.1 * abs(est)))
            previous = est if converged else None
            if agree:
                if abs(est) < band:
                    return ZERO, est
                return (POSITIVE if est > 0 else NEGATIVE), est
    if previous is not None and abs(previous) < band:
        # deepest window converged inside the band even without a partner
        return ZERO, previous
    if est is not None and math.isfinite(est):
        return UNRESOLVED, est
    return UNRESOLVED, None


# ---------------------------------------------------------------- discretization

def discretize_ratio(f, g, a: float, b: float, n: int, x: float) -> tuple:
    """Riemann-sum ratio sum f(t_i) y^i / sum g(t_i) y^i, t_i = a + (b-a) i/n.

    Returns (ratio, y) with y = exp(-(b - a) x / n).
    """
    from .errors import DomainError
    if not (0 < a < b < math.inf):
        raise DomainError(f"need 0 < a < b < inf, got ({a}, {b})")
    if n < 2:
        raise DomainError("n must be >= 2")
    if not x > 0:
        raise DomainError("x must be positive")
    i = np.arange(n)
    t = a + (b - a) * i / n
    y = math.exp(-(b - a) * x / n)
    w = np.exp(-(b - a) * x * i / n)
    fv = np.asarray(f(t), dtype=float)
    gv = np.asarray(g(t), dtype=float)
    if np.any(gv <= 0):
        raise DomainError("g must be positive on [a, b]")
    return float(np.dot(fv, w) / np.dot(gv, w)), y


# ---------------------------------------------------------------- shape validation

def _kernel_ratio(F: TransformSpec, G: TransformSpec, kernel_ratio, ts):
    if kernel_ratio is not None:
        return np.asarray(kernel_ratio(ts), dtype=float)
    with np.errstate(all="ignore"):
        fv = np.asarray(F.kernel(ts), dtype=float)
        gv = np.asarray(G.kernel(ts), dtype=float)
        if np.any(gv[np.isfinite(gv)] <= 0):
            raise ShapeHintViolated("g must be positive")
        return fv / gv


def _shape_grid(F: TransformSpec) -> np.ndarray:
    a, b = F.interval
    if math.isfinite(b):
        return np.linspace(a, b, 258)[1:-1]
    return SHAPE_GRID


def _steps(vals: np.ndarray) -> np.ndarray:
    vals = vals[np.isfinite(vals)]
    if len(vals) < 3:
        raise ShapeHintViolated("too few finite samples of f/g")
    d = np.diff(vals)
    flat = 1e-12 * max(np.max(np.abs(vals)), 1e-300)
    return np.where(np.abs(d) <= flat, 0, np.sign(d)).astype(int)


def detect_shape(vals: np.ndarray) -> str:
    """'constant', 'increasing', 'decreasing', 'cap' or 'cup'; one inversion tolerated."""
    s = _steps(vals)
    s = s[s != 0]
    if len(s) == 0:
        return "constant"
    if np.sum(s < 0) <= 1 and np.sum(s > 0) > 1:
        return "increasing"
    if np.sum(s > 0) <= 1 and np.sum(s < 0) > 1:
        return "decreasing"
    for first, name in ((1, "cap"), (-1, "cup")):
        best = min(
            int(np.sum(s[:k] != first) + np.sum(s[k:] != -first)) for k in range(1, len(s))
        )
        if best <= 1:
            return name
    return "irregular"


# ---------------------------------------------------------------- classification

def _scan(F, G, grid, cfg):
    ev, signs = [], []
    for x in grid:
        r, dr, noise = ratio_and_derivative(F, G, float(x), cfg)
        ev.append((float(x), r, dr))
        signs.append(0 if abs(dr) <= noise else _sign(dr))
    return ev, signs


def _changes(signs):
    nz = [(i, s) for i, s in enumerate(signs) if s]
    return [(i, j) for (i, s), (j, u) in zip(nz, nz[1:]) if s != u]


def _bisect_turn(F, G, lo, hi, cfg, iters=60):
    slo = _sign(ratio_and_derivative(F, G, lo, cfg)[1])
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        s = _sign(ratio_and_derivative(F, G, mid, cfg)[1])
        if s == slo:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-10:
            break
    return math.sqrt(lo * hi)


def classify_ratio(F: TransformSpec, G: TransformSpec, hint: ShapeHint = MONOTONE,
                   cfg: QuadConfig = DEFAULT_CONFIG, *, kernel_ratio: Optional[Callable] = None,
                   grid: Sequence[float] = EVIDENCE_GRID) -> MonotoneVerdict:
    """Shape of x -> F(x)/G(x) on (0, inf) from the shape of f/g and H_{F,G}(0+).

    ``kernel_ratio`` may supply f/g directly when the separate kernels
    overflow (e.g. cosh-type kernels at large t).
    """
    shape = detect_shape(_kernel_ratio(F, G, kernel_ratio, _shape_grid(F)))
    if shape == "constant":
        return MonotoneVerdict(INDETERMINATE, ZERO, h_zero_value=0.0,
                               notes=("f/g is constant, so F/G is constant",))
    if hint.kind == "monotone" and shape not in ("increasing", "decreasing"):
        raise ShapeHintViolated(f"f/g declared monotone but sampled shape is {shape}")
    if hint.kind == "unimodal" and shape not in ("cap", "cup"):
        raise ShapeHintViolated(f"f/g declared unimodal but sampled shape is {shape}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        ev, signs = _scan(F, G, grid, cfg)
    changes = _changes(signs)
    notes = [f"f/g shape: {shape}"]

    if shape in ("increasing", "decreasing"):
        try:
            hs, hv = h_sign_at_zero(F, G, cfg)
        except (NonConvergent, DivisionDegenerate):
            hs, hv = UNRESOLVED, None
        kind = DECREASING if shape == "increasing" else INCREASING
        want = -1 if kind == DECREASING else 1
        if any(s == -want for s in signs):
            notes.append("derivative scan contradicts the predicted direction")
            return MonotoneVerdict(INDETERMINATE, hs, None, hv, tuple(ev), len(changes), tuple(notes))
        return MonotoneVerdict(kind, hs, None, hv, tuple(ev), len(changes), tuple(notes))

    hs, hv = h_sign_at_zero(F, G, cfg)
    if hs == UNRESOLVED:
        notes.append("H(0+) sign unresolved")
        return MonotoneVerdict(INDETERMINATE, hs, None, hv, tuple(ev), len(changes), tuple(notes))
    if shape == "cap":
        monotone = hs in (POSITIVE, ZERO)
        kind, turn, lead = (DECREASING, None, None) if monotone else (None, UNIMODAL_MAX, 1)
    else:
        monotone = hs in (NEGATIVE, ZERO)
        kind, turn, lead = (INCREASING, None, None) if monotone else (None, UNIMODAL_MIN, -1)

    if monotone:
        want = -1 if kind == DECREASING else 1
        if any(s == -want for s in signs):
            notes.append("derivative scan contradicts the predicted direction")
        return MonotoneVerdict(kind, hs, None, hv, tuple(ev), len(changes), tuple(notes))

    if not changes:
        wide = np.geomspace(1e-4, 1e4, 96)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ToleranceNotMet)
            ev2, signs2 = _scan(F, G, wide, cfg)
        changes, ev, signs = _changes(signs2), ev2, signs2
    if not changes:
        notes.append("no turning point located on the scan grid")
        return MonotoneVerdict(INDETERMINATE, hs, None, hv, tuple(ev), 0, tuple(notes))
    i, j = changes[0]
    if signs[i] != lead:
        notes.append("first derivative sign change has the wrong orientation")
    x_star = _bisect_turn(F, G, ev[i][0], ev[j][0], cfg)
    if len(changes) > 1:
        notes.append(f"{len(changes)} sign changes of (F/G)' found; first one reported")
    return MonotoneVerdict(turn, hs, x_star, hv, tuple(ev), len(changes), tuple(notes))


# ---------------------------------------------------------------- limits

def _tail_limit(ts, vals):
    vals = [v for v in vals if math.isfinite(v)]
    if len(vals) < 3:
        raise LimitNotDetected("not enough finite samples")
    d = np.diff(vals)
    if np.any(np.sign(d[1:]) * np.sign(d[:-1]) < 0) and np.max(np.abs(d)) > 1e-9 * (1 + abs(vals[-1])):
        raise LimitNotDetected("samples oscillate")
    if abs(d[-1]) > abs(d[-2]) * 1.01 and abs(d[-1]) > 1e-9 * (1 + abs(vals[-1])):
        raise LimitNotDetected("samples grow without bound")
    if abs(d[-1]) <= 1e-6 * (1 + abs(vals[-1])):
        return float(vals[-1])
    acc = _aitken(vals[-3:])[0]
    if abs(acc - vals[-1]) > 1e-3 * (1 + abs(vals[-1])):
        raise LimitNotDetected("samples converge too slowly")
    return float(acc)


@dataclass(frozen=True)
class RatioLimits:
    at_zero: float
    at_inf: float
    probes: tuple = ()

    def __iter__(self):
        return iter((self.at_zero, self.at_inf))

    def to_dict(self):
        return {"limit_at_0": self.at_zero, "limit_at_inf": self.at_inf,
                "probes": [dict(zip(("x", "transform_ratio", "kernel_limit", "abs_diff"), p))
                           for p in self.probes]}


def ratio_limits(F: TransformSpec, G: TransformSpec, cfg: QuadConfig = DEFAULT_CONFIG,
                 *, kernel_ratio: Optional[Callable] = None,
                 probes: Sequence[float] = (1e-3, 1e3)) -> RatioLimits:
    """lim_{x->0+} F/G and lim_{x->inf} F/G from the kernels.

    On (0, inf): the limits are f/g at t -> inf and t -> 0+.  On a finite
    [a, b]: int f / int g and f(a)/g(a).  Transform values at ``probes`` are
    attached for comparison.
    """
    a, b = F.interval
    if math.isfinite(b):
        fi = integrate_function(lambda t: F.kernel(t), a, b, cfg).value
        gi = integrate_function(lambda t: G.kernel(t), a, b, cfg).value
        at0 = fi / gi
        atinf = float(_kernel_ratio(F, G, kernel_ratio, np.array([a]))[0]) if a > 0 else \
            _tail_limit(None, list(_kernel_ratio(F, G, kernel_ratio, np.geomspace(1e-3, 1e-8, 6))))
    else:
        big = np.geomspace(1e3, 1e8, 6)
        small = np.geomspace(1e-3, 1e-8, 6)
        at0 = _tail_limit(big, list(_kernel_ratio(F, G, kernel_ratio, big)))
        atinf = _tail_limit(small, list(_kernel_ratio(F, G, kernel_ratio, small)))
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ToleranceNotMet)
        for x in probes:
            r = integrate(F, x, cfg, scaled=True).value / integrate(G, x, cfg, scaled=True).value
            lim = at0 if x < 1 else atinf
            out.append((x, r, lim, abs(r - lim)))
    return RatioLimits(at0, atinf, tuple(out))


# ---------------------------------------------------------------- polynomials

def _poly(coeffs, t, order=None):
    idx = range(len(coeffs)) if order is None else order
    return sum((coeffs[k] * t ** k for k in idx), type(t)(0) if isinstance(t, Fraction) else 0.0)


def _dpoly(coeffs, t, order=None):
    idx = range(1, len(coeffs)) if order is None else [k for k in order if k >= 1]
    return sum((k * coeffs[k] * t ** (k - 1) for k in idx), type(t)(0) if isinstance(t, Fraction) else 0.0)


def poly_H(a, b, t, order=None):
    """H_{A,B}(t) = (A'/B') B - A."""
    return _dpoly(a, t, order) / _dpoly(b, t, order) * _poly(b, t, order) - _poly(a, t, order)


def _exactify(c):
    return [x if isinstance(x, (int, Fraction)) else Fraction(x) for x in c]


def poly_ratio_verdict(a_coeffs: Sequence, b_coeffs: Sequence, r, *,
                       eval_order: Optional[Sequence[int]] = None) -> MonotoneVerdict:
    """Shape of A/B on (0, r) for polynomials with b_k > 0 and unimodal a_k/b_k.

    Coefficients and r are converted to exact rationals; H is evaluated at r
    exactly and the turning point, when there is one, is bisected exactly.
    """
    if len(a_coeffs) != len(b_coeffs) or len(a_coeffs) < 2:
        raise SequencePatternViolated("coefficient lists must have equal length >= 2")
    a, b = _exactify(a_coeffs), _exactify(b_coeffs)
    r = Fraction(r)
    if r <= 0:
        raise SequencePatternViolated("r must be positive")
    if any(x <= 0 for x in b):
        raise SequencePatternViolated("all b_k must be positive")
    q = [x / y for x, y in zip(a, b)]
    if all(x == q[0] for x in q):
        return MonotoneVerdict(INDETERMINATE, ZERO, h_zero_value=0.0,
                               notes=("a_k/b_k constant: A/B is constant",))
    shape = detect_shape(np.array([float(x) for x in q])) if len(q) > 2 else "irregular"
    # exact re-check of the unimodal pattern
    steps = [_sign(y - x) for x, y in zip(q, q[1:])]
    nz = [s for s in steps if s]
    flips = sum(1 for s, u in zip(nz, nz[1:]) if s != u)
    if flips != 1:
        raise SequencePatternViolated(
            f"a_k/b_k must rise then fall or fall then rise, got step signs {steps}")
    cap = nz[0] > 0
    h_r = poly_H(a, b, r, eval_order)
    hs = POSITIVE if h_r > 0 else NEGATIVE if h_r < 0 else ZERO
    ts = [float(r) * k / 32 for k in range(1, 32)]
    ev = []
    for t in ts:
        A, B = _poly(a, Fraction(t)), _poly(b, Fraction(t))
        dA, dB = _dpoly(a, Fraction(t)), _dpoly(b, Fraction(t))
        ev.append((t, float(A / B), float((dA * B - A * dB) / B ** 2)))
    notes = [f"a_k/b_k shape: {'cap' if cap else 'cup'}", f"H(r-) = {h_r}"]
    if cap and h_r >= 0:
        return MonotoneVerdict(INCREASING, hs, None, float(h_r), tuple(ev), 0, tuple(notes))
    if not cap and h_r <= 0:
        return MonotoneVerdict(DECREASING, hs, None, float(h_r), tuple(ev), 0, tuple(notes))
    # H starts with the sign of the leading step and flips once before r
    lo, hi = Fraction(0), r
    s_hi = _sign(h_r)
    for _ in range(64):
        mid = (lo + hi) / 2
        if _sign(poly_H(a, b, mid, eval_order)) == s_hi:
            hi = mid
        else:
            lo = mid
        # keep denominators small
        lo, hi = lo.limit_denominator(1 << 62), hi.limit_denominator(1 << 62)
    t0 = float((lo + hi) / 2)
    kind = UNIMODAL_MAX if cap else UNIMODAL_MIN
    return MonotoneVerdict(kind, hs, t0, float(h_r), tuple(ev), 1, tuple(notes))


# ---------------------------------------------------------------- series sign

def series_sign_change(coeffs: Sequence, r=math.inf) -> SignChangeReport:
    """Sign of S(t) = sum_k c_k t^k on (0, r) for a (-,...,-,+,...,+) coefficient pattern.

    The mirrored pattern (+ block then - block) is handled by negation.
    ``coeffs[k]`` multiplies t^k; zero entries are ignored for the pattern.
    """
    c = list(coeffs)
    signs = [(k, _sign(x)) for k, x in enumerate(c) if x != 0]
    if not signs:
        raise PatternViolated("all coefficients are zero")
    seq = [s for _, s in signs]
    flips = sum(1 for s, u in zip(seq, seq[1:]) if s != u)
    if flips > 1:
        raise PatternViolated("coefficients change sign more than once")
    first_pos = next((k for k, s in signs if s > 0), None)
    first_neg = next((k for k, s in signs if s < 0), None)
    if flips == 0:
        pattern = "AllPositive" if seq[0] > 0 else "AllNegative"
        return SignChangeReport(pattern, None, first_pos, first_neg)
    mirrored = seq[0] > 0
    cc = [-x for x in c] if mirrored else c

    def S(t):
        acc = 0.0
        for x in reversed(cc):
            acc = acc * t + float(x)
        return acc

    if math.isfinite(r):
        if all(isinstance(x, (int, Fraction)) for x in cc) and isinstance(r, (int, Fraction)):
            s_r = sum(Fraction(x) * Fraction(r) ** k for k, x in enumerate(cc))
        else:
            s_r = S(float(r))
        s_r = float(s_r)
        if s_r <= 0:
            pattern = "AllPositive" if mirrored else "AllNegative"
            return SignChangeReport(pattern, None, first_pos, first_neg, -s_r if mirrored else s_r)
        hi = float(r)
    else:
        s_r = math.inf
        hi = 1.0
        while S(hi) <= 0:
            hi *= 2.0
            if hi > 1e300:
                raise PatternViolated("no positive value found for S")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if S(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * hi:
            break
    return SignChangeReport("SingleCrossing", 0.5 * (lo + hi), first_pos, first_neg,
                            -s_r if mirrored else s_r)


# ---------------------------------------------------------------- CM check

@dataclass(frozen=True)
class CMReport:
    mode: str
    order: int
    passed: bool
    violations: tuple
    checked: int
    table: tuple = ()

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None

    def to_dict(self):
        return {"mode": self.mode, "order": self.order, "passed": self.passed,
                "checked": self.checked,
                "violations": [dict(zip(("n", "x", "value", "band"), v)) for v in self.violations],
                "table": [dict(zip(("n", "x", "value", "band"), v)) for v in self.table]}


def cm_check(F: Callable[[float], float], order: int, grid: Sequence[float],
             h: Optional[float] = None, *, mode: str = "cm", noise: float = 1e-9) -> CMReport:
    """Sign test of forward differences of F.

    ``mode='cm'``: (-1)^n D_h^n F(x) >= 0 for 0 <= n <= order.
    ``mode='bernstein'``: F >= 0 and (-1)^(n-1) D_h^n F(x) >= 0 for n >= 1.
    A value counts as a violation only beyond ``noise * |F(x)|``.
    Step defaults to max(0.05 x, 1e-3).
    """
    if not 0 <= order <= 8:
        raise ValueError("order must be in 0..8")
    if mode not in ("cm", "bernstein"):
        raise ValueError("mode must be 'cm' or 'bernstein'")
    viol, table = [], []
    for x in grid:
        x = float(x)
        step = h if h is not None else max(0.05 * x, 1e-3)
        vals = [float(F(x + k * step)) for k in range(order + 1)]
        band = noise * abs(vals[0])
        for n in range(order + 1):
            diff = sum((-1) ** (n - k) * comb(n, k) * vals[k] for k in range(n + 1))
            sgn = (-1) ** n if mode == "cm" or n == 0 else (-1) ** (n - 1)
            val = sgn * diff
            table.append((n, x, val, band))
            if val < -band:
                viol.append((n, x, val, band))
    return CMReport(mode, order, not viol, tuple(viol), len(table), tuple(table))
