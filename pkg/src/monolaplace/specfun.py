"""Special functions and kernels: digamma, K_v by its cosh integral, q, p1, p2, p3, h_v.

The kernels q, p1, p2, p3 have removable singularities at t = 0 and their
closed forms lose digits to cancellation there, so each one switches to a
Maclaurin series (exact rational coefficients built from Bernoulli numbers)
below ``SERIES_THRESHOLD``.  Above it the closed forms are written in terms
of exp(-t) so nothing overflows for large t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .errors import DomainError
from .quadrature import (COSH, DEFAULT_CONFIG, DecayClass, KernelSpec, QuadConfig,
                         TransformSpec, integrate, transform_derivative)

SERIES_THRESHOLD = 2.0
SERIES_TERMS = 40
V_MAX = 50.0
X_MIN, X_MAX = 1e-3, 1e3


# ---------------------------------------------------------------- Bernoulli

@lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple:
    # Akiyama-Tanigawa, B_1 = +1/2 convention
    out = []
    a = []
    for m in range(n + 1):
        a.append(Fraction(1, m + 1))
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return tuple(out)


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n < 0:
        raise DomainError("n must be >= 0")
    b = _bernoulli_table(max(n, 1))[n]
    return -b if n == 1 else b


def bernoulli_poly(n: int, h) -> Fraction:
    """B_n(h) = sum_k C(n,k) B_k h^(n-k), exact for rational h."""
    h = Fraction(h)
    return sum(comb(n, k) * bernoulli(k) * h ** (n - k) for k in range(n + 1))


# ---------------------------------------------------------------- digamma

_DIGAMMA_SHIFT = 12.0
_DIGAMMA_ASY = [float(bernoulli(2 * k) / (2 * k)) for k in range(1, 9)]


def digamma(x: float) -> float:
    """psi(x) for x > 0 via upward recurrence and the Stirling-type series."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise DomainError(f"digamma needs x > 0, got {x}")
    acc = []
    while x < _DIGAMMA_SHIFT:
        acc.append(1.0 / x)
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    for c in reversed(_DIGAMMA_ASY):
        tail = (tail + c) * inv2
    return math.log(x) - 0.5 / x - tail - math.fsum(acc)


@lru_cache(maxsize=None)
def psi_minus_log_coeffs(h: Fraction, nterms: int = 20) -> tuple:
    """Coefficients c_n with psi(x + h) - ln x ~ sum_{n>=1} c_n / x^n."""
    h = Fraction(h)
    return tuple(-(-1) ** n * bernoulli_poly(n, h) / n for n in range(1, nterms + 1))


def eval_inverse_series(coeffs, x: float, start: int = 1) -> float:
    """sum_k coeffs[k] / x^(k + start), Horner in 1/x."""
    u = 1.0 / x
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + float(c)
    return acc * u ** start


def psi_minus_log(x: float, h=Fraction(0)) -> float:
    """psi(x + h) - ln x without cancellation for large x."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if x >= _DIGAMMA_SHIFT:
        return eval_inverse_series(psi_minus_log_coeffs(Fraction(h)), x)
    return digamma(x + float(h)) - math.log(x)


# ---------------------------------------------------------------- series branches

@dataclass(frozen=True)
class SeriesBranch:
    """Maclaurin polynomial sum_k coefficients[k] t^k used below ``threshold``."""

    threshold: float
    coefficients: tuple
    remainder_bound: float

    def __call__(self, t, deriv: int = 0):
        c = np.array([float(x) for x in self.coefficients])
        for _ in range(deriv):
            c = np.polynomial.polynomial.polyder(c)
        return np.polynomial.polynomial.polyval(t, c)


def _branch(coeffs, threshold=SERIES_THRESHOLD) -> SeriesBranch:
    coeffs = tuple(coeffs)
    last = max(abs(float(c)) for c in coeffs[-4:])
    return SeriesBranch(threshold, coeffs, last * threshold ** len(coeffs))


def _odd_series(gen, nterms):
    out = [Fraction(0)] * (2 * nterms)
    for n in range(1, nterms + 1):
        out[2 * n - 1] = gen(n)
    return out


@lru_cache(maxsize=None)
def _q_series() -> SeriesBranch:
    def alpha(n):
        c = -2 * (2 ** (2 * n - 1) - 1) * bernoulli(2 * n) / factorial(2 * n)
        return -Fraction(1, 2) * c / 2 ** (2 * n - 1)
    return _branch(_odd_series(alpha, SERIES_TERMS))


@lru_cache(maxsize=None)
def _p3_series() -> SeriesBranch:
    return _branch(_odd_series(lambda n: bernoulli(2 * n) / factorial(2 * n), SERIES_TERMS))


@lru_cache(maxsize=None)
def _p1_series() -> SeriesBranch:
    c = [-2 * x for x in _p3_series().coefficients]
    c[0] += 1
    return _branch(c)


@lru_cache(maxsize=None)
def _p2_series() -> SeriesBranch:
    n = 2 * SERIES_TERMS
    # (sinh t - t)/t^3 and t/(e^t - 1) as dense power series, then 2 t * product
    s = [Fraction(0)] * n
    for k in range(0, n, 2):
        s[k] = Fraction(1, factorial(k + 3))
    e = [bernoulli(m) / factorial(m) for m in range(n)]
    prod = [sum(s[i] * e[m - i] for i in range(m + 1)) for m in range(n - 1)]
    return _branch([Fraction(0)] + [2 * c for c in prod])


# ---------------------------------------------------------------- closed forms

def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("kernel argument must be > 0")
    return t


def _split(t, series: SeriesBranch, direct, deriv):
    t = _check_t(t)
    small = t < series.threshold
    out = np.empty_like(t)
    if np.any(small):
        out[small] = series(t[small], deriv)
    if np.any(~small):
        out[~small] = direct(t[~small], deriv)
    return out if out.ndim else float(out)


def _csch_coth(s):
    """csch(s), coth(s) for s > 0 without overflow."""
    e = np.exp(-2.0 * s)
    den = -np.expm1(-2.0 * s)
    return 2.0 * np.exp(-s) / den, (1.0 + e) / den


def _q_direct(t, deriv):
    s = 0.5 * t
    csch, coth = _csch_coth(s)
    if deriv == 0:
        return 1.0 / t - 0.5 * csch
    if deriv == 1:
        return -1.0 / t ** 2 + 0.25 * coth * csch
    if deriv == 2:
        return 2.0 / t ** 3 - 0.125 * csch * (coth ** 2 + csch ** 2)
    raise DomainError("q derivatives available up to order 2")


def _p3_direct(t, deriv):
    csch, coth = _csch_coth(0.5 * t)
    if deriv == 0:
        return 0.5 * coth - 1.0 / t
    if deriv == 1:
        return 1.0 / t ** 2 - 0.25 * csch ** 2
    if deriv == 2:
        return 0.25 * csch ** 2 * coth - 2.0 / t ** 3
    raise DomainError("p3 derivatives available up to order 2")


def _p1_direct(t, deriv):
    if deriv == 0:
        return 2.0 * (1.0 / t + np.exp(-t) / np.expm1(-t))
    return -2.0 * _p3_direct(t, deriv)


def _p2_direct(t, deriv):
    e1 = np.exp(-t)
    e2 = e1 * e1
    num = -np.expm1(-2.0 * t) - 2.0 * t * e1
    den = -t * np.expm1(-t)
    p = num / den
    if deriv == 0:
        return p
    n1 = 2.0 * e2 - 2.0 * e1 + 2.0 * t * e1
    d1 = -np.expm1(-t) + t * e1
    p1 = (n1 - p * d1) / den
    if deriv == 1:
        return p1
    if deriv == 2:
        n2 = -4.0 * e2 + 4.0 * e1 - 2.0 * t * e1
        d2 = 2.0 * e1 - t * e1
        return (n2 - 2.0 * p1 * d1 - p * d2) / den
    raise DomainError("p2 derivatives available up to order 2")


def kernel_q(t, deriv: int = 0):
    """q(t) = 1/t - 1/(2 sinh(t/2)) or its first/second derivative."""
    return _split(t, _q_series(), _q_direct, deriv)


def kernel_q2(t):
    """q''(t)."""
    return kernel_q(t, 2)


def kernel_p1(t, deriv: int = 0):
    """p1(t) = 2(1/t - 1/(e^t - 1))."""
    return _split(t, _p1_series(), _p1_direct, deriv)


def kernel_p2(t, deriv: int = 0):
    """p2(t) = (e^{2t} - 2t e^t - 1) / (t (e^t - 1) e^t)."""
    return _split(t, _p2_series(), _p2_direct, deriv)


def kernel_p3(t, deriv: int = 0):
    """p3(t) = (coth(t/2) - 2/t) / 2."""
    return _split(t, _p3_series(), _p3_direct, deriv)


def series_branch(name: str) -> SeriesBranch:
    return {"q": _q_series, "p1": _p1_series, "p2": _p2_series, "p3": _p3_series}[name]()


# ---------------------------------------------------------------- h_v

def _check_v(v):
    # v = 0 is admitted: h_0(t) = 1/(1 + cosh t) is the kernel ratio for K_0
    if not v >= 0:
        raise DomainError(f"v must be nonnegative, got {v}")


def _inv_one_plus_cosh(t):
    e = np.exp(-t)
    return 2.0 * e / (1.0 + e) ** 2


def kernel_hv(v: float, t):
    """h_v(t) = 1/(1 + cosh t) + v tanh(vt) tanh(t/2); bounded, no overflow."""
    _check_v(v)
    t = _check_t(t)
    out = _inv_one_plus_cosh(t) + v * np.tanh(v * t) * np.tanh(0.5 * t)
    return out if out.ndim else float(out)


def hv_rtilde(v: float, t):
    """(1 + cosh t) h_v'(t); has the sign of h_v'."""
    _check_v(v)
    t = _check_t(t)
    with np.errstate(over="ignore"):
        # sinh t sech^2(vt) written with decaying exponentials only
        e2v = np.exp(-2.0 * v * t)
        core = 2.0 * (-np.expm1(-2.0 * t)) * np.exp(t * (1.0 - 2.0 * v)) / (1.0 + e2v) ** 2
    out = v * v * core + v * np.tanh(v * t) - np.tanh(0.5 * t)
    return out if out.ndim else float(out)


def kernel_hv_prime(v: float, t):
    """h_v'(t)."""
    return hv_rtilde(v, t) * _inv_one_plus_cosh(_check_t(t))


# ---------------------------------------------------------------- K_v

def _check_bessel(v, x):
    if abs(v) > V_MAX:
        raise DomainError(f"|v| <= {V_MAX:g} required, got {v}")
    if not X_MIN <= x <= X_MAX:
        raise DomainError(f"x must lie in [{X_MIN:g}, {X_MAX:g}], got {x}")


def cosh_kernel(v: float) -> KernelSpec:
    """cosh(vt) with its growth split off for the integrator."""
    v = abs(float(v))
    return KernelSpec(
        eval=lambda t: np.cosh(v * t),
        name=f"cosh({v:g}t)",
        decay=DecayClass.exponential(v),
        reduced=lambda t: 0.5 * (1.0 + np.exp(-2.0 * v * t)),
    )


def cosh_excess_kernel(v: float) -> KernelSpec:
    """cosh(vt)(cosh t - 1)."""
    v = abs(float(v))
    rate = v + 1.0
    return KernelSpec(
        eval=lambda t: np.cosh(v * t) * 2.0 * np.sinh(0.5 * t) ** 2,
        name=f"cosh({v:g}t)(cosh t-1)",
        decay=DecayClass.exponential(rate),
        reduced=lambda t: 0.25 * (1.0 + np.exp(-2.0 * v * t)) * np.expm1(-t) ** 2,
    )


def bessel_transform(v: float) -> TransformSpec:
    return TransformSpec(cosh_kernel(v), COSH)


def bessel_k(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """K_v(x) = int_0^inf exp(-x cosh t) cosh(vt) dt."""
    _check_bessel(v, x)
    return integrate(bessel_transform(abs(v)), x, cfg).value


def bessel_k_scaled(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """exp(x) K_v(x)."""
    _check_bessel(v, x)
    return integrate(bessel_transform(abs(v)), x, cfg, scaled=True).value


def bessel_k_prime(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG,
                   *, scaled: bool = False) -> float:
    """K_v'(x) = -int cosh t cosh(vt) exp(-x cosh t) dt (times exp(x) if scaled)."""
    _check_bessel(v, x)
    return transform_derivative(bessel_transform(abs(v)), x, 1, cfg, scaled=scaled)


def bessel_k_d(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG,
               *, scaled: bool = True) -> float:
    """int cosh(vt)(cosh t - 1) exp(-x cosh t) dt, so that K_v' = -(K_v + D)."""
    _check_bessel(v, x)
    spec = TransformSpec(cosh_excess_kernel(v), COSH)
    return integrate(spec, x, cfg, scaled=scaled).value


def bessel_log_derivative(v: float, x: float, cfg: QuadConfig = DEFAULT_CONFIG) -> float:
    """x K_v'(x) / K_v(x), computed as -x - x D/K to keep the O(1) part exact."""
    k = bessel_k_scaled(v, x, cfg)
    d = bessel_k_d(v, x, cfg)
    return -x - x * d / k


# ---------------------------------------------------------------- kernel specs

def _ks(fn, name, decay=None):
    return KernelSpec(eval=fn, name=name, small_t_threshold=SERIES_THRESHOLD,
                      decay=decay or DecayClass.bounded())


Q = _ks(kernel_q, "q", DecayClass.bounded(0.1))
Q2 = _ks(kernel_q2, "q''", DecayClass.bounded(0.1))
P1 = _ks(kernel_p1, "p1", DecayClass.bounded(1.0))
P2 = _ks(kernel_p2, "p2", DecayClass.bounded(1.0))
P3 = _ks(kernel_p3, "p3", DecayClass.bounded(0.5))
