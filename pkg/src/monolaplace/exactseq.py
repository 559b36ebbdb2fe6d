"""Exact rational checks of the coefficient sequences behind the Phi and h_v results.

Nothing here touches floating point; values are ``int`` or ``Fraction`` and
conversion happens only when a report is rendered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import DomainError

ZERO, POSITIVE, NEGATIVE = "Zero", "Positive", "Negative"

# d_4 .. d_9, fixed reference values
PHI_D_REFERENCE = {
    4: -66802176,
    5: -13774616064,
    6: -1570251361536,
    7: -127269822161664,
    8: -7526731991528448,
    9: -240861038835686400,
}
PHI_A10_STAR = Fraction(710697141, 6815744)
PHI_B10_STAR = Fraction(174443916097, 149159936)


def _meets(value, must_be: str) -> bool:
    if must_be == ZERO:
        return value == 0
    if must_be == POSITIVE:
        return value > 0
    return value < 0


@dataclass
class ExactSeqReport:
    name: str
    values: list = field(default_factory=list)
    recurrence_residuals: list = field(default_factory=list)
    sign_claims: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def claim(self, rng, text: str, ok: bool) -> None:
        self.sign_claims.append((rng, text, bool(ok)))

    def residual(self, n: int, value, must_be: str = ZERO) -> None:
        self.recurrence_residuals.append((n, value, must_be))

    @property
    def failures(self) -> list:
        bad = [f"residual n={n} is {v} (expected {m})"
               for n, v, m in self.recurrence_residuals if not _meets(v, m)]
        bad += [f"{text} on {rng}" for rng, text, ok in self.sign_claims if not ok]
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        def enc(v):
            try:
                approx = float(v)
            except OverflowError:
                approx = None
            return {"exact": str(v), "approx": approx}
        return {
            "name": self.name,
            "passed": self.passed,
            "values": [{"n": n, **enc(v)} for n, v in self.values],
            "recurrence_residuals": [{"n": n, **enc(v), "must_be": m, "ok": _meets(v, m)}
                                     for n, v, m in self.recurrence_residuals],
            "sign_claims": [{"range": list(r), "claim": c, "verified": ok}
                            for r, c, ok in self.sign_claims],
            "info": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.info.items()},
            "failures": self.failures,
        }


# ---------------------------------------------------------------- Phi sequences

def phi_a(n: int) -> Fraction:
    """Coefficient of s^(2n-1) in the numerator series of q''/q."""
    return Fraction(3 ** (2 * n - 1) - (2 * n - 1) * (2 * n - 2) * (2 * n - 3) * 2 ** (2 * n - 4) - 3,
                    factorial(2 * n - 1))


def phi_b(n: int) -> Fraction:
    """Coefficient of s^(2n-1) in the denominator series of q''/q."""
    return Fraction(3 ** (2 * n - 3) - (2 * n - 3) * 2 ** (2 * n - 3) - 3, factorial(2 * n - 3))


def phi_dn_definitional(n: int) -> Fraction:
    """(2n-1)! (2n+1)! (a_n b_{n+1} - a_{n+1} b_n)."""
    return (factorial(2 * n - 1) * factorial(2 * n + 1)
            * (phi_a(n) * phi_b(n + 1) - phi_a(n + 1) * phi_b(n)))


def phi_dn(n: int) -> int:
    """Closed form of d_n, combined over the common denominator 108."""
    if n < 4:
        raise DomainError(f"d_n is defined for n >= 4, got {n}")
    num = (108 * 18 * (4 * n - 1)
           + 24 * (4 * n - 1) * 3 ** (4 * n)
           - (2 * n - 1) * (20 * n ** 4 - 56 * n ** 3 - 77 * n ** 2 + 464 * n - 243) * 6 ** (2 * n)
           + 48 * (64 * n ** 2 - 132 * n + 41) * 3 ** (2 * n)
           - 81 * (2 * n - 1) * (2 * n - 3) * (6 * n ** 3 + 5 * n ** 2 + 2 * n - 1) * 2 ** (2 * n))
    q, r = divmod(num, 108)
    if r:
        raise ArithmeticError(f"d_{n} closed form is not an integer")
    return q


def phi_a_star(n: int) -> Fraction:
    return (Fraction(2, 9) * Fraction(3, 2) ** (2 * n)
            - Fraction((2 * n - 1) * (20 * n ** 4 - 56 * n ** 3 - 77 * n ** 2 + 464 * n - 243),
                       108 * (4 * n - 1)))


def phi_b_star(n: int) -> Fraction:
    return (Fraction(4, 9) * Fraction(3, 2) ** (2 * n)
            - Fraction(3 * (2 * n - 1) * (2 * n - 3) * (6 * n ** 3 + 5 * n ** 2 + 2 * n - 1),
                       4 * (64 * n ** 2 - 132 * n + 41)))


def phi_a_star_gap(n: int) -> Fraction:
    """Closed form claimed for a*_{n+1} - (9/4) a*_n."""
    return Fraction((2 * n ** 2 + n - 9) * (400 * n ** 4 - 2500 * n ** 3 + 1448 * n ** 2 + 1789 * n - 777),
                    432 * (4 * n - 1) * (4 * n + 3))


def phi_b_star_gap(n: int) -> Fraction:
    """Closed form claimed for b*_{n+1} - (9/4) b*_n."""
    poly = 4 * n ** 4 * (960 * n ** 2 - 3004 * n - 1181) + 19204 * n ** 3 + 16517 * n ** 2 - 684 * n - 2697
    return Fraction(3 * (2 * n - 1) * poly,
                    16 * (64 * n ** 2 - 4 * n - 27) * (64 * n ** 2 - 132 * n + 41))


def phi_dn_checks(n_max: int = 200) -> ExactSeqReport:
    """d_n by closed form and by definition; reference values and signs."""
    if n_max < 4:
        raise DomainError(f"n_max must be >= 4, got {n_max}")
    rep = ExactSeqReport("phi-dn")
    for n in range(4, n_max + 1):
        d = phi_dn(n)
        rep.values.append((n, d))
        rep.residual(n, d - phi_dn_definitional(n))
    for n, ref in PHI_D_REFERENCE.items():
        if n <= n_max:
            rep.claim((n, n), f"d_{n} == {ref}", phi_dn(n) == ref)
    upper = min(9, n_max)
    rep.claim((4, upper), "d_n < 0", all(phi_dn(n) < 0 for n in range(4, upper + 1)))
    if n_max >= 10:
        rep.claim((10, n_max), "d_n > 0", all(d > 0 for n, d in rep.values if n >= 10))
        # d_n rebuilt from the starred split
        for n in (10, n_max):
            split = (18 * (4 * n - 1) + (4 * n - 1) * 6 ** (2 * n) * phi_a_star(n)
                     + (64 * n ** 2 - 132 * n + 41) * 2 ** (2 * n) * phi_b_star(n))
            rep.claim((n, n), "d_n equals its starred decomposition", split == phi_dn(n))
    return rep


def phi_bn_checks(n_max: int = 100) -> ExactSeqReport:
    """b_3 = 0, the b_n step identity for n >= 3, and b_n > 0 for n >= 4."""
    if n_max < 4:
        raise DomainError(f"n_max must be >= 4, got {n_max}")
    rep = ExactSeqReport("phi-bn")
    for n in range(3, n_max + 1):
        rep.values.append((n, phi_b(n)))
        lhs = factorial(2 * n - 1) * phi_b(n + 1) - 9 * factorial(2 * n - 3) * phi_b(n)
        rhs = (10 * n - 23) * 2 ** (2 * n - 3) + 24
        rep.residual(n, lhs - rhs)
        rep.residual(n, Fraction(rhs), POSITIVE)
    rep.claim((3, 3), "b_3 == 0", phi_b(3) == 0)
    rep.claim((4, n_max), "b_n > 0", all(phi_b(n) > 0 for n in range(4, n_max + 1)))
    return rep


def phi_star_checks(n_max: int = 200) -> ExactSeqReport:
    """a*_10, b*_10 and the two starred step identities with positive right sides."""
    if n_max < 10:
        raise DomainError(f"n_max must be >= 10, got {n_max}")
    rep = ExactSeqReport("phi-star")
    rep.values.append((10, phi_a_star(10)))
    rep.values.append((10, phi_b_star(10)))
    rep.claim((10, 10), f"a*_10 == {PHI_A10_STAR}", phi_a_star(10) == PHI_A10_STAR)
    rep.claim((10, 10), f"b*_10 == {PHI_B10_STAR}", phi_b_star(10) == PHI_B10_STAR)
    for n in range(10, n_max + 1):
        ga, gb = phi_a_star_gap(n), phi_b_star_gap(n)
        rep.residual(n, phi_a_star(n + 1) - Fraction(9, 4) * phi_a_star(n) - ga)
        rep.residual(n, phi_b_star(n + 1) - Fraction(9, 4) * phi_b_star(n) - gb)
        rep.residual(n, ga, POSITIVE)
        rep.residual(n, gb, POSITIVE)
    return rep


# ---------------------------------------------------------------- h_v sequences

def hv_a(v: Fraction, n: int) -> Fraction:
    """Coefficient a_n with 4 r_v(t) = sum a_n t^(2n-1) / (2n-1)!."""
    return ((v + 1) * (2 * v - 1) ** (2 * n - 1) + (v - 1) * (2 * v + 1) ** (2 * n - 1)
            + (2 * v) ** (2 * n) + v ** 2 * 2 ** (2 * n) + 2 * (2 * v ** 2 - 1))


def hv_b(v: Fraction, n: int) -> Fraction:
    """Closed form of (a_{n+1} - a_n) / 4^n."""
    half = Fraction(1, 2)
    return (2 * v * (v ** 2 - 1) * (v - half) ** (2 * n - 1)
            + 2 * v * (v ** 2 - 1) * (v + half) ** (2 * n - 1)
            + (4 * v ** 2 - 1) * v ** (2 * n) + 3 * v ** 2)


def hv_b_step(v: Fraction, n: int) -> Fraction:
    """Closed form of (b_{n+1} - b_n) / (v (v^2 - 1)(v^2 - 1/4))."""
    half = Fraction(1, 2)
    return ((2 * v - 3) * (v - half) ** (2 * n - 2) + (2 * v + 3) * (v + half) ** (2 * n - 2)
            + 4 * v ** (2 * n - 1))


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def sign_change_index(seq) -> tuple:
    """(last index of the leading sign block, count of sign changes) for a 1-based list.

    Zeros never count as a change.
    """
    signs = [_sign(x) for x in seq]
    lead = next((s for s in signs if s), 0)
    changes = 0
    cur = lead
    last_lead = len(seq)
    for i, s in enumerate(signs, start=1):
        if s and s != cur:
            if changes == 0:
                last_lead = i - 1
            changes += 1
            cur = s
    return last_lead, changes


def hv_sequences(v, n_max: int = 50) -> ExactSeqReport:
    """Exact a_n, b_n for h_v with both recurrence residuals and the case analysis."""
    v = Fraction(v)
    if v <= 0:
        raise DomainError(f"v must be positive, got {v}")
    if v in (Fraction(1, 2), Fraction(1)):
        raise DomainError("the b_n recurrence divides by v(v^2-1)(v^2-1/4); v = 1/2 and v = 1 are excluded")
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    rep = ExactSeqReport(f"hv[v={v}]")
    a = [hv_a(v, n) for n in range(1, n_max + 2)]
    b = [hv_b(v, n) for n in range(1, n_max + 1)]
    scale = v * (v ** 2 - 1) * (v ** 2 - Fraction(1, 4))
    for n in range(1, n_max + 1):
        rep.values.append((n, a[n - 1]))
        rep.residual(n, (a[n] - a[n - 1]) / 4 ** n - b[n - 1])
        if n < n_max:
            rep.residual(n, (b[n] - b[n - 1]) / scale - hv_b_step(v, n))
            rep.residual(n, hv_b_step(v, n), POSITIVE)
    a = a[:n_max]
    rep.claim((1, 1), "a_1 == 4(2v-1)(2v+1)", a[0] == 4 * (2 * v - 1) * (2 * v + 1))
    rep.claim((1, 1), "b_1 == 2v^2(2v-1)(2v+1)", b[0] == 2 * v ** 2 * (2 * v - 1) * (2 * v + 1))
    rep.info["b"] = [str(x) for x in b]

    if v > 1:
        rep.info["case"] = "v >= 1"
        rep.claim((1, n_max), "a_n > 0", all(x > 0 for x in a))
        return rep

    n1, b_changes = sign_change_index(b)
    n0, a_changes = sign_change_index(a)
    rep.info.update(n0=n0, n1=n1, a_sign_changes=a_changes, b_sign_changes=b_changes)
    if v > Fraction(1, 2):
        rep.info["case"] = "1/2 < v < 1"
        rep.claim((1, n_max), "b_n strictly decreasing", all(y < x for x, y in zip(b, b[1:])))
        rep.claim((1, 1), "b_1 > 0", b[0] > 0)
        rep.claim((1, n_max), "a_n >= 0 then <= 0 (one sign change)", a[0] > 0 and a_changes == 1)
    else:
        rep.info["case"] = "0 < v < 1/2"
        rep.claim((1, n_max), "b_n strictly increasing", all(y > x for x, y in zip(b, b[1:])))
        rep.claim((1, 1), "b_1 < 0", b[0] < 0)
        rep.claim((1, n_max), "a_n <= 0 then >= 0 (one sign change)", a[0] < 0 and a_changes == 1)
    rep.claim((1, n_max), "b_n has exactly one sign change", b_changes == 1)
    rep.claim((1, n_max), "n0 > n1", n0 > n1)
    return rep
