"""Built-in transform pairs and a small kernel expression language.

Expressions are sums of terms ``[coef*]name[']['']``, e.g. ``-24*q''`` or
``2*one + t``.  Primes take derivatives in t.  Names: one, t, exp (e^-t),
inv1p (1/(1+t)), q, p1, p2, p3.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import MonoLaplaceError
from .monorules import MONOTONE, ShapeHint
from .quadrature import DecayClass, KernelSpec, TransformSpec
from .results import digamma_pair, lambda_pair
from .specfun import kernel_hv, kernel_p1, kernel_p2, kernel_p3, kernel_q


class UnknownKernel(MonoLaplaceError, KeyError):
    pass


def _one(t, d):
    return np.ones_like(t) if d == 0 else np.zeros_like(t)


def _t(t, d):
    return t if d == 0 else (np.ones_like(t) if d == 1 else np.zeros_like(t))


def _exp(t, d):
    return (-1.0) ** d * np.exp(-t)


def _inv1p(t, d):
    return [1.0, -1.0, 2.0][d] / (1.0 + t) ** (d + 1)


# name -> (callable(t, deriv), bound on |f| or None for linear growth)
BASIC = {
    "one": (_one, 1.0),
    "t": (_t, None),
    "exp": (_exp, 1.0),
    "inv1p": (_inv1p, 2.0),
    "q": (kernel_q, 1.0),
    "p1": (kernel_p1, 1.0),
    "p2": (kernel_p2, 1.0),
    "p3": (kernel_p3, 1.0),
}

_TERM = re.compile(r"""\s*(?:(?P<coef>[0-9.]+(?:/[0-9]+)?)\s*\*\s*)?(?P<name>[a-z][a-z0-9]*)(?P<primes>'{0,2})\s*$""")


def parse_kernel(expr: str) -> KernelSpec:
    """KernelSpec from an expression such as ``-6*p2'' - 6*p2'``."""
    text = expr.replace(" ", "")
    if not text:
        raise UnknownKernel("empty kernel expression")
    pieces = re.findall(r"[+-]?[^+-]+", text)
    if "".join(pieces) != text:
        raise UnknownKernel(f"cannot parse kernel expression {expr!r}")
    terms = []
    linear = False
    bound = 0.0
    for piece in pieces:
        sign = -1.0 if piece.startswith("-") else 1.0
        body = piece.lstrip("+-")
        m = _TERM.match(body)
        if not m or m.group("name") not in BASIC:
            raise UnknownKernel(f"unknown kernel term {piece!r}")
        coef = sign * float(Fraction(m.group("coef") or "1"))
        fn, b = BASIC[m.group("name")]
        order = len(m.group("primes"))
        terms.append((coef, fn, order))
        if b is None and order == 0:
            linear = True
        bound += abs(coef) * (b if b is not None else 1.0)

    def ev(t):
        t = np.asarray(t, dtype=float)
        return sum(c * fn(t, d) for c, fn, d in terms)

    decay = DecayClass.polynomial(1.0, bound + 1.0) if linear else DecayClass.bounded(bound + 1.0)
    return KernelSpec(ev, name=expr.strip(), small_t_threshold=2.0, decay=decay)


@dataclass(frozen=True)
class PairEntry:
    name: str
    F: TransformSpec
    G: TransformSpec
    hint: ShapeHint = MONOTONE
    kernel_ratio: Optional[Callable] = None
    description: str = ""


def _lambda_entry(v: Fraction) -> PairEntry:
    vf = float(v)
    F, G = lambda_pair(vf)
    hint = MONOTONE if vf == 0 or vf >= 1 or vf == 0.5 else ShapeHint.unimodal()
    return PairEntry(f"lambda:v={v}", F, G, hint, lambda t: -kernel_hv(vf, t),
                     "Lambda(x) = x + x K_v'/K_v as a cosh-weighted ratio with f/g = -h_v")


DIGAMMA_HINTS = {
    "phi": (ShapeHint.unimodal(), "Phi(x) = 1/(psi(x+1/2) - ln x) - 24x^2"),
    "alzer-a": (ShapeHint.unimodal(), "A(x) = 1/(2(psi(x+1) - ln x)) - x"),
    "villarino-l": (MONOTONE, "L(x) = 2/(2psi(x+1) - ln(x(x+1))) - 6x(x+1)"),
    "qi-q": (MONOTONE, "Q(x) = 1/(ln x + 1/(2x) - psi(x+1)) - 12x^2"),
}

BUILTIN = ("phi", "alzer-a", "villarino-l", "qi-q", "lambda", "identity")


def parse_v(text) -> Fraction:
    try:
        v = Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise UnknownKernel(f"bad v value {text!r}") from exc
    if v < 0:
        v = -v
    return v


def get_pair(name: str, v=None) -> PairEntry:
    """Registry lookup; ``lambda`` needs ``v`` (or the ``lambda:v=<rational>`` form)."""
    if name.startswith("lambda:"):
        m = re.fullmatch(r"lambda:v=(.+)", name)
        if not m:
            raise UnknownKernel(f"bad lambda pair id {name!r}")
        return _lambda_entry(parse_v(m.group(1)))
    if name == "lambda":
        if v is None:
            raise UnknownKernel("pair 'lambda' needs a v value")
        return _lambda_entry(parse_v(v))
    if name in DIGAMMA_HINTS:
        F, G = digamma_pair(name)
        hint, desc = DIGAMMA_HINTS[name]
        return PairEntry(name, F, G, hint, None, desc)
    if name == "identity":
        k = parse_kernel("q")
        return PairEntry(name, TransformSpec(k), TransformSpec(k), MONOTONE, None, "f = g = q")
    raise UnknownKernel(f"unknown pair {name!r}; built-ins are {', '.join(BUILTIN)}")


def expression_pair(f_expr: str, g_expr: str, hint: ShapeHint = MONOTONE) -> PairEntry:
    f, g = parse_kernel(f_expr), parse_kernel(g_expr)
    return PairEntry(f"{f_expr} / {g_expr}", TransformSpec(f), TransformSpec(g), hint)
