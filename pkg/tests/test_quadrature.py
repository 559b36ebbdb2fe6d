import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sp_integrate
from scipy import special as sp

from monolaplace.errors import DomainError, NonConvergent
from monolaplace.quadrature import (
    COSH, DecayClass, KernelSpec, QuadConfig, TransformSpec, integrate,
    integrate_function, transform_derivative, transform_values, truncation_point,
)
from monolaplace.specfun import Q


def kern(fn, name="f", decay=None):
    return KernelSpec(fn, name, decay=decay or DecayClass.bounded())


ONE = kern(lambda t: np.ones_like(t), "1")
T2 = kern(lambda t: t * t / 2, "t^2/2", DecayClass.polynomial(2))


def test_constant_kernel():
    assert integrate(TransformSpec(ONE), 2.0).value == pytest.approx(0.5, rel=1e-13)


def test_power_kernel_gives_inverse_power():
    assert integrate(TransformSpec(T2), 1.0).value == pytest.approx(1.0, rel=1e-12)
    assert integrate(TransformSpec(T2), 0.1).value == pytest.approx(1000.0, rel=1e-10)


def test_q_transform_is_psi_minus_log():
    # int q e^{-t} = psi(3/2) - ln 1
    want = 2 - np.euler_gamma - 2 * math.log(2)
    assert integrate(TransformSpec(Q), 1.0).value == pytest.approx(want, rel=1e-11)
    for x in (0.1, 3.0, 40.0):
        assert integrate(TransformSpec(Q), x).value == pytest.approx(
            sp.digamma(x + 0.5) - math.log(x), rel=1e-9)


@pytest.mark.parametrize("order,x,want", [(1, 1.0, -1.0), (2, 2.0, 0.25), (3, 1.0, -6.0)])
def test_derivatives_of_one_over_x(order, x, want):
    assert transform_derivative(TransformSpec(ONE), x, order) == pytest.approx(want, rel=1e-11)


def test_q_first_derivative_is_trigamma_shift():
    want = math.pi ** 2 / 2 - 5
    assert transform_derivative(TransformSpec(Q), 1.0, 1) == pytest.approx(want, rel=1e-10)


def test_derivative_order_bounds():
    with pytest.raises(DomainError):
        transform_derivative(TransformSpec(ONE), 1.0, 9)
    with pytest.raises(DomainError):
        transform_derivative(TransformSpec(ONE), 1.0, 0)


def test_nonpositive_x_rejected():
    with pytest.raises(DomainError):
        integrate(TransformSpec(ONE), 0.0)


def test_cosh_weight_gives_bessel_k0():
    spec = TransformSpec(ONE, COSH)
    for x in (0.01, 1.0, 30.0):
        assert integrate(spec, x).value == pytest.approx(sp.k0(x), rel=1e-10)
    assert integrate(spec, 500.0, scaled=True).value == pytest.approx(sp.k0e(500.0), rel=1e-10)


def test_transform_values_matches_single_calls():
    vals = transform_values(TransformSpec(Q), 2.0, 3)
    assert vals[0] == pytest.approx(integrate(TransformSpec(Q), 2.0).value, rel=1e-14)
    assert vals[3] == pytest.approx(sp.polygamma(3, 2.5) - 2 / 8, rel=1e-9)


def test_finite_interval_shift():
    # on (a, b): F(x) = e^{-a x} int_0^{b-a} f(s + a) e^{-x s} ds
    a, b, x = 1.0, 3.0, 0.7
    f = kern(lambda t: np.sin(t) + 2, "sin+2")
    g = kern(lambda s: np.sin(s + a) + 2, "shifted")
    lhs = integrate(TransformSpec(f, interval=(a, b)), x).value
    rhs = math.exp(-a * x) * integrate(TransformSpec(g, interval=(0.0, b - a)), x).value
    assert lhs == pytest.approx(rhs, rel=1e-12)
    want = sp_integrate.quad(lambda t: (math.sin(t) + 2) * math.exp(-x * t), a, b, epsabs=0, epsrel=1e-13)[0]
    assert lhs == pytest.approx(want, rel=1e-11)


def test_truncation_for_exponentially_growing_kernel():
    spec = TransformSpec(kern(np.exp, "e^t", DecayClass.exponential(1.0)))
    with pytest.raises(NonConvergent):
        truncation_point(spec, 0.5)
    assert integrate(spec, 3.0).value == pytest.approx(0.5, rel=1e-11)


def test_truncation_tail_is_negligible():
    cfg = QuadConfig()
    T = truncation_point(TransformSpec(ONE), 2.0, cfg)
    assert math.exp(-2.0 * T) / 2.0 < cfg.truncation_tail_bound


def test_integrate_function_oscillatory():
    res = integrate_function(lambda t: np.cos(40 * t), 0.0, 1.0)
    assert res.value == pytest.approx(math.sin(40.0) / 40, rel=1e-10)
    assert res.error < 1e-10


@pytest.mark.parametrize("bad", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_panels=1),
                                 dict(truncation_tail_bound=0)])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        QuadConfig(**bad)


def test_kernel_algebra():
    s = (ONE.scaled(2.0) + T2) - ONE
    t = np.array([0.5, 2.0])
    np.testing.assert_allclose(s(t), 1 + t * t / 2)
    np.testing.assert_allclose((-T2)(t), -t * t / 2)


POOL = [ONE, T2, Q, kern(lambda t: np.exp(-t), "e^-t"), kern(lambda t: 1 / (1 + t), "1/(1+t)")]


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 4), st.integers(0, 4),
       st.floats(0.05, 20))
def test_linearity(alpha, beta, i, j, x):
    f, g = POOL[i], POOL[j]
    combo = f.scaled(alpha) + g.scaled(beta)
    lhs = integrate(TransformSpec(combo), x).value
    rhs = alpha * integrate(TransformSpec(f), x).value + beta * integrate(TransformSpec(g), x).value
    scale = abs(alpha) * abs(integrate(TransformSpec(f), x).value) + \
        abs(beta) * abs(integrate(TransformSpec(g), x).value)
    assert abs(lhs - rhs) <= 10 * 1e-10 * scale + 1e-14
