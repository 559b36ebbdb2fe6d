import json
import time
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from monolaplace import exactseq as es
from monolaplace.errors import DomainError


def test_reference_d_values():
    assert es.phi_dn(4) == -66_802_176
    assert es.phi_dn(7) == -127_269_822_161_664
    for n, ref in es.PHI_D_REFERENCE.items():
        assert es.phi_dn(n) == ref
        assert es.phi_dn_definitional(n) == ref


def test_d10_positive():
    assert es.phi_dn(10) == 14868292510425565440
    assert es.phi_dn(9) < 0 < es.phi_dn(10)


def test_dn_domain():
    with pytest.raises(DomainError):
        es.phi_dn(3)
    with pytest.raises(DomainError):
        es.phi_dn_checks(3)


@settings(max_examples=20, deadline=None)
@given(st.integers(4, 150))
def test_closed_form_equals_definition(n):
    assert es.phi_dn(n) == es.phi_dn_definitional(n)


def test_dn_suite():
    rep = es.phi_dn_checks(200)
    assert rep.passed, rep.failures
    assert [v for n, v in rep.values if n <= 9] == list(es.PHI_D_REFERENCE.values())


def test_bn_suite():
    assert es.phi_b(3) == 0
    rep = es.phi_bn_checks(100)
    assert rep.passed, rep.failures
    assert all(v == 0 for n, v, m in rep.recurrence_residuals if m == es.ZERO)


def test_star_values():
    assert es.phi_a_star(10) == Fraction(710_697_141, 6_815_744)
    assert es.phi_b_star(10) == Fraction(174_443_916_097, 149_159_936)
    assert es.phi_a_star_gap(10) > 0
    rep = es.phi_star_checks(200)
    assert rep.passed, rep.failures


def test_hv_three_quarters():
    v = Fraction(3, 4)
    assert es.hv_a(v, 1) == 5
    assert es.hv_b(v, 1) == Fraction(45, 32)
    rep = es.hv_sequences(v, 50)
    assert rep.passed, rep.failures
    assert rep.info["case"] == "1/2 < v < 1"
    assert rep.info["n0"] > rep.info["n1"]


def test_hv_quarter_sign_pattern():
    rep = es.hv_sequences(Fraction(1, 4), 50)
    assert rep.passed, rep.failures
    n0 = rep.info["n0"]
    a = [x for _, x in rep.values]
    assert all(x <= 0 for x in a[:n0]) and all(x >= 0 for x in a[n0:])
    assert (rep.info["n0"], rep.info["n1"]) == (3, 2)


@pytest.mark.parametrize("v", [0, Fraction(1, 2), 1, -1])
def test_hv_excluded_values(v):
    with pytest.raises(DomainError):
        es.hv_sequences(v)


def rationals(lo, hi):
    return st.fractions(min_value=lo, max_value=hi, max_denominator=64)


@settings(max_examples=30, deadline=None)
@given(rationals(Fraction(1, 64), Fraction(63, 64)))
def test_hv_cases_hold_for_random_v(v):
    assume(v != Fraction(1, 2))
    rep = es.hv_sequences(v, 30)
    assert rep.passed, rep.failures


@settings(max_examples=15, deadline=None)
@given(rationals(Fraction(65, 64), Fraction(10)))
def test_hv_large_v_all_positive(v):
    rep = es.hv_sequences(v, 20)
    assert rep.passed, rep.failures
    assert rep.info["case"] == "v >= 1"


def test_sign_change_index():
    # a zero stays in the leading block
    assert es.sign_change_index([-1, -2, 0, 3, 4]) == (3, 1)
    assert es.sign_change_index([1, 2, 3]) == (3, 0)


def test_report_serializes():
    doc = es.phi_dn_checks(12).to_dict()
    json.dumps(doc)
    assert doc["passed"] and doc["values"][0] == {"n": 4, "exact": "-66802176", "approx": -66802176.0}
    big = es.phi_dn_checks(200).to_dict()["values"][-1]
    assert big["approx"] is None and int(big["exact"]) > 0


def test_full_suite_runtime():
    t0 = time.perf_counter()
    reps = [es.phi_dn_checks(200), es.phi_bn_checks(100), es.phi_star_checks(200)]
    assert all(r.passed for r in reps)
    assert time.perf_counter() - t0 < 10
