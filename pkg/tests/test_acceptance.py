"""Acceptance suite: one summary line per criterion, tolerances pinned."""

import math
import time

import numpy as np
import pytest

from monolaplace import exactseq as es
from monolaplace import monorules as mr
from monolaplace import results as rs
from monolaplace.quadrature import DecayClass, KernelSpec, TransformSpec, integrate
from monolaplace.registry import get_pair
from monolaplace.specfun import P1, P2, Q, bessel_k, kernel_q

LOG_GRID_128 = np.geomspace(1e-3, 1e3, 128)


def test_criterion_1_exact_sequences(criterion):
    t0 = time.perf_counter()
    dn = es.phi_dn_checks(200)
    bn = es.phi_bn_checks(100)
    star = es.phi_star_checks(200)
    elapsed = time.perf_counter() - t0
    d_ok = all(es.phi_dn(n) == v for n, v in es.PHI_D_REFERENCE.items())
    pos = all(es.phi_dn(n) > 0 for n in range(10, 201))
    b3 = es.phi_b(3) == 0
    resid = all(v == 0 for n, v, m in bn.recurrence_residuals if m == es.ZERO and 3 <= n <= 100)
    stars = (es.phi_a_star(10) == es.PHI_A10_STAR and es.phi_b_star(10) == es.PHI_B10_STAR)
    ok = criterion(1, "exact sequences", [
        ("d_4..d_9 exact", d_ok),
        ("d_n > 0 for 10..200", pos),
        ("b_3 = 0", b3),
        ("b_n identity residual 0 for 3..100", resid),
        ("a*_10, b*_10 exact", stars),
        ("suites report passed", dn.passed and bn.passed and star.passed),
        (f"runtime {elapsed:.2f}s < 10s", elapsed < 10),
    ])
    assert ok


def test_criterion_2_phi(criterion):
    t0 = time.perf_counter()
    vals = [rs.phi_fn(x) for x in LOG_GRID_128]
    inversions = sum(1 for a, b in zip(vals, vals[1:]) if b <= a)
    pair = get_pair("phi")
    sign, h0 = mr.h_sign_at_zero(pair.F, pair.G)
    elapsed = time.perf_counter() - t0
    ok = criterion(2, "Phi reproduction", [
        (f"{inversions} inversions on 128-point grid", inversions == 0),
        (f"Phi(1e-3) = {vals[0]:.6f} < 0.05", vals[0] < 0.05),
        (f"|Phi(1e3) - 21/5| = {abs(vals[-1] - 4.2):.2e} < 1e-2", abs(vals[-1] - 4.2) < 1e-2),
        (f"H(0+) = {h0:.6f} ({sign}) within -1 +/- 0.05", h0 is not None and abs(h0 + 1) <= 0.05),
        (f"runtime {elapsed:.2f}s < 30s", elapsed < 30),
    ])
    assert ok


LAMBDA_CASES = {0.0: -1, 0.25: -1, 0.75: 1, 1.0: 1, 2.0: 1}


def test_criterion_3_lambda_regimes(criterion):
    clauses = []
    for v, direction in LAMBDA_CASES.items():
        vals = [rs.lambda_v(v, x) for x in LOG_GRID_128]
        strict = all(direction * (b - a) > 0 for a, b in zip(vals, vals[1:]))
        word = "decreasing" if direction < 0 else "increasing"
        clauses.append((f"v={v:g} strictly {word}", strict))
        lo = rs.lambda_v(v, 1e-3)
        hi = rs.lambda_v(v, 1e2)
        clauses.append((f"v={v:g} |Lambda(1e-3) + v| = {abs(lo + v):.2e} < 1e-3", abs(lo + v) < 1e-3))
        clauses.append((f"v={v:g} |Lambda(1e2) + 1/2| = {abs(hi + 0.5):.2e} < 1e-2", abs(hi + 0.5) < 1e-2))
    worst = max(abs(rs.lambda_v(0.5, x) + 0.5) for x in LOG_GRID_128)
    clauses.append((f"v=1/2 max |Lambda + 1/2| = {worst:.1e} < 1e-9", worst < 1e-9))
    assert criterion(3, "Lambda regimes", clauses)


def test_criterion_4_inequality_suites(criterion):
    clauses = []
    for suite in rs.SUITES:
        rep = rs.bound_suite(suite)
        clauses.append((f"{suite}: {len(rep.violations)} violations, {len(rep.inconclusive)} inconclusive, "
                        f"min margin {rep.min_margin:.2e}", rep.passed))
    sharp = 0
    for v in rs.DEFAULT_V_GRID:
        rep = rs.bound_suite("kratio", [v], r1=min(abs(v), 0.5), r2=max(abs(v), 0.5) - 0.05)
        sharp += len(rep.violations)
    clauses.append((f"sharpness probe r2 = max - 0.05: {sharp} violations", sharp >= 1))
    assert criterion(4, "inequality suites", clauses)


POOL = [lambda t: np.ones_like(t), lambda t: 1 / (1 + t), Q, P1, P2]


def _random_instance(rng):
    g = POOL[rng.integers(len(POOL))]
    c, s, k = rng.uniform(0.5, 3.0), rng.uniform(0.2, 2.0), rng.uniform(0.1, 5.0)
    rising = bool(rng.integers(2))
    sgn = 1.0 if rising else -1.0
    f = KernelSpec(lambda t: g(t) * (c + sgn * s * -np.expm1(-k * t)), "f", decay=DecayClass.bounded(10.0))
    return TransformSpec(f), TransformSpec(KernelSpec(lambda t: g(t), "g", decay=DecayClass.bounded(2.0))), rising


SMOOTH_PAIRS = [
    (lambda t: t, lambda t: np.ones_like(t)),
    (lambda t: t * t, lambda t: 1 + t),
    (lambda t: np.exp(-t), lambda t: np.ones_like(t)),
    (lambda t: np.sin(t) + 2, np.cosh),
    (kernel_q, lambda t: 1 / (1 + t)),
]


def test_criterion_5_rule_engine(criterion):
    rng = np.random.default_rng(20240611)
    correct = 0
    for _ in range(20):
        F, G, rising = _random_instance(rng)
        verdict = mr.classify_ratio(F, G)
        want = mr.DECREASING if rising else mr.INCREASING
        expect = -1 if rising else 1
        scan = [mr.ratio_and_derivative(F, G, x) for x in np.geomspace(1e-2, 1e2, 64)]
        confirmed = all(dr * expect > -noise for _, dr, noise in scan)
        correct += verdict.kind == want and confirmed

    ratios = []
    for f, g in SMOOTH_PAIRS:
        fk = KernelSpec(f, "f")
        gk = KernelSpec(g, "g")
        exact = (integrate(TransformSpec(fk, interval=(1.0, 2.0)), 1.0).value
                 / integrate(TransformSpec(gk, interval=(1.0, 2.0)), 1.0).value)
        e64 = abs(mr.discretize_ratio(f, g, 1.0, 2.0, 64, 1.0)[0] - exact)
        e256 = abs(mr.discretize_ratio(f, g, 1.0, 2.0, 256, 1.0)[0] - exact)
        ratios.append(e256 / e64)

    r1 = mr.poly_ratio_verdict([0, 1, 0], [1, 1, 1], 1)
    r2 = mr.poly_ratio_verdict([0, 1, 0], [1, 1, 1], 2)
    ok = criterion(5, "monotonicity-rule engine", [
        (f"{correct}/20 randomized instances classified and scan-confirmed", correct == 20),
        ("error ratios n=256/n=64: " + ", ".join(f"{r:.3f}" for r in ratios), all(r < 0.5 for r in ratios)),
        (f"A=t, B=1+t+t^2, r=1 -> {r1.kind}", r1.kind == mr.INCREASING),
        (f"r=2 -> {r2.kind}(t0={r2.x_star})",
         r2.kind == mr.UNIMODAL_MAX and r2.x_star is not None and abs(r2.x_star - 1) <= 1e-9),
    ])
    assert ok


def test_criterion_6_cm_certificates(criterion):
    grid = rs.CM_GRID
    clauses = [
        ("1/x CM to order 6", mr.cm_check(lambda x: 1 / x, 6, grid).passed),
        ("e^-x CM to order 6", mr.cm_check(lambda x: math.exp(-x), 6, grid).passed),
    ]
    for v in (0.75, 1.0, 2.0):
        clauses.append((f"sqrt(x) e^x K_{v:g} CM to order 6", mr.cm_check(rs.sqrt_ex_kv(v), 6, grid).passed))
    for v in (0.0, 0.25):
        rep = mr.cm_check(rs.sqrt_ex_kv(v), 6, grid, mode="bernstein")
        clauses.append((f"sqrt(x) e^x K_{v:g} Bernstein", rep.passed))
    bad = mr.cm_check(lambda x: math.sin(x) + 2, 6, grid)
    clauses.append((f"sin x + 2 rejected at {bad.first_violation[:2] if bad.first_violation else None}",
                    not bad.passed and bad.first_violation is not None))
    assert criterion(6, "CM certificates", clauses)


def test_criterion_7_cross_route(criterion):
    probes = (0.5, 1.0, 2.0, 5.0, 10.0)
    worst = {name: max(abs(rs.laplace_ratio(name, x) - rs.DIGAMMA_ROUTE[name](x)) for x in probes)
             for name in ("alzer-a", "villarino-l", "qi-q")}
    k_err = max(abs(bessel_k(0.5, x) - math.sqrt(math.pi / (2 * x)) * math.exp(-x))
                / (math.sqrt(math.pi / (2 * x)) * math.exp(-x)) for x in (0.5, 1.0, 2.0, 5.0))
    clauses = [(f"{n} max |digamma - Laplace| = {e:.1e} < 1e-6", e < 1e-6) for n, e in worst.items()]
    clauses.append((f"K_1/2 integral vs closed form rel err {k_err:.1e} < 1e-9", k_err < 1e-9))
    assert criterion(7, "cross-route agreement", clauses)


@pytest.mark.parametrize("args,code", [
    (["verify-sequences", "--suite", "phi-dn", "--n-max", "3"], 64),
    (["classify", "--pair", "identity"], 3),
    (["classify", "--pair", "zeta"], 65),
    (["bounds", "--suite", "kratio", "--r1", "0.5", "--r2", "0.5", "--v", "0.2"], 2),
    (["bounds", "--suite", "xdkk-improved"], 0),
])
def test_exit_code_contract(args, code, capsys):
    from monolaplace.cli import main
    assert main(args) == code
