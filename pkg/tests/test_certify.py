"""Minimizer certificates, the p(t) derivatives, and the power-scan."""

import math

import numpy as np
import pytest

from lclab import (
    InputError,
    make_builtin,
    mahler,
    polar,
    power,
    tilt_translate,
)
from lclab.certify import (
    CERT_FIELDS,
    criticality_residuals,
    entropy_sum_closed,
    full_certificate,
    hessian_block,
    jensen_sandwich_check,
    logp_derivatives,
    question4_scan,
    second_order_certificate,
    slicing_bound_check,
)
from lclab.functionals import moments


E = math.e


# -- frozen certificates -----------------------------------------------------

def test_f0_certificate_exact():
    cert = full_certificate(make_builtin("f0", 1))
    assert cert.bar_f_norm == pytest.approx(0.0, abs=1e-12)
    assert cert.bar_fpolar_norm == pytest.approx(0.0, abs=1e-12)
    assert cert.entropy_residual == pytest.approx(0.0, abs=1e-12)
    assert cert.schur_lambda_min == pytest.approx(0.0, abs=1e-12)
    assert cert.varentropy_margin == pytest.approx(1.0, rel=1e-12)
    assert cert.slicing_product == pytest.approx(1.0 / E, rel=1e-12)
    assert cert.logp_prime_at_1 == pytest.approx(0.0, abs=1e-12)
    assert cert.logp_second_at_1 == pytest.approx(1.0, rel=1e-12)


def test_gaussian_certificate_all_margins_zero():
    # the gaussian is the volume-product maximizer: critical, with flat
    # second-order margins and the same slicing product as f0
    cert = full_certificate(make_builtin("gaussian", 2))
    assert cert.entropy_residual == pytest.approx(0.0, abs=1e-12)
    assert cert.schur_lambda_min == pytest.approx(0.0, abs=1e-12)
    assert cert.varentropy_margin == pytest.approx(0.0, abs=1e-12)
    assert cert.slicing_product == pytest.approx(1.0 / E, rel=1e-12)
    assert cert.logp_prime_at_1 == pytest.approx(0.0, abs=1e-12)
    assert cert.logp_second_at_1 == pytest.approx(0.0, abs=1e-12)


def test_f1_certificate_negative_schur():
    # f1 is critical (p(t) = 4 is constant) but fails the Schur condition:
    # Cov(f_inf) - Cov(f1)^{-1} = 1/3 - 1/2 = -1/6
    cert = full_certificate(make_builtin("f1", 1))
    assert cert.entropy_residual == pytest.approx(0.0, abs=1e-12)
    assert cert.schur_lambda_min == pytest.approx(-1.0 / 6.0, rel=1e-12)
    assert cert.varentropy_margin == pytest.approx(0.0, abs=1e-12)
    assert cert.logp_prime_at_1 == pytest.approx(0.0, abs=1e-12)
    assert cert.logp_second_at_1 == pytest.approx(0.0, abs=1e-12)
    assert cert.slicing_product == pytest.approx(math.sqrt(2.0 / 3.0) / E, rel=1e-12)


def test_partial_certificates_fill_subsets():
    f = make_builtin("gaussian", 1)
    c1 = criticality_residuals(f)
    assert c1.bar_f_norm is not None and c1.entropy_residual is not None
    assert c1.schur_lambda_min is None and c1.slicing_product is None
    c2 = second_order_certificate(f)
    assert c2.schur_lambda_min is not None and c2.varentropy_margin is not None
    assert c2.logp_prime_at_1 is None
    assert list(c2.to_dict().keys()) == list(CERT_FIELDS)


def test_hessian_block_values():
    H, jac = hessian_block(make_builtin("f0", 1))
    np.testing.assert_allclose(H, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-12)
    np.testing.assert_allclose(jac, [0.0, 0.0], atol=1e-12)

    H1, jac1 = hessian_block(make_builtin("f1", 1))
    np.testing.assert_allclose(H1, [[1.0 / 3.0, -1.0], [-1.0, 2.0]], atol=1e-12)
    np.testing.assert_allclose(jac1, [0.0, 0.0], atol=1e-12)


def test_certificate_duality_symmetry():
    f = make_builtin("f1", 1)
    a = full_certificate(f)
    b = full_certificate(polar(f))
    assert b.entropy_residual == pytest.approx(a.entropy_residual, abs=1e-12)
    assert b.slicing_product == pytest.approx(a.slicing_product, rel=1e-12)
    assert b.logp_prime_at_1 == pytest.approx(a.logp_prime_at_1, abs=1e-12)
    # the Schur side flips: Cov(f1) - Cov(f_inf)^{-1} = 2 - 3 = -1
    assert b.schur_lambda_min == pytest.approx(-1.0, rel=1e-12)


def test_slicing_bound_check_scalar():
    val = slicing_bound_check(make_builtin("f0", 2))
    assert val == pytest.approx(1.0 / E, rel=1e-12)


# -- Schur-complement equivalence --------------------------------------------

def test_schur_block_equivalence_random_pairs():
    # [[A, -I], [-I, B]] >= 0  iff  A - B^{-1} >= 0 for SPD A, B
    rng = np.random.default_rng(2024)
    agree = 0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        q1, _ = np.linalg.qr(rng.normal(size=(n, n)))
        q2, _ = np.linalg.qr(rng.normal(size=(n, n)))
        a = q1 @ np.diag(np.exp(rng.uniform(-2.3, 2.3, n))) @ q1.T
        b = q2 @ np.diag(np.exp(rng.uniform(-2.3, 2.3, n))) @ q2.T
        block = np.block([[a, -np.eye(n)], [-np.eye(n), b]])
        lam_block = np.linalg.eigvalsh((block + block.T) / 2)[0]
        red = a - np.linalg.inv(b)
        lam_red = np.linalg.eigvalsh((red + red.T) / 2)[0]
        scale = max(np.linalg.norm(a), np.linalg.norm(b))
        if abs(lam_block) < 1e-10 * scale or abs(lam_red) < 1e-10 * scale:
            agree += 1  # boundary case, counts as consistent
        else:
            assert (lam_block >= 0) == (lam_red >= 0)
            agree += 1
    assert agree == 200


# -- p(t) derivatives --------------------------------------------------------

def test_logp_flat_for_f1():
    f = make_builtin("f1", 2)
    for t in (0.5, 1.0, 2.0):
        d1, d2 = logp_derivatives(f, t)
        assert d1 == pytest.approx(0.0, abs=1e-12)
        assert d2 == pytest.approx(0.0, abs=1e-12)


def logp_value(f, t):
    # p(t) = M(f^t): independent of the derivative formulas
    return mahler(power(f, t)).log_product


@pytest.mark.parametrize("t0", [0.5, 1.0, 2.0])
def test_logp_matches_finite_differences(t0):
    f = make_builtin("counterexample", 1)
    d1, d2 = logp_derivatives(f, t0)
    d = 1e-4 * t0
    lp = [logp_value(f, t0 - d), logp_value(f, t0), logp_value(f, t0 + d)]
    fd1 = (lp[2] - lp[0]) / (2 * d)
    fd2 = (lp[2] - 2 * lp[1] + lp[0]) / d**2
    assert d1 == pytest.approx(fd1, rel=1e-6, abs=1e-8)
    assert d2 == pytest.approx(fd2, rel=1e-4, abs=1e-6)


def test_logp_consistency_with_entropy_residual():
    # d1(1) = n - h(f) - h(f°) for every builtin
    for name, n in (("f0", 2), ("gaussian", 1), ("counterexample", 1)):
        f = make_builtin(name, n)
        d1, _ = logp_derivatives(f, 1.0)
        res = criticality_residuals(f)
        assert d1 == pytest.approx(-res.entropy_residual, abs=1e-10)


def test_logp_rejects_bad_t():
    with pytest.raises(InputError):
        logp_derivatives(make_builtin("f1", 1), 0.0)


# -- the entropy-sum scan ----------------------------------------------------

def test_entropy_sum_closed_matches_moment_route():
    ce = make_builtin("counterexample", 1)
    for t in (0.5, 1.0, 3.0):
        ft = power(ce, t)
        s = moments(ft).entropy + moments(polar(ft)).entropy
        assert entropy_sum_closed(t) == pytest.approx(s, rel=1e-12)


def test_entropy_sum_closed_value_at_one():
    assert entropy_sum_closed(1.0) == pytest.approx(0.5 + 1.0 - 1.0 / (E - 1.0), rel=1e-14)


def test_question4_scan_crossing():
    scan = question4_scan(0.5, 4.0, steps=6, h=1e-3)
    assert scan.max_deviation <= 1e-4
    # the root of e^t = 1 + t + t^2
    t = scan.t_star
    assert abs(math.expm1(t) - t - t * t) <= 1e-8
    assert t == pytest.approx(1.7932821329, abs=1e-8)
    assert entropy_sum_closed(3.0) > 1.0
    assert entropy_sum_closed(1.0) < 1.0


def test_question4_scan_thread_count_invariant():
    a = question4_scan(0.5, 3.0, steps=5, h=2e-3, threads=1)
    b = question4_scan(0.5, 3.0, steps=5, h=2e-3, threads=3)
    np.testing.assert_array_equal(a.s_numeric, b.s_numeric)
    np.testing.assert_array_equal(a.ts, b.ts)


# -- sandwich checks ---------------------------------------------------------

def test_jensen_sandwich_check_centered():
    lo, up = jensen_sandwich_check(make_builtin("f0", 2))
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert up == pytest.approx(0.0, abs=1e-12)
    lo, up = jensen_sandwich_check(make_builtin("f_inf", 1))
    assert lo == pytest.approx(1.0 - 1.0 / E, rel=1e-12)
    assert up == pytest.approx(0.0, abs=1e-12)


def test_jensen_sandwich_check_rejects_uncentered():
    shifted = tilt_translate(make_builtin("f1", 1), [0.3], [0.0])
    with pytest.raises(InputError):
        jensen_sandwich_check(shifted)
