"""Convex bodies: closed stats, gauges, the section-body identity, cone lifts.

Reference volumes and covariances (all derivable by direct integration):

  cube [-1,1]^n:      vol 2^n,    Cov = I/3
  ball B_2^n:         vol pi^{n/2}/Gamma(n/2+1),  Cov = I/(n+2)
  cross-polytope:     vol 2^n/n!, Cov = 2I/((n+1)(n+2))
  centered simplex:   vol 1/n!,   Cov = ((n+1)I - J)/((n+1)^2 (n+2))
"""

import math

import numpy as np
import pytest

from lclab import InputError, make_builtin, moments
from lclab.bodies import (
    Body,
    ConcaveProfile,
    body_from_dict,
    cone_lift,
    cone_lift_lhat,
    indicator,
    km_isoconst,
    km_limit_sweep,
    make_body,
    profile_from_function,
    tent_profile,
)


# -- closed statistics -------------------------------------------------------

def test_cube_stats():
    st = make_body("cube", 2).stats()
    assert st.method == "closed"
    assert st.volume == pytest.approx(4.0)
    np.testing.assert_allclose(st.barycenter, 0.0, atol=1e-15)
    np.testing.assert_allclose(st.covariance, np.eye(2) / 3.0, atol=1e-15)


def test_ball_stats():
    st2 = make_body("ball", 2).stats()
    assert st2.volume == pytest.approx(math.pi, rel=1e-12)
    np.testing.assert_allclose(st2.covariance, np.eye(2) / 4.0, atol=1e-15)
    st3 = make_body("ball", 3).stats()
    assert st3.volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)
    np.testing.assert_allclose(st3.covariance, np.eye(3) / 5.0, atol=1e-15)


def test_cross_polytope_stats():
    st = make_body("cross_polytope", 3).stats()
    assert st.volume == pytest.approx(8.0 / 6.0, rel=1e-12)
    np.testing.assert_allclose(st.covariance, np.eye(3) / 10.0, atol=1e-15)


def test_simplex_stats():
    st = make_body("simplex", 2).stats()
    assert st.volume == pytest.approx(0.5, rel=1e-12)
    want = (3.0 * np.eye(2) - np.ones((2, 2))) / (9.0 * 4.0)
    np.testing.assert_allclose(st.covariance, want, atol=1e-15)
    np.testing.assert_allclose(st.barycenter, 0.0, atol=1e-15)


def test_isotropic_constants():
    assert make_body("cube", 2).isotropic_constant() == pytest.approx(1.0 / math.sqrt(12.0), rel=1e-12)
    # ball: L = (n+2)^{-1/2} vol^{-1/n}
    for n in (2, 3):
        b = make_body("ball", n)
        vol = b.stats().volume
        want = (n + 2.0) ** -0.5 * vol ** (-1.0 / n)
        assert b.isotropic_constant() == pytest.approx(want, rel=1e-12)


# -- gauges ------------------------------------------------------------------

def test_gauge_formulas():
    rng = np.random.default_rng(17)
    x = rng.normal(size=(50, 2))
    np.testing.assert_allclose(make_body("cube", 2).gauge(x), np.max(np.abs(x), axis=-1), atol=1e-14)
    np.testing.assert_allclose(make_body("ball", 2).gauge(x), np.linalg.norm(x, axis=-1), atol=1e-14)
    np.testing.assert_allclose(make_body("cross_polytope", 2).gauge(x),
                               np.sum(np.abs(x), axis=-1), atol=1e-14)


def test_gauge_is_one_on_vertices():
    for kind in ("cube", "cross_polytope", "simplex"):
        for n in (1, 2, 3):
            body = make_body(kind, n)
            np.testing.assert_allclose(body.gauge(body.vertex_array()), 1.0, atol=1e-12)


def test_gauge_positive_homogeneity():
    body = make_body("simplex", 3)
    rng = np.random.default_rng(8)
    x = rng.normal(size=(20, 3))
    np.testing.assert_allclose(body.gauge(2.5 * x), 2.5 * body.gauge(x), rtol=1e-12)


def test_simplex_gauge_matches_vertex_hull():
    simplex = make_body("simplex", 2)
    hull = make_body("vertex_polytope", vertices=simplex.vertex_array())
    rng = np.random.default_rng(23)
    x = rng.normal(size=(100, 2))
    np.testing.assert_allclose(simplex.gauge(x), hull.gauge(x), rtol=1e-10, atol=1e-12)


# -- vertex polytopes --------------------------------------------------------

def test_vertex_polytope_reproduces_cube():
    cube = make_body("cube", 2)
    poly = make_body("vertex_polytope", vertices=cube.vertex_array())
    st = poly.stats()
    assert st.method == "decomposition"
    assert st.volume == pytest.approx(4.0, rel=1e-12)
    np.testing.assert_allclose(st.covariance, np.eye(2) / 3.0, atol=1e-12)


def test_vertex_polytope_mc_agrees_with_decomposition():
    rng = np.random.default_rng(7)
    verts = rng.normal(size=(9, 3)) * 1.4
    verts -= verts.mean(axis=0)  # keep the origin inside, typically
    poly = make_body("vertex_polytope", vertices=verts)
    exact = poly.stats()
    mc = poly.stats(method="mc", samples=400_000, seed=99)
    assert mc.se_volume is not None
    assert abs(mc.volume - exact.volume) <= 5 * mc.se_volume
    np.testing.assert_allclose(mc.barycenter, exact.barycenter, atol=0.02)


def test_vertex_polytope_validation():
    with pytest.raises(InputError):
        make_body("vertex_polytope", vertices=np.ones((17, 2)))
    with pytest.raises(InputError):  # origin outside
        make_body("vertex_polytope", vertices=[[1.0, 1.0], [2.0, 1.0], [1.5, 2.0]])
    with pytest.raises(InputError):  # rank-deficient
        make_body("vertex_polytope", vertices=[[-1.0, -1.0], [0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(InputError):
        make_body("gaussian_blob", 2)


def test_body_serialization_roundtrip():
    poly = make_body("vertex_polytope",
                     vertices=[[1.2, 0.0], [0.0, 1.1], [-1.0, -1.0], [0.9, -0.8]])
    back = body_from_dict(poly.to_dict())
    assert back == poly
    named = make_body("ball", 3)
    assert body_from_dict(named.to_dict()) == named


def test_stats_cache_reused():
    body = make_body("simplex", 3)
    assert body.stats() is body.stats()


# -- indicators and cone lifts -----------------------------------------------

def test_indicator_moments_match_body_stats():
    body = make_body("simplex", 2)
    rep = moments(indicator(body))
    st = body.stats()
    assert rep.method == "closed"
    assert rep.integral == pytest.approx(st.volume, rel=1e-12)
    np.testing.assert_allclose(rep.covariance, st.covariance, atol=1e-14)
    assert rep.entropy == pytest.approx(0.0, abs=1e-14)
    assert rep.varentropy == pytest.approx(0.0, abs=1e-14)


def test_cone_lift_closed_moments():
    f = cone_lift(make_body("cube", 1))
    assert f.dim == 2
    rep = moments(f)
    assert rep.method == "closed"
    assert rep.integral == pytest.approx(2.0 * math.e**2, rel=1e-12)
    assert rep.varentropy == pytest.approx(2.0, rel=1e-12)
    assert rep.L_hat == pytest.approx(cone_lift_lhat(1.0 / math.sqrt(12.0), 1), rel=1e-12)


def test_cone_lift_grid_agrees_with_closed():
    f = cone_lift(make_body("cube", 1))
    closed = moments(f)
    grid = moments(f, method="grid")
    assert grid.L_hat == pytest.approx(closed.L_hat, rel=2e-3)
    assert grid.integral == pytest.approx(closed.integral, rel=2e-3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_cone_lift_lhat_simplex_equality(n):
    l_simplex = make_body("simplex", n).isotropic_constant()
    assert cone_lift_lhat(l_simplex, n) == pytest.approx(1.0 / math.e, abs=1e-12)


def test_cone_lift_barycenter_zero():
    rep = moments(cone_lift(make_body("simplex", 2)))
    np.testing.assert_allclose(rep.barycenter, 0.0, atol=1e-12)


# -- section-body identity ---------------------------------------------------

def test_km_hand_case_cross_polytope():
    # C = [-1,1], g = tent, m = 1 lifts to the 2D cross-polytope:
    # L_K^4 = 1/144 on both sides of the identity
    res = km_isoconst(make_body("cube", 1), tent_profile(1))
    assert res.rhs == pytest.approx(1.0 / 144.0, rel=1e-5)
    assert abs(res.lhs_log - res.rhs_log) <= 10.0 * res.quad_error
    assert res.body_constant == pytest.approx(res.lhs ** 0.25, rel=1e-12)
    assert res.body_constant == pytest.approx(1.0 / math.sqrt(12.0), rel=1e-3)


def test_km_simplex_section_case():
    res = km_isoconst(make_body("simplex", 2), tent_profile(1))
    assert abs(res.lhs_log - res.rhs_log) <= 10.0 * res.quad_error


def test_km_direct_refuses_dim_above_three():
    with pytest.raises(InputError):
        km_isoconst(make_body("cube", 3), tent_profile(1))


def test_profile_validation():
    with pytest.raises(InputError):
        ConcaveProfile(1, [[-1.0, 1.0]], lambda y: np.full(np.shape(y)[:-1], -np.inf))


def test_tent_profile_moments():
    prof = tent_profile(1)
    # int (1-|y|)^m dy = 2/(m+1)
    for m in (1.0, 3.0):
        logZ, bar, cov = prof.power_moments(m)
        assert math.exp(logZ) == pytest.approx(2.0 / (m + 1.0), rel=1e-6)
        assert bar[0] == pytest.approx(0.0, abs=1e-12)
    assert prof.max_value() == pytest.approx(1.0, rel=1e-12)


def test_km_limit_sweep_gaussian():
    sweep = km_limit_sweep(make_builtin("gaussian", 1), [5.0, 20.0, 80.0])
    assert sweep.limit == pytest.approx(1.0 / (2.0 * math.pi * math.e), rel=1e-12)
    assert all(a > b for a, b in zip(sweep.abs_errs, sweep.abs_errs[1:]))
    assert sweep.ratios[-1] == pytest.approx(sweep.limit, rel=0.02)


def test_km_limit_sweep_f1():
    # limit is L_hat^2 = (sqrt(2)/(2e))^2 = 1/(2 e^2)
    sweep = km_limit_sweep(make_builtin("f1", 1), [10.0, 40.0])
    assert sweep.limit == pytest.approx(1.0 / (2.0 * math.e**2), rel=1e-12)
    assert sweep.ratios[-1] == pytest.approx(sweep.limit, rel=0.05)
