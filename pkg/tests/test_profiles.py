"""Profile values, derivatives, matrix calculus, and certification."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lingrow.profiles import (RadialProfile, certify_conditions, combined,
                              density_grad, density_hess_quadform,
                              minimal_surface, phi_mu, profile_d1, profile_d2,
                              profile_eval, recession_slope)

from .oracles import d1_fd, d2_fd, grad_fd, hess_quadform_fd, phi_dblquad, phi_quad

MU_SET = (1.2, 1.5, 2.0, 2.5, 3.0)


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# frozen values


def test_value_zero_at_origin():
    for p in (phi_mu(2.0), minimal_surface(), combined(0.1, 1.5, minimal_surface())):
        assert profile_eval(p, 0.0) == 0.0
        assert profile_d1(p, 0.0) == 0.0


def test_phi2_at_one_matches_log_form():
    assert profile_eval(phi_mu(2.0), 1.0) == pytest.approx(1.0 - math.log(2.0),
                                                           rel=1e-14)


def test_phi3_at_one_is_quarter():
    assert profile_eval(phi_mu(3.0), 1.0) == pytest.approx(0.25, rel=1e-14)


def test_double_quadrature_spot_checks():
    for mu in (1.2, 2.0, 3.0):
        for r in (0.5, 1.0, 7.0):
            v = profile_eval(phi_mu(mu), r)
            assert abs(v - phi_dblquad(mu, r)) <= 1e-8 * (1.0 + abs(v))


def test_first_derivative_values():
    assert profile_d1(phi_mu(2.0), 1.0) == pytest.approx(0.5, rel=1e-14)
    assert profile_d1(minimal_surface(), 1.0) == pytest.approx(
        1.0 / math.sqrt(2.0), rel=1e-14)


def test_second_derivative_values():
    assert profile_d2(phi_mu(2.5), 0.0) == 1.0
    assert profile_d2(phi_mu(3.0), 1.0) == pytest.approx(0.125, rel=1e-14)
    assert profile_d2(minimal_surface(), 2.0) == pytest.approx(5.0 ** -1.5,
                                                               rel=1e-14)


def test_density_grad_values():
    assert np.all(density_grad(phi_mu(2.0), np.zeros((1, 2))) == 0.0)
    g = density_grad(phi_mu(2.0), np.array([[1.0, 0.0]]))
    assert g[0, 0] == pytest.approx(0.5, rel=1e-14)
    assert g[0, 1] == 0.0
    g = density_grad(minimal_surface(), np.array([[3.0, 4.0]]))
    assert g[0, 0] == pytest.approx(3.0 / math.sqrt(26.0), rel=1e-12)
    assert g[0, 1] == pytest.approx(4.0 / math.sqrt(26.0), rel=1e-12)


def test_hess_quadform_values():
    P = np.array([[1.0, 0.0]])
    assert density_hess_quadform(phi_mu(2.0), P, np.zeros((1, 2))) == 0.0
    v = density_hess_quadform(phi_mu(2.0), np.zeros((1, 2)),
                              np.array([[1.0, 1.0]]))
    assert v == pytest.approx(2.0, rel=1e-14)
    v = density_hess_quadform(phi_mu(3.0), P, np.array([[0.0, 1.0]]))
    assert v == pytest.approx(0.375, rel=1e-14)


def test_recession_slopes():
    assert recession_slope(phi_mu(3.0)) == pytest.approx(0.5, rel=1e-15)
    assert recession_slope(minimal_surface()) == 1.0
    assert recession_slope(combined(0.1, 2.0, minimal_surface())) == \
        pytest.approx(1.1, rel=1e-15)
    # numeric cross-check of the limit value / t at two large arguments
    for p in (phi_mu(3.0), minimal_surface()):
        k = recession_slope(p)
        for t in (1e6, 1e8):
            assert rel_err(profile_eval(p, t) / t, k) <= 1e-5


# ---------------------------------------------------------------------------
# quadrature equivalence across the mu set


def test_quadrature_equivalence_sweep():
    ts = np.geomspace(1e-3, 100.0, 50)
    for mu in MU_SET:
        vals = profile_eval(phi_mu(mu), ts)
        for t, v in zip(ts, vals):
            q = phi_quad(mu, float(t))
            assert abs(v - q) <= 1e-8 * (1.0 + abs(q)), (mu, t)


def test_near_two_series_window():
    for mu in (2.0 - 1e-7, 2.0 + 1e-7, 2.0 - 1e-9, 2.0 + 1e-9):
        for r in (0.1, 1.0, 10.0, 100.0):
            v = profile_eval(phi_mu(mu), r)
            q = phi_quad(mu, r)
            assert abs(v - q) <= 1e-10 * (1.0 + abs(q)), (mu, r)


def test_continuity_across_mu_equals_two():
    ts = np.geomspace(1e-2, 100.0, 20)
    base = profile_eval(phi_mu(2.0), ts)
    for mu in (2.0 - 1e-9, 2.0 + 1e-9):
        v = profile_eval(phi_mu(mu), ts)
        assert np.all(np.abs(v - base) <= 1e-8 * (1.0 + np.abs(base)))


# ---------------------------------------------------------------------------
# derivative consistency with finite differences


@pytest.mark.parametrize("p", [phi_mu(mu) for mu in MU_SET]
                         + [minimal_surface(), combined(0.1, 1.5, minimal_surface())])
def test_derivatives_match_finite_differences(p):
    for t in np.geomspace(1e-3, 100.0, 50):
        t = float(t)
        f = lambda s: profile_eval(p, s)
        h1 = min(t / 3.0, 0.01 * (1.0 + t))
        assert rel_err(d1_fd(f, t, h1), profile_d1(p, t)) <= 1e-5, t
        h2 = min(t / 3.0, 4e-3 * (1.0 + t))
        assert rel_err(d2_fd(f, t, h2), profile_d2(p, t)) <= 1e-5, t


def test_matrix_gradient_and_hessian_match_finite_differences():
    rng = np.random.default_rng(7)
    p = phi_mu(1.5)
    F = lambda P: profile_eval(p, float(np.sqrt(np.sum(P * P))))
    for _ in range(30):
        scale = 10.0 ** rng.uniform(-6, 3)
        P = rng.normal(size=(1, 2))
        P *= scale / np.linalg.norm(P)
        Q = rng.normal(size=(1, 2))
        Q /= np.linalg.norm(Q)
        t = float(np.linalg.norm(P))
        hg = min(t / 3.0, 0.01 * (1.0 + t))
        g = density_grad(p, P)
        g_fd = grad_fd(F, P, hg)
        assert np.max(np.abs(g - g_fd)) <= 1e-4 * max(np.max(np.abs(g)), 1e-300)
        hh = min(t / 3.0, 3e-3 * (1.0 + t))
        q = density_hess_quadform(p, P, Q)
        q_fd = hess_quadform_fd(F, P, Q, hh)
        assert rel_err(q_fd, q) <= 1e-4


def test_hessian_sandwich_between_radial_bounds():
    rng = np.random.default_rng(11)
    for p in (phi_mu(1.2), phi_mu(3.0), minimal_surface()):
        for _ in range(50):
            P = rng.normal(size=(1, 2)) * 10.0 ** rng.uniform(-6, 3)
            Q = rng.normal(size=(1, 2))
            t = float(np.linalg.norm(P))
            lo = min(profile_d2(p, t), profile_d1(p, t) / t)
            hi = max(profile_d2(p, t), profile_d1(p, t) / t)
            q2 = float(np.sum(Q * Q))
            v = density_hess_quadform(p, P, Q)
            assert lo * q2 - 1e-12 <= v <= hi * q2 + 1e-12


# ---------------------------------------------------------------------------
# fitted-constant properties


def test_ellipticity_corridor_with_fitted_constants():
    rng = np.random.default_rng(3)
    for mu in MU_SET:
        p = phi_mu(mu)
        c = certify_conditions(p, 100.0, 1000).constants
        assert c.nu6 is not None and c.mu_certified == mu
        for _ in range(200):
            P = rng.normal(size=(1, 2)) * 10.0 ** rng.uniform(-3, 3)
            Q = rng.normal(size=(1, 2))
            t = float(np.linalg.norm(P))
            q2 = float(np.sum(Q * Q))
            v = density_hess_quadform(p, P, Q)
            lower = c.nu6 * (1.0 + t) ** (-c.mu_certified) * q2
            upper = c.nu5 * (1.0 + t) ** (-1.0) * q2
            assert v >= lower * (1.0 - 1e-9)
            assert v <= upper * (1.0 + 1e-9)


def test_coercivity_and_gradient_bound():
    rng = np.random.default_rng(5)
    for p in (phi_mu(1.5), phi_mu(3.0), minimal_surface()):
        c = certify_conditions(p, 100.0, 1000).constants
        k = recession_slope(p)
        for _ in range(200):
            P = rng.normal(size=(1, 2)) * 10.0 ** rng.uniform(-3, 2)
            t = float(np.linalg.norm(P))
            g = density_grad(p, P)
            dot = float(np.sum(g * P))
            assert dot >= c.nu1 * t - c.nu2 - 1e-9 * (1.0 + t)
            assert float(np.linalg.norm(g)) <= k + 1e-9


def test_combined_additivity_is_exact():
    base = minimal_surface()
    p = combined(0.25, 1.5, base)
    ts = np.geomspace(1e-4, 1e3, 40)
    for order, fn in ((0, profile_eval), (1, profile_d1), (2, profile_d2)):
        lhs = fn(p, ts)
        rhs = 0.25 * fn(phi_mu(1.5), ts) + fn(base, ts)
        assert np.array_equal(lhs, rhs), order


# ---------------------------------------------------------------------------
# certification reports


def test_certify_phi_mu_family():
    for mu in MU_SET:
        rep = certify_conditions(phi_mu(mu), 100.0, 1000)
        assert rep.all_passed, mu
        c = rep.constants
        assert c.mu_certified == mu
        assert c.nu6 == pytest.approx(1.0, abs=1e-9)
        assert c.nu3 == pytest.approx(1.0 / (mu - 1.0), rel=1e-15)
        assert 0.0 < c.nu1 <= c.nu3


def test_certify_minimal_surface():
    rep = certify_conditions(minimal_surface(), 100.0, 1000)
    assert rep.all_passed
    c = rep.constants
    assert c.mu_certified == 3.0
    assert c.nu6 == pytest.approx(1.0, abs=1e-9)
    assert c.nu3 == 1.0
    assert c.nu1 == pytest.approx(math.sqrt(2.0) - 1.0, rel=1e-12)
    assert c.nu5 == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_certify_small_sample_run():
    rep = certify_conditions(phi_mu(1.5), 10.0, 100)
    assert rep.all_passed
    assert rep.constants.nu3 == pytest.approx(2.0, rel=1e-15)


def test_certify_combined_profiles():
    rep = certify_conditions(combined(0.1, 1.5, minimal_surface()), 100.0, 1000)
    assert rep.all_passed
    assert rep.constants.mu_certified == 1.5
    assert 0.1 < rep.constants.nu6 < 0.11

    rep = certify_conditions(combined(0.05, 1.9, phi_mu(1.2)), 100.0, 1000)
    assert rep.all_passed
    assert rep.constants.mu_certified == 1.9


def test_report_serializes_one_entry_per_condition():
    rep = certify_conditions(phi_mu(2.0), 100.0, 1000)
    payload = json.loads(rep.to_json())
    assert payload["all_passed"] is True
    assert set(payload["checks"]) == {
        "value_zero_at_origin", "slope_zero_at_origin", "convexity",
        "linear_growth_sandwich", "curvature_decay",
        "hessian_upper_corridor", "mu_ellipticity",
    }
    for entry in payload["checks"].values():
        assert entry["passed"] is True
    assert payload["constants"]["nu6"] is not None


# ---------------------------------------------------------------------------
# validation


def test_parameter_validation():
    with pytest.raises(ValueError):
        phi_mu(1.0)
    with pytest.raises(ValueError):
        phi_mu(0.5)
    with pytest.raises(ValueError):
        RadialProfile("minimal_surface", mu=2.0)
    with pytest.raises(ValueError):
        combined(0.0, 1.5, minimal_surface())
    with pytest.raises(ValueError):
        combined(1.0, 1.5, minimal_surface())
    with pytest.raises(ValueError):
        combined(0.1, 1.5, combined(0.1, 1.5, minimal_surface()))
    with pytest.raises(ValueError):
        RadialProfile("unknown")


def test_negative_argument_rejected():
    for fn in (profile_eval, profile_d1, profile_d2):
        with pytest.raises(ValueError):
            fn(phi_mu(2.0), -1.0)


def test_certify_input_validation():
    with pytest.raises(ValueError):
        certify_conditions(phi_mu(2.0), 0.0, 1000)
    with pytest.raises(ValueError):
        certify_conditions(phi_mu(2.0), 100.0, 99)


def test_profile_dict_round_trip():
    p = combined(0.1, 1.7, minimal_surface())
    assert RadialProfile.from_dict(p.to_dict()) == p
    q = phi_mu(2.5)
    assert RadialProfile.from_dict(q.to_dict()) == q
    with pytest.raises(ValueError):
        RadialProfile.from_dict({"mu": 2.0})


# ---------------------------------------------------------------------------
# structural properties


@given(st.floats(1.01, 6.0), st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_midpoint_convexity(mu, a, b):
    p = phi_mu(mu)
    mid = profile_eval(p, 0.5 * (a + b))
    avg = 0.5 * (profile_eval(p, a) + profile_eval(p, b))
    assert mid <= avg + 1e-12 * (1.0 + avg)


@given(st.floats(1.01, 6.0))
def test_slope_monotone_and_curvature_nonnegative(mu):
    p = phi_mu(mu)
    ts = np.linspace(0.0, 30.0, 200)
    d1 = profile_d1(p, ts)
    assert np.all(np.diff(d1) >= -1e-14)
    assert np.all(profile_d2(p, ts) >= 0.0)
    assert np.all(d1 <= recession_slope(p) + 1e-12)
