import dataclasses
import json
import math

import numpy as np
import pytest

import _refvals as rv
from nhimlab import (
    BoundSet,
    ContractError,
    OutOfNeighborhoodError,
    apply_map,
    check_constants,
    estimate_bounds,
    jacobian,
    make_defective,
    make_linear,
    make_poly,
    make_twist_annulus,
    validate_conditions,
)


def strip_analytic(f):
    return dataclasses.replace(
        f, d_r=None, d2_r=None, d_A_s=None, d_A_u=None, d_g=None, d2_g=None)


def test_linear_apply_and_jacobian():
    f = make_linear(0.5, 2.0)
    p = f.point([0.4], [0.1], [0.0])
    w = apply_map(f, p)
    assert w.s[0] == 0.2 and w.u[0] == 0.2 and w.x[0] == 0.0
    jac = jacobian(f, p)
    assert np.array_equal(jac, np.diag([0.5, 2.0, 1.0]))


def test_poly_image_matches_oracle():
    f = make_poly(0.05)
    w = apply_map(f, f.point([0.2], [0.2], [0.0]))
    got = (w.s[0], w.u[0], w.x[0])
    assert np.allclose(got, rv.POLY_IMAGE_02_02, rtol=0, atol=1e-16)


def test_poly_jacobian_matches_oracle_and_fd():
    f = make_poly(0.05)
    p = f.point([0.2], [0.2], [0.0])
    jac = jacobian(f, p)
    assert np.allclose(jac, rv.POLY_JAC_02_02, rtol=0, atol=1e-15)
    fd = jacobian(strip_analytic(f), p)
    assert np.max(np.abs(fd - jac)) <= 1e-8


def test_remainder_vanishes_on_manifold():
    for f in (make_poly(0.05), make_linear(0.5, 2.0, omega=0.3)):
        p = f.point([0.0], [0.0], [1.2])
        w = apply_map(f, p)
        assert w.s[0] == 0.0 and w.u[0] == 0.0
        jac = jacobian(f, p)
        # Dr = 0 on the manifold: the block jacobian is exactly block diagonal
        assert jac[0, 1] == 0.0 and jac[0, 2] == 0.0
        assert jac[1, 0] == 0.0 and jac[1, 2] == 0.0
        assert jac[2, 0] == 0.0 and jac[2, 1] == 0.0


def test_fd_jacobian_second_order_convergence():
    f = make_twist_annulus(0.05, 0.0, 1.0)
    g = strip_analytic(f)
    p = f.point([0.2], [0.1], [1.3, 0.4])
    exact = jacobian(f, p)
    e1 = np.max(np.abs(jacobian(g, p, h=1e-3) - exact))
    e2 = np.max(np.abs(jacobian(g, p, h=5e-4) - exact))
    assert 3.0 <= e1 / e2 <= 5.0


def test_apply_map_rejects_points_outside_ball():
    f = make_linear(0.5, 2.0, rho=0.5)
    with pytest.raises(OutOfNeighborhoodError):
        apply_map(f, f.point([0.5], [0.0], [0.0]))


def test_validate_conditions_linear_exact():
    report = validate_conditions(make_linear(0.5, 2.0, omega=0.3), sample_count=64)
    assert report.passed
    for name in ("a", "b", "c", "d"):
        assert report.check(name).max_violation == 0.0


def test_validate_conditions_poly_passes():
    report = validate_conditions(make_poly(0.05), sample_count=128)
    assert report.passed
    payload = json.loads(report.to_json())
    assert payload["passed"] is True
    names = {c["name"] for c in payload["checks"]}
    assert {"a", "b", "c", "d", "e"} <= names


def test_validate_conditions_flags_broken_b():
    f = make_defective("b", amp=0.025)
    report = validate_conditions(f, sample_count=128)
    assert not report.passed
    viol = report.check("b").max_violation
    assert 0.8 * 0.025 * f.rho <= viol <= 0.025 * f.rho
    # analytic derivative check sees the off-block slope exactly
    assert np.isclose(report.check("derivatives_bc").max_violation, 0.025, rtol=1e-12)
    # violation is linear in the defect amplitude on the same sample set
    viol2 = validate_conditions(make_defective("b", amp=0.05), sample_count=128).check("b").max_violation
    assert np.isclose(viol2, 2.0 * viol, rtol=1e-12)


def test_validate_conditions_flags_broken_d():
    report = validate_conditions(make_defective("d", amp=0.025), sample_count=128)
    assert not report.passed
    assert report.check("d").max_violation > 0.0


def test_validate_conditions_deterministic():
    f = make_poly(0.1)
    r1 = validate_conditions(f, sample_count=64)
    r2 = validate_conditions(f, sample_count=64)
    assert r1.to_dict() == r2.to_dict()


def test_estimate_bounds_poly():
    f = make_poly(0.05)
    b = estimate_bounds(f, grid_density=7, target_eps=1e-2)
    # k = sup ||Dr|| = 2*c*rho, sampled on a grid inset by a relative 1e-9
    assert np.isclose(b.k, 2 * 0.05 * f.rho, rtol=1e-8)
    assert np.isclose(b.C, 0.05, rtol=1e-12)
    assert np.isclose(b.c_excluded, 0.05, rtol=1e-12)
    assert b.C_tilde == 0.0 and b.D == 0.0
    assert b.lk1_ok and b.lk2_ok
    assert np.isclose(b.eps_s, rv.POLY_EPS_S, rtol=1e-6)


def test_estimate_bounds_linear_all_zero():
    b = estimate_bounds(make_linear(0.5, 2.0, omega=0.3), grid_density=5)
    assert b.k == 0.0 and b.C == 0.0 and b.C_tilde == 0.0 and b.D == 0.0


def test_estimate_bounds_monotone_under_refinement():
    f = make_twist_annulus(0.05, 0.0, 1.0)
    coarse = estimate_bounds(f, grid_density=4)
    fine = estimate_bounds(f, grid_density=8)
    assert fine.k >= coarse.k
    assert fine.C >= coarse.C
    assert fine.C_tilde >= coarse.C_tilde
    assert fine.D >= coarse.D


def test_check_constants_slacks():
    b = BoundSet.from_constants(0.5, 0.05, 0.05, 0.0, 0.0, 0.5, 1e-2)
    checks = {c.name: c for c in check_constants(b)}
    assert all(c.holds for c in checks.values())
    assert np.isclose(checks["lambda_plus_k_below_one"].slack, 0.45, atol=1e-12)


def test_check_constants_detects_rate_violation():
    b = BoundSet.from_constants(0.5, 0.6, 0.0, 0.0, 0.0, 0.5, 1e-2)
    checks = {c.name: c for c in check_constants(b)}
    assert not checks["lambda_plus_k_below_one"].holds
    assert checks["lambda_plus_k_below_one"].slack < 0.0


def test_budget_oracle_values():
    b = BoundSet.from_constants(0.9, 0.05, 0.0, 0.0, 0.0, 0.5, 0.1)
    assert np.isclose(b.mu_star, rv.MU_STAR_09_005, rtol=1e-13)
    checks = {c.name: c for c in check_constants(b)}
    assert np.isclose(checks["slab_contraction"].slack, rv.CONTRACTION_09_005, rtol=1e-12)

    poly = BoundSet.from_constants(0.5, 0.05, 0.05, 0.0, 0.0, 0.5, 1e-2)
    assert np.isclose(poly.mu_star, rv.POLY_MU_STAR, rtol=1e-13)
    assert np.isclose(poly.eps_s, rv.POLY_EPS_S, rtol=1e-13)
    # the stable branch is the binding one for this budget
    assert rv.POLY_EPS_S == rv.POLY_SLAB_BRANCH_S
    assert rv.POLY_SLAB_BRANCH_S < rv.POLY_SLAB_BRANCH_X
    assert np.isclose(poly.delta, (poly.C + 1.0) * poly.eps_s, rtol=1e-15)


def test_budget_degenerate_denominator():
    b = BoundSet.from_constants(0.9, 0.05, 0.0, 0.0, 0.0, 0.5, 12.0)
    assert math.isinf(b.mu_star)
    assert b.eps_s == 0.0
    assert not b.slab_ok


def test_slab_width_capped_by_rho():
    b = BoundSet.from_constants(0.5, 1e-6, 0.0, 0.0, 0.0, 1e-4, 0.9)
    assert b.eps_s <= b.rho


def test_boundset_serialization():
    b = BoundSet.from_constants(0.5, 0.05, 0.05, 0.0, 0.0, 0.5, 1e-2)
    d = b.to_dict()
    assert d["lambda"] == 0.5 and d["k"] == 0.05
    assert d["lk1_ok"] is True and d["lk2_ok"] is True
    json.dumps(d)


def test_x_ranges():
    f = make_linear(0.5, 2.0)
    assert list(f.x_ranges()) == [(0.0, 2 * np.pi)]
    tw = make_twist_annulus(0.05, 0.25, 1.75)
    assert list(tw.x_ranges()) == [(0.0, 2 * np.pi), (0.25, 1.75)]
