import math

import numpy as np
import pytest

from helfrich import HelfrichParams, SolverConfig, integrate, rhs_chart_a, rhs_kappa
from helfrich.solver import ChartAState, fixed_step_chart_a
from helfrich import kernels
from helfrich._jit import unjitted
from helfrich.errors import NonPositiveRadius, SingularDenominator


def _state(r, w, wp):
    return ChartAState(r, w, wp, 0.0)


def test_rhs_flat_state_pressure_only():
    # with w = w' = 0 only the pressure term survives: 2r w'' = -p r^2 / 2
    params = HelfrichParams(0.7, -0.3, 1.0)
    assert math.isclose(rhs_chart_a(_state(1.0, 0.0, 0.0), params)[1], -0.25,
                        rel_tol=1e-15)
    assert math.isclose(rhs_chart_a(_state(2.0, 0.0, 0.0), params)[1], -0.5,
                        rel_tol=1e-15)


def test_rhs_rejects_nonpositive_radius():
    params = HelfrichParams(1.0, 0.25, 1.0)
    with pytest.raises(NonPositiveRadius):
        rhs_chart_a(_state(0.0, 0.0, 0.1), params)


def _kappa_derivs(r, w, wp, wpp):
    P = 1.0 + w * w
    k = w / (r * math.sqrt(P))
    kp = wp / (r * P ** 1.5) - w / (r * r * math.sqrt(P))
    kpp = (wpp / (r * P ** 1.5) - 3.0 * w * wp * wp / (r * P ** 2.5)
           - 2.0 * wp / (r * r * P ** 1.5) + 2.0 * w / (r ** 3 * math.sqrt(P)))
    return k, kp, kpp


def test_curvature_form_chain_rule_1000_states():
    """w'' from the graph chart must satisfy the curvature-form equation."""
    rng = np.random.default_rng(42)
    params = HelfrichParams(1.0, 0.25, 1.0)
    worst = 0.0
    for _ in range(1000):
        r = rng.uniform(0.05, 3.0)
        w = rng.uniform(-4.0, 4.0)
        wp = rng.uniform(-4.0, 4.0)
        wpp = rhs_chart_a(_state(r, w, wp), params)[1]
        k, kp, kpp = _kappa_derivs(r, w, wp, wpp)
        denom = 1.0 - r * r * k * k  # equals 1/(1+w^2), never zero here
        from helfrich import eval_q
        terms = np.array([
            -r * k * (r * kp + k) ** 2 / (2.0 * denom),
            -3.0 * kp,
            r * eval_q(k, params) / (2.0 * denom),
        ])
        resid = abs(r * kpp - terms.sum()) / max(1.0, np.abs(terms).max(),
                                                 abs(r * kpp))
        worst = max(worst, resid)
    assert worst <= 1e-9


def test_rhs_kappa_flat_point():
    params = HelfrichParams(1.0, 0.25, 1.0)
    got = rhs_kappa(1.0, 0.0, 0.0, params)
    assert math.isclose(got, -params.p / 4.0, rel_tol=1e-15)


def test_rhs_kappa_singular_denominator():
    params = HelfrichParams(1.0, 0.25, 1.0)
    with pytest.raises(SingularDenominator):
        rhs_kappa(2.0, 0.5 + 1e-14, 0.0, params)


def test_rhs_kappa_matches_restarted_integration():
    """kappa'' from the curvature equation vs a finite difference of kappa
    along a fresh graph-chart integration through the same state."""
    params = HelfrichParams(1.0, 0.25, 1.0)
    rng = np.random.default_rng(5)
    for _ in range(10):
        r = rng.uniform(0.5, 1.5)
        kap = rng.uniform(-0.5, 0.5) / r   # keep r^2 kap^2 < 1
        kapp = rng.uniform(-0.5, 0.5)
        m = r * kap
        w = m / math.sqrt(1.0 - m * m)
        P = 1.0 + w * w
        wp = r * P ** 1.5 * kapp + P * w / r
        want = rhs_kappa(r, kap, kapp, params)

        def kappa_at(dr, n=400):
            y0 = np.array([w, wp, 0.0, 0.0, 0.0, 0.0])
            y = fixed_step_chart_a(params, r, y0, r + dr, n)
            return y[0] / ((r + dr) * math.sqrt(1.0 + y[0] ** 2))

        def fd(h):
            return (kappa_at(h) - 2.0 * kap + kappa_at(-h)) / (h * h)

        # Richardson: error O(h^2) -> (4 fd(h/2) - fd(h)) / 3 is O(h^4)
        h = 2e-3
        est = (4.0 * fd(h / 2) - fd(h)) / 3.0
        assert abs(est - want) <= 1e-6 * max(1.0, abs(want))


def test_grouping_identity_along_trajectory(ref_traj):
    """The two conservative groupings differ by an exact derivative:
    d/dr[(w^2+2)/sqrt(1+w^2)] = w^3 w' / (1+w^2)^(3/2)."""
    seg = ref_traj.chart_a
    rs = np.linspace(seg.x_start, seg.x_end, 2000)
    Y = seg.eval_many(rs)
    w, wp = Y[:, 0], Y[:, 1]
    P = 1.0 + w * w
    # chain-rule expansion of the bracket difference vs the closed form,
    # normalized by the size of the expanded terms
    t1 = 2.0 * w / np.sqrt(P) * wp
    t2 = -(w * w + 2.0) * w / P ** 1.5 * wp
    closed = w ** 3 * wp / P ** 1.5
    scale = np.maximum.reduce([np.abs(t1), np.abs(t2), np.abs(closed),
                               np.full_like(t1, 1e-30)])
    assert np.max(np.abs(t1 + t2 - closed) / scale) <= 1e-9


def test_conservative_forms_hold_on_trajectory(ref_traj, paper_params):
    """Both first-integral groupings of the equation hold along solutions."""
    from helfrich import eval_q, eval_r
    seg = ref_traj.chart_a
    rs = np.linspace(seg.x_start * 2, seg.x_end, 1500)
    Y = seg.eval_many(rs)
    D = seg.deriv_many(rs)
    w, wp, wpp = Y[:, 0], Y[:, 1], D[:, 1]
    P = 1.0 + w * w
    kap = w / (rs * np.sqrt(P))
    lhs = (2.0 * rs * wp * wp / P ** 2.5 + 2.0 * rs * rs * wp * wpp / P ** 2.5
           - 5.0 * rs * rs * wp * wp * w * wp / P ** 3.5)
    rhs3 = 2.0 * w * wp / P ** 1.5 + rs ** 3 * wp * eval_q(kap, paper_params)
    rhs2 = (2.0 * w * wp / np.sqrt(P) - w ** 3 * wp / P ** 1.5
            + rs ** 3 * wp * eval_r(kap, paper_params))
    scale = np.maximum(1.0, np.abs(lhs))
    assert np.max(np.abs(lhs - rhs3) / scale) <= 1e-6
    assert np.max(np.abs(lhs - rhs2) / scale) <= 1e-6


def test_dense_output_consistency_and_order(paper_params):
    """Continuity at step ends is exact; mid-step values converge at the
    interpolant's order under step halving."""
    c0, lam, p = paper_params.c0, paper_params.lam, paper_params.p
    y0 = np.array([0.03, 0.05, 0.001, 0.0, 0.0, 0.0])
    r0 = 0.6

    def dense_midpoint_error(h):
        f0 = np.empty(6)
        kernels.rhs_chart_a_arr(r0, y0, c0, lam, p, f0)
        y1, f1, _, cont = kernels.dopri5_step_a(r0, y0, h, f0, c0, lam, p,
                                                1e-10, 1e-12)
        th = 0.5
        mid = cont[0] + th * (cont[1] + (1 - th) * (
            cont[2] + th * (cont[3] + (1 - th) * cont[4])))
        end = cont[0] + cont[1]
        assert np.allclose(end, y1, rtol=0, atol=1e-16)  # theta = 1 is exact
        ref = fixed_step_chart_a(paper_params, r0, y0, r0 + th * h, 2000)
        return np.max(np.abs(mid - ref))

    e1 = dense_midpoint_error(0.2)
    e2 = dense_midpoint_error(0.1)
    order = math.log2(e1 / e2)
    assert order >= 3.5  # quartic interpolant: local error O(h^5) ideally


def test_fixed_step_order_at_least_four(paper_params):
    """Step-halving on the fixed-step variant shows fifth-order decay."""
    y0 = np.array([0.001, 0.05, 0.0, 0.0, 0.0, 0.0])
    ra, rb = 0.02, 1.0
    ref = fixed_step_chart_a(paper_params, ra, y0, rb, 8192)
    errs = []
    for n in (64, 128, 256):
        y = fixed_step_chart_a(paper_params, ra, y0, rb, n)
        errs.append(np.max(np.abs(y - ref) / (1.0 + np.abs(ref))))
    order1 = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert order1 >= 4.0 and order2 >= 4.0


def test_adaptive_error_scales_with_tolerance(paper_params):
    from helfrich import ZERO_OF_W
    locs = {}
    for rt in (1e-6, 1e-8, 1e-10):
        traj = integrate(paper_params, 0.05,
                         SolverConfig(rel_tol=rt, abs_tol=1e-14))
        locs[rt] = traj.first_event(ZERO_OF_W).x
    ref = integrate(paper_params, 0.05,
                    SolverConfig(rel_tol=1e-13, abs_tol=1e-15))
    r0_ref = ref.first_event(ZERO_OF_W).x
    e6 = abs(locs[1e-6] - r0_ref)
    e10 = abs(locs[1e-10] - r0_ref)
    assert e10 < e6 <= 1e-4
    # roughly O(relTol): four decades of tolerance gain at least two of error
    assert e10 <= e6 * 1e-2


def test_jit_and_python_paths_agree(paper_params):
    c0, lam, p = paper_params.c0, paper_params.lam, paper_params.p
    y = np.array([0.02, 0.04, 0.001, 0.01, 0.0001, 0.02])
    f0 = np.empty(6)
    kernels.rhs_chart_a_arr(0.5, y, c0, lam, p, f0)
    f0_py = np.empty(6)
    unjitted(kernels.rhs_chart_a_arr)(0.5, y, c0, lam, p, f0_py)
    assert np.array_equal(f0, f0_py)
    got = kernels.dopri5_step_a(0.5, y, 0.05, f0, c0, lam, p, 1e-10, 1e-12)
    want = unjitted(kernels.dopri5_step_a)(0.5, y, 0.05, f0, c0, lam, p,
                                           1e-10, 1e-12)
    for a, b in zip(got, want):
        assert np.allclose(a, b, rtol=1e-15, atol=1e-18)

    yb = np.array([2.0, -0.1, -1.2, 0.5, -0.3, 0.8])
    fb = np.empty(6)
    kernels.rhs_chart_b_arr(-0.3, yb, c0, lam, p, fb)
    fb_py = np.empty(6)
    unjitted(kernels.rhs_chart_b_arr)(-0.3, yb, c0, lam, p, fb_py)
    assert np.array_equal(fb, fb_py)
