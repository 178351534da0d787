import math

import pytest

from helfrich import (
    HelfrichParams,
    analyze_cubic,
    asymptotic_sweep,
    check_single,
    derived_constants,
    extract_landmarks,
    integrate,
    phase_sweep,
)
from helfrich.analysis import BICONCAVE
from helfrich.bounds import CHECK_IDS
from helfrich.errors import MissingEvent

PAPER = HelfrichParams(1.0, 0.25, 1.0)


@pytest.fixture(scope="module")
def ref_report(ref_traj, ref_landmarks):
    return check_single(ref_traj, ref_landmarks, PAPER,
                        derived_constants(PAPER, 0.05))


def test_all_checks_present_and_pass(ref_report):
    assert [rec.check_id for rec in ref_report.records] == CHECK_IDS
    for rec in ref_report.records:
        assert rec.status == "Pass", rec
    assert ref_report.passed


def test_skipped_never_passes_hypothesis_rule(ref_report):
    for rec in ref_report.records:
        if not rec.hypothesis_satisfied:
            assert rec.status == "Skipped"


def test_delta_definition():
    dc = derived_constants(PAPER, 0.05)
    assert dc.delta == min(dc.delta_plus / 8.0, dc.delta_minus / 2.0)


def test_b_lower_bound_chain(ref_report, ref_landmarks):
    """B = sqrt(delta r0^2 |w'(r0)|) >= sqrt(delta delta_plus / 8) r0^2."""
    rec = ref_report.record("NegAreaLower")
    dc = derived_constants(PAPER, 0.05)
    B = math.sqrt(dc.delta * ref_landmarks.r0 ** 2 * abs(ref_landmarks.wp_r0))
    assert B >= rec.info["b_lower_chain"] - 1e-12
    assert B >= dc.delta * ref_landmarks.r0 ** 2 / math.sqrt(2.0) - 1e-12


def test_neg_area_precondition(ref_report):
    rec = ref_report.record("NegAreaLower")
    assert rec.info["b_times_x"] <= math.pi / 2.0 * (1.0 + 1e-9)
    # chain: actual >= log bound >= quadratic bound
    assert rec.rhs >= rec.lhs - rec.tol
    assert rec.lhs >= rec.info["quad_bound"] - 1e-12


def test_informational_variants_reported(ref_report):
    assert "variant_64_bound" in ref_report.record("R0Upper").info
    assert "variant_delta32_bound" in ref_report.record("AreaPosUpper").info
    assert "variant_quarter_delta_bound" in ref_report.record("RInfUpper").info
    # the adopted area-bound constant is the one consistent with the
    # small-slope limit 8/p
    dc = derived_constants(PAPER, 1e-6)
    assert math.isclose(4.0 * 1e-12 / (dc.delta_plus * math.sqrt(dc.xi)) / 1e-12,
                        8.0 / PAPER.p, rel_tol=1e-4)


def test_check_single_requires_equator(blowup_traj):
    params = HelfrichParams(5.0, 0.0, 0.1)
    with pytest.raises(MissingEvent):
        check_single(blowup_traj, extract_landmarks(blowup_traj), params,
                     derived_constants(params, 1.0))


def test_checks_skip_when_roots_not_all_positive():
    # (t+1)(t^2 - t - 1): a negative root makes delta_minus <= 0
    params = HelfrichParams(0.0, -2.0, 2.0)
    ca = analyze_cubic(params)
    assert not ca.all_roots_positive
    traj = integrate(params, 0.05)
    lm = extract_landmarks(traj)
    if lm.r_inf is None:
        pytest.skip("no equator outside the guaranteed regime")
    rep = check_single(traj, lm, params, derived_constants(params, 0.05))
    skipped = {rec.check_id for rec in rep.records if rec.status == "Skipped"}
    assert {"R0Upper", "WpR0Upper", "RInfUpper", "NegAreaLower"} <= skipped
    for rec in rep.records:
        if not rec.hypothesis_satisfied:
            assert rec.status == "Skipped"


def test_reports_are_reproducible(ref_traj, ref_landmarks):
    a = check_single(ref_traj, ref_landmarks, PAPER, derived_constants(PAPER, 0.05))
    b = check_single(ref_traj, ref_landmarks, PAPER, derived_constants(PAPER, 0.05))
    assert a == b


def test_asymptotic_sweep_reference(sweep_runs):
    runs = [(w0p, cls.verdict, lm) for w0p, _, lm, cls in sweep_runs]
    rep = asymptotic_sweep(PAPER, runs=runs)
    assert not rep.excluded
    assert not rep.band_failures
    assert rep.neg_area_ratio_inf > 0.0
    assert rep.passed
    good = [r for r in rep.records if r.classification == BICONCAVE]
    for r in good:
        assert r.rm2_over_w0p <= r.r02_over_w0p  # r_M < r0
    smallest = good[-1]
    assert math.isclose(smallest.rm2_over_w0p, 32.0 / 3.0, rel_tol=2e-3)
    assert math.isclose(smallest.r02_over_w0p, 32.0, rel_tol=2e-3)
    assert math.isclose(smallest.slope_ratio, -2.0, rel_tol=2e-3)
    assert smallest.pos_area_ratio <= 8.0 * 1.1


def test_phase_sweep_grid_and_expectations():
    import itertools
    grid = list(itertools.product([1.0, 2.0], [0.25, 0.5], [1.0],
                                  [0.01, 0.02, 0.04]))
    cells = phase_sweep(grid)
    assert len(cells) == 12
    for c in cells:
        assert c.roots_all_positive  # c0, lam, p > 0
        assert c.classification == BICONCAVE
        assert not c.anomaly


def test_phase_sweep_blowup_cell():
    cells = phase_sweep([(5.0, 0.0, 0.1, 1.0)])
    assert cells[0].classification == "BlowUpPositive"
    assert not cells[0].anomaly  # w0p above the smallest root: no guarantee


def test_phase_sweep_above_root_never_anomaly():
    params = HelfrichParams(1.0, 0.25, 1.0)
    root = analyze_cubic(params).smallest_root
    cells = phase_sweep([(1.0, 0.25, 1.0, root * 1.5)])
    assert not cells[0].anomaly
