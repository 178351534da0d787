"""Executable contracts for the quantitative estimates.

Every inequality the analysis proves about biconcave solutions becomes
a machine-checkable record with an explicit hypothesis flag, measured
margin, and tolerance.  A check whose hypothesis fails is reported
Skipped, never Pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import BICONCAVE, Landmarks, classify, extract_landmarks
from .cubic import DerivedConstants, HelfrichParams, analyze_cubic, eval_r
from .errors import HelfrichError, MissingEvent
from .solver import EQUATOR, SolverConfig, Trajectory, integrate

__all__ = [
    "CheckRecord",
    "BoundsReport",
    "AsymptoticReport",
    "PhaseCell",
    "check_single",
    "asymptotic_sweep",
    "phase_sweep",
    "default_w0p_grid",
]

CHECK_IDS = [
    "R0Upper",
    "WpR0Upper",
    "AreaPosUpper",
    "KappaMonotone",
    "KappaPrimeBound",
    "KappaBound",
    "XiFloor",
    "RInfUpper",
    "NegAreaLower",
    "WprimeOrdBounded",
    "ZInfNegative",
    "IntVLowerRatio",
]

_PTWISE_TOL = 1e-8  # slack for the re-asserted pointwise inequalities


@dataclass(frozen=True)
class CheckRecord:
    """One inequality: pass iff margin = rhs - lhs >= -tol."""

    check_id: str
    hypothesis_satisfied: bool
    lhs: float | None
    rhs: float | None
    margin: float | None
    tol: float
    status: str  # Pass | Fail | Skipped
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundsReport:
    w0p: float
    records: tuple[CheckRecord, ...]

    @property
    def passed(self) -> bool:
        return all(rec.status != "Fail" for rec in self.records)

    def record(self, check_id: str) -> CheckRecord:
        for rec in self.records:
            if rec.check_id == check_id:
                return rec
        raise KeyError(check_id)


def _make(check_id, hyp, lhs, rhs, tol, info=None):
    if not hyp:
        return CheckRecord(check_id, False, lhs, rhs, None, tol, "Skipped", info or {})
    margin = rhs - lhs
    status = "Pass" if margin >= -tol else "Fail"
    return CheckRecord(check_id, True, float(lhs), float(rhs), float(margin),
                       tol, status, info or {})


def _scale_tol(lhs, rhs) -> float:
    return _PTWISE_TOL * max(1.0, abs(lhs), abs(rhs))


def _r_max_on_interval(params: HelfrichParams, w0p: float) -> float:
    """max of the quadratic R on [0, w0p] (endpoints + interior vertex)."""
    cand = [0.0, w0p]
    if params.c0 != 0.0:
        v = -(params.c0 ** 2 + params.lam) / (4.0 * params.c0)
        if 0.0 < v < w0p:
            cand.append(v)
    return max(eval_r(t, params) for t in cand)


def check_single(traj: Trajectory, landmarks: Landmarks, params: HelfrichParams,
                 consts: DerivedConstants) -> BoundsReport:
    """Evaluate every single-run estimate on an equator-reaching trajectory."""
    if traj.first_event(EQUATOR) is None:
        raise MissingEvent("check_single requires an Equator trajectory")
    if landmarks.r0 is None:
        raise MissingEvent("check_single requires a ZeroOfW event")

    w0p = consts.w0p
    dp, dm, xi, delta = (consts.delta_plus, consts.delta_minus, consts.xi,
                         consts.delta)
    ca = analyze_cubic(params)
    hyp_pos = bool(ca.all_roots_positive and dp > 0.0)
    hyp_xi = bool(hyp_pos and math.isfinite(xi) and xi > 0.0)
    hyp_neg = bool(ca.all_roots_positive and delta > 0.0)

    r0, wp_r0, z_r0 = landmarks.r0, landmarks.wp_r0, landmarks.z_r0
    r_inf, z_inf = landmarks.r_inf, landmarks.z_inf
    int_neg = z_r0 - z_inf  # int_{r0}^{r_inf} |w|

    records = []

    rhs = 16.0 * w0p / dp if dp > 0.0 else None
    records.append(_make("R0Upper", hyp_pos, r0 ** 2, rhs,
                         _scale_tol(r0 ** 2, rhs or 0.0),
                         {"variant_64_bound": (64.0 * w0p / dp) if dp > 0 else None}))

    rhs = -dp * r0 ** 2 / 8.0 if dp > 0.0 else None
    records.append(_make("WpR0Upper", hyp_pos, wp_r0, rhs,
                         _scale_tol(wp_r0, rhs or 0.0)))

    if hyp_xi:
        rhs = 4.0 * w0p ** 2 / (dp * math.sqrt(xi))
        info = {"variant_delta32_bound": 4.0 * w0p ** 2 / (dp ** 1.5 * math.sqrt(xi))}
    else:
        rhs, info = None, {}
    records.append(_make("AreaPosUpper", hyp_xi, z_r0, rhs,
                         _scale_tol(z_r0, rhs or 0.0), info))

    # pointwise re-assertions on (0, r0)
    rs = np.linspace(traj.eps_start, r0, 4001)
    Y = traj.chart_a.eval_many(rs)
    w, wp = Y[:, 0], Y[:, 1]
    P = 1.0 + w * w
    sq = np.sqrt(P)
    kap = w / (rs * sq)
    kap_p = wp / (rs * P * sq) - w / (rs * rs * sq)
    one_minus = 1.0 - rs * rs * kap * kap

    hyp_mono = bool(_r_max_on_interval(params, w0p) < 0.0)
    lhs = float(np.max(np.diff(kap)))
    records.append(_make("KappaMonotone", hyp_mono, lhs, 0.0, _PTWISE_TOL))

    # kappa' <= -(delta_plus/8) r: the linear form that integrates to the
    # kappa bound below and yields w'(r0) < -delta_plus r0^2 / 8 at r0.
    # Near the axis the margin shrinks like w0p^3 r while the evaluation
    # noise of kappa' grows like state-error / r^2, so the comparison
    # carries an r-dependent noise allowance there.
    if dp > 0:
        # state error ~ tolerance enters kappa' as dw'/r; rounding as dw/r^2
        tol_state = traj.cfg.abs_tol + traj.cfg.rel_tol * (w0p + abs(wp_r0))
        noise = (30.0 * tol_state / rs
                 + 50.0 * np.finfo(float).eps * (w0p + rs) / (rs * rs))
        lhs = float(np.max(kap_p + dp * rs / 8.0 - noise))
        info = {"variant_r2_bound_max": float(np.max(kap_p + dp * rs * rs / 8.0))}
    else:
        lhs, info = None, {}
    records.append(_make("KappaPrimeBound", hyp_pos, lhs, 0.0, _PTWISE_TOL, info))

    lhs = float(np.max(kap - (w0p - dp * rs * rs / 16.0))) if dp > 0 else None
    records.append(_make("KappaBound", hyp_pos, lhs, 0.0, _PTWISE_TOL))

    lhs = float(np.max(xi - one_minus)) if hyp_xi else None
    records.append(_make("XiFloor", hyp_xi, lhs, 0.0, _PTWISE_TOL))

    B2 = delta * r0 ** 2 * abs(wp_r0)
    B = math.sqrt(B2) if B2 > 0.0 else 0.0
    x = r_inf - r0
    if hyp_neg:
        rhs = math.pi / (2.0 * B)
        dproof = min(dp / 4.0, dm / 2.0)
        info = {"variant_quarter_delta_bound": math.pi / (2.0 * math.sqrt(dproof * r0 ** 2 * abs(wp_r0)))}
    else:
        rhs, info = None, {}
    records.append(_make("RInfUpper", hyp_neg, x, rhs, _scale_tol(x, rhs or 0.0), info))

    if hyp_neg and B * x < math.pi / 2.0 * (1.0 + 1e-9):
        bx = min(B * x, math.pi / 2.0 * (1.0 - 1e-15))
        log_bound = math.log(1.0 / math.cos(bx)) / B
        quad_bound = 0.5 * B * x * x
        info = {"b_times_x": B * x, "quad_bound": quad_bound,
                "b_lower_chain": math.sqrt(delta * dp / 8.0) * r0 ** 2}
        records.append(_make("NegAreaLower", True, log_bound, int_neg,
                             _scale_tol(log_bound, int_neg), info))
    elif hyp_neg:
        # B x < pi/2 is guaranteed on valid runs; a violation is a solver defect
        records.append(CheckRecord("NegAreaLower", True, B * x, math.pi / 2.0,
                                   math.pi / 2.0 - B * x, 0.0, "Fail",
                                   {"reason": "B(r_inf - r0) >= pi/2"}))
    else:
        records.append(_make("NegAreaLower", False, None, None, _PTWISE_TOL))

    # blow-down growth ratio w'^2 / (|w| (1+w^2)^(5/2)) on chart B
    nodes = traj.chart_b.conts[:, 0, :]
    ev = traj.first_event(EQUATOR)
    sb, qb = nodes[:, 1], nodes[:, 2]
    Pb = sb * sb + 1.0
    ratio = qb * qb / (Pb ** 2 * np.sqrt(Pb))
    s_eq, q_eq = float(ev.state[1]), float(ev.state[2])
    Peq = s_eq * s_eq + 1.0
    limit_est = q_eq * q_eq / (Peq ** 2 * math.sqrt(Peq))
    lhs = float(ratio.max())
    finite = bool(np.all(np.isfinite(ratio)))
    wa = Y[:, 0]
    mask = np.abs(wa) > 1e-3
    chart_a_sup = float(np.max(Y[mask, 1] ** 2 / (np.abs(wa[mask]) * (1 + wa[mask] ** 2) ** 2.5))) if mask.any() else None
    records.append(_make("WprimeOrdBounded", finite, lhs, 2.0 * limit_est,
                         _scale_tol(lhs, 2.0 * limit_est),
                         {"equator_limit": limit_est,
                          "chart_a_sup_w_above_1e-3": chart_a_sup}))

    records.append(_make("ZInfNegative", True, z_inf, 0.0,
                         _PTWISE_TOL * max(1.0, abs(z_inf))))

    ratio_v = int_neg / w0p
    records.append(_make("IntVLowerRatio", True, 0.0, ratio_v, _PTWISE_TOL,
                         {"int_neg": int_neg}))

    return BoundsReport(w0p, tuple(records))


@dataclass(frozen=True)
class AsymptoticRecord:
    w0p: float
    classification: str
    rm2_over_w0p: float | None = None
    r02_over_w0p: float | None = None
    slope_ratio: float | None = None
    pos_area_ratio: float | None = None
    neg_area_ratio: float | None = None


@dataclass(frozen=True)
class AsymptoticReport:
    """Small-slope trend of the landmark ratios against the limit bands."""

    records: tuple[AsymptoticRecord, ...]
    excluded: tuple[float, ...]
    band_failures: tuple[str, ...]
    limits: dict
    neg_area_ratio_inf: float | None

    @property
    def passed(self) -> bool:
        return not self.band_failures and (self.neg_area_ratio_inf or 0.0) > 0.0


def default_w0p_grid(n: int = 16, lo: float = 1e-4, hi: float = 1e-1) -> np.ndarray:
    return np.geomspace(hi, lo, n)


def asymptotic_sweep(params: HelfrichParams, w0p_grid=None,
                     cfg: SolverConfig | None = None,
                     band: float = 0.1, band_w0p_max: float = 1e-2,
                     runs=None) -> AsymptoticReport:
    """Sweep w0p toward zero and compare landmark ratios with the limit
    constants 32/(3p), 32/p, -2, -2/3, and 8/p.

    Relative band of 10% applies only where w0p <= 1e-2; the positive-
    area ratio is checked at the two smallest grid points.  ``runs`` may
    carry precomputed (w0p, verdict, landmarks) triples for the grid.
    """
    if runs is None:
        if w0p_grid is None:
            w0p_grid = default_w0p_grid()
        w0p_grid = np.sort(np.asarray(w0p_grid, dtype=float))[::-1]
        runs = []
        for w0p in w0p_grid:
            traj = integrate(params, float(w0p), cfg)
            lm = extract_landmarks(traj)
            runs.append((float(w0p), classify(traj, lm).verdict, lm))
    else:
        runs = sorted(runs, key=lambda t: -t[0])
    p = params.p
    records = []
    excluded = []
    failures = []
    for w0p, verdict, lm in runs:
        if verdict != BICONCAVE:
            excluded.append(float(w0p))
            records.append(AsymptoticRecord(float(w0p), verdict))
            continue
        rec = AsymptoticRecord(
            float(w0p), verdict,
            rm2_over_w0p=lm.r_m ** 2 / w0p,
            r02_over_w0p=lm.r0 ** 2 / w0p,
            slope_ratio=lm.wp_r0 / w0p,
            pos_area_ratio=lm.z_r0 / w0p ** 2,
            neg_area_ratio=(lm.z_r0 - lm.z_inf) / w0p,
        )
        records.append(rec)
        if w0p <= band_w0p_max:
            if rec.rm2_over_w0p < (32.0 / (3.0 * p)) * (1.0 - band):
                failures.append(f"rm2/w0p={rec.rm2_over_w0p:.4g} below band at w0p={w0p:g}")
            if rec.r02_over_w0p > (32.0 / p) * (1.0 + band):
                failures.append(f"r0^2/w0p={rec.r02_over_w0p:.4g} above band at w0p={w0p:g}")
            if not (-2.0 - 2.0 * band <= rec.slope_ratio <= -2.0 / 3.0 + (2.0 / 3.0) * band):
                failures.append(f"wp(r0)/w0p={rec.slope_ratio:.4g} outside band at w0p={w0p:g}")

    good = [r for r in records if r.classification == BICONCAVE]
    small = [r for r in good if r.w0p <= band_w0p_max]
    for r in small[-2:]:  # two smallest points inside the asymptotic regime
        if r.pos_area_ratio > (8.0 / p) * 1.1:
            failures.append(f"pos-area ratio {r.pos_area_ratio:.4g} above 8.8/p at w0p={r.w0p:g}")

    neg_inf = min((r.neg_area_ratio for r in good), default=None)
    limits = {
        "rm2_over_w0p": {"value": good[-1].rm2_over_w0p if good else None,
                         "limit_constant": 32.0 / (3.0 * p)},
        "r02_over_w0p": {"value": good[-1].r02_over_w0p if good else None,
                         "limit_constant": 32.0 / p},
        "slope_ratio": {"value": good[-1].slope_ratio if good else None,
                        "limit_band": [-2.0, -2.0 / 3.0]},
        "pos_area_ratio": {"value": good[-1].pos_area_ratio if good else None,
                           "limit_constant": 8.0 / p},
    }
    return AsymptoticReport(tuple(records), tuple(excluded), tuple(failures),
                            limits, neg_inf)


@dataclass(frozen=True)
class PhaseCell:
    c0: float
    lam: float
    p: float
    w0p: float
    classification: str
    roots_all_positive: bool
    anomaly: bool
    r_m: float | None = None
    r0: float | None = None
    wp_r0: float | None = None
    r_inf: float | None = None
    z_inf: float | None = None


def phase_sweep(grid, cfg: SolverConfig | None = None) -> list[PhaseCell]:
    """Classify every (c0, lambda, p, w0p) cell of a finite grid.

    Cells with all-positive roots and w0p at most a tenth of the
    smallest root are expected biconcave; such a cell that fails to
    classify Biconcave is flagged as an anomaly.
    """
    cells = []
    for c0, lam, p, w0p in grid:
        params = HelfrichParams(c0, lam, p)
        ca = analyze_cubic(params)
        try:
            traj = integrate(params, w0p, cfg)
            lm = extract_landmarks(traj)
            verdict = classify(traj, lm).verdict
        except HelfrichError as exc:
            lm = Landmarks(None, None, None, None, None, None, None, None)
            verdict = f"Error:{type(exc).__name__}"
        expected = (ca.all_roots_positive
                    and w0p <= 0.1 * ca.smallest_root)
        cells.append(PhaseCell(
            c0, lam, p, w0p, verdict, ca.all_roots_positive,
            bool(expected and verdict != BICONCAVE),
            lm.r_m, lm.r0, lm.wp_r0, lm.r_inf, lm.z_inf,
        ))
    return cells
