"""Turn trajectories into landmarks, classifications, pointwise geometry,
global totals, and residual checks of the variational equation.

The target shape is defined by three conditions on w = z':
C1 the profile slope is unimodal on (0, r0); C2 it blows down at a
finite equator radius; C3 the net displacement int_0^{r_inf} w dr is
strictly negative.  A solution satisfying all three closes up into a
biconcave surface after reflection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cubic import HelfrichParams, eval_q
from .errors import MissingEvent, NotBiconcave, OutOfRange
from .solver import (
    ABORTED,
    BLOWUP_POSITIVE,
    EQUATOR,
    MAX_OF_W,
    ZERO_OF_W,
    Trajectory,
)

__all__ = [
    "Landmarks",
    "Classification",
    "GeometrySample",
    "SurfaceTotals",
    "EtaReport",
    "extract_landmarks",
    "classify",
    "geometry_at",
    "el_residual",
    "equator_identity_residual",
    "eta_boundedness",
    "surface_totals",
    "requadrature_totals",
    "profile_quadrature_totals",
    "profile_points",
    "BICONCAVE",
    "MULTIMODAL",
    "NON_NEGATIVE_DISPLACEMENT",
    "INDETERMINATE",
]

BICONCAVE = "Biconcave"
MULTIMODAL = "Multimodal"
NON_NEGATIVE_DISPLACEMENT = "NonNegativeDisplacement"
INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Landmarks:
    """Key positions of one trajectory; absent events leave fields None."""

    r_m: float | None
    w_max: float | None
    r0: float | None
    wp_r0: float | None
    z_r0: float | None
    r_inf: float | None
    z_inf: float | None
    n_critical_points: int | None


@dataclass(frozen=True)
class Classification:
    verdict: str
    c1: bool | None
    c2: bool | None
    c3: bool | None
    evidence: str


@dataclass(frozen=True)
class GeometrySample:
    r: float
    z: float
    kappa_m: float
    kappa_l: float
    H: float
    K: float
    eta: float


@dataclass(frozen=True)
class SurfaceTotals:
    area: float
    volume: float
    helfrich_energy: float


@dataclass(frozen=True)
class EtaReport:
    sup_eta: float
    eta_limit: float
    eta_times_up_limit: float
    diverging: bool
    n_samples: int


def extract_landmarks(traj: Trajectory, scan_points: int = 10_001) -> Landmarks:
    """Read landmarks off the event list; count critical points of w.

    The count scans w' on (eps, r0) at resolution <= r0/1e4; tangencies
    of w' without a sign change are not counted.
    """
    ev_max = traj.first_event(MAX_OF_W)
    ev_zero = traj.first_event(ZERO_OF_W)
    ev_eq = traj.first_event(EQUATOR)

    r_m = w_max = r0 = wp_r0 = z_r0 = r_inf = z_inf = None
    if ev_max is not None:
        r_m, w_max = ev_max.x, float(ev_max.state[0])
    if ev_zero is not None:
        r0 = ev_zero.x
        wp_r0 = float(ev_zero.state[1])
        z_r0 = float(ev_zero.state[2])
    if ev_eq is not None:
        r_inf = float(ev_eq.state[0])
        z_inf = ev_eq.x

    n_crit = None
    if r0 is not None:
        n = max(scan_points, 10_001)
        rs = np.linspace(traj.eps_start, r0, n)
        wp = traj.chart_a.eval_many(rs)[:, 1]
        sgn = np.sign(wp)
        sgn = sgn[sgn != 0.0]
        n_crit = int(np.count_nonzero(sgn[1:] * sgn[:-1] < 0.0))
    return Landmarks(r_m, w_max, r0, wp_r0, z_r0, r_inf, z_inf, n_crit)


def classify(traj: Trajectory, landmarks: Landmarks) -> Classification:
    """Evaluate C1-C3 and return the verdict with its evidence."""
    if traj.status == ABORTED:
        return Classification(INDETERMINATE, None, None, None,
                              "run aborted before a terminal event")
    if traj.status == BLOWUP_POSITIVE:
        return Classification(BLOWUP_POSITIVE, None, False, None,
                              "w reached +w_switch: C2 fails (no blow-down)")
    # status Equator
    c2 = True
    c1 = landmarks.n_critical_points == 1
    c3 = landmarks.z_inf is not None and landmarks.z_inf < 0.0
    if not c1:
        return Classification(
            MULTIMODAL, c1, c2, c3,
            f"C1 fails: {landmarks.n_critical_points} critical points on (0, r0)")
    if not c3:
        return Classification(
            NON_NEGATIVE_DISPLACEMENT, c1, c2, c3,
            f"C3 fails: z_inf = {landmarks.z_inf}")
    return Classification(BICONCAVE, c1, c2, c3, "C1, C2, C3 all hold")


def _geometry_from_w(r, w, wp, params: HelfrichParams, eta=None) -> tuple:
    P = 1.0 + w * w
    sq = math.sqrt(P)
    km = w / (r * sq)
    kl = wp / (P * sq)
    H = 0.5 * (km + kl)
    K = km * kl
    if eta is None:
        eta = (r * wp * wp / (P * P * sq) - w * w / (r * sq)
               - 2.0 * params.c0 * w
               - (params.c0 ** 2 + params.lam) * r * sq
               + 0.5 * params.p * r * r * w)
    return km, kl, H, K, eta


def _eta_chart_b(u, s, q, params: HelfrichParams) -> float:
    """eta evaluated in inverse-chart variables.

    Every term of eta diverges like 1/|u'| individually; grouping in
    (u, s, q) exposes the cancellation, leaving B(u, s, q)/s with B -> 0
    at the equator.
    """
    P = s * s + 1.0
    sq = math.sqrt(P)
    B = (-u * q * q / (P * P * sq) + 1.0 / (u * sq) - 2.0 * params.c0
         + (params.c0 ** 2 + params.lam) * u * sq + 0.5 * params.p * u * u)
    if s == 0.0:
        return math.nan
    return B / s


def geometry_at(traj: Trajectory, r: float | None = None,
                z: float | None = None) -> GeometrySample:
    """Curvatures, H, K, and eta at a point of the trajectory.

    Query chart A by radius ``r`` (the series region below eps_start is
    covered) or chart B by height ``z``.
    """
    params = traj.params
    if (r is None) == (z is None):
        raise ValueError("pass exactly one of r or z")
    if r is not None:
        if r < 0.0:
            raise OutOfRange(f"r must be >= 0, got {r!r}")
        if r == 0.0:
            w0p = traj.w0p
            return GeometrySample(0.0, 0.0, w0p, w0p, w0p, w0p * w0p,
                                  -2.0 * params.c0)
        if r < traj.eps_start:
            y = traj.series_eval(np.array([r]))[0]
        else:
            y = traj.chart_a.eval(r)
        km, kl, H, K, eta = _geometry_from_w(r, y[0], y[1], params)
        return GeometrySample(float(r), float(y[2]), km, kl, H, K, eta)

    if traj.chart_b is None:
        raise OutOfRange("trajectory has no chart-B portion")
    y = traj.chart_b.eval(z)
    u, s, q = float(y[0]), float(y[1]), float(y[2])
    eta = _eta_chart_b(u, s, q, params)
    if abs(s) > 1e-6:
        w = 1.0 / s
        wp = -q / s ** 3
        km, kl, H, K, _ = _geometry_from_w(u, w, wp, params)
    else:
        P = s * s + 1.0
        sq = math.sqrt(P)
        km = -1.0 / (u * sq)
        kl = q / (P * sq)
        H = 0.5 * (km + kl)
        K = km * kl
    return GeometrySample(u, float(z), km, kl, H, K, eta)


def el_residual(traj: Trajectory, n_samples: int = 2000) -> float:
    """Max normalized residual of the variational integrand on chart A.

    w and w' come from the dense output, w'' from its derivative; at
    each sample the integrand is normalized by the largest individual
    term so the result is a relative defect.
    """
    seg = traj.chart_a
    n = max(n_samples, 1000)
    rs = np.linspace(seg.x_start, seg.x_end, n)
    Y = seg.eval_many(rs)
    D = seg.deriv_many(rs)
    w, wp = Y[:, 0], Y[:, 1]
    wpp = D[:, 1]
    c0, lam, p = traj.params.c0, traj.params.lam, traj.params.p
    P = 1.0 + w * w
    sq = np.sqrt(P)
    terms = np.stack([
        -2.0 * rs * wpp / (P * P * sq),
        5.0 * rs * w * wp * wp / (P ** 3 * sq),
        -2.0 * wp / (P * P * sq),
        (2.0 * w + w ** 3) / (rs * P * sq),
        2.0 * c0 * w * w / P,
        (c0 ** 2 + lam) * rs * w / sq,
        -0.5 * p * rs * rs,
    ])
    resid = np.abs(terms.sum(axis=0)) / np.abs(terms).max(axis=0)
    return float(resid.max())


def equator_identity_residual(traj: Trajectory, params: HelfrichParams) -> float:
    """Relative defect of K(r_inf)^2 = (-1/r_inf) Q(-1/r_inf).

    K at the equator is the product of the meridional curvature -1/r_inf
    and the longitudinal curvature u''(z_inf).
    """
    ev = traj.first_event(EQUATOR)
    if ev is None:
        raise MissingEvent("no Equator event in trajectory")
    u, s, q = float(ev.state[0]), float(ev.state[1]), float(ev.state[2])
    P = s * s + 1.0
    km = -1.0 / (u * math.sqrt(P))
    kl = q / (P * math.sqrt(P))
    K2 = (km * kl) ** 2
    target = (-1.0 / u) * eval_q(-1.0 / u, params)
    return abs(K2 - target) / max(K2, 1e-30)


def eta_boundedness(traj: Trajectory, n_per_decade: int = 4,
                    decades: float = 6.0) -> EtaReport:
    """Sample eta along chart B approaching the equator.

    Reports the running sup, a linear extrapolation of eta to the
    equator, the extrapolated limit of eta * |u'| (which must vanish),
    and a divergence flag if |eta| grows monotonically by more than 10x
    over the last two sampled decades of (z - z_inf).
    """
    ev = traj.first_event(EQUATOR)
    if ev is None or traj.chart_b is None:
        raise MissingEvent("no Equator event in trajectory")
    z_inf = ev.x
    z_sw = traj.chart_b.x_start
    tau_sw = z_sw - z_inf
    k = np.arange(0, int(decades * n_per_decade) + 1)
    tau = tau_sw * 10.0 ** (-k / n_per_decade)
    zs = z_inf + tau
    Y = traj.chart_b.eval_many(zs)
    u, s, q = Y[:, 0], Y[:, 1], Y[:, 2]
    P = s * s + 1.0
    sq = np.sqrt(P)
    c0, lam, p = traj.params.c0, traj.params.lam, traj.params.p
    B = (-u * q * q / (P * P * sq) + 1.0 / (u * sq) - 2.0 * c0
         + (c0 ** 2 + lam) * u * sq + 0.5 * p * u * u)
    eta = B / s
    eta_abs = np.abs(eta)

    sup_eta = float(eta_abs.max())
    last2 = tau <= tau[0] * 10.0 ** (-(decades - 2.0))
    ea = eta_abs[last2]
    diverging = bool(len(ea) >= 3 and np.all(np.diff(ea) >= 0.0)
                     and ea[-1] > 10.0 * ea[0])

    # linear-in-tau extrapolation over the last decade
    lastd = tau <= tau[-1] * 10.0 ** 1.0
    A = np.stack([np.ones(lastd.sum()), tau[lastd]], axis=1)
    eta_limit = float(np.linalg.lstsq(A, eta[lastd], rcond=None)[0][0])
    etaup_limit = float(np.linalg.lstsq(A, (-B)[lastd], rcond=None)[0][0])
    return EtaReport(sup_eta, eta_limit, etaup_limit, diverging, len(tau))


def surface_totals(traj: Trajectory) -> SurfaceTotals:
    """Closed-surface area, enclosed volume, and bending energy.

    The accumulators cover the upper half; the reflection doubles them.
    Volume uses the sign convention that makes a convex body positive.
    """
    ev = traj.first_event(EQUATOR)
    if ev is None:
        raise MissingEvent("no Equator event in trajectory")
    area_acc, vol_acc, energy_acc = (float(v) for v in ev.state[3:6])
    area = 4.0 * math.pi * area_acc
    volume = -2.0 * math.pi * vol_acc
    energy = 4.0 * math.pi * energy_acc + traj.params.p * volume
    return SurfaceTotals(area, volume, energy)


def requadrature_totals(traj: Trajectory, n_a: int = 400_001,
                        n_b: int = 100_001) -> SurfaceTotals:
    """Independent trapezoid re-quadrature of the dense output.

    Cross-checks the in-step accumulators of :func:`surface_totals`.
    """
    ev = traj.first_event(EQUATOR)
    if ev is None:
        raise MissingEvent("no Equator event in trajectory")
    c0, lam, p = traj.params.c0, traj.params.lam, traj.params.p
    eps = traj.eps_start
    w0p, a3 = traj.w0p, traj.a3

    # series piece [0, eps]
    area = 0.5 * eps ** 2 + 0.125 * w0p ** 2 * eps ** 4
    vol = 0.25 * w0p * eps ** 4 + a3 * eps ** 6 / 6.0
    energy = 0.5 * ((2.0 * w0p + c0) ** 2 + lam) * eps ** 2

    seg = traj.chart_a
    rs = np.linspace(seg.x_start, seg.x_end, n_a)
    Y = seg.eval_many(rs)
    w, wp = Y[:, 0], Y[:, 1]
    P = 1.0 + w * w
    sq = np.sqrt(P)
    twoH = (wp + (w / rs) * P) / (P * sq)
    area += float(np.trapezoid(rs * sq, rs))
    vol += float(np.trapezoid(rs * rs * w, rs))
    energy += float(np.trapezoid(((twoH + c0) ** 2 + lam) * rs * sq, rs))

    segb = traj.chart_b
    zs = np.linspace(segb.x_start, segb.x_end, n_b)
    Yb = segb.eval_many(zs)
    u, s, q = Yb[:, 0], Yb[:, 1], Yb[:, 2]
    Pb = s * s + 1.0
    sqb = np.sqrt(Pb)
    twoHb = (q - Pb / u) / (Pb * sqb)
    area += float(np.trapezoid(-u * sqb, zs))
    vol += float(np.trapezoid(u * u, zs))
    energy += float(np.trapezoid(-((twoHb + c0) ** 2 + lam) * u * sqb, zs))

    volume = -2.0 * math.pi * vol
    return SurfaceTotals(4.0 * math.pi * area, volume,
                         4.0 * math.pi * energy + p * volume)


def profile_quadrature_totals(r: np.ndarray, z: np.ndarray) -> tuple[float, float]:
    """Area and volume of the closed surface from an upper-half polyline.

    ``(r, z)`` runs from the axis to the equator with z(equator) = 0.
    Chord-based quadrature, regular through the vertical tangent; used
    to validate the quadrature path against exact bodies.
    """
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    dr = np.diff(r)
    dz = np.diff(z)
    rbar = 0.5 * (r[1:] + r[:-1])
    dl = np.sqrt(dr * dr + dz * dz)
    area = 4.0 * math.pi * float(np.sum(rbar * dl))
    volume = -2.0 * math.pi * float(np.sum(rbar * rbar * dz))
    return area, volume


def profile_points(traj: Trajectory, n: int = 1024) -> np.ndarray:
    """Closed mirrored cross-section curve of a biconcave solution.

    Returns an (m, 2) array tracing the curve counter-clockwise through
    (0, Z(0)), (r_inf, 0), (0, -Z(0)), (-r_inf, 0) with Z = z - z_inf.
    """
    lm = extract_landmarks(traj)
    cls = classify(traj, lm)
    if cls.verdict != BICONCAVE:
        raise NotBiconcave(f"classification is {cls.verdict}")
    z_inf = lm.z_inf
    quarter = _quarter_profile(traj, max(16, n // 4))
    x, y = quarter[:, 0], quarter[:, 1] - z_inf
    y[-1] = 0.0  # exact by the shift definition
    ur = np.stack([x, y], axis=1)
    lr = np.stack([x[::-1], -y[::-1]], axis=1)
    ll = np.stack([-x, -y], axis=1)
    ul = np.stack([-x[::-1], y[::-1]], axis=1)
    pts = np.concatenate([ur, lr[1:], ll[1:], ul[1:]], axis=0)
    return pts


def _quarter_profile(traj: Trajectory, m: int) -> np.ndarray:
    """(r, z) samples from the axis to the equator, m points."""
    seg_a, seg_b = traj.chart_a, traj.chart_b
    m_b = max(8, m // 4)
    m_a = m - m_b
    rs = np.linspace(0.0, seg_a.x_end, m_a + 1)
    inside = rs < traj.eps_start
    za = np.empty_like(rs)
    za[inside] = traj.series_eval(rs[inside])[:, 2]
    za[~inside] = seg_a.eval_many(rs[~inside])[:, 2]
    a_part = np.stack([rs, za], axis=1)
    zs = np.linspace(seg_b.x_start, seg_b.x_end, m_b + 1)[1:]
    us = seg_b.eval_many(zs)[:, 0]
    b_part = np.stack([us, zs], axis=1)
    return np.concatenate([a_part, b_part], axis=0)
