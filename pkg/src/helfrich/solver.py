"""Initial-value solver for the axisymmetric shape equation.

The profile is integrated in two coordinate charts:

* chart A: graph coordinates, w(r) = z'(r), from a series start at the
  singular axis r = 0 out to the vertical-tangent region;
* chart B: inverse-graph coordinates u(z) = r(z), through the vertical
  tangent down to the equator, where u'(z) = 0 is a regular point.

An embedded Dormand-Prince 5(4) pair with a proportional-integral step
controller supplies a quartic continuous extension on every accepted
step; events (maximum of w, zero of w, chart switch, equator, positive
blow-up) are located on the dense output by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cubic import HelfrichParams, eval_q
from .errors import (
    BadSwitch,
    EpsTooLarge,
    InvalidParams,
    InvalidSlope,
    NonPositiveRadius,
    OutOfRange,
    SingularDenominator,
    StepUnderflow,
)

__all__ = [
    "SolverConfig",
    "ChartAState",
    "ChartBState",
    "Event",
    "Trajectory",
    "DenseSegment",
    "rhs_chart_a",
    "rhs_chart_b",
    "rhs_kappa",
    "series_coefficient",
    "series_start",
    "chart_switch",
    "integrate",
    "MAX_OF_W",
    "ZERO_OF_W",
    "CHART_SWITCH",
    "EQUATOR",
    "BLOWUP_POSITIVE",
    "ABORTED",
]

MAX_OF_W = "MaxOfW"
ZERO_OF_W = "ZeroOfW"
CHART_SWITCH = "ChartSwitch"
EQUATOR = "Equator"
BLOWUP_POSITIVE = "BlowUpPositive"
ABORTED = "Aborted"

_SAFETY = 0.9
_ALPHA = 0.17  # PI controller exponents for a 5th-order pair
_BETA = 0.04
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass(frozen=True)
class SolverConfig:
    """Integrator tolerances and chart-handling thresholds.

    ``eps_start=None`` selects min(1e-5, 1e-3 sqrt(32 w0p / (3p)));
    ``r_max=None`` selects 1e3 sqrt(w0p/p + 1).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    eps_start: float | None = None
    w_switch: float = 10.0
    r_max: float | None = None
    max_steps: int = 1_000_000
    event_tol: float = 1e-12

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1.0):
            raise InvalidParams(f"rel_tol must be in (0, 1), got {self.rel_tol!r}")
        if self.abs_tol <= 0.0:
            raise InvalidParams(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if self.eps_start is not None and not (self.eps_start > 0.0):
            raise InvalidParams(f"eps_start must be > 0, got {self.eps_start!r}")
        if not (self.w_switch > 1.0):
            raise InvalidParams(f"w_switch must be > 1, got {self.w_switch!r}")


@dataclass(frozen=True)
class ChartAState:
    """Graph-chart state at radius r."""

    r: float
    w: float
    wp: float
    z: float
    area_acc: float = 0.0
    vol_acc: float = 0.0
    energy_acc: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.w, self.wp, self.z, self.area_acc, self.vol_acc, self.energy_acc]
        )

    @classmethod
    def from_array(cls, r: float, y: np.ndarray) -> "ChartAState":
        return cls(r, y[0], y[1], y[2], y[3], y[4], y[5])


@dataclass(frozen=True)
class ChartBState:
    """Inverse-chart state at height z.

    ``up`` = u'(z) = 1/w and ``upp`` = u''(z) = -w'/w^3.  The equation
    for u(z) is third order, so u'' is part of the dynamical state; it
    equals the longitudinal curvature at the equator.
    """

    z: float
    u: float
    up: float
    upp: float
    area_acc: float = 0.0
    vol_acc: float = 0.0
    energy_acc: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array(
            [self.u, self.up, self.upp, self.area_acc, self.vol_acc, self.energy_acc]
        )

    @classmethod
    def from_array(cls, z: float, y: np.ndarray) -> "ChartBState":
        return cls(z, y[0], y[1], y[2], y[3], y[4], y[5])


def rhs_chart_a(state: ChartAState, params: HelfrichParams) -> np.ndarray:
    """Derivatives of (w, wp, z, area, vol, energy) with respect to r."""
    if state.r <= 0.0:
        raise NonPositiveRadius(f"r must be > 0, got {state.r!r}")
    out = np.empty(kernels.NSTATE)
    kernels.rhs_chart_a_arr(
        state.r, state.to_array(), params.c0, params.lam, params.p, out
    )
    return out


def rhs_chart_b(state: ChartBState, params: HelfrichParams) -> np.ndarray:
    """Derivatives of (u, up, upp, area, vol, energy) with respect to z."""
    if state.u <= 0.0:
        raise NonPositiveRadius(f"u must be > 0, got {state.u!r}")
    out = np.empty(kernels.NSTATE)
    kernels.rhs_chart_b_arr(
        state.z, state.to_array(), params.c0, params.lam, params.p, out
    )
    return out


def rhs_kappa(r: float, kappa: float, kappap: float, params: HelfrichParams) -> float:
    """Second derivative of the meridional curvature kappa(r).

    Valid while r^2 kappa^2 < 1 (profile representable as a graph).
    """
    if r <= 0.0:
        raise NonPositiveRadius(f"r must be > 0, got {r!r}")
    denom = 1.0 - r * r * kappa * kappa
    if abs(denom) < 1e-12:
        raise SingularDenominator(f"1 - r^2 kappa^2 = {denom!r} too close to zero")
    rq = r * eval_q(kappa, params)
    return (
        -kappa * (r * kappap + kappa) ** 2 / (2.0 * denom)
        - 3.0 * kappap / r
        + rq / (2.0 * r * denom)
    )


def series_coefficient(params: HelfrichParams, w0p: float) -> float:
    """Cubic coefficient a3 of the axis expansion w = w0p r + a3 r^3 + ...

    Obtained by matching the O(r^2) terms of the shape equation; the
    residual-order test in the suite validates the exponent.
    """
    return (eval_q(w0p, params) + 7.0 * w0p ** 3) / 16.0


def series_start(params: HelfrichParams, w0p: float, eps: float) -> ChartAState:
    """Truncated-series state at r = eps, clearing the axis singularity."""
    if not (w0p > 0.0):
        raise InvalidSlope(f"w0p must be > 0, got {w0p!r}")
    if not (eps > 0.0):
        raise EpsTooLarge(f"eps must be > 0, got {eps!r}")
    if params.p > 0.0 and eps >= 0.1 * math.sqrt(w0p / params.p + 1.0):
        raise EpsTooLarge(f"eps={eps!r} outside the series region")
    a3 = series_coefficient(params, w0p)
    if abs(a3) * eps ** 3 > 0.01 * w0p * eps:
        raise EpsTooLarge(f"series correction too large at eps={eps!r}")
    w = w0p * eps + a3 * eps ** 3
    wp = w0p + 3.0 * a3 * eps ** 2
    z = 0.5 * w0p * eps ** 2 + 0.25 * a3 * eps ** 4
    area = 0.5 * eps ** 2 + 0.125 * w0p ** 2 * eps ** 4
    vol = 0.25 * w0p * eps ** 4 + a3 * eps ** 6 / 6.0
    energy = 0.5 * ((2.0 * w0p + params.c0) ** 2 + params.lam) * eps ** 2
    return ChartAState(eps, w, wp, z, area, vol, energy)


def chart_switch(a: ChartAState) -> ChartBState:
    """Convert a graph-chart state to the inverse chart at the same point."""
    if a.w >= 0.0:
        raise BadSwitch(f"chart switch requires w < 0, got w={a.w!r}")
    up = 1.0 / a.w
    upp = -a.wp / a.w ** 3
    return ChartBState(a.z, a.r, up, upp, a.area_acc, a.vol_acc, a.energy_acc)


class DenseSegment:
    """Quartic continuous extension over the accepted steps of one chart.

    ``xs`` holds the step nodes (ascending for chart A, descending for
    chart B); ``conts[i]`` the five dense-output vectors of step i.
    """

    def __init__(self, xs: np.ndarray, conts: np.ndarray, x_end: float):
        self.xs = np.asarray(xs, dtype=float)
        self.conts = np.asarray(conts, dtype=float)
        self.ascending = bool(self.xs[-1] >= self.xs[0])
        # trajectory may terminate mid-step at an event
        self.x_end = float(x_end)
        self._key = self.xs if self.ascending else -self.xs

    @property
    def x_start(self) -> float:
        return float(self.xs[0])

    def _locate(self, x: np.ndarray):
        key = x if self.ascending else -x
        idx = np.searchsorted(self._key, key, side="right") - 1
        idx = np.clip(idx, 0, len(self.xs) - 2)
        h = self.xs[idx + 1] - self.xs[idx]
        theta = (x - self.xs[idx]) / h
        return idx, theta

    def _check_range(self, x: np.ndarray):
        lo = min(self.x_start, self.x_end)
        hi = max(self.x_start, self.x_end)
        pad = 1e-12 * (1.0 + max(abs(lo), abs(hi)))
        if np.any(x < lo - pad) or np.any(x > hi + pad):
            raise OutOfRange(f"query outside covered range [{lo}, {hi}]")

    def eval_many(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_range(x)
        idx, th = self._locate(x)
        r1, r2, r3, r4, r5 = (self.conts[idx, k, :] for k in range(5))
        th = th[:, None]
        return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)))

    def eval(self, x: float) -> np.ndarray:
        return self.eval_many(np.array([x]))[0]

    def deriv_many(self, x) -> np.ndarray:
        """State derivative with respect to the independent variable."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_range(x)
        idx, th = self._locate(x)
        h = (self.xs[idx + 1] - self.xs[idx])[:, None]
        r2, r3, r4, r5 = (self.conts[idx, k, :] for k in range(1, 5))
        th = th[:, None]
        dth = (
            r2
            + (1.0 - 2.0 * th) * r3
            + th * (2.0 - 3.0 * th) * r4
            + 2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * r5
        )
        return dth / h

    def deriv(self, x: float) -> np.ndarray:
        return self.deriv_many(np.array([x]))[0]

    def find_crossing(self, component: int, target: float, x_lo=None, x_hi=None,
                      tol: float = 1e-12) -> float:
        """Bisect for the first x where state[component] crosses ``target``."""
        lo = self.x_start if x_lo is None else x_lo
        hi = self.x_end if x_hi is None else x_hi
        g = lambda x: self.eval(x)[component] - target
        glo, ghi = g(lo), g(hi)
        if glo == 0.0:
            return lo
        if glo * ghi > 0.0:
            raise OutOfRange("no crossing in the requested range")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if abs(hi - lo) <= tol * (1.0 + abs(mid)):
                return mid
            gm = g(mid)
            if gm == 0.0:
                return mid
            if (gm > 0.0) == (glo > 0.0):
                lo, glo = mid, gm
            else:
                hi = mid
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Event:
    """Located event: ``x`` is r on chart A and z on chart B."""

    kind: str
    chart: str
    x: float
    state: np.ndarray


@dataclass
class Trajectory:
    """Dense, event-annotated solution spanning both charts."""

    params: HelfrichParams
    w0p: float
    cfg: SolverConfig
    chart_a: DenseSegment
    chart_b: DenseSegment | None
    events: list[Event]
    status: str
    eps_start: float
    a3: float

    def first_event(self, kind: str) -> Event | None:
        for ev in self.events:
            if ev.kind == kind:
                return ev
        return None

    def events_of(self, kind: str) -> list[Event]:
        return [ev for ev in self.events if ev.kind == kind]

    def series_eval(self, r) -> np.ndarray:
        """Series state on [0, eps_start), same layout as chart-A states."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w0p, a3 = self.w0p, self.a3
        c0, lam = self.params.c0, self.params.lam
        w = w0p * r + a3 * r ** 3
        wp = w0p + 3.0 * a3 * r ** 2
        z = 0.5 * w0p * r ** 2 + 0.25 * a3 * r ** 4
        area = 0.5 * r ** 2 + 0.125 * w0p ** 2 * r ** 4
        vol = 0.25 * w0p * r ** 4 + a3 * r ** 6 / 6.0
        energy = 0.5 * ((2.0 * w0p + c0) ** 2 + lam) * r ** 2
        return np.stack([w, wp, z, area, vol, energy], axis=1)


def _initial_step(rhs, x, y, f, direction, rtol, atol, c0, lam, p, h_cap):
    sc = atol + rtol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / sc) ** 2)))
    d1 = float(np.sqrt(np.mean((f / sc) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, h_cap)
    y1 = y + h0 * direction * f
    f1 = np.empty_like(y)
    rhs(x + h0 * direction, y1, c0, lam, p, f1)
    d2 = float(np.sqrt(np.mean(((f1 - f) / sc) ** 2))) / h0
    dm = max(d1, d2)
    h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1, h_cap)


@dataclass
class _EventSpec:
    kind: str
    idx: int
    target: float
    cross: int  # +1 upward, -1 downward
    terminal: bool
    priority: int


def _locate_theta(conts_step, idx, target, cross, h, x0, event_tol):
    """Bisect the dense polynomial of one component for its crossing."""
    r1, r2, r3, r4, r5 = conts_step

    def g(th):
        val = r1[idx] + th * (
            r2[idx] + (1.0 - th) * (r3[idx] + th * (r4[idx] + (1.0 - th) * r5[idx]))
        )
        return val - target

    lo, hi = 0.0, 1.0
    glo = g(lo)
    for _ in range(200):
        if abs(hi - lo) * abs(h) <= event_tol * (1.0 + abs(x0)):
            break
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if (gm > 0.0) == (glo > 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _eval_cont(conts_step, th):
    r1, r2, r3, r4, r5 = conts_step
    return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)))


def _run_chart(step_fn, rhs_fn, chart, x0, y0, direction, x_limit, params, cfg,
               event_specs, steps_budget, h_init=None):
    """Adaptive loop on one chart.

    Returns (segment, events, status, steps_used, terminal_event_or_None).
    ``status`` is one of 'terminal', 'aborted', 'limit'.
    """
    c0, lam, p = params.c0, params.lam, params.p
    rtol, atol = cfg.rel_tol, cfg.abs_tol

    x = float(x0)
    y = np.array(y0, dtype=float)
    f = np.empty_like(y)
    rhs_fn(x, y, c0, lam, p, f)
    if not np.all(np.isfinite(f)):
        raise InvalidParams(f"right-hand side not finite at start of chart {chart}")

    h_cap = abs(x_limit - x)
    h = h_init if h_init is not None else _initial_step(
        rhs_fn, x, y, f, direction, rtol, atol, c0, lam, p, h_cap
    )
    h = max(h, 1e-13 * (1.0 + abs(x)))

    xs = [x]
    conts: list[np.ndarray] = []
    events: list[Event] = []
    err_prev = 1e-4
    steps = 0
    rejected = False

    while True:
        if steps >= steps_budget:
            events.append(Event(ABORTED, chart, x, y.copy()))
            return _make_segment(xs, conts, x), events, "aborted", steps, None
        if h < 1e-14 * (1.0 + abs(x)):
            raise StepUnderflow(f"step size {h!r} underflow at x={x!r} (chart {chart})")
        remaining = (x_limit - x) * direction
        if remaining <= 1e-14 * (1.0 + abs(x)):
            events.append(Event(ABORTED, chart, x, y.copy()))
            return _make_segment(xs, conts, x), events, "limit", steps, None
        h_use = min(h, remaining)

        y1, f1, err, cont = step_fn(x, y, direction * h_use, f, c0, lam, p,
                                    rtol, atol)
        steps += 1
        if not (np.all(np.isfinite(y1)) and math.isfinite(err)):
            err = math.inf

        if err > 1.0:
            rejected = True
            fac = _SAFETY * err ** (-_ALPHA) if math.isfinite(err) else 0.1
            h = h_use * min(0.9, max(0.1, fac))
            continue

        hd = direction * h_use
        conts.append(cont)
        x_new = x + hd
        xs.append(x_new)

        # event scan on this step
        hits = []
        for spec in event_specs:
            g0 = y[spec.idx] - spec.target
            g1 = y1[spec.idx] - spec.target
            crossed = (g0 > 0.0 >= g1) if spec.cross < 0 else (g0 < 0.0 <= g1)
            if crossed:
                th = _locate_theta(cont, spec.idx, spec.target, spec.cross, hd, x,
                                   cfg.event_tol)
                hits.append((th, spec.priority, spec))
        hits.sort(key=lambda t: (t[0], t[1]))
        for th, _, spec in hits:
            x_ev = x + th * hd
            y_ev = _eval_cont(cont, th)
            events.append(Event(spec.kind, chart, x_ev, y_ev))
            if spec.terminal:
                return (_make_segment(xs, conts, x_ev), events, "terminal", steps,
                        events[-1])

        x, y, f = x_new, y1, f1

        fac = _SAFETY * err ** (-_ALPHA) * err_prev ** _BETA if err > 0.0 else _FAC_MAX
        fac = min(_FAC_MAX, max(_FAC_MIN, fac))
        if rejected:
            fac = min(1.0, fac)
            rejected = False
        h = h_use * fac
        err_prev = max(err, 1e-4)


def _make_segment(xs, conts, x_end) -> DenseSegment:
    if not conts:
        # degenerate single-point segment: synthesize a zero-length step
        y = np.zeros((5, kernels.NSTATE))
        return DenseSegment(np.array([xs[0], xs[0]]), y[None, :, :], x_end)
    return DenseSegment(np.array(xs), np.stack(conts), x_end)


def integrate(params: HelfrichParams, w0p: float,
              cfg: SolverConfig | None = None) -> Trajectory:
    """Integrate the shape equation from the axis until a terminal event.

    Terminal outcomes: ``Equator`` (equator reached regularly in chart B),
    ``BlowUpPositive`` (w reached +w_switch), or ``Aborted`` (radius or
    step budget exhausted).
    """
    if not (w0p > 0.0):
        raise InvalidSlope(f"w0p must be > 0, got {w0p!r}")
    if not (params.p > 0.0):
        raise InvalidParams(f"p must be > 0 for the blow-down analysis, got {params.p!r}")
    cfg = cfg or SolverConfig()

    eps = cfg.eps_start
    if eps is None:
        eps = min(1e-5, 1e-3 * math.sqrt(32.0 * w0p / (3.0 * params.p)))
    r_max = cfg.r_max
    if r_max is None:
        r_max = 1e3 * math.sqrt(w0p / params.p + 1.0)

    start = series_start(params, w0p, eps)
    a3 = series_coefficient(params, w0p)

    specs_a = [
        _EventSpec(MAX_OF_W, 1, 0.0, -1, False, 0),
        _EventSpec(ZERO_OF_W, 0, 0.0, -1, False, 1),
        _EventSpec(CHART_SWITCH, 0, -cfg.w_switch, -1, True, 2),
        _EventSpec(BLOWUP_POSITIVE, 0, +cfg.w_switch, +1, True, 3),
    ]
    seg_a, events, status_a, used, term = _run_chart(
        kernels.dopri5_step_a, kernels.rhs_chart_a_arr, "A",
        eps, start.to_array(), +1, r_max, params, cfg, specs_a, cfg.max_steps,
    )

    if status_a in ("aborted", "limit") or term is None:
        return Trajectory(params, w0p, cfg, seg_a, None, events, ABORTED, eps, a3)
    if term.kind == BLOWUP_POSITIVE:
        return Trajectory(params, w0p, cfg, seg_a, None, events, BLOWUP_POSITIVE, eps, a3)

    # chart switch: w < 0 guaranteed by the event definition
    a_state = ChartAState.from_array(term.x, term.state)
    b0 = chart_switch(a_state)
    z_limit = b0.z - cfg.w_switch * r_max  # finiteness cap for the descent
    specs_b = [_EventSpec(EQUATOR, 1, 0.0, +1, True, 0)]
    seg_b, events_b, status_b, used_b, term_b = _run_chart(
        kernels.dopri5_step_b, kernels.rhs_chart_b_arr, "B",
        b0.z, b0.to_array(), -1, z_limit, params, cfg, specs_b,
        cfg.max_steps - used,
    )
    events.extend(events_b)
    if status_b == "terminal" and term_b is not None and term_b.kind == EQUATOR:
        status = EQUATOR
    else:
        status = ABORTED
    return Trajectory(params, w0p, cfg, seg_a, seg_b, events, status, eps, a3)


def fixed_step_chart_a(params: HelfrichParams, r0: float, y0: np.ndarray,
                       r1: float, n_steps: int) -> np.ndarray:
    """Fixed-step propagation of chart A (order studies and restarts)."""
    c0, lam, p = params.c0, params.lam, params.p
    h = (r1 - r0) / n_steps
    y = np.array(y0, dtype=float)
    f = np.empty_like(y)
    kernels.rhs_chart_a_arr(r0, y, c0, lam, p, f)
    x = r0
    for _ in range(n_steps):
        y, f, _, _ = kernels.dopri5_step_a(x, y, h, f, c0, lam, p, 1e-6, 1e-6)
        x += h
    return y
