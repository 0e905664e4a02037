"""Adaptive time integration with event detection.

The stepper is an explicit embedded Dormand-Prince 5(4) pair with
proportional step-size control and a fourth-order dense output used to
localize events by bisection.  Spike crossings and Poincare sections are
expressed as scalar event functions of the state.

When the compiled core is available and the model exposes a kernel id, the
same algorithm runs inside the extension module; results agree with the
pure-Python loop to integration tolerance (see ``burstlab.backends``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .system import EventRecord, SlowFastSystem, Trajectory


class IntegrationError(RuntimeError):
    """Base class for integration failures."""


class StepUnderflowError(IntegrationError):
    """Required step fell below ``min_step`` (stiffness beyond configuration)."""


class MaxStepsExceededError(IntegrationError):
    """Step budget exhausted before reaching the end of the time span."""


class NonFiniteStateError(IntegrationError):
    """The state became NaN or infinite."""


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-9
    max_step: float = math.inf
    min_step: float = 1e-14
    max_steps: int = 20_000_000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.min_step <= self.max_step:
            raise ValueError("need 0 < min_step <= max_step")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


# -- event functions ---------------------------------------------------------


@dataclass(frozen=True)
class LinearEvent:
    """g(y) = y[index] - value.  Covers spike thresholds and axis sections."""

    index: int
    value: float

    def __call__(self, t: float, y: np.ndarray) -> float:
        return y[self.index] - self.value


@dataclass(frozen=True)
class PolarXEvent:
    """g(y) = y[ir]*cos(y[itheta]) - value, for models stored in polar form."""

    r_index: int
    theta_index: int
    value: float

    def __call__(self, t: float, y: np.ndarray) -> float:
        return y[self.r_index] * math.cos(y[self.theta_index]) - self.value


@dataclass(frozen=True)
class EventSpec:
    """A scalar event function with direction filter and terminal flag.

    ``direction``: "up" fires on a sign change from negative to positive,
    "down" the reverse, "both" on any sign change.  Detected event times
    always bracket a sign change of ``func`` on the dense output.
    """

    kind: str
    func: Callable[[float, np.ndarray], float]
    direction: str = "both"
    terminal: bool = False

    def __post_init__(self):
        if self.direction not in ("up", "down", "both"):
            raise ValueError(f"bad event direction {self.direction!r}")


def spike_events(index: int, threshold: float, *, polar: tuple[int, int] | None = None):
    """Up/down spike-crossing event pair for component ``index``.

    For polar models pass ``polar=(r_index, theta_index)`` so the event is
    evaluated on x = r*cos(theta).
    """
    if polar is None:
        f = LinearEvent(index, threshold)
    else:
        f = PolarXEvent(polar[0], polar[1], threshold)
    return [
        EventSpec("spike-up", f, "up"),
        EventSpec("spike-down", f, "down"),
    ]


def section_event(index: int, value: float, direction: str = "up", terminal: bool = False):
    return EventSpec("section-cross", LinearEvent(index, value), direction, terminal)


# -- Dormand-Prince 5(4) tableau ---------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# difference between the 5th and embedded 4th order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense-output interpolation matrix (4th order continuous extension)
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

ORDER = 5  # propagated order of the pair


class _DenseSegment:
    """Quartic interpolant over one accepted step."""

    __slots__ = ("t0", "h", "y0", "Q")

    def __init__(self, t0: float, h: float, y0: np.ndarray, K: np.ndarray):
        self.t0 = t0
        self.h = h
        self.y0 = y0
        self.Q = K.T @ _P

    def __call__(self, t: float) -> np.ndarray:
        x = (t - self.t0) / self.h
        p = np.array([x, x * x, x ** 3, x ** 4])
        return self.y0 + self.h * (self.Q @ p)


def _initial_step(fun, t0, y0, f0, t_end, rtol, atol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = np.linalg.norm(y0 / scale) / math.sqrt(y0.size)
    d1 = np.linalg.norm(f0 / scale) / math.sqrt(y0.size)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.linalg.norm((f1 - f0) / scale) / math.sqrt(y0.size) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, max_step, abs(t_end - t0))


def _localize(g, seg: _DenseSegment, t_lo: float, t_hi: float, g_lo: float, tol_g: float):
    """Bisect a bracketed sign change of ``g`` on the dense output."""
    a, b, ga = t_lo, t_hi, g_lo
    for _ in range(200):
        m = 0.5 * (a + b)
        gm = g(m, seg(m))
        if abs(gm) < tol_g or (b - a) <= 1e-14 * max(1.0, abs(m)):
            return m
        if (ga < 0.0) == (gm < 0.0):
            a, ga = m, gm
        else:
            b = m
    return 0.5 * (a + b)


def _crossed(g0: float, g1: float, direction: str) -> bool:
    if direction == "up":
        return g0 < 0.0 <= g1
    if direction == "down":
        return g0 > 0.0 >= g1
    return (g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)


def integrate(
    sys: SlowFastSystem,
    x0,
    t_span: tuple[float, float],
    cfg: IntegratorConfig | None = None,
    events: Sequence[EventSpec] = (),
    backend: str | None = None,
) -> Trajectory:
    """Integrate ``sys`` over ``t_span`` (fast time) from state ``x0``.

    Events are localized on the dense output to ``|g| < abs_tol``; terminal
    events stop the integration at the event time.  One state row is stored
    per accepted step.

    ``backend`` forces "python" or "compiled"; by default the compiled core
    is used when available and applicable.
    """
    cfg = cfg or IntegratorConfig()
    y0 = sys.check_state(x0)
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ValueError("t_span must be a nondegenerate forward interval")

    from . import backends

    chosen = backends.choose(sys, events, backend)
    if chosen == "compiled":
        return backends.run_compiled(sys, y0, t0, t_end, cfg, events)
    return _integrate_py(sys, y0, t0, t_end, cfg, events)


def _integrate_py(sys, y0, t0, t_end, cfg, events) -> Trajectory:
    pvec = sys._pvec
    raw = sys.rhs

    def fun(t, y):
        return np.asarray(raw(y, pvec), dtype=float)

    rtol, atol = cfg.rel_tol, cfg.abs_tol
    t, y = t0, y0.copy()
    f = fun(t, y)
    if not np.all(np.isfinite(f)):
        raise NonFiniteStateError(f"{sys.name}: non-finite derivative at start")
    h = _initial_step(fun, t, y, f, t_end, rtol, atol, cfg.max_step)

    ts = [t]
    ys = [y.copy()]
    recs: list[EventRecord] = []
    g_prev = [ev.func(t, y) for ev in events]
    n_steps = 0
    K = np.empty((7, y.size))

    while t < t_end:
        n_steps += 1
        if n_steps > cfg.max_steps:
            raise MaxStepsExceededError(f"{sys.name}: exceeded {cfg.max_steps} steps")
        h = min(h, cfg.max_step, t_end - t)
        if h < cfg.min_step:
            raise StepUnderflowError(f"{sys.name}: step {h:.3e} below min_step at t={t:.6g}")

        K[0] = f
        for i in range(1, 6):
            yi = y + h * (K[:i].T @ _A[i])
            K[i] = fun(t + _C[i] * h, yi)
        y_new = y + h * (K[:6].T @ _B)
        f_new = fun(t + h, y_new)
        K[6] = f_new

        if not np.all(np.isfinite(y_new)):
            raise NonFiniteStateError(f"{sys.name}: non-finite state at t={t + h:.6g}")

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.linalg.norm((K.T @ _E) * h / scale) / math.sqrt(y.size)

        if err > 1.0:
            h *= max(0.2, 0.9 * err ** (-1.0 / ORDER))
            continue

        # accepted
        seg = _DenseSegment(t, h, y, K) if events else None
        t_new = t + h
        t_stop = None
        step_hits: list[tuple[float, EventSpec, int]] = []
        for j, ev in enumerate(events):
            g1 = ev.func(t_new, y_new)
            if _crossed(g_prev[j], g1, ev.direction):
                t_ev = _localize(ev.func, seg, t, t_new, g_prev[j], atol)
                step_hits.append((t_ev, ev, j))
            g_prev[j] = g1
        step_hits.sort(key=lambda rec: rec[0])
        for t_ev, ev, j in step_hits:
            if t_stop is not None and t_ev > t_stop:
                break
            recs.append(EventRecord(t_ev, ev.kind, seg(t_ev)))
            if ev.terminal and t_stop is None:
                t_stop = t_ev

        if t_stop is not None:
            ts.append(t_stop)
            ys.append(seg(t_stop))
            break

        t, y, f = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())

        factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** (-1.0 / ORDER))
        h *= max(0.2, factor)

    return Trajectory(np.array(ts), np.array(ys), tuple(recs))


def integrate_fixed(sys: SlowFastSystem, x0, t_span, n_steps: int) -> np.ndarray:
    """Fixed-step run of the same 5th-order formula; returns the final state.

    Used for empirical convergence measurements, where error control would
    hide the step-size dependence.
    """
    y = sys.check_state(x0).copy()
    pvec = sys._pvec
    t0, t_end = float(t_span[0]), float(t_span[1])
    h = (t_end - t0) / n_steps
    K = np.empty((6, y.size))
    t = t0
    for _ in range(n_steps):
        K[0] = sys.rhs(y, pvec)
        for i in range(1, 6):
            yi = y + h * (K[:i].T @ _A[i])
            K[i] = sys.rhs(yi, pvec)
        y = y + h * (K.T @ _B)
        t += h
    return y


def refinement_errors(sys, x0, t_span, n_list: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Final-state errors of fixed-step runs against a 16x-refined reference."""
    ref = integrate_fixed(sys, x0, t_span, 16 * max(n_list))
    hs, errs = [], []
    span = t_span[1] - t_span[0]
    for n in n_list:
        e = np.linalg.norm(integrate_fixed(sys, x0, t_span, n) - ref)
        hs.append(span / n)
        errs.append(e)
    return np.array(hs), np.array(errs)


def convergence_order(sys: SlowFastSystem, x0, t_span, n_list: Sequence[int] = (40, 80, 160, 320)) -> float:
    """Empirical order: slope of log error vs log step over fixed-step runs.

    Returns ``inf`` when every refinement error vanishes (e.g. a zero
    right-hand side, integrated exactly).
    """
    hs, errs = refinement_errors(sys, x0, t_span, n_list)
    if np.all(errs == 0.0):
        return math.inf
    mask = errs > 0.0
    slope, _ = np.polyfit(np.log(hs[mask]), np.log(errs[mask]), 1)
    return float(slope)


# -- serialization ------------------------------------------------------------


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write ``t,x1..xn`` with one row per accepted step, full precision."""
    n = traj.dim
    header = "t," + ",".join(f"x{i + 1}" for i in range(n))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for t, row in zip(traj.times, traj.states):
            fh.write(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in row) + "\n")


def events_to_json(traj: Trajectory, path) -> None:
    payload = [
        {"time": ev.time, "kind": ev.kind, "state": [float(v) for v in ev.state]}
        for ev in traj.events
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def save_trajectory(traj: Trajectory, csv_path, events_path=None) -> None:
    """CSV of states plus a sibling JSON file of events."""
    trajectory_to_csv(traj, csv_path)
    if events_path is None:
        events_path = str(csv_path).rsplit(".", 1)[0] + ".events.json"
    events_to_json(traj, events_path)
