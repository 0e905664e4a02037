"""Bifurcation analysis of the planar fast subsystem over one frozen slow variable.

Equilibrium families are traced by pseudo-arclength continuation with fold,
Hopf and transcritical detection from the 2x2 Jacobian.  Limit-cycle families
use single shooting on an axis-aligned section with (anchor, period, param)
as unknowns, plus a stability-probe fallback that localizes homoclinic
period blow-up by bisection, where shooting sensitivities become unusable.
Polar models get an algebraic root-curve tracer on the radial equation.

Event kinds are a fixed vocabulary shared with the classification layer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .integrate import EventSpec, IntegratorConfig, LinearEvent, integrate
from .params import ParamSet
from .system import SlowFastSystem
from .models import FastFamily, RadialStructure

EVENT_KINDS = (
    "fold", "hopf", "homoclinic-approach", "snic", "fold-of-cycles",
    "transcritical-of-cycles", "pitchfork-of-cycles", "period-doubling",
    "transcritical-of-equilibria",
)

NEWTON_TOL = 1e-10
NEWTON_MAXIT = 25


class ContinuationError(RuntimeError):
    pass


@dataclass
class BifurcationEvent:
    kind: str
    param: float
    state: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


@dataclass
class EqPoint:
    param: float
    state: np.ndarray
    eigenvalues: tuple


@dataclass
class EquilibriumBranch:
    points: list
    events: list
    name: str = "equilibria"

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    @property
    def states(self) -> np.ndarray:
        return np.array([p.state for p in self.points])

    def stability(self) -> np.ndarray:
        """True where all eigenvalue real parts are negative."""
        return np.array([max(ev.real for ev in p.eigenvalues) < 0 for p in self.points])


@dataclass
class CyclePoint:
    param: float
    anchor: np.ndarray
    period: float
    multipliers: tuple
    x_max: float
    x_min: float


@dataclass
class CycleBranch:
    points: list
    events: list
    name: str = "cycles"
    closed: bool = False

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    def amplitudes(self) -> np.ndarray:
        return np.array([p.x_max for p in self.points])

    def stability(self) -> np.ndarray:
        out = []
        for p in self.points:
            nontrivial = [m for m in p.multipliers if abs(m - 1.0) > 1e-3]
            out.append(all(abs(m) < 1.0 for m in nontrivial) if nontrivial else True)
        return np.array(out)


def eig2(J: np.ndarray) -> tuple:
    """Closed-form eigenvalues of a 2x2 real matrix."""
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        s = math.sqrt(disc)
        return ((tr + s) / 2.0 + 0j, (tr - s) / 2.0 + 0j)
    s = math.sqrt(-disc)
    return (complex(tr / 2.0, s / 2.0), complex(tr / 2.0, -s / 2.0))


def _newton(F, J, u0, tol=NEWTON_TOL, maxit=NEWTON_MAXIT):
    u = np.asarray(u0, dtype=float).copy()
    for _ in range(maxit):
        r = F(u)
        if np.linalg.norm(r) < tol:
            return u, True
        try:
            du = np.linalg.solve(J(u), r)
        except np.linalg.LinAlgError:
            return u, False
        u -= du
        if not np.all(np.isfinite(u)):
            return u, False
    return u, np.linalg.norm(F(u)) < tol


def _fd_jac(F, u, h=1e-7):
    r0 = F(u)
    J = np.empty((len(r0), len(u)))
    for i in range(len(u)):
        up = u.copy()
        up[i] += h
        J[:, i] = (F(up) - r0) / h
    return J


def solve_equilibrium(family: FastFamily, xy0, p: float):
    """Newton-solve the fast equilibrium at frozen parameter p."""
    F = lambda xy: family.rhs(xy, p)
    J = lambda xy: family.jac(xy, p)
    xy, ok = _newton(F, J, xy0)
    if not ok:
        raise ContinuationError(f"equilibrium Newton failed at p={p}")
    return xy


# -- equilibrium continuation --------------------------------------------------


def continue_equilibria(
    family: FastFamily,
    p_range: tuple[float, float],
    seed_xy,
    seed_p: float | None = None,
    ds0: float = 0.02,
    ds_max: float = 0.2,
    ds_min: float = 1e-8,
    max_points: int = 6000,
    name: str = "equilibria",
) -> EquilibriumBranch:
    """Pseudo-arclength trace of a fast-equilibrium family through folds.

    Detects folds (det sign change at a branch turning point), Hopf points
    (complex-pair real part crossing zero with positive determinant) and
    branch points with transversal parameter passage, which are flagged as
    transcritical-of-equilibria.
    """
    p_lo, p_hi = min(p_range), max(p_range)
    p = seed_p if seed_p is not None else p_lo
    xy = solve_equilibrium(family, np.asarray(seed_xy, dtype=float), p)

    def aug(u):
        return np.concatenate((family.rhs(u[:2], u[2]), [0.0]))

    def tangent(u, prev=None):
        J = family.jac(u[:2], u[2])
        h = 1e-7 * max(1.0, abs(u[2]))
        fp = (family.rhs(u[:2], u[2] + h) - family.rhs(u[:2], u[2] - h)) / (2 * h)
        A = np.zeros((3, 3))
        A[:2, :2] = J
        A[:2, 2] = fp
        A[2] = prev if prev is not None else (0.0, 0.0, 1.0)
        try:
            t = np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))
        except np.linalg.LinAlgError:
            # exactly at a singular point: nudge along previous direction
            t = prev if prev is not None else np.array([0.0, 0.0, 1.0])
        n = np.linalg.norm(t)
        return t / n if n > 0 else np.array([0.0, 0.0, 1.0])

    u_seed = np.array([xy[0], xy[1], p])
    tan_seed = tangent(u_seed)
    if tan_seed[2] < 0:
        tan_seed = -tan_seed

    def march(u, tan, pts):
        _march_eq(family, u, tan, pts, tangent, p_lo, p_hi,
                  ds0, ds_max, ds_min, max_points)

    fwd: list[EqPoint] = []
    bwd: list[EqPoint] = []
    march(u_seed.copy(), tan_seed.copy(), fwd)
    march(u_seed.copy(), -tan_seed.copy(), bwd)
    J0 = family.jac(u_seed[:2], u_seed[2])
    pts = bwd[::-1] + [EqPoint(u_seed[2], u_seed[:2].copy(), eig2(J0))] + fwd
    events: list[BifurcationEvent] = []
    _detect_eq_events(family, pts, events)
    return EquilibriumBranch(pts, events, name=name)


def _march_eq(family, u, tan, pts, tangent, p_lo, p_hi, ds0, ds_max, ds_min,
              max_points):

    def record(u):
        J = family.jac(u[:2], u[2])
        pts.append(EqPoint(u[2], u[:2].copy(), eig2(J)))

    ds = ds0
    successes = 0
    n_fail = 0
    while len(pts) < max_points:
        u_pred = u + ds * tan

        def F(v):
            return np.concatenate((family.rhs(v[:2], v[2]), [tan @ (v - u_pred)]))

        def Jac(v):
            J = family.jac(v[:2], v[2])
            h = 1e-7 * max(1.0, abs(v[2]))
            fp = (family.rhs(v[:2], v[2] + h) - family.rhs(v[:2], v[2] - h)) / (2 * h)
            A = np.zeros((3, 3))
            A[:2, :2] = J
            A[:2, 2] = fp
            A[2] = tan
            return A

        v, ok = _newton(F, Jac, u_pred)
        if ok and np.linalg.norm(v - u_pred) > 3.0 * abs(ds) + 1e-9:
            ok = False  # corrector wandered onto another sheet
        if not ok:
            ds *= 0.5
            successes = 0
            n_fail += 1
            if ds < ds_min or n_fail > 60:
                break
            continue
        n_fail = 0
        new_tan = tangent(v, prev=tan)
        if new_tan @ tan < 0:
            new_tan = -new_tan
        u = v
        tan[:] = new_tan
        record(u)
        successes += 1
        if successes >= 5:
            ds = min(ds * 2.0, ds_max)
            successes = 0
        if not (p_lo - 1e-9 <= u[2] <= p_hi + 1e-9):
            break


def _dets_traces(family, pts):
    dets, trs = [], []
    for p in pts:
        J = family.jac(p.state, p.param)
        dets.append(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
        trs.append(J[0, 0] + J[1, 1])
    return np.array(dets), np.array(trs)


def _detect_eq_events(family, pts, events):
    if len(pts) < 3:
        return
    dets, trs = _dets_traces(family, pts)
    params = np.array([p.param for p in pts])
    for i in range(len(pts) - 1):
        if dets[i] == 0.0:
            continue
        if dets[i] * dets[i + 1] < 0.0:
            ev = _refine_det_zero(family, pts[i], pts[i + 1])
            if ev is not None:
                ev.diagnostics["det_before"] = float(dets[i])
                ev.diagnostics["det_after"] = float(dets[i + 1])
                events.append(ev)
        if trs[i] * trs[i + 1] < 0.0 and dets[i] > 0.0 and dets[i + 1] > 0.0:
            ev = _refine_hopf(family, pts[i], pts[i + 1])
            if ev is not None:
                ev.diagnostics["trace_before"] = float(trs[i])
                ev.diagnostics["trace_after"] = float(trs[i + 1])
                events.append(ev)


def _refine_det_zero(family, pa, pb):
    """Solve {rhs=0, det=0}; classify fold vs transcritical by p-transversality."""

    def F(u):
        J = family.jac(u[:2], u[2])
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        return np.concatenate((family.rhs(u[:2], u[2]), [det]))

    u0 = np.concatenate(((pa.state + pb.state) / 2, [(pa.param + pb.param) / 2]))
    u, ok = _newton(lambda v: F(v), lambda v: _fd_jac(F, v), u0)
    if not ok:
        return None
    # standard singular-point test: with w the left null vector of the fast
    # Jacobian, w . f_p != 0 marks a fold; w . f_p = 0 a branch point where
    # a second family crosses with eigenvalue exchange (transcritical).
    J = family.jac(u[:2], u[2])
    _, _, vt = np.linalg.svd(J.T)
    w = vt[-1]

    def fp_at(xy, p):
        h = 1e-7 * max(1.0, abs(p))
        return (family.rhs(xy, p + h) - family.rhs(xy, p - h)) / (2 * h)

    fp = fp_at(u[:2], u[2])
    scale = max(np.linalg.norm(fp_at(pa.state, pa.param)),
                np.linalg.norm(fp_at(pb.state, pb.param)), 1e-6)
    transversal = abs(w @ fp) < 1e-2 * scale
    if transversal:
        # re-polish with the bordered branch-point system, which is regular
        # at the crossing (plain {rhs, det} is quadratically degenerate there)
        u2, ok2 = _branch_point_polish(family, u, w)
        if ok2:
            u = u2
        return BifurcationEvent("transcritical-of-equilibria", float(u[2]),
                                u[:2].copy(), {"w_dot_fp": float(w @ fp)})
    return BifurcationEvent("fold", float(u[2]), u[:2].copy(),
                            {"w_dot_fp": float(w @ fp)})


def _branch_point_polish(family, u0, w0):
    """Solve {rhs=0, J^T w=0, |w|^2=1} for (x, y, p, w)."""

    def F(v):
        xy, p, w = v[:2], v[2], v[3:]
        J = family.jac(xy, p)
        return np.concatenate((family.rhs(xy, p), J.T @ w, [w @ w - 1.0]))

    v0 = np.concatenate((u0, w0 / np.linalg.norm(w0)))
    v, ok = _newton(lambda z: F(z), lambda z: _fd_jac(F, z, h=1e-8), v0,
                    tol=1e-12, maxit=40)
    return v[:3], ok


def _refine_hopf(family, pa, pb):
    def F(u):
        J = family.jac(u[:2], u[2])
        return np.concatenate((family.rhs(u[:2], u[2]), [J[0, 0] + J[1, 1]]))

    u0 = np.concatenate(((pa.state + pb.state) / 2, [(pa.param + pb.param) / 2]))
    u, ok = _newton(lambda v: F(v), lambda v: _fd_jac(F, v), u0)
    if not ok:
        return None
    J = family.jac(u[:2], u[2])
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if det <= 0:
        return None
    return BifurcationEvent("hopf", float(u[2]), u[:2].copy(),
                            {"omega": math.sqrt(det)})


def transcritical_events(b1: EquilibriumBranch, b2: EquilibriumBranch,
                         tol: float = 1e-6) -> list[BifurcationEvent]:
    """Cross-register transcritical events between two branches.

    A transcritical point found on either branch that lies within ``tol`` of
    the other branch (in (param, state) space) is attached to both.
    """
    out = []
    for src, other in ((b1, b2), (b2, b1)):
        for ev in src.events:
            if ev.kind != "transcritical-of-equilibria":
                continue
            d = np.min(np.abs(other.params - ev.param)) if other.points else math.inf
            if d < max(tol, 1e-3):
                if all(abs(e.param - ev.param) > 1e-9 for e in other.events
                       if e.kind == ev.kind):
                    other.events.append(ev)
                if ev not in out:
                    out.append(ev)
    return out


# -- limit-cycle machinery ------------------------------------------------------


def _frozen_system(family: FastFamily, p: float) -> tuple[SlowFastSystem, Callable]:
    """Frozen fast subsystem at parameter p, plus a state-lift function.

    When the model exposes a compiled kernel, the full system is integrated
    with epsilon zeroed (slow components exactly constant), which keeps the
    long probing integrations on the compiled stepper.
    """
    fz = family.frozen
    if fz is not None:
        pnames = tuple(f"p{i}" for i in range(len(fz.pvec)))
        sysm = SlowFastSystem(
            name="fast-family", n_fast=len(fz.template), n_slow=0,
            rhs=lambda s, pv: s,  # placeholder; kernel path is always taken
            param_names=pnames,
            params=ParamSet(dict(zip(pnames, fz.pvec))),
            epsilon_name=pnames[0],  # unused: n_slow = 0; slot must only exist
            kernel_kind=fz.kind,
        )

        def lift(xy):
            s = fz.template.copy()
            s[0], s[1] = xy[0], xy[1]
            s[fz.sweep_pos] = p
            return s

        return sysm, lift

    rhs = lambda s, pv: family.rhs(s, pv[0])
    sysm = SlowFastSystem(
        name="fast-family", n_fast=2, n_slow=0, rhs=rhs,
        param_names=("p", "eps"), params=ParamSet({"p": p, "eps": 0.0}),
    )
    return sysm, lambda xy: np.asarray(xy, dtype=float)


_CYCLE_CFG = IntegratorConfig(abs_tol=1e-11, rel_tol=1e-11, max_steps=4_000_000)


def converge_cycle(family: FastFamily, p: float, xy0, section_x: float | None = None,
                   settle_time: float = 200.0, return_tol: float = 1e-8,
                   max_laps: int = 40, cfg: IntegratorConfig = _CYCLE_CFG):
    """Relax onto a stable cycle; return (anchor, period, x_max, x_min, traj).

    The section is the vertical line x = section_x crossed upward; by default
    it passes through the mean x of a settling run.  Convergence requires two
    successive returns within ``return_tol``.
    """
    sysf, lift = _frozen_system(family, p)
    tr = integrate(sysf, lift(xy0), (0.0, settle_time), cfg)
    if section_x is None:
        xs = tr.component(0)
        section_x = 0.5 * (xs[len(xs) // 2:].min() + xs[len(xs) // 2:].max())
    ev = EventSpec("section-cross", LinearEvent(0, section_x), "up")
    start = tr.states[-1]
    hits: list = []
    t_base = 0.0
    for _ in range(max_laps):
        tr2 = integrate(sysf, start, (0.0, settle_time), cfg, [ev])
        for e in tr2.events:
            if e.kind == "section-cross":
                hits.append((t_base + e.time, e.state))
        prev = None
        for i in range(1, len(hits)):
            d = abs(hits[i][1][1] - hits[i - 1][1][1])
            if prev is not None and d < return_tol:
                anchor = hits[i][1][:2].copy()
                period = hits[i][0] - hits[i - 1][0]
                xmx, xmn = _cycle_extrema(family, p, anchor, period)
                return anchor, period, xmx, xmn, section_x
            prev = d
        start = tr2.states[-1]
        t_base += tr2.times[-1]
    raise ContinuationError(f"no converged cycle at p={p}")


def _flow(family, p, xy, T, cfg=_CYCLE_CFG):
    sysf, lift = _frozen_system(family, p)
    tr = integrate(sysf, lift(xy), (0.0, T), cfg)
    return tr.states[-1][:2]


_MONO_CFG = IntegratorConfig(abs_tol=1e-13, rel_tol=1e-13, max_steps=6_000_000)


def _monodromy(family, p, anchor, T, h=1e-5):
    """Fixed-period flow-map Jacobian by finite differences.

    Accurate for moderate periods; used as a cross-check.  Production
    multipliers come from the return map, whose spectrum excludes the
    neutral flow direction by construction.
    """
    M = np.empty((2, 2))
    base = _flow(family, p, anchor, T, cfg=_MONO_CFG)
    for i in range(2):
        x = np.array(anchor, dtype=float)
        x[i] += h
        M[:, i] = (_flow(family, p, x, T, cfg=_MONO_CFG) - base) / h
    return M


def _return_map_multiplier(family, p, anchor, sec_x, T_est, h=1e-6):
    """Derivative of the 1-D Poincare return map at the anchor.

    For a planar fast subsystem the Floquet spectrum is {1, P'}, with the
    trivial multiplier exactly 1 by the flow-direction factorization.
    """
    sysf, lift = _frozen_system(family, p)
    ev = EventSpec("section-cross", LinearEvent(0, sec_x), "up", terminal=True)

    def ret_y(y_off):
        s = lift((anchor[0], anchor[1] + y_off))
        tr = integrate(sysf, s, (0.0, 12.0 * T_est + 100.0), _CYCLE_CFG, [ev])
        hits = [e for e in tr.events if e.kind == "section-cross"]
        if not hits:
            raise ContinuationError(f"return map lost the cycle at p={p}")
        return hits[-1].state[1]

    y0 = ret_y(0.0)
    y1 = ret_y(h)
    return (y1 - y0) / h


def _cycle_extrema(family, p, anchor, T):
    sysf, lift = _frozen_system(family, p)
    tr = integrate(sysf, lift(anchor), (0.0, T), _CYCLE_CFG)
    xs = tr.states[:, 0]
    return float(xs.max()), float(xs.min())


def continue_cycles(
    family: FastFamily,
    p_range: tuple[float, float],
    seed_xy,
    seed_p: float,
    direction: float = -1.0,
    ds0: float = 0.05,
    ds_max: float = 0.6,
    ds_min: float = 1e-7,
    max_points: int = 400,
    period_blowup_mult: float = 30.0,
    approach_tol: float = 1e-2,
    saddle_branch: EquilibriumBranch | None = None,
    name: str = "cycles",
) -> CycleBranch:
    """Single-shooting pseudo-arclength continuation of a limit-cycle family.

    Unknowns are (offset along the section, period, parameter).  Folds of
    cycles are flagged at parameter turning points, period doubling when a
    multiplier crosses -1.  Near a homoclinic the shooting sensitivities blow
    up like exp(lambda_u * T); the branch end is then localized by a
    stability-probe bisection and flagged as homoclinic-approach when the
    period exceeds ``period_blowup_mult`` times the starting period while the
    cycle approaches a saddle within ``approach_tol``.
    """
    p_lo, p_hi = min(p_range), max(p_range)
    anchor, T0, xmax, xmin, section_x = converge_cycle(family, seed_p, seed_xy)
    # section: vertical line through the anchor, upward crossings
    tangent_dir = np.array([0.0, 1.0])  # anchor moves along y on the section

    def shoot(u):
        a = np.array([anchor[0], u[0]])
        return _flow(family, u[2], a, u[1]) - a

    pts: list[CyclePoint] = []
    events: list[BifurcationEvent] = []

    def record(u):
        a = np.array([anchor[0], u[0]])
        try:
            nontrivial = _return_map_multiplier(family, u[2], a, anchor[0], u[1])
        except ContinuationError:
            nontrivial = math.nan
        mults = (1.0 + 0j, complex(nontrivial, 0.0))
        xmx, xmn = _cycle_extrema(family, u[2], a, u[1])
        pts.append(CyclePoint(float(u[2]), a, float(u[1]), mults, xmx, xmn))

    u = np.array([anchor[1], T0, seed_p])
    record(u)
    tan = np.array([0.0, 0.0, direction])
    ds = ds0
    successes = 0
    terminated = None
    while len(pts) < max_points:
        u_pred = u + ds * tan

        def F(v):
            return np.concatenate((shoot(v), [tan @ (v - u_pred)]))

        v, ok = _newton(lambda w: F(w), lambda w: _fd_jac(F, w, h=1e-6), u_pred,
                        tol=1e-9, maxit=14)
        if ok and not (0 < v[1] < 40 * T0 + 1e3):
            ok = False
        if not ok:
            ds *= 0.5
            successes = 0
            if ds < ds_min:
                terminated = "newton"
                break
            continue
        r0 = F(v)
        J = _fd_jac(F, v, h=1e-6)
        A = np.zeros((3, 3))
        A[:3] = J
        A[2] = tan
        try:
            new_tan = np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))
            new_tan /= np.linalg.norm(new_tan)
            if new_tan @ tan < 0:
                new_tan = -new_tan
        except np.linalg.LinAlgError:
            new_tan = tan
        u_old, u, tan = u, v, new_tan
        record(u)
        successes += 1
        if successes >= 5:
            ds = min(ds * 2.0, ds_max)
            successes = 0
        if not (p_lo - 1e-9 <= u[2] <= p_hi + 1e-9):
            break
        if u[1] > period_blowup_mult * T0:
            terminated = "blowup"
            break
        # period blow-up stalls the arclength stepping long before the
        # nominal threshold; hand over to the bisection finisher
        if len(pts) >= 3 and u[1] > 5 * T0 and \
                abs(pts[-1].param - pts[-2].param) < 1e-5:
            terminated = "blowup"
            break
        # amplitude collapse onto an equilibrium: stop at a Hopf end
        if pts[-1].x_max - pts[-1].x_min < 1e-4:
            terminated = "hopf-end"
            break
    else:
        if pts and pts[-1].period > 5 * T0:
            terminated = "blowup"

    _detect_cycle_folds(pts, events)
    _detect_period_doubling(pts, events)

    if terminated in ("newton", "blowup") and pts:
        _finish_homoclinic(family, pts, events, T0, period_blowup_mult,
                           approach_tol, saddle_branch)
    return CycleBranch(pts, events, name=name)


def _detect_cycle_folds(pts, events):
    for i in range(1, len(pts) - 1):
        d1 = pts[i].param - pts[i - 1].param
        d2 = pts[i + 1].param - pts[i].param
        if d1 * d2 < 0.0:
            # quadratic fit of param along the three points
            amps = np.array([pts[i - 1].x_max, pts[i].x_max, pts[i + 1].x_max])
            ps = np.array([pts[i - 1].param, pts[i].param, pts[i + 1].param])
            c = np.polyfit(amps - amps[1], ps, 2)
            a_ext = -c[1] / (2 * c[0]) if c[0] != 0 else 0.0
            p_ext = np.polyval(c, a_ext)
            events.append(BifurcationEvent(
                "fold-of-cycles", float(p_ext), pts[i].anchor.copy(),
                {"period": pts[i].period, "amplitude": float(amps[1] + a_ext)}))


def _detect_period_doubling(pts, events):
    def nontrivial(p):
        ms = sorted(p.multipliers, key=lambda m: abs(m - 1.0))
        return ms[-1].real if len(ms) > 1 else 1.0

    if not pts:
        return
    T0 = pts[0].period
    for i in range(len(pts) - 1):
        # multipliers from finite differencing degrade near period blow-up
        if pts[i].period > 10 * T0 or pts[i + 1].period > 10 * T0:
            continue
        m0, m1 = nontrivial(pts[i]), nontrivial(pts[i + 1])
        if (m0 + 1.0) * (m1 + 1.0) < 0.0:
            events.append(BifurcationEvent(
                "period-doubling", pts[i].param, pts[i].anchor.copy(),
                {"multiplier_before": m0, "multiplier_after": m1}))


def cycle_exists_probe(family: FastFamily, p: float, xy0, escape_fn,
                       t_max: float = 3000.0, n_laps_needed: int = 3,
                       section_x: float = 0.0,
                       cfg: IntegratorConfig = _CYCLE_CFG) -> bool:
    """True if the trajectory keeps returning to the section without escaping.

    ``escape_fn(state) -> bool`` declares arrival at the competing attractor.
    """
    sysf, lift = _frozen_system(family, p)
    ev = EventSpec("section-cross", LinearEvent(0, section_x), "up")
    tr = integrate(sysf, lift(xy0), (0.0, t_max), cfg, [ev])
    hits = [e for e in tr.events if e.kind == "section-cross"]
    if escape_fn(tr.states[-1]):
        return False
    return len(hits) >= n_laps_needed


def _finish_homoclinic(family, pts, events, T0, blowup_mult, approach_tol,
                       saddle_branch):
    """Bisection on the parameter for the end of the stable cycle family.

    The last continued point provides the warm start; the saddle for the
    approach test is taken from the supplied equilibrium branch.
    """
    last = pts[-1]
    p_in = last.param
    step = max(abs(pts[-1].param - pts[0].param) * 0.05, 1e-3)
    direction = math.copysign(1.0, pts[-1].param - pts[0].param) if len(pts) > 1 else -1.0

    def saddle_at(p):
        if saddle_branch is None:
            return None
        cand = [q for q in saddle_branch.points
                if (q.eigenvalues[0].real) * (q.eigenvalues[1].real) < 0
                and abs(q.eigenvalues[0].imag) < 1e-12]
        if not cand:
            return None
        q = min(cand, key=lambda q: abs(q.param - p))
        try:
            return solve_equilibrium(family, q.state, p)
        except ContinuationError:
            return None

    sec_x = last.anchor[0]

    def escape(state):
        # left the oscillatory region: below the cycle's x-range
        return state[0] < last.x_min - 0.5 * (last.x_max - last.x_min) - 0.2

    def exists(p):
        return cycle_exists_probe(family, p, last.anchor, escape,
                                  t_max=60 * T0 * blowup_mult / 10, section_x=sec_x)

    p_out = p_in + direction * step
    n_expand = 0
    while exists(p_out):
        p_in = p_out
        p_out = p_out + direction * step
        n_expand += 1
        if n_expand > 60:
            events.append(BifurcationEvent(
                "homoclinic-approach", pts[-1].param, pts[-1].anchor.copy(),
                {"unresolved": True}))
            return
    for _ in range(64):
        mid = 0.5 * (p_in + p_out)
        if mid == p_in or mid == p_out:
            break
        if exists(mid):
            p_in = mid
        else:
            p_out = mid
    # measure the near-terminal cycle a resolvable distance inside the branch
    # (closer than ~1e-10 the period is limited by roundoff, not dynamics)
    p_meas = p_in + math.copysign(1e-10 * max(1.0, abs(p_in)), p_in - p_out)
    anchor, T = _near_terminal_cycle(family, p_meas, last, sec_x, T0)
    sad = saddle_at(p_in)
    approach = math.inf
    if sad is not None:
        sysf, lift = _frozen_system(family, p_meas)
        cfg = IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12, max_steps=6_000_000)
        tr = integrate(sysf, lift(anchor), (0.0, min(T, 400.0)), cfg)
        approach = float(np.min(np.linalg.norm(tr.states[:, :2] - sad, axis=1)))
    diag = {"period": float(T), "closest_approach": approach,
            "threshold": blowup_mult * T0}
    if not (T > blowup_mult * T0 and approach < approach_tol):
        diag["unresolved"] = True
    events.append(BifurcationEvent("homoclinic-approach", float(p_in),
                                   np.asarray(anchor), diag))


def _near_terminal_cycle(family, p, last, sec_x, T0):
    """Relax onto the cycle at p and measure its period as a median lap time.

    Exact return matching is unattainable this close to a homoclinic (exit
    spread is amplified by exp(lambda_u * T)), so lap statistics stand in
    for the fixed-point residual.
    """
    cfg = IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12, max_steps=8_000_000)
    sysf, lift = _frozen_system(family, p)
    ev = EventSpec("section-cross", LinearEvent(0, sec_x), "up")
    start = lift(last.anchor)
    times = []
    t_base = 0.0
    for _ in range(40):
        tr = integrate(sysf, start, (0.0, 60.0 * T0), cfg, [ev])
        times += [t_base + e.time for e in tr.events if e.kind == "section-cross"]
        start = tr.states[-1]
        t_base += tr.times[-1]
        if len(times) >= 6:
            break
    if len(times) < 3:
        return last.anchor, last.period
    laps = np.diff(times)[1:]
    return last.anchor, float(np.median(laps))


def merge_snic(cycle_branch: CycleBranch, eq_branch: EquilibriumBranch,
               fold_merge_tol: float = 1e-3) -> None:
    """Re-flag homoclinic-approach as SNIC when it coincides with an
    equilibrium fold in the slow parameter."""
    fold_ps = [ev.param for ev in eq_branch.events if ev.kind == "fold"]
    for ev in cycle_branch.events:
        if ev.kind == "homoclinic-approach":
            for fp in fold_ps:
                if abs(ev.param - fp) < fold_merge_tol:
                    ev.diagnostics["was"] = "homoclinic-approach"
                    ev.kind = "snic"


# -- polar (radial) branch analysis ---------------------------------------------


def _h_partials(h, r, p, hr=1e-6, hp=1e-6):
    h_r = (h(r + hr, p) - h(r - hr, p)) / (2 * hr)
    h_p = (h(r, p + hp) - h(r, p - hp)) / (2 * hp)
    return h_r, h_p


def _trace_curve(h, r0, p0, r_win, p_win, ds=0.004, max_pts=24000):
    """March the implicit curve h(r,p)=0 from (r0,p0); detect closure."""
    pts = [(p0, r0)]

    def corr(p, r, tang):
        # Newton correction orthogonal to the tangent
        for _ in range(30):
            val = h(r, p)
            h_r, h_p = _h_partials(h, r, p)
            A = np.array([[h_r, h_p], [tang[1], tang[0]]])
            try:
                d = np.linalg.solve(A, np.array([val, 0.0]))
            except np.linalg.LinAlgError:
                return None
            r -= d[0]
            p -= d[1]
            if abs(val) < 1e-12:
                break
        return (p, r) if abs(h(r, p)) < 1e-9 else None

    h_r, h_p = _h_partials(h, r0, p0)
    tang = np.array([-h_r, h_p])  # (dp, dr) along the curve
    n = np.linalg.norm(tang)
    if n == 0:
        return pts, False
    tang /= n
    closed = False
    p, r = p0, r0
    for i in range(max_pts):
        pp, rp = p + ds * tang[0], r + ds * tang[1]
        res = corr(pp, rp, tang)
        if res is None:
            break
        p, r = res
        h_r, h_p = _h_partials(h, r, p)
        newt = np.array([-h_r, h_p])
        nn = np.linalg.norm(newt)
        if nn == 0:
            break
        newt /= nn
        if newt @ tang < 0:
            newt = -newt
        tang = newt
        pts.append((p, r))
        if i > 10 and math.hypot(p - p0, r - r0) < 1.2 * ds:
            closed = True
            break
        if not (p_win[0] - 1e-9 <= p <= p_win[1] + 1e-9) or not (
                r_win[0] - 1e-9 <= r <= r_win[1] + 1e-9):
            break
    return pts, closed


def _d2(h, r, p, d=1e-4):
    h_p = (h(r, p + d) - h(r, p - d)) / (2 * d)
    h_rr = (h(r + d, p) - 2 * h(r, p) + h(r - d, p)) / d ** 2
    h_pp = (h(r, p + d) - 2 * h(r, p) + h(r, p - d)) / d ** 2
    h_rp = (h(r + d, p + d) - h(r + d, p - d) - h(r - d, p + d) + h(r - d, p - d)) / (4 * d * d)
    return h_p, h_rr, h_pp, h_rp


def _classify_degenerate(h, r, p):
    """Type and polished location of a point with h = h_r = 0.

    The plain {h, h_r} root is quadratically degenerate at transcritical and
    pitchfork points, so each candidate type is re-polished with a regular
    system ({h_r, h_p} and {h_r, h_rr} respectively) before classifying.
    """
    h_p, h_rr, h_pp, h_rp = _d2(h, r, p)
    scale = max(abs(h_p), abs(h_rr), abs(h_rp), 1e-9)
    if abs(h_p) > 1e-2 * scale:
        return "fold-of-cycles", (r, p), {"h_p": h_p}

    def polish(G):
        u, ok = _newton(lambda v: G(v), lambda v: _fd_jac(G, v, h=1e-6),
                        np.array([r, p]), tol=1e-12, maxit=40)
        return u, ok and abs(h(u[0], u[1])) < 1e-8

    def G_trans(v):
        hp, hrr, _, _ = _d2(h, v[0], v[1])
        h_r, _ = _h_partials(h, v[0], v[1])
        return np.array([h_r, hp])

    def G_pitch(v):
        _, hrr, _, _ = _d2(h, v[0], v[1])
        h_r, _ = _h_partials(h, v[0], v[1])
        return np.array([h_r, hrr])

    u, ok = polish(G_trans)
    if ok:
        hp2, hrr2, hpp2, hrp2 = _d2(h, u[0], u[1])
        disc = hrp2 * hrp2 - hrr2 * hpp2
        if abs(hrr2) > 1e-5 and disc > 0:
            return "transcritical-of-cycles", (u[0], u[1]), {"disc": disc, "h_rr": hrr2}
    u, ok = polish(G_pitch)
    if ok:
        hp2, hrr2, hpp2, hrp2 = _d2(h, u[0], u[1])
        if abs(hrp2) > 1e-6:
            return "pitchfork-of-cycles", (u[0], u[1]), {"h_rp": hrp2}
    return "fold-of-cycles", (r, p), {"h_p": h_p, "degenerate": True}


def polar_cycle_branches(radial: RadialStructure, p_range=None,
                         n_scan: int = 220) -> list[CycleBranch]:
    """Trace radial root curves (limit cycles of the planar realization).

    Returns a list of branches with fold/transcritical/pitchfork-of-cycles
    events at degenerate roots, plus an r=0 branch with Hopf events where the
    origin's radial stability switches (for models whose radial equation
    vanishes at r=0).
    """
    h = radial.h
    p_win = p_range if p_range is not None else radial.p_window
    r_win = radial.r_window
    branches: list[CycleBranch] = []
    visited: list[tuple[float, float]] = []

    def seen(p, r):
        return any(math.hypot(p - q[0], r - q[1]) < 0.02 for q in visited)

    p_grid = np.linspace(p_win[0], p_win[1], n_scan)
    r_grid = np.linspace(max(r_win[0], 1e-6), r_win[1], n_scan)
    for p in p_grid[:: max(1, n_scan // 28)]:
        vals = np.array([h(r, p) for r in r_grid])
        for i in range(len(r_grid) - 1):
            if vals[i] == 0.0 or vals[i] * vals[i + 1] >= 0.0:
                continue
            r_root = brentq(lambda r: h(r, p), r_grid[i], r_grid[i + 1], xtol=1e-13)
            if seen(p, r_root):
                continue
            pts, closed = _trace_curve(h, r_root, p, r_win, p_win)
            if len(pts) < 8:
                continue
            # march the other direction unless closed
            if not closed:
                pts_back, _ = _trace_curve(h, r_root, p, r_win, p_win, ds=-0.004)
                pts = pts_back[::-1] + pts[1:]
            for q in pts[:: max(1, len(pts) // 300)]:
                visited.append(q)
            b = _finish_radial_branch(h, pts, closed, len(branches))
            if radial.origin_branch:
                # degenerate points at r ~ 0 are origin bifurcations, already
                # reported as Hopf events on the r = 0 branch
                b.events = [e for e in b.events if e.state[0] > 1e-3]
            branches.append(b)

    if radial.origin_branch:
        branches.append(_origin_branch(h, p_win))
    return branches


def _finish_radial_branch(h, pts, closed, idx) -> CycleBranch:
    cps = []
    for p, r in pts:
        h_r, _ = _h_partials(h, r, p)
        # radial eigenvalue doubles as the nontrivial multiplier surrogate
        cps.append(CyclePoint(float(p), np.array([r, 0.0]), 2 * math.pi,
                              (1.0 + 0j, complex(math.exp(min(50, 2 * math.pi * h_r)), 0)),
                              x_max=float(r), x_min=float(-r)))
    events = []
    arr = np.array(pts)
    ps, rs = arr[:, 0], arr[:, 1]
    n = len(pts)
    rng = range(n) if closed else range(1, n - 1)
    for i in rng:
        dm = ps[i] - ps[i - 1]
        dp = ps[(i + 1) % n] - ps[i]
        if closed or (0 < i < n - 1):
            if dm * dp < 0.0:
                ev = _refine_degenerate(h, rs[i], ps[i])
                if ev and all(abs(ev.param - e.param) > 1e-7 or
                              abs(ev.state[0] - e.state[0]) > 1e-7 for e in events):
                    events.append(ev)
    # transversal double roots (transcritical/pitchfork) do not turn in p;
    # catch them via |h_r| minima along the curve
    hrs = np.array([_h_partials(h, r, p)[0] for p, r in pts])
    for i in range(1, n - 1):
        if abs(hrs[i]) < 0.05 and abs(hrs[i]) <= abs(hrs[i - 1]) and abs(hrs[i]) <= abs(hrs[i + 1]):
            ev = _refine_degenerate(h, rs[i], ps[i])
            if ev and all(abs(ev.param - e.param) > 1e-7 or
                          abs(ev.state[0] - e.state[0]) > 1e-7 for e in events):
                events.append(ev)
    return CycleBranch(cps, events, name=f"radial-{idx}", closed=closed)


def _refine_degenerate(h, r0, p0):
    def F(u):
        h_r, _ = _h_partials(h, u[0], u[1])
        return np.array([h(u[0], u[1]), h_r])

    u, ok = _newton(lambda v: F(v), lambda v: _fd_jac(F, v, h=1e-6),
                    np.array([r0, p0]), tol=1e-11)
    if not ok:
        return None
    kind, (r, p), diag = _classify_degenerate(h, u[0], u[1])
    return BifurcationEvent(kind, float(p), np.array([r, 0.0]), diag)


def _origin_branch(h, p_win) -> CycleBranch:
    """The r=0 equilibrium of the planar realization, with Hopf events."""
    eps = 1e-8

    def s(p):  # radial eigenvalue of the origin
        return h(eps, p) / eps

    ps = np.linspace(p_win[0], p_win[1], 400)
    vals = np.array([s(p) for p in ps])
    pts = [CyclePoint(float(p), np.zeros(2), 0.0,
                      (complex(v, 0.0), complex(v, 0.0)), 0.0, 0.0)
           for p, v in zip(ps, vals)]
    events = []
    for i in range(len(ps) - 1):
        if vals[i] * vals[i + 1] < 0.0:
            p_h = brentq(s, ps[i], ps[i + 1], xtol=1e-13)
            crit = _origin_hopf_criticality(h, p_h, vals[i])
            events.append(BifurcationEvent("hopf", float(p_h), np.zeros(2),
                                           {"criticality": crit, "of": "origin"}))
    return CycleBranch(pts, events, name="origin", closed=False)


def _origin_hopf_criticality(h, p_h, s_before) -> str:
    """Subcritical when the attached small-amplitude cycle coexists with the
    stable origin; supercritical when it lives on the unstable side."""
    d = 1e-3
    for side in (-1.0, 1.0):
        p = p_h + side * d
        eps = 1e-8
        s = h(eps, p) / eps
        # smallest positive root at this p
        r_prev, root = 2e-6, None
        for r in np.linspace(5e-4, 1.0, 500):
            if h(r_prev, p) * h(r, p) < 0:
                root = brentq(lambda rr: h(rr, p), r_prev, r, xtol=1e-12)
                break
            r_prev = r
        if root is None or root > 0.5:
            continue
        h_r, _ = _h_partials(h, root, p)
        if s < 0 and h_r > 0:
            return "subcritical"
        if s > 0 and h_r < 0:
            return "supercritical"
    return "undetermined"


def detect_isola(branch: CycleBranch,
                 eq_branches: Sequence[EquilibriumBranch] = ()) -> bool:
    """True iff the branch closes on itself and stays disconnected from
    every supplied equilibrium branch in (param, amplitude) space."""
    if not branch.points or not branch.closed:
        return False
    for eq in eq_branches:
        for q in eq.points:
            d = min(abs(q.param - p.param) + abs(p.x_max) for p in branch.points)
            if d < 1e-3:
                return False
    # radial branches: the origin r=0 plays the role of the equilibria
    if min(p.x_max for p in branch.points) < 1e-3:
        return False
    return True


# -- serialization ---------------------------------------------------------------


def _cplx(v) -> list:
    return [v.real, v.imag]


def branches_to_json(eq_branches: Sequence[EquilibriumBranch],
                     cycle_branches: Sequence[CycleBranch], path) -> None:
    """Bit-exact kind vocabulary; points + events arrays per branch."""
    payload = {"equilibrium_branches": [], "cycle_branches": []}
    for b in eq_branches:
        payload["equilibrium_branches"].append({
            "name": b.name,
            "points": [{"param": p.param, "state": list(map(float, p.state)),
                        "eigenvalues": [_cplx(e) for e in p.eigenvalues]}
                       for p in b.points],
            "events": [_event_json(e) for e in b.events],
        })
    for b in cycle_branches:
        payload["cycle_branches"].append({
            "name": b.name,
            "closed": bool(b.closed),
            "points": [{"param": p.param, "anchor": list(map(float, p.anchor)),
                        "period": p.period,
                        "multipliers": [_cplx(m) for m in p.multipliers],
                        "x_max": p.x_max, "x_min": p.x_min}
                       for p in b.points],
            "events": [_event_json(e) for e in b.events],
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def _event_json(e: BifurcationEvent) -> dict:
    diag = {k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
            for k, v in e.diagnostics.items()}
    return {"kind": e.kind, "param": float(e.param),
            "state": list(map(float, e.state)), "diagnostics": diag}
