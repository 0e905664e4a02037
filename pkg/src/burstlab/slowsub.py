"""Slow-subsystem machinery for two-slow-variable bursters.

Everything operates on the model's :class:`~burstlab.models.SlowStructure`
chart: the critical manifold parametrized by the fast coordinate (``x``, or
the radius for polar constructions), its fold set, the reduced flow on the
(x, beta) projection, the desingularized reduced system (DRS), folded
singularities with their classification, the averaged slow flow over the
fast subsystem's cycles, and the four-segment singular-orbit assembly.

The DRS is assembled in two independent ways: the projected closed form and
a matrix route that applies the adjugate of the fast Jacobian to the
implicit-differentiation system before desingularizing.  Their agreement is
a built-in cross-check used by the tests.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .branches import ContinuationError, EquilibriumBranch, FastFamily, converge_cycle, _frozen_system
from .integrate import EventSpec, IntegratorConfig, LinearEvent, integrate
from .models import Model, SlowStructure
from .system import Trajectory

FOLD_TOL = 1e-10
DEGENERATE_TOL = 1e-8
JUNCTION_TOL = 1e-6


class SlowSubsystemError(RuntimeError):
    pass


class FoldSetEvaluationError(SlowSubsystemError):
    """Reduced flow evaluated on the fold set (denominator below 1e-12)."""


# -- critical manifold ----------------------------------------------------------


@dataclass(frozen=True)
class CriticalManifold:
    """Chart of the critical manifold with its fold set.

    ``kind`` is "graph-over-x" when the second constraint is y = g(x),
    "graph-over-(x,z)" when it is a level set solved as y = g(x, z), and
    "radial" for polar envelope constructions.
    """

    kind: str
    slow: SlowStructure
    fold_points: tuple[float, ...]    # x locations of the fold set

    def y_of(self, x: float) -> float:
        return self.slow.g_on(x)

    def z_of(self, x: float) -> float:
        return self.slow.z_of(x)

    def fold_states(self) -> list[tuple[float, float, float]]:
        return [(xf, self.y_of(xf), self.z_of(xf)) for xf in self.fold_points]


def fold_function(slow: SlowStructure):
    """D(x) = f'(x) - g_x(x, z(x)); its zeros on the chart are the fold set."""
    return lambda x: slow.df(x) - slow.gx_on(x)


def critical_manifold(model: Model, n_scan: int = 2000) -> CriticalManifold:
    slow = model.slow
    if slow is None:
        raise SlowSubsystemError(f"{model.name}: no slow-subsystem structure")
    D = fold_function(slow)
    lo, hi = slow.x_window
    xs = np.linspace(lo, hi, n_scan)
    vals = np.array([D(x) for x in xs])
    folds = []
    for i in range(n_scan - 1):
        if vals[i] == 0.0:
            folds.append(xs[i])
        elif vals[i] * vals[i + 1] < 0.0:
            r = brentq(D, xs[i], xs[i + 1], xtol=1e-15, rtol=8.9e-16)
            if abs(D(r)) < 1e-6:  # sign changes across chart poles are not folds
                folds.append(r)
    if slow.kind == "radial":
        kind = "radial"
    elif any(abs(slow.gz_on(x)) > 1e-14 for x in xs[:: n_scan // 10]):
        kind = "graph-over-(x,z)"
    else:
        kind = "graph-over-x"
    return CriticalManifold(kind, slow, tuple(folds))


# -- reduced flows ---------------------------------------------------------------


def slow_numerator(slow: SlowStructure, x: float, beta: float) -> float:
    """The slow drive a*z + g*beta - d*x (or its one-variable original form)."""
    z = slow.z_of(x)
    if slow.slow_form == "proto":
        return slow.alpha * x + slow.gamma * beta - slow.delta * z
    return slow.alpha * z + slow.gamma * beta - slow.delta * x


def reduced_slow_flow_1d(model: Model, x: float, beta: float | None = None) -> float:
    """One-dimensional reduced flow dx/dt = a*Q(x) / (f'(x) - g'(x)).

    Not defined on the fold set: an evaluation with the denominator below
    1e-12 raises (jump point unless the numerator vanishes with it).
    """
    slow = _require_slow(model)
    b = beta if beta is not None else model.params.get("beta", 0.0)
    den = slow.df(x) - slow.gx_on(x)
    if abs(den) < 1e-12:
        raise FoldSetEvaluationError(
            f"{model.name}: reduced flow evaluated on the fold set at x={x}")
    return slow.a * slow_numerator(slow, x, b) / den


def feedback_bracket(slow: SlowStructure, x: float, beta: float) -> float:
    """mu - gamma_y*(feedback - center)^2 - gamma_beta*(beta - beta_fold)^2."""
    w = slow.feed_on(x) - slow.feed_center
    return slow.mu - slow.feed_coeff * w * w - slow.gamma_beta * (beta - slow.beta_fold) ** 2


def reduced_system_2slow(model: Model, xb) -> np.ndarray:
    """Reduced flow on the (x, beta) chart of the critical manifold."""
    slow = _require_slow(model)
    x, b = float(xb[0]), float(xb[1])
    den = slow.df(x) - slow.gx_on(x)
    if abs(den) < 1e-12:
        raise FoldSetEvaluationError(
            f"{model.name}: reduced system evaluated on the fold set at x={x}")
    dx = (slow.gz_on(x) + slow.a) * slow_numerator(slow, x, b) / den
    db = feedback_bracket(slow, x, b)
    return np.array([dx, db])


def drs(model: Model, xb) -> np.ndarray:
    """Desingularized reduced system; regular everywhere including folds.

    Time is rescaled by (f' - g_x), which reverses orientation on the
    repelling sheet and admits equilibria on the fold set (the folded
    singularities).
    """
    slow = _require_slow(model)
    x, b = float(xb[0]), float(xb[1])
    dx = (slow.gz_on(x) + slow.a) * slow_numerator(slow, x, b)
    db = (slow.df(x) - slow.gx_on(x)) * feedback_bracket(slow, x, b)
    return np.array([dx, db])


def drs_adjugate(model: Model, xb) -> np.ndarray:
    """DRS via the adjugate-matrix route, projected onto (x, beta).

    Implicit differentiation of the two manifold constraints gives
    J*(dx,dy) = (-a, g_z)*Q with J the fast Jacobian at epsilon = 0; applying
    adj(J) and rescaling time by (f' - g_x) = -det(J) desingularizes.  The
    projection must agree with :func:`drs` identically.
    """
    slow = _require_slow(model)
    x, b = float(xb[0]), float(xb[1])
    Q = slow_numerator(slow, x, b)
    J = np.array([[-slow.df(x), 1.0],
                  [-slow.gx_on(x), 1.0]])
    adj = np.array([[J[1, 1], -J[0, 1]],
                    [-J[1, 0], J[0, 0]]])
    rhs_vec = np.array([-slow.a, slow.gz_on(x)])
    xy_dot = -(adj @ rhs_vec) * Q     # rescaling factor is -det(J)
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    db = -det * feedback_bracket(slow, x, b)
    return np.array([xy_dot[0], db])


# -- canard condition -------------------------------------------------------------


def canard_point_beta(model: Model, fold_x: float | None = None) -> float:
    """The beta value placing the slow nullcline through a fold point.

    Uses the model's own slow-equation orientation: the extended form solves
    a*z_f + g*beta - d*x_f = 0, the prototype form z_f = (a*x_f + g*beta)/d.
    """
    slow = _require_slow(model)
    if slow.gamma == 0.0:
        raise SlowSubsystemError(f"{model.name}: gamma = 0 admits no canard tuning")
    xf = fold_x if fold_x is not None else slow.fold_x
    zf = slow.z_of(xf)
    if slow.slow_form == "proto":
        return (slow.delta * zf - slow.alpha * xf) / slow.gamma
    return (slow.delta * xf - slow.alpha * zf) / slow.gamma


# -- folded singularities ----------------------------------------------------------


@dataclass(frozen=True)
class FoldedSingularity:
    x: float
    z: float
    beta: float
    jacobian: np.ndarray
    eigenvalues: tuple
    kind: str                       # node | saddle | focus | saddle-node | degenerate
    eigenvalue_ratio: float | None  # weak/strong, for nodes
    diagnostics: dict = field(default_factory=dict)

    @property
    def location(self) -> tuple[float, float, float]:
        return (self.x, self.z, self.beta)


def classify_drs_jacobian(J: np.ndarray, tol: float = DEGENERATE_TOL) -> str:
    """Type from the sign pattern of trace/determinant/discriminant only."""
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if abs(det) < tol:
        return "degenerate" if abs(tr) < tol else "saddle-node"
    if det < 0.0:
        return "saddle"
    disc = tr * tr - 4.0 * det
    if disc > 0.0:
        return "node"
    return "focus"


def drs_jacobian_at_singularity(slow: SlowStructure, x: float, beta: float) -> np.ndarray:
    """Analytic DRS Jacobian evaluated at a folded equilibrium.

    At such a point the slow numerator and the fold factor both vanish, so
    the chain-rule terms they multiply drop out exactly.
    """
    gza = slow.gz_on(x) + slow.a
    dz = slow.dz_of(x)
    if slow.slow_form == "proto":
        dQ_dx = slow.alpha - slow.delta * dz
    else:
        dQ_dx = slow.alpha * dz - slow.delta
    M = feedback_bracket(slow, x, beta)
    K2 = (slow.d2f(x) - slow.dgx_on(x)) * M
    return np.array([[gza * dQ_dx, gza * slow.gamma],
                     [K2, 0.0]])


def drs_jacobian_fd(model: Model, x: float, beta: float, h: float = 1e-6) -> np.ndarray:
    J = np.empty((2, 2))
    for j, dv in enumerate(((h, 0.0), (0.0, h))):
        fp = drs(model, (x + dv[0], beta + dv[1]))
        fm = drs(model, (x - dv[0], beta - dv[1]))
        J[:, j] = (fp - fm) / (2 * h)
    return J


def find_folded_singularities(model: Model, box=None,
                              newton_tol: float = 1e-11) -> list[FoldedSingularity]:
    """Newton on {DRS_x = 0, fold condition}; classify by the stored Jacobian.

    The analytic Jacobian is cross-checked against central finite differences
    of the DRS field (h = 1e-6); the relative error is reported in the
    diagnostics.
    """
    slow = _require_slow(model)
    cm = critical_manifold(model)
    x_lo, x_hi = box if box is not None else slow.x_window
    found: list[FoldedSingularity] = []
    D = fold_function(slow)
    for xf in cm.fold_points:
        if not (x_lo <= xf <= x_hi):
            continue
        if abs(slow.gamma) < 1e-14:
            continue
        beta0 = canard_point_beta(model, xf)

        def F(u):
            return np.array([
                (slow.gz_on(u[0]) + slow.a) * slow_numerator(slow, u[0], u[1]),
                D(u[0]),
            ])

        u = np.array([xf, beta0])
        for _ in range(40):
            r = F(u)
            if np.linalg.norm(r) < newton_tol:
                break
            Jn = np.empty((2, 2))
            h = 1e-7
            for j, dv in enumerate(((h, 0.0), (0.0, h))):
                Jn[:, j] = (F(u + dv) - F(u - dv)) / (2 * h)
            try:
                u = u - np.linalg.solve(Jn, r)
            except np.linalg.LinAlgError:
                break
        if np.linalg.norm(F(u)) > 1e-8:
            continue
        x_s, b_s = float(u[0]), float(u[1])
        J = drs_jacobian_at_singularity(slow, x_s, b_s)
        J_fd = drs_jacobian_fd(model, x_s, b_s)
        rel = np.linalg.norm(J - J_fd) / max(np.linalg.norm(J), 1e-300)
        kind = classify_drs_jacobian(J)
        tr = J[0, 0] + J[1, 1]
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        eig = _eig2(J)
        ratio = None
        if kind == "node":
            lams = sorted((abs(e.real) for e in eig))
            ratio = lams[0] / lams[1] if lams[1] > 0 else None
        found.append(FoldedSingularity(
            x=x_s, z=float(slow.z_of(x_s)), beta=b_s, jacobian=J,
            eigenvalues=eig, kind=kind, eigenvalue_ratio=ratio,
            diagnostics={"jac_fd_rel_err": float(rel), "trace": float(tr),
                         "det": float(det), "drs_norm": float(np.linalg.norm(drs(model, (x_s, b_s))))},
        ))
    return found


def _eig2(J):
    tr = J[0, 0] + J[1, 1]
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    disc = tr * tr - 4 * det
    if disc >= 0:
        s = math.sqrt(disc)
        return (complex((tr + s) / 2), complex((tr - s) / 2))
    s = math.sqrt(-disc)
    return (complex(tr / 2, s / 2), complex(tr / 2, -s / 2))


def _require_slow(model: Model) -> SlowStructure:
    if model.slow is None:
        raise SlowSubsystemError(f"{model.name}: no 2D slow subsystem")
    return model.slow


# -- averaged slow flow -------------------------------------------------------------


def cycle_average(model: Model, z: float, quantity, beta: float = 0.0,
                  warm_xy=None) -> tuple[float, float]:
    """Average ``quantity(x, y)`` over one converged fast-subsystem cycle.

    Returns (average, period).  For polar models the cycle at frozen slow
    state is a rotation at the stable radial root, averaged in closed form
    over the angle by uniform quadrature.
    """
    if model.radial is not None and model.fast_family is None:
        r_star = _stable_radius(model, z)
        th = np.linspace(0.0, 2 * math.pi, 721)
        vals = np.array([quantity(r_star * math.cos(t), r_star * math.sin(t)) for t in th])
        # closed trapezoid over the full rotation
        avg = np.trapezoid(vals, th) / (2 * math.pi)
        return float(avg), 2 * math.pi
    fam = model.fast_family
    if fam is None:
        raise SlowSubsystemError(f"{model.name}: no fast family for averaging")
    xy0 = warm_xy if warm_xy is not None else model.preset.hints.cycle_probe_x0
    anchor, T, _, _, _ = converge_cycle(fam, z, xy0)
    sysf, lift = _frozen_system(fam, z)
    tr = integrate(sysf, lift(anchor), (0.0, T),
                   IntegratorConfig(abs_tol=1e-11, rel_tol=1e-11))
    vals = np.array([quantity(s[0], s[1]) for s in tr.states])
    avg = np.trapezoid(vals, tr.times) / (tr.times[-1] - tr.times[0])
    return float(avg), float(T)


def _stable_radius(model: Model, p: float) -> float:
    h = model.radial.h
    lo, hi = model.radial.r_window
    rs = np.linspace(max(lo, 1e-6), hi, 800)
    vals = np.array([h(r, p) for r in rs])
    roots = []
    for i in range(len(rs) - 1):
        if vals[i] * vals[i + 1] < 0.0:
            r = brentq(lambda rr: h(rr, p), rs[i], rs[i + 1], xtol=1e-14)
            dh = (h(r + 1e-7, p) - h(r - 1e-7, p)) / 2e-7
            if dh < 0:
                roots.append(r)
    if not roots:
        raise SlowSubsystemError(f"{model.name}: no stable radial root at p={p}")
    return max(roots)


def averaged_slow_flow(model: Model, zb, warm_xy=None) -> np.ndarray:
    """Averaged slow equations over one fast cycle at frozen (z, beta).

    d z / dt = a*z + g*beta - d*<x>  (with the model's fast feedback variable
    averaged over the cycle), d beta / dt = mu - <gamma_y (y - y_fold)^2>
    - gamma_beta (beta - beta_fold)^2.
    """
    slow = _require_slow(model)
    z, b = float(zb[0]), float(zb[1])
    if slow.kind == "radial":
        # feedback variable is the radius itself; x averages to zero
        r_star = _stable_radius(model, z)
        dz = slow.alpha * z + slow.gamma * b - slow.delta * r_star
        db = slow.mu - slow.feed_coeff * (r_star - slow.feed_center) ** 2 \
            - slow.gamma_beta * (b - slow.beta_fold) ** 2
        return np.array([dz, db])
    x_avg, T = cycle_average(model, z, lambda x, y: x, warm_xy=warm_xy)
    w_avg, _ = cycle_average(model, z,
                             lambda x, y: (y - slow.feed_center) ** 2,
                             warm_xy=warm_xy)
    dz = slow.alpha * z + slow.gamma * b - slow.delta * x_avg
    db = slow.mu - slow.feed_coeff * w_avg - slow.gamma_beta * (b - slow.beta_fold) ** 2
    return np.array([dz, db])


# -- singular orbit -----------------------------------------------------------------


@dataclass
class OrbitSegment:
    kind: str                # fast-fiber | averaged-slow-flow | slow-flow
    points: np.ndarray       # full states (x, y, z, beta), one row per point


@dataclass
class SingularOrbit:
    segments: list
    p_up: np.ndarray
    p_down: np.ndarray
    folded_node: FoldedSingularity
    junction_residuals: list
    closure_residual: float
    funnel_entered: bool


def build_singular_orbit(model: Model, burst_end_param: float,
                         junction_tol: float = JUNCTION_TOL,
                         averaged_step: float = 0.01) -> SingularOrbit:
    """Assemble the four-segment singular orbit anchored at the folded node.

    1. a fast fiber from the folded node up to the landing point on the
       fast-subsystem cycle family;
    2. an averaged-slow-flow trajectory down to the burst-ending bifurcation
       set (the supplied ``burst_end_param`` in the slow variable);
    3. a fast fiber from the dying cycle to the landing-down point on the
       attracting sheet;
    4. a reduced-flow segment (integrated as the DRS, which has the same
       orientation on the attracting sheet) from the landing-down point back
       into the folded node through the singular funnel.
    """
    slow = _require_slow(model)
    sings = find_folded_singularities(model)
    nodes = [s for s in sings if s.kind == "node"]
    if not nodes:
        raise SlowSubsystemError(f"{model.name}: no folded node")
    fn = nodes[0]
    fam = model.fast_family
    if fam is None:
        raise SlowSubsystemError(f"{model.name}: needs a fast family")

    fn_state = np.array([fn.x, slow.g_on(fn.x), fn.z, fn.beta])

    # (1) fast fiber from the node to the cycle family
    kick = 1e-3 * (1.0 if slow.dz_of(fn.x + 1e-4) is not None else 1.0)
    anchor, T, x_mx, x_mn, sec_x = converge_cycle(
        fam, fn.z, (fn.x + 0.05, slow.g_on(fn.x)), settle_time=300.0)
    sysf, lift = _frozen_system(fam, fn.z)
    ev = EventSpec("section-cross", LinearEvent(0, sec_x), "up")
    tr1 = integrate(sysf, lift((fn.x + kick, slow.g_on(fn.x))), (0.0, 2000.0),
                    IntegratorConfig(abs_tol=1e-11, rel_tol=1e-11), [ev])
    hits = [e for e in tr1.events if e.kind == "section-cross"]
    stop_t = None
    for i in range(1, len(hits)):
        if abs(hits[i].state[1] - hits[i - 1].state[1]) < 1e-8:
            stop_t = hits[i].time
            break
    if stop_t is None:
        raise SlowSubsystemError("fiber did not land on the cycle family")
    m = tr1.times <= stop_t
    seg1_pts = np.column_stack([
        tr1.states[m, 0], tr1.states[m, 1],
        np.full(m.sum(), fn.z), np.full(m.sum(), fn.beta)])
    seg1_pts = np.vstack([fn_state, seg1_pts])
    p_up = seg1_pts[-1].copy()

    # (2) averaged slow flow from (z*, beta*) to the burst-ending set
    zb = np.array([fn.z, fn.beta])
    seg2 = [np.array([p_up[0], p_up[1], zb[0], zb[1]])]
    warm = anchor
    direction = math.copysign(1.0, burst_end_param - fn.z)
    guard = 0
    while (zb[0] - burst_end_param) * direction < 0.0 and guard < 4000:
        guard += 1
        f1 = averaged_slow_flow(model, zb, warm_xy=warm)
        zb_mid = zb + 0.5 * averaged_step * f1 / max(np.linalg.norm(f1), 1e-12)
        f2 = averaged_slow_flow(model, zb_mid, warm_xy=warm)
        zb = zb + averaged_step * f2 / max(np.linalg.norm(f2), 1e-12)
        if (zb[0] - burst_end_param) * direction >= 0.0:
            zb[0] = burst_end_param
        try:
            anchor_i, _, _, _, _ = converge_cycle(fam, zb[0], warm, settle_time=250.0)
            warm = anchor_i
        except ContinuationError:
            break
        seg2.append(np.array([warm[0], warm[1], zb[0], zb[1]]))
    seg2_pts = np.array(seg2)
    beta_end = zb[1]

    # (3) fast fiber past the bifurcation down to the attracting sheet
    z_end = burst_end_param - direction * (-1e-4) * 1.0  # just past the set
    z_end = burst_end_param + direction * 1e-4
    sysf3, lift3 = _frozen_system(fam, z_end)
    tr3 = integrate(sysf3, lift3(warm), (0.0, 4000.0),
                    IntegratorConfig(abs_tol=1e-11, rel_tol=1e-11))
    end = tr3.states[-1][:2]
    from .branches import solve_equilibrium
    xy_low = solve_equilibrium(fam, end, z_end)
    if np.linalg.norm(end - xy_low) > 1e-6:
        raise SlowSubsystemError("fiber did not settle on an equilibrium")
    if fold_function(slow)(xy_low[0]) <= 0.0:
        raise SlowSubsystemError("landing-down point lies on the repelling sheet")
    seg3_pts = np.column_stack([
        tr3.states[:, 0], tr3.states[:, 1],
        np.full(len(tr3.times), burst_end_param), np.full(len(tr3.times), beta_end)])
    seg3_pts[0, :2] = warm
    p_down = np.array([xy_low[0], xy_low[1], burst_end_param, beta_end])
    seg3_pts[-1] = p_down

    # (4) reduced-flow segment back to the folded node through the funnel
    seg4_pts, funnel_ok, closure = _drs_segment(model, slow, p_down, fn, junction_tol)

    segments = [
        OrbitSegment("fast-fiber", seg1_pts),
        OrbitSegment("averaged-slow-flow", seg2_pts),
        OrbitSegment("fast-fiber", seg3_pts),
        OrbitSegment("slow-flow", seg4_pts),
    ]
    residuals = []
    for sa, sb in zip(segments[:-1], segments[1:]):
        residuals.append(float(np.linalg.norm(
            np.asarray(sa.points[-1][2:]) - np.asarray(sb.points[0][2:]))))
    if not funnel_ok:
        raise SlowSubsystemError("slow-flow return segment missed the funnel "
                                 f"(closure residual {closure:.3e})")
    return SingularOrbit(segments, p_up, p_down, fn, residuals, closure, funnel_ok)


def _drs_segment(model, slow, p_down, fn, junction_tol):
    x, b = float(p_down[0]), float(p_down[3])
    pts = [np.array([x, slow.g_on(x), slow.z_of(x), b])]
    target = np.array([fn.x, fn.beta])
    h = 5e-4
    funnel_ok = False
    for _ in range(400_000):
        v = drs(model, (x, b))
        n = np.linalg.norm(v)
        if n < 1e-16:
            break
        k1 = v / n
        vm = drs(model, (x + 0.5 * h * k1[0], b + 0.5 * h * k1[1]))
        nm = np.linalg.norm(vm)
        if nm < 1e-16:
            break
        x += h * vm[0] / nm
        b += h * vm[1] / nm
        pts.append(np.array([x, slow.g_on(x), slow.z_of(x), b]))
        d = math.hypot(x - fn.x, b - fn.beta)
        if d < 1e-7:
            funnel_ok = True
            break
        if fold_function(slow)(x) < 0.0:
            break  # crossed the fold away from the node: left the funnel
    closure = float(math.hypot(pts[-1][0] - fn.x, pts[-1][3] - fn.beta))
    if funnel_ok:
        pts.append(np.array([fn.x, slow.g_on(fn.x), fn.z, fn.beta]))
        closure = float(math.hypot(pts[-1][0] - fn.x, pts[-1][3] - fn.beta))
    return np.array(pts), funnel_ok and closure < junction_tol, closure


# -- serialization --------------------------------------------------------------


def singularities_to_json(sings, path) -> None:
    payload = []
    for s in sings:
        payload.append({
            "location": {"x": s.x, "z": s.z, "beta": s.beta},
            "jacobian": [[float(v) for v in row] for row in s.jacobian],
            "type": s.kind,
            "eigenvalues": [[e.real, e.imag] for e in s.eigenvalues],
            "eigenvalue_ratio": s.eigenvalue_ratio,
            "diagnostics": s.diagnostics,
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


def orbit_to_csv(orbit: SingularOrbit, directory, stem: str = "singular-orbit") -> list:
    """One CSV per segment: columns x,y,z,beta."""
    import os
    paths = []
    for i, seg in enumerate(orbit.segments, start=1):
        path = os.path.join(str(directory), f"{stem}-seg{i}-{seg.kind}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y,z,beta\n")
            for row in seg.points:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        paths.append(path)
    return paths
