"""Burst dissection and classification.

Trajectories are segmented into silent/active epochs from spike events;
burst periods are anchored on phase-robust markers (first spike of a burst,
or the envelope crossing for rotating models, whose spike times alias the
rotation phase).  Transitions between epochs are located by tracking the
attractor family the orbit follows: the transition value of the swept slow
variable is taken at the last sample still tracked to a *stable* family
point.  Under delayed (canard) passages this lands at the underlying
bifurcation rather than at the visually delayed take-off, which keeps the
matched pair consistent with the fast-subsystem diagram.

The classification composes the burst-initiating/terminating pair with the
slow-subsystem folded-node flags into the extended label.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import branches as br
from . import slowsub as ss
from .integrate import IntegratorConfig, integrate, spike_events
from .models import Model, build
from .system import Trajectory


class DissectError(RuntimeError):
    pass


class NoSpikesError(DissectError):
    pass


class NonPeriodicError(DissectError):
    pass


# -- segmentation ----------------------------------------------------------------


@dataclass(frozen=True)
class CycleRecord:
    silent: tuple            # (t0, t1) of the silent epoch
    active: tuple            # (t0, t1) of the primary active epoch
    spike_count: int
    subthreshold_count: int
    envelope_max: np.ndarray  # per-spike x maxima
    envelope_min: np.ndarray


@dataclass(frozen=True)
class BurstSegmentation:
    records: tuple
    markers: np.ndarray       # period-anchoring times
    spike_times: np.ndarray
    period: float
    theta_spike: float

    @property
    def n_periods(self) -> int:
        return len(self.records)


def _local_maxima(sig: np.ndarray, prominence: float, lookaround: int = 600):
    idx = np.where((sig[1:-1] > sig[:-2]) & (sig[1:-1] >= sig[2:]))[0] + 1
    out = []
    for i in idx:
        lo = sig[max(0, i - lookaround):i].min()
        hi = sig[i:i + lookaround].min()
        if sig[i] - max(lo, hi) > prominence:
            out.append(i)
    return out


def _envelope_signal(traj: Trajectory, model: Model | None):
    """The oscillation-carrying amplitude: r for polar models, |(x,y)| for
    planar rotators, None for relaxation-type models."""
    if model is None:
        return None
    if model.system.polar_radial_index is not None:
        return traj.component(model.system.polar_radial_index)
    if model.radial is not None:
        return np.hypot(traj.component(0), traj.component(1))
    return None


def _running_envelope(traj: Trajectory, window: float):
    """Trailing maximum of x over one inter-spike window; tracks the burst
    envelope for relaxation-type models where x itself dips between spikes."""
    t, x = traj.times, traj.component(0)
    out = np.empty_like(x)
    j0 = 0
    for i in range(len(t)):
        while t[i] - t[j0] > window:
            j0 += 1
        out[i] = x[j0:i + 1].max()
    return out


def _group_spikes(ups: np.ndarray, gap_factor: float):
    if len(ups) < 2:
        return [ups], np.inf
    isi = np.diff(ups)
    med = float(np.median(isi))
    cuts = np.where(isi > gap_factor * med)[0]
    groups = np.split(ups, cuts + 1)
    return groups, med


def segment_bursts(traj: Trajectory, theta_spike: float, min_periods: int = 2,
                   gap_factor: float = 3.0, prominence_tol: float = 1e-3,
                   transient_frac: float = 0.2, recurrence_tol: float = 1e-4,
                   model: Model | None = None) -> BurstSegmentation:
    """Split a bursting trajectory into per-period silent/active records.

    Spikes are the recorded up-crossings of ``theta_spike``; active epochs
    group spikes separated by less than ``gap_factor`` times the median
    inter-spike interval; subthreshold oscillations are prominent local
    maxima of the oscillation carrier inside the silent epoch.  Requires at
    least ``min_periods`` full periods detected by recurrence of the slow
    variables after discarding the leading ``transient_frac`` of the run.
    """
    ups = np.array([e.time for e in traj.events if e.kind == "spike-up"])
    if len(ups) == 0:
        raise NoSpikesError("no spikes found above the threshold")
    t0 = traj.times[0] + transient_frac * (traj.times[-1] - traj.times[0])
    ups_w = ups[ups >= t0]
    if len(ups_w) < 2:
        raise NoSpikesError("no spikes after transient discard")

    env = _envelope_signal(traj, model)
    n_fast = model.system.n_fast if model is not None else traj.dim
    groups, med_isi = _group_spikes(ups_w, gap_factor)
    groups = [g for g in groups if len(g)]
    if env is not None:
        markers = _envelope_markers(traj, env, theta_spike, t0)
    else:
        markers = np.array([g[0] for g in groups])
    if len(markers) < min_periods + 1:
        raise NonPeriodicError(
            f"only {max(len(markers) - 1, 0)} full periods detected; "
            f"need {min_periods}")

    slow = _interp_states(traj, markers)[:, n_fast:]
    # accept the trailing run of markers whose slow state recurs
    ok = np.ones(len(markers), dtype=bool)
    d = np.linalg.norm(np.diff(slow, axis=0), axis=1)
    start = len(markers) - 1
    while start > 0 and d[start - 1] < recurrence_tol:
        start -= 1
    markers = markers[start:]
    if len(markers) < min_periods + 1:
        raise NonPeriodicError(
            f"slow-state recurrence above {recurrence_tol:g}; trajectory not "
            "periodic at the requested tolerance")
    period = float(np.mean(np.diff(markers)))

    carrier = env if env is not None else traj.component(0)
    records = []
    for a, b in zip(markers[:-1], markers[1:]):
        sp = ups[(ups >= a) & (ups < b)]
        sub_groups, _ = _group_spikes(sp, gap_factor) if len(sp) else ([], 0)
        sub_groups = [g for g in sub_groups if len(g)]
        if sub_groups:
            primary = max(sub_groups, key=len)
            pad = min(2.0, 0.01 * (b - a))
            active = (float(primary[0] - pad), float(sub_groups[-1][-1] + pad))
        else:
            active = (float(a), float(a))
        silent = (active[1], float(b))
        m = (traj.times >= silent[0]) & (traj.times <= silent[1])
        sig = carrier[m]
        sub_idx = _local_maxima(sig, prominence_tol) if len(sig) > 4 else []
        if env is None:
            sub_idx = [i for i in sub_idx if sig[i] < theta_spike]
        env_max, env_min = _spike_envelopes(traj, sp)
        records.append(CycleRecord(
            silent=silent, active=active, spike_count=int(len(sp)),
            subthreshold_count=int(len(sub_idx)),
            envelope_max=env_max, envelope_min=env_min))
    if not any(r.spike_count for r in records):
        raise NoSpikesError("no spikes inside the detected periods")
    return BurstSegmentation(tuple(records), markers, ups, period, theta_spike)


def _envelope_markers(traj, env, theta, t0):
    t = traj.times
    c = np.where((env[:-1] < theta) & (env[1:] >= theta) & (t[1:] >= t0))[0]
    lam = (theta - env[c]) / (env[c + 1] - env[c])
    return t[c] + lam * (t[c + 1] - t[c])


def _interp_states(traj, times):
    out = np.empty((len(times), traj.dim))
    for j, tt in enumerate(times):
        i = np.searchsorted(traj.times, tt)
        i = min(max(i, 1), len(traj.times) - 1)
        w = (tt - traj.times[i - 1]) / (traj.times[i] - traj.times[i - 1])
        out[j] = (1 - w) * traj.states[i - 1] + w * traj.states[i]
    return out


def _spike_envelopes(traj, spikes):
    if len(spikes) < 2:
        return np.array([]), np.array([])
    xs = traj.component(0)
    mx, mn = [], []
    for a, b in zip(spikes[:-1], spikes[1:]):
        m = (traj.times >= a) & (traj.times <= b)
        if m.any():
            mx.append(xs[m].max())
            mn.append(xs[m].min())
    return np.array(mx), np.array(mn)


# -- attractor-family tracking ------------------------------------------------------


@dataclass
class Family:
    """Uniform view of a branch for trajectory tracking."""

    kind: str                 # "eq" | "cycle" | "origin"
    params: np.ndarray
    loc: np.ndarray           # representative fast state (eq) or amplitude (cycle)
    stable: np.ndarray
    events: list
    branch: object
    isola: bool = False


def _families(model: Model, eq_branches, cycle_branches) -> list:
    fams = []
    for b in eq_branches:
        fams.append(Family("eq", b.params, b.states, b.stability(), b.events, b))
    for b in cycle_branches:
        amp = np.array([p.x_max for p in b.points])
        kind = "origin" if b.name == "origin" else "cycle"
        fams.append(Family(kind, b.params, amp, b.stability(), b.events, b,
                           isola=br.detect_isola(b)))
    return fams


def _track_transition(traj, model, fams, t_lo, t_hi, sweep_index, use_envelope,
                      tube: float = 0.15, forward: bool = True):
    """Sweep value at the last sample in [t_lo, t_hi] tracked to a stable
    family point; returns (value, full state, family) or None."""
    m = (traj.times >= t_lo) & (traj.times <= t_hi)
    ts = traj.times[m]
    states = traj.states[m]
    if len(ts) < 3:
        return None
    env = _envelope_signal(traj, model)
    if env is None and use_envelope:
        ups = np.array([e.time for e in traj.events if e.kind == "spike-up"])
        window = 2.5 * float(np.median(np.diff(ups))) if len(ups) > 3 else 10.0
        env = _running_envelope(traj, window)
    env = env[m] if env is not None else None
    idx = range(len(ts)) if forward else range(len(ts) - 1, -1, -1)
    p_cov = 0.03  # a family only counts as present where its points reach
    last_good = None
    for i in idx:
        p = states[i, sweep_index]
        hit = None
        for fam in fams:
            if use_envelope and fam.kind == "eq":
                continue
            if not use_envelope and fam.kind in ("cycle", "origin") and env is None:
                continue
            dp = np.abs(fam.params - p)
            if fam.kind == "eq":
                ref = states[i, :2]
                scale = max(np.abs(fam.loc).max(), 1.0)
                d = np.linalg.norm(fam.loc - ref, axis=1) / scale
            else:
                e = env[i] if env is not None else states[i, 0]
                scale = max(np.abs(fam.loc).max(), 1.0)
                d = np.abs(fam.loc - e) / scale
            cand = np.where(dp <= p_cov)[0]
            if len(cand) == 0:
                continue
            j = cand[int(np.argmin(d[cand]))]
            if d[j] < tube and fam.stable[j]:
                hit = fam
                break
        if hit is not None:
            last_good = (float(p), states[i].copy(), hit)
            if not forward:
                return last_good
    return last_good


# -- pair identification ----------------------------------------------------------


@dataclass(frozen=True)
class TransitionInfo:
    value: float
    state: np.ndarray
    event_kind: str
    event_param: float
    distance: float
    on_isola: bool


def _subhopf_name(model, fam_event, ev) -> str:
    if ev.kind != "hopf":
        return ev.kind
    crit = ev.diagnostics.get("criticality")
    if crit is None and model.fast_family is not None:
        crit = _eq_hopf_criticality(model, ev)
        ev.diagnostics["criticality"] = crit
    return "subcritical-hopf" if crit == "subcritical" else "hopf"


def _eq_hopf_criticality(model: Model, ev) -> str:
    """Probe which side of the Hopf carries a small stable cycle."""
    fam = model.fast_family
    d = 0.02 * max(1.0, abs(ev.param))
    for side in (+1.0, -1.0):
        p = ev.param + side * d
        try:
            xy_eq = br.solve_equilibrium(fam, ev.state, p)
        except br.ContinuationError:
            continue
        J = fam.jac(xy_eq, p)
        if J[0, 0] + J[1, 1] <= 0:
            continue  # want the unstable-focus side
        sysf, lift = br._frozen_system(fam, p)
        x0 = xy_eq + np.array([1e-3, 0.0])
        tr = integrate(sysf, lift(x0), (0.0, 600.0),
                       IntegratorConfig(abs_tol=1e-10, rel_tol=1e-10))
        tail = tr.states[len(tr.states) // 2:, :2]
        amp = np.max(np.linalg.norm(tail - xy_eq, axis=1))
        return "supercritical" if amp < 0.45 else "subcritical"
    return "undetermined"


def identify_pair(traj: Trajectory, model: Model, seg: BurstSegmentation,
                  eq_branches, cycle_branches,
                  match_tol: float = 0.05) -> tuple[TransitionInfo, TransitionInfo]:
    """Locate the burst-initiating and burst-terminating fast-subsystem events.

    b1 is the branch event nearest (in the swept slow variable) to the
    silent-to-active transition, b2 nearest to the active-to-silent one;
    an error is raised when no event lies within ``match_tol``.
    """
    sweep_index = _sweep_index(model)
    fams = _families(model, eq_branches, cycle_branches)
    events = [(ev, fam) for fam in fams for ev in fam.events]
    if not events:
        raise DissectError("no branch events to match against")
    rec = seg.records[-1]
    prev_rec = seg.records[-2] if len(seg.records) > 1 else rec

    on = _track_transition(traj, model, fams, prev_rec.silent[0], rec.active[0] + 1e-9,
                           sweep_index, use_envelope=_quiescent_is_cycle(model),
                           forward=True)
    off = _track_transition(traj, model, fams, rec.active[0], rec.silent[1],
                            sweep_index, use_envelope=True, forward=True)
    if on is None:
        on = (float(_interp_states(traj, [rec.active[0]])[0][sweep_index]),
              _interp_states(traj, [rec.active[0]])[0], None)
    if off is None:
        off = (float(_interp_states(traj, [rec.active[1]])[0][sweep_index]),
              _interp_states(traj, [rec.active[1]])[0], None)

    out = []
    for val, state, fam_hit in (on, off):
        # events on the family the orbit was tracking take precedence; the
        # transition mechanism lives on that family
        pools = []
        if fam_hit is not None and fam_hit.events:
            pools.append([(ev, fam_hit) for ev in fam_hit.events])
        pools.append(events)
        chosen = None
        for pool in pools:
            dists = [abs(ev.param - val) for ev, _ in pool]
            k = int(np.argmin(dists))
            if dists[k] <= match_tol:
                chosen = (pool[k][0], pool[k][1], dists[k])
                break
        if chosen is None:
            dists = [abs(ev.param - val) for ev, _ in events]
            k = int(np.argmin(dists))
            ev = events[k][0]
            raise DissectError(
                f"no fast-subsystem event within {match_tol} of the transition "
                f"at {model.fast_family.sweep_name if model.fast_family else 'p'}"
                f"={val:.4f} (nearest: {ev.kind} at {ev.param:.4f})")
        ev, fam, dk = chosen
        out.append(TransitionInfo(val, state, _subhopf_name(model, fam, ev),
                                  float(ev.param), float(dk), fam.isola))
    return out[0], out[1]


def _quiescent_is_cycle(model: Model) -> bool:
    """Whether the silent phase rides a (small) cycle family rather than an
    equilibrium branch: true for purely radial constructions."""
    return model.fast_family is None


def _sweep_index(model: Model) -> int:
    if model.fast_family is not None:
        return model.fast_family.sweep_index
    if model.radial is not None:
        return model.radial.sweep_index
    raise DissectError(f"{model.name}: no swept slow variable declared")


# -- folded-node involvement ---------------------------------------------------------


def folded_node_involvement(model: Model, traj: Trajectory, seg: BurstSegmentation,
                            singularities=None,
                            funnel_radius: float = 0.1,
                            env_prominence: float = 1e-4) -> tuple[bool, bool]:
    """(silent, cyclic) folded-node flags.

    silent: a classical folded node exists, the silent-phase orbit passes
    within ``funnel_radius`` of it in the (x, beta) chart, and at least two
    subthreshold oscillations are counted.  cyclic: the radial analogue, with
    envelope oscillations near the radial node (the burst-envelope signature).
    """
    if model.slow is None:
        return (False, False)
    if singularities is None:
        singularities = ss.find_folded_singularities(model)
    nodes = [s for s in singularities if s.kind == "node"]
    if not nodes:
        return (False, False)
    fn = nodes[0]
    beta_index = model.system.dim - 1
    rec = seg.records[-1]
    m = (traj.times >= rec.silent[0]) & (traj.times <= rec.silent[1])
    if model.slow.kind == "classical":
        xs = traj.component(0)[m]
        bs = traj.component(beta_index)[m]
        dmin = float(np.min(np.hypot(xs - fn.x, bs - fn.beta))) if m.any() else math.inf
        silent = dmin < funnel_radius and rec.subthreshold_count >= 2
        return (bool(silent), False)
    # radial: envelope oscillations near the radial node, in either phase
    r = traj.component(model.system.polar_radial_index)
    b = traj.component(beta_index)
    lo = np.searchsorted(traj.times, seg.markers[-2])
    hi = np.searchsorted(traj.times, seg.markers[-1])
    rr, bb = r[lo:hi], b[lo:hi]
    dmin = float(np.min(np.hypot(rr - fn.x, bb - fn.beta))) if hi > lo else math.inf
    peaks = _local_maxima(rr, env_prominence, lookaround=2500)
    n_near = sum(1 for i in peaks if abs(rr[i] - fn.x) < 0.4)
    cyclic = dmin < funnel_radius and n_near >= 2
    return (False, bool(cyclic))


# -- classification --------------------------------------------------------------


@dataclass(frozen=True)
class BurstClassification:
    model_id: str
    b1_kind: str
    b2_kind: str
    silent_folded_node: bool
    active_cyclic_folded_node: bool
    label: str
    diagnostics: dict = field(default_factory=dict)


def compose_label(b1_kind: str, b2_kind: str, silent: bool, cyclic: bool,
                  isola: bool) -> str:
    head = "folded-node" if silent else b1_kind
    label = f"{head}/{b2_kind}"
    if cyclic:
        label += " (cyclic folded-node)"
    if isola:
        label += " (isola)"
    return label


DISPLAY_NAMES = {
    "fold": "Fold",
    "hopf": "Hopf",
    "subcritical-hopf": "SubHopf",
    "homoclinic-approach": "Homoclinic",
    "snic": "SNIC",
    "fold-of-cycles": "Fold of cycles",
    "transcritical-of-cycles": "Transcritical of cycles",
    "pitchfork-of-cycles": "Pitchfork of cycles",
    "period-doubling": "Period doubling",
    "transcritical-of-equilibria": "Transcritical of equilibria",
    "folded-node": "Folded-node",
}


def display_label(label: str) -> str:
    core, _, suffix = label.partition(" (")
    a, _, b = core.partition("/")
    out = f"{DISPLAY_NAMES.get(a, a)}/{DISPLAY_NAMES.get(b, b)}"
    if suffix:
        out += " (" + suffix
    return out


def simulate_preset(model: Model, t_end: float | None = None,
                    tol: float | None = None) -> Trajectory:
    """Integrate the preset trajectory with spike events and the preset's
    simulation overrides applied."""
    h = model.preset.hints
    params = model.params.updated(dict(h.sim_overrides)) if h.sim_overrides else model.params
    sysm = model.system.with_params(params)
    if h.polar:
        evs = spike_events(0, h.theta_spike, polar=(0, 1))
    else:
        evs = spike_events(h.spike_index, h.theta_spike)
    cfg = IntegratorConfig(max_step=h.max_step) if tol is None else \
        IntegratorConfig(abs_tol=tol, rel_tol=tol, max_step=h.max_step)
    span = (0.0, float(t_end) if t_end is not None else model.preset.t_span[1])
    return integrate(sysm, model.preset.x0, span, cfg, evs)


def build_branches(model: Model, sweep_range=None):
    """Equilibrium and cycle branches covering the preset's slow sweep."""
    h = model.preset.hints
    eqs, cycles = [], []
    if model.radial is not None and model.fast_family is None:
        # trace over the model's full window: truncating a closed branch to
        # the visited range would destroy its isola signature
        cycles = br.polar_cycle_branches(model.radial)
        return eqs, cycles
    fam = model.fast_family
    rng = h.eq_p_range or sweep_range
    for i, (xy, p) in enumerate(h.eq_seeds):
        eqs.append(br.continue_equilibria(fam, rng, xy, seed_p=p, name=f"eq-{i}"))
    if len(eqs) == 2:
        br.transcritical_events(eqs[0], eqs[1])
    if h.cycle_probe_p is not None:
        cb = br.continue_cycles(fam, rng, h.cycle_probe_x0, h.cycle_probe_p,
                                direction=-1.0,
                                saddle_branch=eqs[0] if eqs else None)
        if eqs:
            br.merge_snic(cb, eqs[0])
        # a branch ending in amplitude collapse dies at an equilibrium Hopf:
        # that event terminates the cycle family, so register it there too
        if cb.points and (cb.points[-1].x_max - cb.points[-1].x_min) < 1e-3:
            p_end = cb.points[-1].param
            for eq in eqs:
                for ev in eq.events:
                    if ev.kind == "hopf" and abs(ev.param - p_end) < 0.1:
                        cb.events.append(ev)
        cycles.append(cb)
    return eqs, cycles


def classify(model_or_id, traj: Trajectory | None = None) -> BurstClassification:
    """Run the full pipeline and emit the extended classification."""
    model = build(model_or_id) if isinstance(model_or_id, str) else model_or_id
    h = model.preset.hints
    seg = None
    if traj is not None:
        seg = segment_bursts(
            traj, h.theta_spike, min_periods=h.min_periods, gap_factor=h.gap_factor,
            prominence_tol=h.prominence_tol, transient_frac=h.transient_frac,
            recurrence_tol=h.slow_recurrence_tol, model=model)
    else:
        # slow transverse Floquet directions can keep the orbit above the
        # recurrence tolerance for many periods: extend the run as needed
        t_end = model.preset.t_span[1]
        last_err = None
        for attempt in range(4):
            traj = simulate_preset(model, t_end=t_end)
            try:
                seg = segment_bursts(
                    traj, h.theta_spike, min_periods=h.min_periods,
                    gap_factor=h.gap_factor, prominence_tol=h.prominence_tol,
                    transient_frac=h.transient_frac,
                    recurrence_tol=h.slow_recurrence_tol, model=model)
                break
            except NonPeriodicError as err:
                last_err = err
                t_end *= 2.0
        if seg is None:
            raise last_err
    sweep_index = _sweep_index(model)
    swept = traj.states[:, sweep_index]
    pad = 0.1 * max(np.ptp(swept), 0.1)
    sweep_range = (float(swept.min() - pad), float(swept.max() + pad))
    eqs, cycles = build_branches(model, sweep_range)
    b1, b2 = identify_pair(traj, model, seg, eqs, cycles, match_tol=h.match_tol)
    sings = ss.find_folded_singularities(model) if model.slow is not None else []
    silent, cyclic = folded_node_involvement(
        model, traj, seg, sings, funnel_radius=h.funnel_radius,
        env_prominence=h.env_prominence_tol)
    isola = b1.on_isola or b2.on_isola
    label = compose_label(b1.event_kind, b2.event_kind, silent, cyclic, isola)
    rec = seg.records[-1]
    diag = {
        "period": seg.period,
        "spikes_per_burst": rec.spike_count,
        "subthreshold_count": rec.subthreshold_count,
        "b1_transition_value": b1.value,
        "b1_event_param": b1.event_param,
        "b1_distance": b1.distance,
        "b2_transition_value": b2.value,
        "b2_event_param": b2.event_param,
        "b2_distance": b2.distance,
        "transition_beta": float(b1.state[-1]) if model.slow is not None else None,
        "folded_node_beta": next((s.beta for s in sings if s.kind == "node"), None),
    }
    return BurstClassification(model.name, b1.event_kind, b2.event_kind,
                               silent, cyclic, label, diag)


def classification_to_json(c: BurstClassification, path) -> None:
    payload = {
        "model": c.model_id,
        "b1": c.b1_kind,
        "b2": c.b2_kind,
        "silent_folded_node": c.silent_folded_node,
        "cyclic_folded_node": c.active_cyclic_folded_node,
        "isola": "(isola)" in c.label,
        "label": c.label,
        "diagnostics": {k: v for k, v in c.diagnostics.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)


# -- spike adding ------------------------------------------------------------------


def spike_adding_staircase(model_id: str, beta_range, n_samples: int,
                           t_settle: float = 4000.0,
                           t_count: float = 4000.0) -> list[tuple[float, int]]:
    """Steady spike count per burst as the frozen second slow variable sweeps.

    The 4D models are frozen by zeroing the feedback coefficients (the
    second slow equation then vanishes identically), the prototype model by
    its static parameter.  Each sample warm-starts from the previous one.
    """
    out = []
    betas = np.linspace(beta_range[0], beta_range[1], int(n_samples))
    state = None
    for beta_val in betas:
        if model_id == "proto":
            m = build("proto", {"beta": float(beta_val)})
            x0 = state if state is not None else m.preset.x0
        else:
            m = build(model_id, {"mu": 0.0, "gamma_y": 0.0, "gamma_beta": 0.0})
            base = state if state is not None else m.preset.x0
            x0 = np.array(base, dtype=float)
            x0[3] = beta_val
        h = m.preset.hints
        evs = spike_events(h.spike_index, h.theta_spike)
        cfg = IntegratorConfig(max_step=h.max_step)
        tr = integrate(m.system.with_params(m.params), x0,
                       (0.0, t_settle + t_count), cfg, evs)
        state = tr.states[-1].copy()
        ups = np.array([e.time for e in tr.events
                        if e.kind == "spike-up" and e.time > t_settle])
        if len(ups) < 1:
            out.append((float(beta_val), 0))
            continue
        groups, _ = _group_spikes(ups, 4.0)
        counts = [len(g) for g in groups if len(g)]
        # drop partial first/last bursts
        counts = counts[1:-1] if len(counts) > 2 else counts
        out.append((float(beta_val), int(np.median(counts)) if counts else 0))
    return out
