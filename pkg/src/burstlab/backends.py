"""Backend selection: compiled stepper core vs pure-Python fallback.

The compiled core (``burstlab._fastcore``, built from Cython) runs the same
Dormand-Prince 5(4) loop as ``burstlab.integrate`` with the model right-hand
sides inlined in C.  It is used automatically when

* the extension module imported successfully,
* the system carries a kernel id, and
* every requested event is expressible as a builtin form
  (component threshold, or x = r*cos(theta) threshold for polar models).

Set the environment variable ``BURSTLAB_BACKEND=python`` to force the
fallback (used by the benchmark and the cross-backend tests).
"""
from __future__ import annotations

import os
import time
from typing import Sequence

import numpy as np

from .integrate import (EventSpec, IntegrationError, LinearEvent,
                        MaxStepsExceededError, NonFiniteStateError,
                        PolarXEvent, StepUnderflowError)
from .system import EventRecord, SlowFastSystem, Trajectory

try:
    from . import _fastcore
    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _fastcore = None
    HAVE_COMPILED = False


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "python"


def _builtin_descriptor(ev: EventSpec):
    d = {"up": 1.0, "down": -1.0, "both": 0.0}[ev.direction]
    t = 1.0 if ev.terminal else 0.0
    f = ev.func
    if isinstance(f, LinearEvent):
        return [0.0, float(f.index), 0.0, f.value, d, t]
    if isinstance(f, PolarXEvent):
        return [1.0, float(f.r_index), float(f.theta_index), f.value, d, t]
    return None


def choose(sys: SlowFastSystem, events: Sequence[EventSpec], forced: str | None) -> str:
    env = os.environ.get("BURSTLAB_BACKEND", "").strip().lower()
    want = forced or (env if env in ("python", "compiled") else None)
    if want == "python":
        return "python"
    ok = (
        HAVE_COMPILED
        and sys.kernel_kind is not None
        and all(_builtin_descriptor(ev) is not None for ev in events)
    )
    if want == "compiled" and not ok:
        raise IntegrationError(
            "compiled backend requested but unavailable for this system/events"
        )
    return "compiled" if ok else "python"


def run_compiled(sys, y0, t0, t_end, cfg, events) -> Trajectory:
    desc = np.array([_builtin_descriptor(ev) for ev in events], dtype=float)
    desc = desc.reshape(len(events), 6) if len(events) else np.zeros((0, 6))
    status, ts, ys, ev_t, ev_idx, ev_states = _fastcore.run_dopri5(
        int(sys.kernel_kind), sys._pvec, np.asarray(y0, dtype=float),
        float(t0), float(t_end),
        cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.min_step, int(cfg.max_steps),
        desc,
    )
    if status == 1:
        raise StepUnderflowError(f"{sys.name}: step below min_step (compiled core)")
    if status == 2:
        raise MaxStepsExceededError(f"{sys.name}: exceeded {cfg.max_steps} steps (compiled core)")
    if status == 3:
        raise NonFiniteStateError(f"{sys.name}: non-finite state (compiled core)")
    recs = tuple(
        EventRecord(float(t), events[int(j)].kind, st.copy())
        for t, j, st in zip(ev_t, ev_idx, ev_states)
    )
    return Trajectory(ts, ys, recs)


def benchmark(model, t_end: float | None = None, repeats: int = 1) -> dict:
    """Time one preset integration on each available backend.

    Returns wall times and the speedup factor; used by the benchmark script
    and smoke-tested in the suite.
    """
    from .integrate import IntegratorConfig, integrate, spike_events

    hints = model.preset.hints
    span = (0.0, t_end if t_end is not None else model.preset.t_span[1] / 4.0)
    if hints.polar:
        evs = spike_events(0, hints.theta_spike, polar=(0, 1))
    else:
        evs = spike_events(hints.spike_index, hints.theta_spike)
    cfg = IntegratorConfig(max_step=hints.max_step)
    out: dict = {"model": model.name, "t_end": span[1]}
    for name in ("python", "compiled"):
        if name == "compiled" and not HAVE_COMPILED:
            continue
        best = float("inf")
        for _ in range(repeats):
            tic = time.perf_counter()
            traj = integrate(model.system, model.preset.x0, span, cfg, evs, backend=name)
            best = min(best, time.perf_counter() - tic)
        out[name] = {"seconds": best, "steps": len(traj.times), "events": len(traj.events)}
    if "python" in out and "compiled" in out:
        out["speedup"] = out["python"]["seconds"] / out["compiled"]["seconds"]
    return out
