"""Core data model for parametrized slow-fast ODE systems.

A :class:`SlowFastSystem` owns a right-hand side in the *fast* time
parametrization (slow components carry an explicit ``epsilon`` factor).
States are plain real vectors with the fast variables first, followed by
the slow ones, so subsystem extraction is index arithmetic.

The slow-time parametrization is the fast-time one divided componentwise by
``epsilon``; the two agree for every ``epsilon > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .params import ParamSet

RhsFunc = Callable[[np.ndarray, np.ndarray], np.ndarray]
# signature: rhs(state, pvec) -> derivative in fast time; pvec is the packed
# parameter vector in the system's declared order.


class DimensionError(ValueError):
    """State or frozen-slow vector has the wrong dimension."""


@dataclass(frozen=True)
class SlowFastSystem:
    """A slow-fast ODE with a declared fast/slow split.

    Parameters are bound by name at construction and compiled to a packed
    vector for the inner loop.  Instances are immutable and reentrant.

    ``epsilon == 0`` is permitted only for subsystems (``n_slow == 0``);
    simulation requires ``epsilon > 0``.
    """

    name: str
    n_fast: int
    n_slow: int
    rhs: RhsFunc
    param_names: tuple[str, ...]
    params: ParamSet
    epsilon_name: str = "eps"
    polar_radial_index: int | None = None
    kernel_kind: int | None = None
    _pvec: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_fast <= 0:
            raise ValueError("n_fast must be positive")
        if self.n_slow < 0:
            raise ValueError("n_slow must be non-negative")
        if self.n_slow > 0:
            eps = self.epsilon
            if not 0.0 < eps < 1.0:
                raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
        pvec = np.array(self.params.subset(self.param_names), dtype=float)
        object.__setattr__(self, "_pvec", pvec)

    @property
    def dim(self) -> int:
        return self.n_fast + self.n_slow

    @property
    def epsilon(self) -> float:
        return self.params[self.epsilon_name]

    def with_params(self, params: ParamSet) -> "SlowFastSystem":
        """Rebind to a new parameter set (names validated, vector repacked)."""
        return replace(self, params=params)

    def pack(self, params: ParamSet | None) -> np.ndarray:
        if params is None or params is self.params:
            return self._pvec
        return np.array(params.subset(self.param_names), dtype=float)

    def check_state(self, state: Sequence[float]) -> np.ndarray:
        s = np.asarray(state, dtype=float)
        if s.shape != (self.dim,):
            raise DimensionError(
                f"{self.name}: state must have dimension {self.dim}, got shape {s.shape}"
            )
        return s


def eval_fast_time(sys: SlowFastSystem, state, params: ParamSet | None = None) -> np.ndarray:
    """Derivative d(state)/dtau in the fast time parametrization."""
    s = sys.check_state(state)
    return np.asarray(sys.rhs(s, sys.pack(params)), dtype=float)


def eval_slow_time(sys: SlowFastSystem, state, params: ParamSet | None = None) -> np.ndarray:
    """Derivative d(state)/dt in the slow time; requires epsilon > 0."""
    p = params if params is not None else sys.params
    eps = p[sys.epsilon_name]
    if not eps > 0.0:
        raise ValueError(f"{sys.name}: slow-time evaluation needs epsilon > 0, got {eps}")
    return eval_fast_time(sys, state, params) / eps


def fast_subsystem(sys: SlowFastSystem, frozen_slow) -> SlowFastSystem:
    """Freeze the slow variables as constants and return the fast subsystem.

    This is the epsilon = 0 limit in fast time: an ``n_fast``-dimensional
    system in which the slow variables have become parameters.
    """
    frozen = np.asarray(frozen_slow, dtype=float)
    if frozen.shape != (sys.n_slow,):
        raise DimensionError(
            f"{sys.name}: frozen slow vector must have dimension {sys.n_slow}, "
            f"got shape {frozen.shape}"
        )
    if sys.n_slow == 0:
        return sys
    nf = sys.n_fast
    parent_rhs = sys.rhs
    frozen = frozen.copy()

    def rhs(state: np.ndarray, pvec: np.ndarray) -> np.ndarray:
        full = np.concatenate((state, frozen))
        return parent_rhs(full, pvec)[:nf]

    return SlowFastSystem(
        name=f"{sys.name}/fast",
        n_fast=nf,
        n_slow=0,
        rhs=rhs,
        param_names=sys.param_names,
        params=sys.params,
        epsilon_name=sys.epsilon_name,
        polar_radial_index=sys.polar_radial_index,
    )


def freeze_components(sys: SlowFastSystem, frozen: dict[int, float]) -> SlowFastSystem:
    """Clamp selected state components (derivative zeroed, value pinned).

    Used for partial freezes such as sweeping a second slow variable as a
    static parameter while the first stays dynamic.
    """
    for idx in frozen:
        if not 0 <= idx < sys.dim:
            raise DimensionError(f"{sys.name}: no state component {idx}")
    idxs = np.array(sorted(frozen), dtype=int)
    vals = np.array([frozen[i] for i in sorted(frozen)], dtype=float)
    parent_rhs = sys.rhs

    def rhs(state: np.ndarray, pvec: np.ndarray) -> np.ndarray:
        s = state.copy()
        s[idxs] = vals
        d = np.asarray(parent_rhs(s, pvec), dtype=float).copy()
        d[idxs] = 0.0
        return d

    return replace(sys, name=f"{sys.name}/frozen", rhs=rhs, kernel_kind=None)


@dataclass(frozen=True)
class EventRecord:
    """A localized trajectory event."""

    time: float
    kind: str  # "spike-up" | "spike-down" | "section-cross" | "custom"
    state: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered states with detected events.

    ``times`` is strictly increasing, ``states`` has one row per accepted
    integrator step, and every event time lies within the time span.
    """

    times: np.ndarray
    states: np.ndarray
    events: tuple[EventRecord, ...] = ()

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=float)
        if t.ndim != 1 or s.ndim != 2 or s.shape[0] != t.shape[0]:
            raise ValueError("times and states must be matching 1-D/2-D arrays")
        if t.size >= 2 and not np.all(np.diff(t) > 0.0):
            raise ValueError("trajectory times must be strictly increasing")
        lo, hi = t[0], t[-1]
        for ev in self.events:
            if not (lo - 1e-12 <= ev.time <= hi + 1e-12):
                raise ValueError(f"event at t={ev.time} outside trajectory span")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def component(self, i: int) -> np.ndarray:
        return self.states[:, i]

    def events_of_kind(self, kind: str) -> list[EventRecord]:
        return [ev for ev in self.events if ev.kind == kind]
