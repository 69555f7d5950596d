"""Explicit Euler time stepping for the Yosida and projected obstacle dynamics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, List, Optional, Union

import numpy as np

from . import kernels
from .errors import BlowUpError, MarginError, StabilityError
from .grid import Grid
from .initial_data import MARGIN_WIDTHS, Shape, build_initial_field, shape_center
from .measures import DiagnosticsRecord, KernelSpec, diagnose, interface_nodes

YOSIDA = "yosida"
PROJECTION = "projection"
SCHEMES = (YOSIDA, PROJECTION)
AUTO_FRACTION = 0.9


@dataclass
class PhaseState:
    field: np.ndarray
    grid: Grid
    epsilon: float
    delta: Optional[float]
    t: float
    scheme: str

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if (self.scheme == PROJECTION) != (self.delta is None):
            raise ValueError("projection runs have no delta; yosida runs need one")
        if not self.grid.conforms(self.field):
            raise ValueError("field does not conform to grid")

    @property
    def bound(self) -> float:
        """Maximum-principle bound on ``|phi|``."""
        return 1.0 if self.delta is None else 1.0 / (1.0 - self.delta)

    def sup(self) -> float:
        return float(np.max(np.abs(self.field)))


@dataclass
class SolverConfig:
    grid: Grid
    shape: Shape
    epsilon: float
    delta: Optional[float]
    scheme: str
    dt: Union[float, str] = "auto"
    t_end: float = 0.0
    snapshot_every: int = 1
    diagnostics_every: int = 1
    output_dir: Optional[str] = None

    @property
    def time_step(self) -> float:
        if self.dt == "auto":
            return AUTO_FRACTION * stability_limit(self)
        return float(self.dt)

    @property
    def n_steps(self) -> int:
        if self.t_end <= 0.0:
            return 0
        return max(1, int(math.ceil(self.t_end / self.time_step - 1e-9)))

    def kernel(self) -> KernelSpec:
        return KernelSpec(tuple(shape_center(self.shape)), self.t_end + self.epsilon**2)


def _limit(h, dim, eps, delta):
    diffusion = h * h / (2 * dim + 2)
    if delta is None:
        return min(diffusion, eps * eps / 2.0)
    stiff = (1.0 - delta) / (delta * eps * eps)
    # the two separate bounds do not cover the case where they are comparable;
    # 1/(2n/h^2 + L) keeps the update monotone (hence the maximum principle)
    monotone = 1.0 / (2 * dim / (h * h) + stiff)
    return min(diffusion, 1.0 / stiff, monotone)


def stability_limit(config) -> float:
    """Largest admissible explicit step.

    Projection: ``min(h**2/(2n+2), eps**2/2)``.  Yosida: the diffusion CFL,
    the reaction Lipschitz bound ``1/L`` with ``L = (1-delta)/(delta eps**2)``,
    and the monotonicity bound ``1/(2n/h**2 + L)``.
    """
    return _limit(config.grid.h, config.grid.dim, config.epsilon, config.delta)


def _check_dt(state: PhaseState, dt: float):
    lim = _limit(state.grid.h, state.grid.dim, state.epsilon, state.delta)
    if not dt > 0.0:
        raise StabilityError(f"time step must be positive, got {dt}")
    if dt > lim * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.6g} exceeds the stability limit {lim:.6g}")


def laplacian_h(field, grid: Grid) -> np.ndarray:
    """Second-order Laplacian with reflected ghost nodes (homogeneous Neumann)."""
    return kernels.laplacian(field, grid.h)


def step_yosida(state: PhaseState, dt: float) -> PhaseState:
    if state.scheme != YOSIDA:
        raise ValueError("step_yosida needs a yosida state")
    _check_dt(state, dt)
    new, _ = kernels.yosida_step(state.field, state.grid.h, dt, state.epsilon, state.delta)
    return replace(state, field=new, t=state.t + dt)


def step_projection(state: PhaseState, dt: float) -> PhaseState:
    if state.scheme != PROJECTION:
        raise ValueError("step_projection needs a projection state")
    _check_dt(state, dt)
    new, _, _ = kernels.projection_step(state.field, state.grid.h, dt, state.epsilon)
    return replace(state, field=new, t=state.t + dt)


def step(state: PhaseState, dt: float) -> PhaseState:
    return step_yosida(state, dt) if state.scheme == YOSIDA else step_projection(state, dt)


def multiplier(state: PhaseState, dt: float) -> np.ndarray:
    """Lagrange multiplier ``(phi* - clamp(phi*)) * eps**2 / dt`` of one projected step."""
    eps = state.epsilon
    star = state.field + dt * (laplacian_h(state.field, state.grid) + state.field / eps**2)
    return (star - np.clip(star, -1.0, 1.0)) * eps**2 / dt


def interface_margin(state: PhaseState) -> float:
    """Distance from the box faces to the nearest node next to a sign change."""
    idx = interface_nodes(state.field)
    if len(idx) == 0:
        return math.inf
    pts = state.grid.point(idx)
    room = np.minimum(pts - state.grid.lower, state.grid.upper - pts)
    return float(np.min(room))


def check_interface_margin(state: PhaseState):
    # a crossing lies within h of a flagged node
    need = MARGIN_WIDTHS * state.epsilon - state.grid.h
    got = interface_margin(state)
    if got < need:
        raise MarginError(f"interface came within {got:.6g} of the boundary at t={state.t:.6g}")


def initial_state(config: SolverConfig) -> PhaseState:
    if config.scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {config.scheme!r}")
    delta = config.delta if config.scheme == YOSIDA else None
    phi0 = build_initial_field(config.grid, config.shape, config.epsilon, delta)
    return PhaseState(phi0, config.grid, config.epsilon, delta, 0.0, config.scheme)


@dataclass
class RunOutput:
    snapshots: List[PhaseState] = dc_field(default_factory=list)
    records: List[DiagnosticsRecord] = dc_field(default_factory=list)
    dt: float = 0.0
    n_steps: int = 0
    # (t, dissipation_accum, lambda_mass) at each snapshot
    snapshot_extras: List[tuple] = dc_field(default_factory=list)


class Simulation:
    """Double-buffered stepper that tracks the dissipation integral and multiplier mass."""

    def __init__(self, state: PhaseState, backend: Optional[str] = None):
        # own copy: the buffers are swapped and overwritten in place
        self.state = replace(state, field=state.field.copy())
        self.backend = backend
        self._buf = np.empty_like(state.field)
        self.dissipation = 0.0
        self.lambda_mass = 0.0
        self.steps = 0

    def advance(self, dt: float):
        st = self.state
        _check_dt(st, dt)
        vol = st.grid.cell_volume
        if st.scheme == YOSIDA:
            new, sumsq = kernels.yosida_step(st.field, st.grid.h, dt, st.epsilon, st.delta,
                                             out=self._buf, backend=self.backend)
            self.lambda_mass = 0.0
        else:
            new, sumsq, lam = kernels.projection_step(st.field, st.grid.h, dt, st.epsilon,
                                                      out=self._buf, backend=self.backend)
            self.lambda_mass = lam * vol
        self.dissipation += st.epsilon * vol * dt * sumsq
        self._buf = st.field
        self.steps += 1
        self.state = PhaseState(new, st.grid, st.epsilon, st.delta, st.t + dt, st.scheme)

    def snapshot(self) -> PhaseState:
        return replace(self.state, field=self.state.field.copy())


def run(config: SolverConfig, on_snapshot: Optional[Callable] = None,
        on_record: Optional[Callable] = None, keep_snapshots: bool = True,
        check_margin: bool = True, backend: Optional[str] = None) -> RunOutput:
    """Advance the configured problem to ``t_end``.

    Snapshots are taken every ``snapshot_every`` steps and at the final step;
    diagnostics likewise with ``diagnostics_every`` (0 disables either).  The
    last step is shortened so the run ends exactly at ``t_end``.
    """
    dt = config.time_step
    state0 = initial_state(config)
    _check_dt(state0, dt)
    n = config.n_steps
    sim = Simulation(state0, backend=backend)
    kernel = config.kernel()
    out = RunOutput(dt=dt, n_steps=n)
    blow = 2.0 * state0.bound

    def emit(k):
        st = sim.state
        last = k == n
        if config.diagnostics_every and (k % config.diagnostics_every == 0 or last):
            rec = diagnose(st, kernel, sim.dissipation, sim.lambda_mass, dt=dt)
            out.records.append(rec)
            if on_record is not None:
                on_record(rec)
        if config.snapshot_every and (k % config.snapshot_every == 0 or last):
            if st.sup() > blow:
                raise BlowUpError(f"sup|phi| = {st.sup():.6g} exceeds {blow:.6g} at t={st.t:.6g}")
            if check_margin:
                check_interface_margin(st)
            snap = sim.snapshot()
            out.snapshot_extras.append((snap.t, sim.dissipation, sim.lambda_mass))
            if keep_snapshots:
                out.snapshots.append(snap)
            if on_snapshot is not None:
                on_snapshot(snap, sim.dissipation, sim.lambda_mass)

    emit(0)
    for k in range(1, n + 1):
        # t_k = min(k*dt, t_end), so the final step may be shorter
        if k < n:
            sim.advance(dt)
            sim.state.t = k * dt
        else:
            sim.advance(config.t_end - (n - 1) * dt)
            sim.state.t = config.t_end
        emit(k)
    if sim.state.sup() > blow:
        raise BlowUpError(f"sup|phi| = {sim.state.sup():.6g} exceeds {blow:.6g}")
    return out
