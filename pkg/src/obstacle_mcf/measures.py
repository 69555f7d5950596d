"""Discrete energy measure, discrepancy, Huisken functional and related checks.

Integrals are ``h**n``-weighted node sums (numpy's pairwise summation, so
results are deterministic for a given array).  Gradients use centered
differences with the same ghost-node reflection as the solver, which makes
the gradient vanish on box faces.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import KernelTooCloseError
from .potential import f_delta_prime, phi_transform, potential
from . import kernels

CSV_COLUMNS = (
    "t",
    "total_energy",
    "xi_sup",
    "xi_mass",
    "huisken",
    "density_ratio_max",
    "dissipation_accum",
    "lambda_mass",
)


def _padded(u, ax):
    width = [(0, 0)] * u.ndim
    width[ax] = (1, 1)
    return np.pad(u, width, mode="reflect")


def _shifted(p, ax, lo, hi):
    idx = [slice(None)] * p.ndim
    idx[ax] = slice(lo, hi)
    return p[tuple(idx)]


def gradient(u, h):
    """Centered-difference gradient, list of per-axis arrays."""
    u = np.asarray(u, dtype=float)
    out = []
    for ax, n in enumerate(u.shape):
        p = _padded(u, ax)
        out.append((_shifted(p, ax, 2, n + 2) - _shifted(p, ax, 0, n)) / (2.0 * h))
    return out


def grad_sq(u, h):
    g = gradient(u, h)
    acc = g[0] ** 2
    for gi in g[1:]:
        acc = acc + gi**2
    return acc


def energy_density(state) -> np.ndarray:
    """``eps*|grad phi|**2/2 + F(phi)/eps`` per node (``F_0`` for the projection scheme)."""
    eps = state.epsilon
    return eps * grad_sq(state.field, state.grid.h) / 2.0 + potential(state.field, state.delta) / eps


def discrepancy_density(state) -> np.ndarray:
    eps = state.epsilon
    return eps * grad_sq(state.field, state.grid.h) / 2.0 - potential(state.field, state.delta) / eps


def _weights(state, testfn):
    if testfn is None:
        return None
    if callable(testfn):
        return np.asarray(testfn(state.grid.coords()), dtype=float)
    w = np.asarray(testfn, dtype=float)
    if w.ndim == 0:
        return w
    if w.shape != state.field.shape:
        raise ValueError("test function does not conform to the grid")
    return w


def energy_measure(state, testfn=None) -> float:
    """``mu_t(testfn)``; ``testfn`` is None (meaning 1), node values, or a callable on coordinates."""
    e = energy_density(state)
    w = _weights(state, testfn)
    if w is not None:
        e = w * e
    return float(np.sum(e) * state.grid.cell_volume)


def discrepancy_measure(state):
    """Return ``(xi_sup, xi_mass, xi_field)``."""
    xi = discrepancy_density(state)
    return float(np.max(xi)), float(np.sum(np.abs(xi)) * state.grid.cell_volume), xi


@dataclass(frozen=True)
class KernelSpec:
    y: tuple
    s: float


def backward_heat_kernel(x, y, tau, n):
    """``rho_{y,s}(x,t)`` with ``tau = s - t > 0``; ``x`` has trailing axis of length n."""
    d2 = np.sum((np.asarray(x) - np.asarray(y, dtype=float)) ** 2, axis=-1)
    return np.exp(-d2 / (4.0 * tau)) / (4.0 * math.pi * tau) ** ((n - 1) / 2.0)


def huisken_functional(state, kernel: KernelSpec, dt: Optional[float] = None) -> float:
    """``sum rho_{y,s}(x,t) e(x) h**n`` over all nodes.

    Raises :class:`KernelTooCloseError` unless ``s - t >= 2*dt`` (or ``s > t``
    when no step size is given).
    """
    tau = kernel.s - state.t
    guard = 2.0 * dt if dt is not None else 0.0
    if tau < guard or tau <= 0.0:
        raise KernelTooCloseError(f"s - t = {tau:.6g} is below the guard {guard:.6g}")
    rho = backward_heat_kernel(state.grid.coords(), kernel.y, tau, state.grid.dim)
    return float(np.sum(rho * energy_density(state)) * state.grid.cell_volume)


def unit_ball_volume(k: int) -> float:
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


def dyadic_radii(h: float, r_max: float, start: float = 2.0) -> List[float]:
    radii = []
    r = start * h
    while r <= r_max * (1 + 1e-12):
        radii.append(r)
        r *= 2.0
    return radii


def interface_nodes(field) -> np.ndarray:
    """Indices ``(m, dim)`` of nodes with a sign change to some axis neighbor (0 counts as +)."""
    pos = np.asarray(field) >= 0.0
    mask = np.zeros(pos.shape, dtype=bool)
    for ax in range(pos.ndim):
        a = _shifted(pos, ax, 0, -1)
        b = _shifted(pos, ax, 1, None)
        flip = a != b
        lo = [slice(None)] * pos.ndim
        hi = [slice(None)] * pos.ndim
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        mask[tuple(lo)] |= flip
        mask[tuple(hi)] |= flip
    return np.argwhere(mask)


def default_centers(field, max_centers: int = 64) -> np.ndarray:
    idx = interface_nodes(field)
    if len(idx) > max_centers:
        step = int(math.ceil(len(idx) / max_centers))
        idx = idx[::step]
    return idx


def _ball_offsets(radius, h, dim):
    m = int(math.floor(radius / h))
    rng = np.arange(-m, m + 1)
    grids = np.meshgrid(*([rng] * dim), indexing="ij")
    off = np.stack([g.ravel() for g in grids], axis=-1)
    keep = np.sum((off * h) ** 2, axis=-1) < radius * radius
    return off[keep]


def _ball_sums(density, centers, radius, h):
    dim = density.ndim
    m = int(math.floor(radius / h))
    padded = np.pad(density, m, mode="constant")
    off = _ball_offsets(radius, h, dim)
    shape = np.array(padded.shape)
    flat = padded.ravel()
    strides = np.cumprod(shape[::-1])[::-1]
    strides = np.append(strides[1:], 1)
    base = (np.asarray(centers) + m) @ strides
    rel = off @ strides
    return flat[base[:, None] + rel[None, :]].sum(axis=1)


def density_ratio_scan(state, centers=None, radii: Optional[Sequence[float]] = None) -> float:
    """Max over centers and radii of ``mu(B_R(x)) / (omega_{n-1} R**(n-1))``.

    Balls hold nodes whose centers lie strictly inside; mass outside the box
    is zero.  Default centers are (at most 64) interface nodes, default radii
    are ``2h, 4h, ...`` up to a quarter of the shortest box side.
    """
    grid = state.grid
    if centers is None:
        centers = default_centers(state.field)
    centers = np.asarray(centers, dtype=np.intp).reshape(-1, grid.dim)
    if radii is None:
        radii = dyadic_radii(grid.h, min(grid.extent) / 4.0)
    if len(centers) == 0:
        return 0.0
    e = energy_density(state) * grid.cell_volume
    norm = unit_ball_volume(grid.dim - 1)
    best = 0.0
    for r in radii:
        if r < 2.0 * grid.h * (1 - 1e-12):
            raise ValueError(f"radius {r} is below 2h")
        sums = _ball_sums(e, centers, r, grid.h)
        best = max(best, float(np.max(sums)) / (norm * r ** (grid.dim - 1)))
    return best


def dissipation_check(records) -> float:
    """``|mu_T + accumulated dissipation - mu_0| / mu_0`` from first and last records."""
    first, last = records[0], records[-1]
    mu0 = first.total_energy
    gap = abs(last.total_energy + (last.dissipation_accum - first.dissipation_accum) - mu0)
    if mu0 == 0.0:
        return gap
    return gap / mu0


class BumpTestFunction:
    """``psi(x) = (1 - |x-c|**2/R**2)**3`` inside ``B_R(c)``, zero outside (C^2)."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def __call__(self, x):
        q = np.sum((np.asarray(x) - self.center) ** 2, axis=-1) / self.radius**2
        return np.where(q < 1.0, (1.0 - np.minimum(q, 1.0)) ** 3, 0.0)

    def support(self, x):
        q = np.sum((np.asarray(x) - self.center) ** 2, axis=-1) / self.radius**2
        return q < 1.0

    @property
    def hessian_sup(self) -> float:
        # spectral norm; the tangential eigenvalue -6(1-q)^2/R^2 peaks at q = 0
        return 6.0 / self.radius**2


class ConstantTestFunction:
    def __init__(self, value=1.0):
        self.value = float(value)

    def __call__(self, x):
        return np.full(np.shape(x)[:-1], self.value)

    def support(self, x):
        return np.ones(np.shape(x)[:-1], dtype=bool)

    hessian_sup = 0.0


def velocity(state, dt: Optional[float] = None) -> np.ndarray:
    """Time derivative of the field implied by the scheme.

    Yosida: ``lap phi - F'_delta(phi)/eps**2``.  Projection: the realized
    velocity of one clamped step of size ``dt``, or its ``dt -> 0`` limit
    (zero where the phase sits on the obstacle and is pushed outward).
    """
    eps = state.epsilon
    lap = kernels.laplacian(state.field, state.grid.h)
    if state.delta is not None:
        return lap - f_delta_prime(state.field, state.delta) / eps**2
    r = lap + state.field / eps**2
    if dt is not None:
        return (np.clip(state.field + dt * r, -1.0, 1.0) - state.field) / dt
    blocked = ((state.field >= 1.0) & (r > 0.0)) | ((state.field <= -1.0) & (r < 0.0))
    return np.where(blocked, 0.0, r)


def brakke_functional(state, testfn, dt: Optional[float] = None) -> float:
    """``int -eps psi v**2 + eps (grad psi . grad phi) v`` with ``v = -phi_t``."""
    eps = state.epsilon
    h = state.grid.h
    psi = _weights(state, testfn)
    psi = np.broadcast_to(psi, state.field.shape) if np.ndim(psi) == 0 else psi
    v = -velocity(state, dt)
    gphi = gradient(state.field, h)
    gpsi = gradient(psi, h)
    dot = sum(a * b for a, b in zip(gpsi, gphi))
    integrand = -eps * psi * v * v + eps * dot * v
    return float(np.sum(integrand) * state.grid.cell_volume)


def localized_monotonicity_check(states, testfn) -> dict:
    """Worst increase of ``mu_t(psi) - c5*t`` over sample pairs ``t1 < t2``.

    ``c5 = sup|hess psi| * max_t mu_t(spt psi)``.  Returns a dict with the
    violation, ``c5`` and the sampled values.
    """
    ts = np.array([s.t for s in states])
    mu = np.array([energy_measure(s, testfn) for s in states])
    if isinstance(testfn, (BumpTestFunction, ConstantTestFunction)):
        spt = [testfn.support(s.grid.coords()).astype(float) for s in states]
        mu_spt = np.array([energy_measure(s, w) for s, w in zip(states, spt)])
        hess = testfn.hessian_sup
    else:
        raise TypeError("test function must expose support() and hessian_sup")
    c5 = hess * float(np.max(mu_spt)) if len(mu_spt) else 0.0
    g = mu - c5 * ts
    # max over t1 < t2 of g(t2) - g(t1): running minimum scan
    worst = -math.inf
    running_min = math.inf
    for val in g:
        if running_min < math.inf:
            worst = max(worst, val - running_min)
        running_min = min(running_min, val)
    if worst == -math.inf:
        worst = 0.0
    return {"violation": float(worst), "c5": c5, "t": ts, "mu": mu, "mu_support": mu_spt}


def xi_vanishing_study(runs) -> List[tuple]:
    """``[(eps, max_t xi_mass)]`` sorted by decreasing ``eps``.

    ``runs`` maps eps to a sequence of diagnostics records restricted to the
    common time window.
    """
    table = []
    for eps, records in runs.items():
        table.append((float(eps), max(r.xi_mass for r in records)))
    table.sort(key=lambda row: -row[0])
    return table


def bv_holder_check(states) -> dict:
    """BV norm of ``w = Phi(phi)`` and the L1 Holder-1/2 ratio over snapshot pairs."""
    if not states:
        raise ValueError("no snapshots")
    grid = states[0].grid
    vol = grid.cell_volume
    ws = [np.asarray(phi_transform(s.field, s.delta)) for s in states]
    bv = []
    for w in ws:
        g = gradient(w, grid.h)
        bv.append(float(np.sum(np.sqrt(sum(gi**2 for gi in g))) * vol))
    ratios = []
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            dt = states[j].t - states[i].t
            if dt <= 0:
                continue
            l1 = float(np.sum(np.abs(ws[j] - ws[i])) * vol)
            ratios.append((states[i].t, states[j].t, l1 / math.sqrt(dt)))
    holder = max((r[2] for r in ratios), default=0.0)
    return {"bv": bv, "bv_max": max(bv), "holder_table": ratios, "holder_max": holder}


@dataclass
class DiagnosticsRecord:
    t: float
    total_energy: float
    xi_sup: float
    xi_mass: float
    huisken: float
    density_ratio_max: float
    dissipation_accum: float
    lambda_mass: float

    def row(self):
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


def diagnose(state, kernel: Optional[KernelSpec], dissipation_accum=0.0, lambda_mass=0.0,
             dt: Optional[float] = None, centers=None, radii=None) -> DiagnosticsRecord:
    xi_sup, xi_mass, _ = discrepancy_measure(state)
    huisken = huisken_functional(state, kernel, dt) if kernel is not None else 0.0
    return DiagnosticsRecord(
        t=state.t,
        total_energy=energy_measure(state),
        xi_sup=xi_sup,
        xi_mass=xi_mass,
        huisken=huisken,
        density_ratio_max=density_ratio_scan(state, centers, radii),
        dissipation_accum=float(dissipation_accum),
        lambda_mass=float(lambda_mass),
    )
