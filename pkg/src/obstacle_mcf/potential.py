"""Obstacle potentials, standing-wave profiles and the surface tension.

The Yosida-regularized obstacle potential ``F_delta`` is a three-branch
piecewise quadratic; ``F_0(s) = (1 - s**2)/2`` on ``[-1, 1]`` is its
``delta -> 0`` limit.  Everything here is vectorized over ``s`` / ``r``.

Branch points use a half-open convention: each branch owns its right
endpoint, so ``s = -1`` is evaluated on the lower branch and ``s = 1`` on
the middle one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class ObstacleParam:
    delta: float

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ValueError(f"delta must lie in (0, 1/2), got {self.delta!r}")

    @property
    def well(self) -> float:
        """Location ``1/(1 - delta)`` of the minima of ``F_delta``."""
        return 1.0 / (1.0 - self.delta)


@dataclass(frozen=True)
class ProfileParam:
    epsilon: float
    delta: Optional[float] = None

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.delta is not None:
            ObstacleParam(self.delta)


def _as_param(p) -> ObstacleParam:
    return p if isinstance(p, ObstacleParam) else ObstacleParam(float(p))


def _out(x, res):
    return float(res) if np.ndim(x) == 0 else res


def f_delta(s, p):
    """Yosida obstacle potential ``F_delta(s)``."""
    d = _as_param(p).delta
    s_arr = np.asarray(s, dtype=float)
    a = 1.0 / (1.0 - d)
    stiff = (1.0 - d) / (2.0 * d)
    res = np.where(
        s_arr <= -1.0,
        stiff * (s_arr + a) ** 2,
        np.where(s_arr <= 1.0, -0.5 * s_arr**2 + 0.5 * a, stiff * (s_arr - a) ** 2),
    )
    return _out(s, res)


def f_delta_prime(s, p):
    """Derivative of :func:`f_delta`; Lipschitz with constant ``max(1, (1-delta)/delta)``."""
    d = _as_param(p).delta
    s_arr = np.asarray(s, dtype=float)
    a = 1.0 / (1.0 - d)
    k = (1.0 - d) / d
    res = np.where(
        s_arr <= -1.0, k * (s_arr + a), np.where(s_arr <= 1.0, -s_arr, k * (s_arr - a))
    )
    return _out(s, res)


def f_zero(s):
    """Limit potential ``(1 - s**2)/2``; only meaningful on ``[-1, 1]``."""
    s_arr = np.asarray(s, dtype=float)
    return _out(s, 0.5 * (1.0 - s_arr**2))


def potential(s, delta=None):
    """``F_delta`` when ``delta`` is given, else ``F_0``."""
    return f_zero(s) if delta is None else f_delta(s, delta)


def sigma_delta_closed(p) -> float:
    d = _as_param(p).delta
    ratio = d / (1.0 - d)
    return math.sqrt(ratio) + math.asin(math.sqrt(1.0 - d)) / (1.0 - d) + ratio**1.5


def sigma_delta_quad(p) -> float:
    """``int sqrt(2 F_delta)`` over ``[-a, a]`` by adaptive Gauss-Kronrod quadrature."""
    prm = _as_param(p)
    a = prm.well
    g = lambda y: math.sqrt(max(2.0 * f_delta(y, prm), 0.0))
    total = 0.0
    for lo, hi in ((-a, -1.0), (-1.0, 1.0), (1.0, a)):
        val, _ = integrate.quad(g, lo, hi, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
        total += val
    return total


def sigma_delta(p=None, method: str = "closed") -> float:
    """Surface tension ``sigma_delta``; ``p=None`` gives the obstacle limit ``pi/2``."""
    if p is None:
        return math.pi / 2.0
    if method == "quad":
        return sigma_delta_quad(p)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    return sigma_delta_closed(p)


def profile_q(r, p):
    """Limit profile ``q^eps``: ``sin(r/eps)`` on ``|r| <= eps*pi/2``, saturated beyond."""
    eps = p.epsilon if isinstance(p, ProfileParam) else float(p)
    r_arr = np.asarray(r, dtype=float)
    half = eps * math.pi / 2.0
    res = np.where(r_arr <= -half, -1.0, np.where(r_arr <= half, np.sin(np.clip(r_arr / eps, -math.pi / 2, math.pi / 2)), 1.0))
    return _out(r, res)


def profile_q_deriv(r, p):
    eps = p.epsilon if isinstance(p, ProfileParam) else float(p)
    r_arr = np.asarray(r, dtype=float)
    half = eps * math.pi / 2.0
    res = np.where(np.abs(r_arr) <= half, np.cos(r_arr / eps) / eps, 0.0)
    return _out(r, res)


def _profile_consts(eps: float, d: float):
    k = math.sqrt((1.0 - d) / d)
    r1 = eps * math.asin(math.sqrt(1.0 - d))
    return k, r1


def profile_q_delta(r, p: ProfileParam):
    """Standing wave ``q^{eps,delta}``: sine core, exponential tails to ``+-1/(1-delta)``."""
    eps, d = p.epsilon, p.delta
    if d is None:
        return profile_q(r, p)
    k, r1 = _profile_consts(eps, d)
    a = 1.0 / (1.0 - d)
    amp = d / (1.0 - d)
    r_arr = np.asarray(r, dtype=float)
    # exponent k*(r1 - |r|)/eps is <= 0 on the tail branches; clipping keeps the
    # unused branch from overflowing inside np.where
    tail = amp * np.exp(np.minimum(k * (r1 - np.abs(r_arr)) / eps, 0.0))
    core = np.sin(np.clip(r_arr, -r1, r1) / eps) / math.sqrt(1.0 - d)
    res = np.where(r_arr <= -r1, tail - a, np.where(r_arr <= r1, core, a - tail))
    return _out(r, res)


def profile_q_delta_deriv(r, p: ProfileParam):
    """Derivative ``q_r`` of :func:`profile_q_delta` (bounded by ``2/eps``)."""
    eps, d = p.epsilon, p.delta
    if d is None:
        return profile_q_deriv(r, p)
    k, r1 = _profile_consts(eps, d)
    amp = d / (1.0 - d)
    r_arr = np.asarray(r, dtype=float)
    tail = amp * (k / eps) * np.exp(np.minimum(k * (r1 - np.abs(r_arr)) / eps, 0.0))
    core = np.cos(r_arr / eps) / (eps * math.sqrt(1.0 - d))
    res = np.where(np.abs(r_arr) <= r1, core, tail)
    # r = -r1 belongs to the lower branch; both formulas agree there
    res = np.where(r_arr == -r1, tail, res)
    return _out(r, res)


def profile_ode_residual(r, p: ProfileParam):
    """First-order equipartition residual ``eps*q_r**2/2 - F_delta(q)/eps``."""
    q = profile_q_delta(r, p)
    qr = profile_q_delta_deriv(r, p)
    return p.epsilon * np.asarray(qr) ** 2 / 2.0 - np.asarray(potential(q, p.delta)) / p.epsilon


def _antiderivative(s, delta):
    """``int_{-a}^{s} sqrt(2 F(y)) dy`` in closed form (``F = F_0`` if delta is None)."""
    s_arr = np.asarray(s, dtype=float)
    if delta is None:
        c = np.clip(s_arr, -1.0, 1.0)
        return 0.5 * (c * np.sqrt(np.maximum(1.0 - c**2, 0.0)) + np.arcsin(c)) + math.pi / 4.0
    a2 = 1.0 / (1.0 - delta)
    a = a2
    k = math.sqrt((1.0 - delta) / delta)
    c = np.clip(s_arr, -a, a)
    lower_full = k * (a - 1.0) ** 2 / 2.0

    def middle(x):
        # int sqrt(a2 - y^2) dy, antiderivative up to a constant
        return 0.5 * (x * np.sqrt(np.maximum(a2 - x**2, 0.0)) + a2 * np.arcsin(x / math.sqrt(a2)))

    mid_full = middle(1.0) - middle(-1.0)
    lo = k * (c + a) ** 2 / 2.0
    mid = lower_full + middle(np.clip(c, -1.0, 1.0)) - middle(-1.0)
    hi = lower_full + mid_full + (lower_full - k * (a - c) ** 2 / 2.0)
    return np.where(c <= -1.0, lo, np.where(c <= 1.0, mid, hi))


def phi_transform(s, p=None, method: str = "closed"):
    """Normalized level ``Phi(s) = sigma^{-1} int_{-a}^{s} sqrt(2F)`` in ``[0, 1]``.

    Inputs outside ``[-a, a]`` (``a = 1/(1-delta)``, or 1 for ``p=None``) are
    clamped to the nearest endpoint.  ``method="quad"`` integrates each value
    adaptively and is meant for scalar checks; ``"closed"`` is the vectorized
    antiderivative.
    """
    delta = None if p is None else _as_param(p).delta
    sig = sigma_delta(None if delta is None else delta)
    if method == "closed":
        return _out(s, _antiderivative(s, delta) / sig)
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    a = 1.0 if delta is None else 1.0 / (1.0 - delta)
    g = lambda y: math.sqrt(max(2.0 * potential(y, delta), 0.0))
    cuts = [-a, -1.0, 1.0, a] if delta is not None else [-1.0, 1.0]
    sig_q = sigma_delta_quad(delta) if delta is not None else math.pi / 2.0

    def one(v):
        v = min(max(v, -a), a)
        total = 0.0
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            top = min(hi, v)
            if top <= lo:
                break
            val, _ = integrate.quad(g, lo, top, epsabs=QUAD_TOL, epsrel=0.0, limit=200)
            total += val
        return total / sig_q

    s_arr = np.asarray(s, dtype=float)
    res = np.vectorize(one, otypes=[float])(s_arr)
    return _out(s, res)
