"""Backend selection for the hot stencil loops.

The compiled Cython module is used when it imports; otherwise (or when
``OBSTACLE_MCF_PURE_PYTHON=1``) the numpy fallback takes over.  Both expose
the same three functions operating on 3-D views, wrapped here so callers can
pass 1-, 2- or 3-D arrays.
"""
import os

import numpy as np

from . import _fallback

_compiled = None
if os.environ.get("OBSTACLE_MCF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"


def compiled_available() -> bool:
    return _compiled is not None


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if backend == "numpy":
        return _fallback
    raise ValueError(f"unknown backend {backend!r}")


def _as3d(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    return a.reshape((1,) * (3 - a.ndim) + a.shape)


def laplacian(u, h, backend=None):
    u3 = _as3d(u)
    out = np.empty_like(u3)
    _impl(backend).laplacian(u3, out, h)
    return out.reshape(np.shape(u))


def yosida_step(u, h, dt, eps, delta, out=None, backend=None):
    """Return ``(new_field, sum_of_squared_velocity)``."""
    u3 = _as3d(u)
    if out is None:
        out = np.empty(np.shape(u))
    s = _impl(backend).yosida_step(u3, out.reshape(u3.shape), h, dt, eps, delta)
    return out, s


def projection_step(u, h, dt, eps, out=None, backend=None):
    """Return ``(new_field, sum_of_squared_velocity, sum_of_abs_multiplier)``."""
    u3 = _as3d(u)
    if out is None:
        out = np.empty(np.shape(u))
    s, lam = _impl(backend).projection_step(u3, out.reshape(u3.shape), h, dt, eps)
    return out, s, lam
