# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled explicit-Euler kernels.

Fields are viewed as 3-D C-contiguous arrays with leading unit axes for
lower dimensions; axes of length 1 are inert.
Box faces use homogeneous Neumann conditions by ghost-node reflection
(ghost value at index -1 equals the value at index 1).
"""
from libc.math cimport fabs

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _lap(const double[:, :, ::1] u, Py_ssize_t i, Py_ssize_t j, Py_ssize_t k,
                        const Py_ssize_t[::1] m0, const Py_ssize_t[::1] p0,
                        const Py_ssize_t[::1] m1, const Py_ssize_t[::1] p1,
                        const Py_ssize_t[::1] m2, const Py_ssize_t[::1] p2, double inv_h2) noexcept nogil:
    cdef double c2 = 2.0 * u[i, j, k]
    cdef double acc = (u[m0[i], j, k] + u[p0[i], j, k] - c2)
    acc += (u[i, m1[j], k] + u[i, p1[j], k] - c2)
    acc += (u[i, j, m2[k]] + u[i, j, p2[k]] - c2)
    return acc * inv_h2


def _neighbors(Py_ssize_t n):
    """Reflected neighbor tables; a length-1 axis points at itself and adds exactly 0."""
    idx = np.arange(n, dtype=np.intp)
    if n == 1:
        return idx.copy(), idx.copy()
    m = idx - 1
    p = idx + 1
    m[0] = 1
    p[n - 1] = n - 2
    return m, p


def laplacian(const double[:, :, ::1] u, double[:, :, ::1] out, double h):
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t[::1] m0, p0, m1, p1, m2, p2
    m0, p0 = _neighbors(n0)
    m1, p1 = _neighbors(n1)
    m2, p2 = _neighbors(n2)
    cdef double inv_h2 = 1.0 / (h * h)
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    out[i, j, k] = _lap(u, i, j, k, m0, p0, m1, p1, m2, p2, inv_h2)


def yosida_step(const double[:, :, ::1] u, double[:, :, ::1] out, double h, double dt,
                double eps, double delta):
    """One forward-Euler step of the Yosida equation; returns sum of squared velocities."""
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t[::1] m0, p0, m1, p1, m2, p2
    m0, p0 = _neighbors(n0)
    m1, p1 = _neighbors(n1)
    m2, p2 = _neighbors(n2)
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double inv_e2 = 1.0 / (eps * eps)
    cdef double a = 1.0 / (1.0 - delta)
    cdef double stiff = (1.0 - delta) / delta
    cdef double s, fp, v, sumsq = 0.0
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    s = u[i, j, k]
                    if s <= -1.0:
                        fp = stiff * (s + a)
                    elif s <= 1.0:
                        fp = -s
                    else:
                        fp = stiff * (s - a)
                    v = _lap(u, i, j, k, m0, p0, m1, p1, m2, p2, inv_h2) - fp * inv_e2
                    out[i, j, k] = s + dt * v
                    sumsq += v * v
    return sumsq


def projection_step(const double[:, :, ::1] u, double[:, :, ::1] out, double h, double dt,
                    double eps):
    """Step-then-clamp onto [-1, 1].

    Returns ``(sum of squared realized velocities, sum of |multiplier|)``.
    """
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t[::1] m0, p0, m1, p1, m2, p2
    m0, p0 = _neighbors(n0)
    m1, p1 = _neighbors(n1)
    m2, p2 = _neighbors(n2)
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double inv_e2 = 1.0 / (eps * eps)
    cdef double lam_scale = eps * eps / dt
    cdef double s, star, new, v, sumsq = 0.0, lam = 0.0
    with nogil:
        for i in range(n0):
            for j in range(n1):
                for k in range(n2):
                    s = u[i, j, k]
                    star = s + dt * (_lap(u, i, j, k, m0, p0, m1, p1, m2, p2, inv_h2) + s * inv_e2)
                    if star > 1.0:
                        new = 1.0
                    elif star < -1.0:
                        new = -1.0
                    else:
                        new = star
                    out[i, j, k] = new
                    v = (new - s) / dt
                    sumsq += v * v
                    lam += fabs(star - new) * lam_scale
    return sumsq, lam
