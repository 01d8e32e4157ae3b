# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. ``_pycore`` holds the reference implementations."""

import numpy as np

from libc.math cimport fabs, sqrt


cdef inline double _wdot(const double[::1] w, const double[::1] f,
                         const double[::1] g, Py_ssize_t m) noexcept nogil:
    # Neumaier-compensated sum of w*(f*g); f*g first keeps the result symmetric
    cdef double s = 0.0, c = 0.0, t, x
    cdef Py_ssize_t i
    for i in range(m):
        x = w[i] * (f[i] * g[i])
        t = s + x
        if fabs(s) >= fabs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


cdef inline double _wdot_fast(const double[::1] w, const double[::1] f,
                              const double[::1] g, Py_ssize_t m) noexcept nogil:
    # plain sum, four accumulators; used inside Gram-Schmidt only
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t i = 0
    while i + 4 <= m:
        s0 += w[i] * (f[i] * g[i])
        s1 += w[i + 1] * (f[i + 1] * g[i + 1])
        s2 += w[i + 2] * (f[i + 2] * g[i + 2])
        s3 += w[i + 3] * (f[i + 3] * g[i + 3])
        i += 4
    while i < m:
        s0 += w[i] * (f[i] * g[i])
        i += 1
    return (s0 + s1) + (s2 + s3)


def weighted_dot(const double[::1] w, const double[::1] f, const double[::1] g):
    if f.shape[0] != w.shape[0] or g.shape[0] != w.shape[0]:
        raise ValueError("length mismatch")
    return _wdot(w, f, g, w.shape[0])


def fwht_rows(double[:, ::1] a):
    """Unnormalized Sylvester-order butterflies applied in place to each row."""
    cdef Py_ssize_t rows = a.shape[0], m = a.shape[1]
    cdef Py_ssize_t r, h, i, j
    cdef double x, y
    if m & (m - 1):
        raise ValueError("row length must be a power of two")
    with nogil:
        for r in range(rows):
            h = 1
            while h < m:
                i = 0
                while i < m:
                    for j in range(i, i + h):
                        x = a[r, j]
                        y = a[r, j + h]
                        a[r, j] = x + y
                        a[r, j + h] = x - y
                    i += 2 * h
                h *= 2


def mgs(const double[:, ::1] vectors, const double[::1] w, double rel_tol):
    """Weighted modified Gram-Schmidt with one reorthogonalization pass.

    Returns ``(basis, rank)``; only the first ``rank`` rows of ``basis``
    are meaningful.
    """
    cdef Py_ssize_t n = vectors.shape[0], m = vectors.shape[1]
    cdef Py_ssize_t i, k, j, p, rank = 0
    cdef double c, nrm, scale = 0.0
    if w.shape[0] != m:
        raise ValueError("weight length mismatch")
    out = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] q = out
    cdef double[::1] v = np.empty(m, dtype=np.float64)
    with nogil:
        for i in range(n):
            nrm = sqrt(_wdot(w, vectors[i], vectors[i], m))
            if nrm > scale:
                scale = nrm
    if scale == 0.0:
        return out[:0], 0
    with nogil:
        for i in range(n):
            for j in range(m):
                v[j] = vectors[i, j]
            for p in range(2):
                for k in range(rank):
                    c = _wdot_fast(w, q[k], v, m)
                    for j in range(m):
                        v[j] -= c * q[k, j]
            nrm = sqrt(_wdot_fast(w, v, v, m))
            if nrm <= rel_tol * scale:
                continue
            for j in range(m):
                q[rank, j] = v[j] / nrm
            rank += 1
    return out[:rank], rank
