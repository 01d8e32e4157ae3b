"""Pure-Python/numpy versions of the inner loops in ``_ccore``.

Same call signatures and semantics; selected automatically when the
compiled extension is unavailable (or when ``DIMWALL_PURE_PYTHON`` is set).
"""

import math

import numpy as np


def weighted_dot(w, f, g):
    w = np.asarray(w, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != w.shape or g.shape != w.shape:
        raise ValueError("length mismatch")
    # fsum is exactly rounded, at least as accurate as the compensated loop
    return math.fsum((w * (f * g)).tolist())


def fwht_rows(a):
    """Unnormalized Sylvester-order butterflies applied in place to each row."""
    rows, m = a.shape
    if m & (m - 1):
        raise ValueError("row length must be a power of two")
    h = 1
    while h < m:
        view = a.reshape(rows, m // (2 * h), 2, h)
        x = view[:, :, 0, :].copy()
        y = view[:, :, 1, :]
        view[:, :, 0, :] += y
        view[:, :, 1, :] = x - y
        h *= 2


def mgs(vectors, w, rel_tol):
    """Weighted modified Gram-Schmidt with one reorthogonalization pass."""
    vectors = np.asarray(vectors, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n, m = vectors.shape
    if w.shape[0] != m:
        raise ValueError("weight length mismatch")
    norms = np.sqrt(np.einsum("ij,ij,j->i", vectors, vectors, w)) if n else np.zeros(0)
    scale = float(norms.max()) if n else 0.0
    out = np.zeros((n, m), dtype=np.float64)
    if scale == 0.0:
        return out[:0], 0
    rank = 0
    for i in range(n):
        v = vectors[i].copy()
        for _ in range(2):
            for k in range(rank):
                v -= np.dot(w * out[k], v) * out[k]
        nrm = math.sqrt(np.dot(w * v, v))
        if nrm <= rel_tol * scale:
            continue
        out[rank] = v / nrm
        rank += 1
    return out[:rank], rank
