"""Dense symmetric eigendecomposition via cyclic Jacobi, plus polar snapping.

The matrices here are small (experiments use d <= 10), so a cyclic Jacobi
sweep with an off-diagonal tolerance of ``1e-12 * ||A||_F`` is both simple
and plenty accurate.  Covariance projection and the covariance covers are
built on these routines.
"""

import numpy as np

from .errors import InvalidArgumentError, NumericError

_OFFDIAG_TOL_FACTOR = 1e-12


def is_symmetric(a, rtol=1e-8):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + np.max(np.abs(a))
    return bool(np.max(np.abs(a - a.T)) <= rtol * scale)


def jacobi_eigh(a, max_sweeps=100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``v``, so ``a == v @ diag(w) @ v.T`` up to roundoff.
    """
    a = np.asarray(a, dtype=float)
    if not is_symmetric(a):
        raise InvalidArgumentError("jacobi_eigh requires a symmetric matrix")
    d = a.shape[0]
    if d == 1:
        return a[:1, 0].copy(), np.ones((1, 1))
    m = 0.5 * (a + a.T)
    v = np.eye(d)
    tol = _OFFDIAG_TOL_FACTOR * np.linalg.norm(m, "fro")
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(m, -1) ** 2) * 2.0)
        if off <= tol:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = m[p, q]
                if abs(apq) <= tol / (d * d + 1.0):
                    continue
                # classic two-sided rotation eliminating m[p, q]
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(d)
                rot[p, p] = c
                rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
                m = 0.5 * (m + m.T)
                v = v @ rot
    else:
        raise NumericError("jacobi_eigh did not converge")
    w = np.diag(m).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def polar_orthogonal(g):
    """Nearest orthogonal factor of ``g`` (polar decomposition ``g = u h``).

    Uses ``u = g (g^T g)^{-1/2}`` with the symmetric square root from
    :func:`jacobi_eigh`.  Returns None when ``g`` is numerically singular.
    """
    g = np.asarray(g, dtype=float)
    if g.shape == (1, 1):
        if g[0, 0] == 0.0:
            return None
        return np.array([[np.sign(g[0, 0])]])
    w, v = jacobi_eigh(g.T @ g)
    if np.min(w) <= 1e-12 * max(1.0, np.max(w)):
        return None
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.T
    return g @ inv_sqrt


def spectral_norm_2x2(m):
    """Largest singular value of a 2x2 (or 1x1) matrix, closed form."""
    m = np.asarray(m, dtype=float)
    if m.shape == (1, 1):
        return abs(m[0, 0])
    fro2 = float(np.sum(m * m))
    det = float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
    return float(np.sqrt(0.5 * (fro2 + np.sqrt(disc))))
