"""Dense kernels: QR orthonormalization, truncated SVD, subspace distance.

Matrices are plain 2-D float64 ``numpy.ndarray`` objects. An "orthonormal
frame" is an ``(dim, r)`` array whose columns are orthonormal.
"""
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, RankCollapse

# Relative size of a QR pivot (|R_jj| / ||m_j||) below which the column is
# treated as lying in the span of the preceding ones.
COLLAPSE_RTOL = 1e-12


class ReducedSvd(NamedTuple):
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    @property
    def rank(self):
        return self.singular_values.shape[0]

    def reconstruct(self):
        return (self.left * self.singular_values) @ self.right.T


def as_matrix(m, name="matrix"):
    """Validate and return ``m`` as a finite 2-D float64 array."""
    a = np.asarray(m, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def orthonormality_error(q):
    """Max-norm deviation of ``q.T @ q`` from the identity."""
    q = np.asarray(q, dtype=np.float64)
    return float(np.max(np.abs(q.T @ q - np.eye(q.shape[1])))) if q.size else 0.0


def qr_orthonormalize(m):
    """Thin QR factorization ``m = q @ r`` with a positive diagonal in ``r``.

    Rows of ``m`` that are identically zero are excluded from the
    factorization and come back as exact zero rows of ``q``, so row supports
    survive orthonormalization bit-for-bit.

    Parameters
    ----------
    m : array_like, shape (n, r)
        Full column rank matrix.

    Returns
    -------
    q : ndarray, shape (n, r)
    r_factor : ndarray, shape (r, r)
        Upper triangular.

    Raises
    ------
    RankCollapse
        If a column is zero or numerically dependent on the others. The
        offending column index is stored on the exception.
    """
    m = as_matrix(m)
    n, r = m.shape
    col_max = np.max(np.abs(m), axis=0)
    zero_cols = np.flatnonzero(col_max == 0.0)
    if zero_cols.size:
        raise RankCollapse(f"column {zero_cols[0]} is identically zero", column=int(zero_cols[0]))
    rows = np.flatnonzero(np.any(m != 0.0, axis=1))
    if rows.size < r:
        raise RankCollapse(
            f"only {rows.size} nonzero rows for {r} columns", column=int(rows.size)
        )
    # scaled so tiny columns do not underflow to a zero norm
    col_norms = col_max * np.linalg.norm(m / col_max, axis=0)
    # LAPACK geqrf: Householder reflections
    q_sub, r_factor = np.linalg.qr(m[rows], mode="reduced")
    signs = np.where(np.diag(r_factor) < 0, -1.0, 1.0)
    q_sub = q_sub * signs
    r_factor = r_factor * signs[:, None]
    pivots = np.diag(r_factor) / col_norms
    bad = np.flatnonzero(pivots <= COLLAPSE_RTOL)
    if bad.size:
        raise RankCollapse(
            f"column {bad[0]} is numerically in the span of the preceding columns",
            column=int(bad[0]),
        )
    if rows.size == n:
        return q_sub, r_factor
    q = np.zeros((n, r))
    q[rows] = q_sub
    return q, r_factor


def orient(left, values, right):
    """Fix signs so each right vector's largest-magnitude entry is positive."""
    left = np.array(left, dtype=np.float64)
    right = np.array(right, dtype=np.float64)
    if right.shape[1]:
        idx = np.argmax(np.abs(right), axis=0)
        flip = right[idx, np.arange(right.shape[1])] < 0
        left[:, flip] *= -1.0
        right[:, flip] *= -1.0
    return ReducedSvd(left, np.asarray(values, dtype=np.float64), right)


def reduced_svd(m, r):
    """Leading ``r`` singular triples of ``m`` (LAPACK gesdd backend).

    Singular values are returned nonincreasing; each right singular vector
    has its largest-magnitude entry positive.
    """
    m = as_matrix(m)
    r = int(r)
    if not 0 <= r <= min(m.shape):
        raise DimensionMismatch(f"rank {r} outside [0, {min(m.shape)}] for shape {m.shape}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    return orient(u[:, :r], s[:r], vt[:r].T)


def subspace_distance(a, b):
    """Squared spectral distance ``||P_a - P_b||_2^2`` between column spans.

    Equals the squared sine of the largest principal angle. Computed from
    the singular values of ``a.T @ b``; for nearly coincident spans the
    residual ``b - a (a.T b)`` is used instead because ``1 - s**2`` cancels
    catastrophically there.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]
    if a.shape != b.shape:
        raise DimensionMismatch(f"frames differ in shape: {a.shape} vs {b.shape}")
    cross = a.T @ b
    s_min = np.linalg.svd(cross, compute_uv=False).min()
    dist = 1.0 - s_min**2
    if dist < 0.5:
        resid = b - a @ cross
        dist = np.linalg.norm(resid, 2) ** 2
    return float(min(max(dist, 0.0), 1.0))
