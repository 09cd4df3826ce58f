"""Rank estimation by bi-cross-validation on the screened submatrix."""
from dataclasses import dataclass
import numpy as np

from .errors import FoldTooSmall
from .linalg import as_matrix
from .screening import DEFAULT_ALPHA, DEFAULT_BETA, SelectionResult, select_submatrix

DEFAULT_RMAX = 10
DEFAULT_FOLDS = (2, 2)
DEFAULT_SPLITS = 100


@dataclass(frozen=True)
class FoldScheme:
    h: int
    l: int
    n_splits: int
    rows: np.ndarray
    cols: np.ndarray


@dataclass(frozen=True)
class RankEstimate:
    r_hat: int
    bcv_errors: np.ndarray
    folds: FoldScheme
    selection: SelectionResult

    def to_dict(self):
        return {
            "r_hat": self.r_hat,
            "bcv_errors": [float(e) for e in self.bcv_errors],
            "folds": [self.folds.h, self.folds.l],
            "n_splits": self.folds.n_splits,
            "screened_rows": self.selection.rows.tolist(),
            "screened_cols": self.selection.cols.tolist(),
            "bcv_rows": self.folds.rows.tolist(),
            "bcv_cols": self.folds.cols.tolist(),
        }


def heldout_errors(a, b, c, d, r_max):
    """Squared errors of predicting block ``a`` by ``b @ pinv(d_k) @ c`` for
    ``k = 0..r_max``, where ``d_k`` is the rank-``k`` truncation of ``d``."""
    errors = np.empty(r_max + 1)
    errors[0] = np.sum(a * a)
    if r_max == 0:
        return errors
    # pinv(d_k) = V_k S_k^-1 U_k', so b pinv(d_k) c accumulates one term per k
    uu, s, vt = np.linalg.svd(d, full_matrices=False)
    left = b @ vt.T  # b V
    right = uu.T @ c  # U' c
    tol = max(d.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    pred = np.zeros_like(a)
    for k in range(1, r_max + 1):
        if s[k - 1] > tol:
            pred = pred + np.outer(left[:, k - 1] / s[k - 1], right[k - 1])
        resid = a - pred
        errors[k] = np.sum(resid * resid)
    return errors


def _split(gen, size, k):
    return [np.sort(f) for f in np.array_split(gen.permutation(size), k)]


def bcv_errors(x, r_max, folds=DEFAULT_FOLDS, seed=0, n_splits=DEFAULT_SPLITS):
    """Held-out error per candidate rank ``0..r_max``, summed over all
    ``h x l`` blocks and averaged over ``n_splits`` random fold partitions.

    Raises
    ------
    FoldTooSmall
        A fold has fewer than ``r_max + 1`` rows or columns.
    """
    x = as_matrix(x)
    h, l = folds
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    if h < 2 or l < 2:
        raise ValueError("need at least two row folds and two column folds")
    if n_splits < 1:
        raise ValueError("n_splits must be at least 1")
    n, p = x.shape
    if min(n // h, p // l) < r_max + 1:
        raise FoldTooSmall(
            f"a fold of the {n}x{p} block has {min(n // h, p // l)} rows/columns, "
            f"need at least r_max + 1 = {r_max + 1}; lower r_max"
        )
    total = np.zeros(r_max + 1)
    for s in range(n_splits):
        gen = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(s,)))
        row_folds = _split(gen, n, h)
        col_folds = _split(gen, p, l)
        for rows in row_folds:
            keep_r = np.setdiff1d(np.arange(n), rows)
            for cols in col_folds:
                keep_c = np.setdiff1d(np.arange(p), cols)
                total += heldout_errors(
                    x[np.ix_(rows, cols)],
                    x[np.ix_(rows, keep_c)],
                    x[np.ix_(keep_r, cols)],
                    x[np.ix_(keep_r, keep_c)],
                    r_max,
                )
    return total / n_splits


def _top_up(selected, stats, size):
    # Holm keeps a prefix of the statistic ranking, so extending by rank
    # preserves it
    if selected.size >= size:
        return selected
    order = np.argsort(-stats, kind="stable")
    return np.sort(order[:size])


def estimate_rank(x, r_max=DEFAULT_RMAX, beta=DEFAULT_BETA, alpha=DEFAULT_ALPHA,
                  folds=DEFAULT_FOLDS, seed=0, n_splits=DEFAULT_SPLITS):
    """Estimate the signal rank of ``x``.

    Screens rows and columns as for the sparse start, then runs
    bi-cross-validation on the block ``x[I, J]`` over candidate ranks
    ``0..r_max``; ties go to the smaller rank. When screening keeps fewer
    than ``h * (r_max + 1)`` rows (``l * (r_max + 1)`` columns), the next
    highest-scoring ones are added so every fold can carry a rank-``r_max``
    fit. If screening keeps no row or no column, nothing stands out from
    the noise and ``r_hat = 0``.
    """
    x = as_matrix(x)
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    h, l = folds
    sel = select_submatrix(x, beta, alpha)
    if sel.rows.size == 0 or sel.cols.size == 0:
        scheme = FoldScheme(h, l, n_splits, sel.rows, sel.cols)
        return RankEstimate(0, np.zeros(r_max + 1), scheme, sel)
    rows = _top_up(sel.rows, sel.row_stats, h * (r_max + 1))
    cols = _top_up(sel.cols, sel.col_stats, l * (r_max + 1))
    errors = bcv_errors(x[np.ix_(rows, cols)], r_max, folds, seed, n_splits)
    return RankEstimate(int(np.argmin(errors)), errors, FoldScheme(h, l, n_splits, rows, cols), sel)
