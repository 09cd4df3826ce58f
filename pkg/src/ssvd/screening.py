"""Sparse starting frames: robust row/column screening, Holm selection,
SVD of the selected block and zero-padding back to full dimension."""
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import DegenerateScale, InsufficientSelection
from .linalg import as_matrix, reduced_svd
from .robust import MAD_TO_SD, abs_quantile, huber_rho, mad, median

DEFAULT_BETA = 0.95
DEFAULT_ALPHA = 0.05


@dataclass(frozen=True)
class AxisScreen:
    selected: np.ndarray
    stats: np.ndarray
    pvalues: np.ndarray
    delta: float


@dataclass(frozen=True)
class SelectionResult:
    """Row set ``I`` and column set ``J`` (0-based, sorted) plus diagnostics."""

    rows: np.ndarray
    cols: np.ndarray
    huber_delta: float
    row_stats: np.ndarray
    col_stats: np.ndarray


@dataclass(frozen=True)
class InitFrames:
    u0: np.ndarray
    v0: np.ndarray
    selection: SelectionResult


def holm_reject(pvalues, alpha):
    """Holm step-down procedure at family-wise error rate ``alpha``.

    Returns the sorted original indices of the rejected hypotheses. Ties
    are ordered by original index.
    """
    p = np.asarray(pvalues, dtype=np.float64).ravel()
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    if m == 0:
        return np.zeros(0, dtype=np.intp)
    order = np.argsort(p, kind="stable")
    cutoffs = alpha / (m - np.arange(m))
    passed = p[order] <= cutoffs
    n_reject = m if passed.all() else int(np.argmin(passed))
    return np.sort(order[:n_reject])


def huber_delta(x, beta):
    """Huberization cutoff: the ``beta``-quantile of ``|x_ij|``.

    When more than a ``beta`` fraction of the entries is exactly zero the
    quantile is 0 and rho would vanish identically; the cutoff is then raised
    to ``max |x_ij|`` so rho reduces to plain squares.
    """
    delta = abs_quantile(x, beta)
    if delta == 0.0:
        delta = float(np.max(np.abs(x)))
    return delta


def screen_axis(x, beta=DEFAULT_BETA, alpha=DEFAULT_ALPHA, delta=None):
    """Select rows of ``x`` carrying more energy than a typical row.

    Row statistics are sums of Huberized squares, turned into robust
    z-scores with the median and ``1.4826 * MAD`` across rows, and tested
    one-sided against the normal with Holm's correction. Pass ``x.T`` to
    screen columns.

    If the robust scale is zero but the statistics are not all equal (a
    majority of rows share the median, e.g. exactly sparse noiseless data),
    rows above the median get p-value 0 and the rest p-value 1.

    Raises
    ------
    DegenerateScale
        All row statistics are equal, so no row stands out.
    """
    x = as_matrix(x)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if delta is None:
        delta = huber_delta(x, beta)
    t = huber_rho(x, delta).sum(axis=1)
    mu = median(t)
    s = MAD_TO_SD * mad(t)
    if s > 0:
        pvalues = norm.sf((t - mu) / s)
    elif np.all(t == t[0]):
        raise DegenerateScale("all screening statistics are equal", stats=t)
    else:
        pvalues = np.where(t > mu, 0.0, 1.0)
    return AxisScreen(holm_reject(pvalues, alpha), t, pvalues, float(delta))


def select_submatrix(x, beta=DEFAULT_BETA, alpha=DEFAULT_ALPHA):
    """Screen rows and columns with one global Huber cutoff."""
    x = as_matrix(x)
    delta = huber_delta(x, beta)
    row = screen_axis(x, beta, alpha, delta)
    col = screen_axis(x.T, beta, alpha, delta)
    return SelectionResult(row.selected, col.selected, delta, row.stats, col.stats)


def initialize(x, r, beta=DEFAULT_BETA, alpha=DEFAULT_ALPHA):
    """Sparse orthonormal starting frames ``(U0, V0)`` for the iteration.

    Raises
    ------
    InsufficientSelection
        Fewer than ``r`` rows or columns survive screening.
    DegenerateScale
        Propagated from :func:`screen_axis`.
    """
    x = as_matrix(x)
    if r < 1:
        raise ValueError("rank must be at least 1")
    sel = select_submatrix(x, beta, alpha)
    n_i, n_j = sel.rows.size, sel.cols.size
    if n_i < r or n_j < r:
        raise InsufficientSelection(
            f"screening kept {n_i} rows and {n_j} columns, need at least {r} of each",
            n_rows=n_i,
            n_cols=n_j,
        )
    svd = reduced_svd(x[np.ix_(sel.rows, sel.cols)], r)
    u0 = np.zeros((x.shape[0], r))
    v0 = np.zeros((x.shape[1], r))
    u0[sel.rows] = svd.left
    v0[sel.cols] = svd.right
    return InitFrames(u0, v0, sel)
