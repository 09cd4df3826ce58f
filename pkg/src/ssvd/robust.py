"""Robust location/scale estimators and the Huber rho function."""
import numpy as np

from .errors import EmptyInput

# 1 / Phi^{-1}(3/4): makes the MAD consistent for the normal standard deviation.
MAD_TO_SD = 1.4826


def _values(v):
    a = np.asarray(v, dtype=np.float64).ravel()
    if a.size == 0:
        raise EmptyInput("empty input")
    return a


def median(v):
    """Sample median; even lengths average the two central order statistics."""
    return float(np.median(_values(v)))


def mad(v):
    """Median absolute deviation from the median, *unscaled*."""
    a = _values(v)
    return float(np.median(np.abs(a - np.median(a))))


def estimate_sigma(x):
    """Noise level ``1.4826 * MAD`` over every entry of ``x``."""
    return MAD_TO_SD * mad(x)


def huber_rho(x, delta):
    """Huber rho: ``x**2`` for ``|x| <= delta``, ``2*delta*|x| - delta**2`` beyond.

    Works elementwise on arrays; returns a float for scalar input.
    """
    if np.any(np.asarray(delta) < 0):
        raise ValueError("delta must be nonnegative")
    ax = np.abs(np.asarray(x, dtype=np.float64))
    out = np.where(ax <= delta, ax * ax, 2.0 * delta * ax - delta * delta)
    return float(out) if out.ndim == 0 else out


def abs_quantile(x, beta):
    """``beta``-quantile of ``|x_ij|`` with linear interpolation (type 7)."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    return float(np.quantile(np.abs(_values(x)), beta, method="linear"))
