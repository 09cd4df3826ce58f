"""Test functions sampled on the equispaced grid ``t_i = i / N``.

The constants below are fixed once and for all; README lists them.
"""
from dataclasses import dataclass

import numpy as np

from ..errors import BadLength, UnknownName

# three bumps: (location, height, width), kernel (1 + |s|)^-4
PEAK_BUMPS = ((0.20, 5.0, 0.02), (0.50, 3.0, 0.04), (0.75, 4.0, 0.08))

# piecewise polynomial: breakpoints and per-piece coefficients in (t - left),
# highest degree first
POLY_BREAKS = (0.05, 0.21, 0.34, 0.76, 0.85)
POLY_PIECES = (
    (0.8, 0.8),
    (0.5, -0.3),
    (-1.0,),
    (0.2, -1.8, 0.2),
    (-1.4, 1.1),
    (-1.0, -0.1),
)

STEP_BREAKS = (0.15, 0.35, 0.5, 0.7, 0.9)
STEP_LEVELS = (0.2, 1.0, -0.4, 0.6, 1.4, 0.1)

SING_LOCATION = 0.37
SING_EXPONENT = 0.5


@dataclass(frozen=True)
class TestSignal:
    name: str
    values: np.ndarray

    __test__ = False  # not a pytest class

    @property
    def length(self):
        return self.values.size


def grid(length):
    return np.arange(length) / length


def _piece_index(t, breaks):
    return np.searchsorted(np.asarray(breaks), t, side="right")


def peak(t):
    return sum(h * (1.0 + np.abs((t - c) / w)) ** -4 for c, h, w in PEAK_BUMPS)


def poly(t):
    piece = _piece_index(t, POLY_BREAKS)
    left = np.concatenate([[0.0], POLY_BREAKS])[piece]
    out = np.empty_like(t)
    for k, coef in enumerate(POLY_PIECES):
        m = piece == k
        out[m] = np.polyval(coef, t[m] - left[m])
    return out


def step(t):
    return np.asarray(STEP_LEVELS)[_piece_index(t, STEP_BREAKS)]


def sing(t):
    # distance floored at one grid spacing so the pole stays finite
    dist = np.maximum(np.abs(t - SING_LOCATION), 1.0 / t.size)
    return dist ** -SING_EXPONENT


FUNCTIONS = {"peak": peak, "poly": poly, "step": step, "sing": sing}


def make_test_signal(name, length):
    """Evaluate test function ``name`` at ``length`` equispaced points."""
    if name not in FUNCTIONS:
        raise UnknownName(f"unknown test signal {name!r}; choose from {sorted(FUNCTIONS)}")
    length = int(length)
    if length < 64 or length & (length - 1):
        raise BadLength(f"length must be a power of two >= 64, got {length}")
    return TestSignal(name, FUNCTIONS[name](grid(length)))
