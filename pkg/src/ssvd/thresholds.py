"""Thresholding rules and data-driven per-column threshold levels."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .errors import EmptyLowBlock

BOOTSTRAP = "bootstrap"
NORMAL_ASYMPTOTIC = "normal_asymptotic"

DEFAULT_BOOT = 100
SCAD_A = 3.7


@dataclass(frozen=True)
class ThresholdKind:
    """Thresholding rule: ``"hard"``, ``"soft"`` or ``"scad"`` (with parameter ``a > 2``)."""

    name: str = "hard"
    a: float = SCAD_A

    def __post_init__(self):
        if self.name not in ("hard", "soft", "scad"):
            raise ValueError(f"unknown thresholding rule {self.name!r}")
        if self.name == "scad" and not self.a > 2:
            raise ValueError("SCAD parameter a must exceed 2")

    @classmethod
    def parse(cls, spec):
        if isinstance(spec, cls):
            return spec
        return cls(str(spec).lower())

    def __str__(self):
        return f"scad(a={self.a:g})" if self.name == "scad" else self.name


HARD = ThresholdKind("hard")


@dataclass(frozen=True)
class ThresholdLevels:
    gamma: np.ndarray
    method_used: str


@dataclass(frozen=True)
class BlockPartition:
    """Rows/columns that are all-zero in the previous frames (``low_*``) and
    their complements (``high_*``), as sorted 0-based index arrays."""

    low_rows: np.ndarray
    high_rows: np.ndarray
    low_cols: np.ndarray
    high_cols: np.ndarray


def eta(x, gamma, kind=HARD):
    """Apply the thresholding rule entrywise.

    ``gamma`` broadcasts against ``x``; pass a length-``r`` vector to use one
    level per column of an ``(n, r)`` array. Every rule satisfies
    ``|eta(x, g) - x| <= g`` and returns 0 wherever ``|x| <= g``.
    """
    kind = ThresholdKind.parse(kind)
    x = np.asarray(x, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma < 0):
        raise ValueError("threshold level must be nonnegative")
    ax = np.abs(x)
    if kind.name == "hard":
        out = np.where(ax > gamma, x, 0.0)
    elif kind.name == "soft":
        out = np.sign(x) * np.maximum(ax - gamma, 0.0)
    else:
        a = kind.a
        soft = np.sign(x) * np.maximum(ax - gamma, 0.0)
        mid = ((a - 1.0) * x - np.sign(x) * a * gamma) / (a - 2.0)
        out = np.where(ax <= 2.0 * gamma, soft, np.where(ax <= a * gamma, mid, x))
    return float(out) if out.ndim == 0 else out


def _zero_rows(frame):
    frame = np.asarray(frame)
    if frame.ndim == 1:
        frame = frame[:, None]
    return ~np.any(frame != 0.0, axis=1)


def partition_blocks(u_prev, v_prev):
    zu = _zero_rows(u_prev)
    zv = _zero_rows(v_prev)
    return BlockPartition(
        np.flatnonzero(zu), np.flatnonzero(~zu), np.flatnonzero(zv), np.flatnonzero(~zv)
    )


def uses_normal_branch(n, n_low_rows, n_low_cols, n_high_cols):
    """True when the null block is too small relative to ``n * |H_v|`` for the
    m-out-of-n bootstrap, so the normal max approximation is used."""
    m = n * n_high_cols
    return n_low_cols * n_low_rows < m * math.log(m)


def _child(seq, i):
    # Stateless substream derivation: identical regardless of call order.
    return np.random.SeedSequence(seq.entropy, spawn_key=tuple(seq.spawn_key) + (i,))


def threshold_levels(x, u_prev, v_prev, sigma, m_boot=DEFAULT_BOOT, rng=None, threads=1):
    """Per-column threshold levels for the left update ``x @ v_prev``.

    The expected maximum of ``|Z v_l|`` is estimated by moving entries of
    the presumed-null block ``x[L_u, L_v]`` into an ``n x |H_v|`` matrix
    (sampling with replacement, filled row-major), multiplying by
    ``v_prev[H_v]`` and taking the median over ``m_boot`` replications of the
    columnwise sup-norms. When the null block is too small, every level is
    ``sigma * sqrt(2 log n)``.

    Call with ``(x.T, v_prev, u_prev)`` to get levels for the right update.

    Parameters
    ----------
    rng : numpy.random.SeedSequence or int, optional
        Master seed. Replication ``b`` draws from a child stream keyed by
        ``b``, so results do not depend on ``threads``.
    """
    n = x.shape[0]
    part = partition_blocks(u_prev, v_prev)
    v_prev = np.asarray(v_prev, dtype=np.float64)
    if v_prev.ndim == 1:
        v_prev = v_prev[:, None]
    r = v_prev.shape[1]
    n_high = part.high_cols.size
    if n_high == 0:
        raise EmptyLowBlock("right frame has no nonzero rows")
    if uses_normal_branch(n, part.low_rows.size, part.low_cols.size, n_high):
        gamma = np.full(r, float(sigma) * math.sqrt(2.0 * math.log(n)))
        return ThresholdLevels(gamma, NORMAL_ASYMPTOTIC)
    if part.low_rows.size == 0 or part.low_cols.size == 0:
        raise EmptyLowBlock("bootstrap branch selected but the null block is empty")
    if m_boot < 1:
        raise ValueError("m_boot must be at least 1")

    if not isinstance(rng, np.random.SeedSequence):
        rng = np.random.SeedSequence(rng)
    x = np.asarray(x, dtype=np.float64)
    # row-major flattening of the null block; a flat index is a uniform cell
    block = x.take(part.low_rows, axis=0).take(part.low_cols, axis=1).ravel()
    v_high = v_prev[part.high_cols]
    size = n * n_high

    def replicate(b):
        gen = np.random.Generator(np.random.PCG64(_child(rng, b)))
        z = block.take(gen.integers(0, block.size, size=size)).reshape(n, n_high)
        return np.max(np.abs(z @ v_high), axis=0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sup_norms = list(pool.map(replicate, range(m_boot)))
    else:
        sup_norms = [replicate(b) for b in range(m_boot)]
    gamma = np.median(np.vstack(sup_norms), axis=0)
    return ThresholdLevels(gamma, BOOTSTRAP)
