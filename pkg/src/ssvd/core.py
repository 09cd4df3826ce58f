"""Thresholded two-sided subspace iteration and its unthresholded baseline."""
from dataclasses import dataclass, field, asdict
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DimensionMismatch, MaxItersExceeded, RankCollapse
from .linalg import ReducedSvd, as_matrix, orient, qr_orthonormalize, subspace_distance
from .robust import estimate_sigma
from .screening import DEFAULT_ALPHA, DEFAULT_BETA, InitFrames, initialize
from .thresholds import DEFAULT_BOOT, ThresholdKind, ThresholdLevels, eta, threshold_levels


@dataclass(frozen=True)
class SsvdConfig:
    rank: int = 1
    kind: ThresholdKind = field(default_factory=ThresholdKind)
    epsilon: float = 1e-8
    max_iters: int = 100
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA
    m_boot: int = DEFAULT_BOOT
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ThresholdKind.parse(self.kind))
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.m_boot < 1:
            raise ValueError("m_boot must be at least 1")
        if not 0 < self.beta < 1 or not 0 < self.alpha < 1:
            raise ValueError("beta and alpha must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def to_dict(self):
        d = asdict(self)
        d["kind"] = self.kind.name
        if self.kind.name == "scad":
            d["scad_a"] = self.kind.a
        return d


@dataclass
class SsvdFit:
    u_hat: np.ndarray
    v_hat: np.ndarray
    d_hat: np.ndarray
    iterations: int
    converged: bool
    sigma_hat: float
    u_support: List[np.ndarray]
    v_support: List[np.ndarray]
    threshold_trace: List[Tuple[ThresholdLevels, ThresholdLevels]]
    init: Optional[InitFrames] = None
    distance_trace: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def rank(self):
        return self.d_hat.shape[0]

    def signal(self):
        """Low-rank reconstruction ``U diag(d) V'``."""
        return (self.u_hat * self.d_hat) @ self.v_hat.T


def _support(frame):
    return [np.flatnonzero(frame[:, l]) for l in range(frame.shape[1])]


def _nonzero_rows(frame):
    return np.flatnonzero(np.any(frame != 0.0, axis=1))


def _project(x, frame):
    # x @ frame using only the rows where frame is nonzero
    rows = _nonzero_rows(frame)
    return x[:, rows] @ frame[rows]


def _threshold_and_orthonormalize(mul, gamma, kind, side):
    thr = eta(mul, gamma[None, :], kind)
    dead = np.flatnonzero(~np.any(thr != 0.0, axis=0))
    if dead.size:
        raise RankCollapse(
            f"thresholding zeroed {side} column {dead[0]}; retry with a smaller rank",
            column=int(dead[0]),
        )
    try:
        q, _ = qr_orthonormalize(thr)
    except RankCollapse as err:
        raise RankCollapse(f"{side} frame: {err}", column=err.column) from err
    return q


def _finalize(x, u, v):
    """Singular-value estimates ``u_l' x v_l``, sign convention, descending order."""
    rows = _nonzero_rows(u)
    cols = _nonzero_rows(v)
    sub = x[np.ix_(rows, cols)]
    d = np.einsum("il,ij,jl->l", u[rows], sub, v[cols])
    out = orient(u, d, v)
    u, d, v = out.left, out.singular_values.copy(), out.right
    neg = d < 0
    u[:, neg] *= -1.0
    d[neg] *= -1.0
    order = np.argsort(-d, kind="stable")
    return u[:, order], d[order], v[:, order]


LevelFn = Callable[..., ThresholdLevels]


def fit(x, config=None, level_fn: Optional[LevelFn] = None, init: Optional[InitFrames] = None):
    """Sparse SVD of ``x`` by iterative thresholding of subspace iterations.

    Each sweep multiplies, thresholds columnwise with data-driven levels and
    re-orthonormalizes, first on the left and then on the right side, until
    both projection distances between successive frames drop to
    ``config.epsilon`` or ``config.max_iters`` sweeps have run.

    Parameters
    ----------
    x : array_like, shape (n, p)
    config : SsvdConfig, optional
    level_fn : callable, optional
        Replacement for :func:`ssvd.thresholds.threshold_levels` with the same
        signature. Mainly useful for experiments and tests.
    init : InitFrames, optional
        Precomputed starting frames; by default computed by
        :func:`ssvd.screening.initialize`.

    Returns
    -------
    SsvdFit
        ``converged`` is False when the sweep cap was hit; the last iterate
        is still returned.

    Raises
    ------
    InsufficientSelection, DegenerateScale
        From the initialization.
    RankCollapse
        A whole column was thresholded away.
    """
    config = config or SsvdConfig()
    x = as_matrix(x, "x")
    n, p = x.shape
    r = config.rank
    if r > min(n, p):
        raise DimensionMismatch(f"rank {r} exceeds min(n, p) = {min(n, p)}")
    level_fn = level_fn or threshold_levels
    xt = np.ascontiguousarray(x.T)
    sigma = estimate_sigma(x)
    if init is None:
        init = initialize(x, r, config.beta, config.alpha)
    u, v = init.u0, init.v0
    master = np.random.SeedSequence(config.seed)

    def levels(mat, left, right, side):
        seq = np.random.SeedSequence(master.entropy, spawn_key=(k, side))
        return level_fn(mat, left, right, sigma, config.m_boot, rng=seq, threads=config.threads)

    trace, dists = [], []
    converged = False
    k = 0
    for k in range(1, config.max_iters + 1):
        gu = levels(x, u, v, 0)
        u_new = _threshold_and_orthonormalize(_project(x, v), gu.gamma, config.kind, "left")
        gv = levels(xt, v, u_new, 1)
        v_new = _threshold_and_orthonormalize(_project(xt, u_new), gv.gamma, config.kind, "right")
        du = subspace_distance(u_new, u)
        dv = subspace_distance(v_new, v)
        u, v = u_new, v_new
        trace.append((gu, gv))
        dists.append((du, dv))
        if max(du, dv) <= config.epsilon:
            converged = True
            break

    u, d, v = _finalize(x, u, v)
    return SsvdFit(
        u_hat=u,
        v_hat=v,
        d_hat=d,
        iterations=k,
        converged=converged,
        sigma_hat=sigma,
        u_support=_support(u),
        v_support=_support(v),
        threshold_trace=trace,
        init=init,
        distance_trace=dists,
    )


def vanilla_subspace_iteration(x, r, v0, epsilon=1e-8, max_iters=100):
    """Leading ``r`` singular triples by plain two-sided subspace iteration.

    Repeats ``U = qr(x V)``, ``V = qr(x' U)`` from the start frame ``v0``
    until both successive projection distances are at most ``epsilon``, then
    rotates the converged frames by the SVD of ``U' x V``.

    Raises
    ------
    MaxItersExceeded
        No convergence within ``max_iters`` sweeps, or the start frame has a
        direction annihilated by ``x`` (the iteration is stuck at a
        stationary point).
    """
    x = as_matrix(x, "x")
    v = as_matrix(v0, "v0")
    if v.shape != (x.shape[1], r) or r > min(x.shape):
        raise DimensionMismatch(f"start frame shape {v.shape} incompatible with x {x.shape}, r={r}")
    u = np.zeros((x.shape[0], r))
    for k in range(1, max_iters + 1):
        try:
            u_new, _ = qr_orthonormalize(x @ v)
            v_new, _ = qr_orthonormalize(x.T @ u_new)
        except RankCollapse as err:
            raise MaxItersExceeded(
                f"stationary at sweep {k}: start frame has a direction in the null space of x ({err})"
            ) from err
        done = k > 1 and max(subspace_distance(u_new, u), subspace_distance(v_new, v)) <= epsilon
        u, v = u_new, v_new
        if done:
            break
    else:
        raise MaxItersExceeded(f"no convergence within {max_iters} sweeps")
    a, s, bt = np.linalg.svd(u.T @ x @ v)
    return orient(u @ a, s, v @ bt.T)
