"""Low-rank simulation model, noise laws, loss metrics and scenario sweeps."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import math
import time
from typing import NamedTuple, Tuple

import numpy as np

from ..core import SsvdConfig, fit
from ..errors import DimensionMismatch, SsvdError
from ..linalg import as_matrix, qr_orthonormalize, reduced_svd, subspace_distance
from ..robust import MAD_TO_SD, mad
from .signals import FUNCTIONS, make_test_signal
from .wavelets import dwt_symmlet8

NOISE_LAWS = ("gauss_unit", "t5_scaled")
METHODS = ("ssvd", "svd")
LOSSES = ("space_loss_u", "space_loss_v", "recovery_loss")

# substream purposes under (rep, purpose)
_NOISE, _FIT = 0, 1


@dataclass(frozen=True)
class Scenario:
    """One simulation cell. ``u_signals[l]`` / ``v_signals[l]`` name the test
    functions whose wavelet coefficients form the ``l``-th singular vectors."""

    n: int = 1024
    p: int = 2048
    rank: int = 1
    singular_values: Tuple[float, ...] = (100.0,)
    u_signals: Tuple[str, ...] = ("peak",)
    v_signals: Tuple[str, ...] = ("poly",)
    noise: str = "gauss_unit"
    reps: int = 20
    seed: int = 0
    name: str = "scenario"
    fit: SsvdConfig = field(default_factory=SsvdConfig)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("singular_values", tuple(float(d) for d in self.singular_values))
        set_("u_signals", tuple(self.u_signals))
        set_("v_signals", tuple(self.v_signals))
        for key in ("n", "p"):
            size = getattr(self, key)
            if size < 64 or size & (size - 1):
                raise ValueError(f"{key} must be a power of two >= 64, got {size}")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        d = np.asarray(self.singular_values)
        if d.size != self.rank:
            raise ValueError(f"singular_values needs {self.rank} entries, got {d.size}")
        if np.any(d <= 0) or np.any(np.diff(d) >= 0):
            raise ValueError("singular_values must be positive and strictly decreasing")
        for key in ("u_signals", "v_signals"):
            names = getattr(self, key)
            if len(names) != self.rank:
                raise ValueError(f"{key} needs {self.rank} entries, got {len(names)}")
            bad = [s for s in names if s not in FUNCTIONS]
            if bad:
                raise ValueError(f"{key}: unknown test signal {bad[0]!r}; choose from {sorted(FUNCTIONS)}")
        if self.noise not in NOISE_LAWS:
            raise ValueError(f"noise must be one of {NOISE_LAWS}, got {self.noise!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.fit.rank != self.rank:
            set_("fit", SsvdConfig(**{**self.fit.__dict__, "rank": self.rank}))

    def to_dict(self):
        d = asdict(self)
        d["singular_values"] = list(self.singular_values)
        d["u_signals"] = list(self.u_signals)
        d["v_signals"] = list(self.v_signals)
        d["fit"] = self.fit.to_dict()
        return d


class Model(NamedTuple):
    xi: np.ndarray
    u_true: np.ndarray
    v_true: np.ndarray
    d: np.ndarray


def wavelet_vector(name, length):
    """Unit-norm Symmlet-8 coefficient vector of a test function."""
    w = dwt_symmlet8(make_test_signal(name, length).values)
    return w / np.linalg.norm(w)


def build_model(scenario):
    """Signal matrix ``xi = U diag(d) V'`` with exactly orthonormal frames."""
    u = np.column_stack([wavelet_vector(s, scenario.n) for s in scenario.u_signals])
    v = np.column_stack([wavelet_vector(s, scenario.p) for s in scenario.v_signals])
    if scenario.rank > 1:
        u, _ = qr_orthonormalize(u)
        v, _ = qr_orthonormalize(v)
    d = np.asarray(scenario.singular_values)
    return Model((u * d) @ v.T, u, v, d)


def add_noise(xi, law, seed):
    """``xi`` plus iid unit-variance noise: standard normal or ``sqrt(3/5) t_5``."""
    gen = np.random.default_rng(seed)
    shape = np.shape(xi)
    if law == "gauss_unit":
        z = gen.standard_normal(shape)
    elif law == "t5_scaled":
        z = math.sqrt(3.0 / 5.0) * gen.standard_t(5, shape)
    else:
        raise ValueError(f"noise must be one of {NOISE_LAWS}, got {law!r}")
    return xi + z


def _triple(result):
    if hasattr(result, "u_hat"):
        return result.u_hat, result.d_hat, result.v_hat
    return result.left, result.singular_values, result.right


def evaluate(result, truth, x, baseline_time, fit_time):
    """Per-rep metrics of one estimate against the truth.

    ``result`` is an :class:`~ssvd.core.SsvdFit` or a
    :class:`~ssvd.linalg.ReducedSvd`; ``truth`` a :class:`Model`. Support
    sizes are counts of nonzero entries (``l0_u[l]`` for column ``l``) and
    of rows nonzero in any column (``joint_u``).
    """
    u, d, v = _triple(result)
    u, v = as_matrix(u, "u_hat"), as_matrix(v, "v_hat")
    n, p = np.shape(x)
    if u.shape != truth.u_true.shape or v.shape != truth.v_true.shape or truth.xi.shape != (n, p):
        raise DimensionMismatch(
            f"estimate frames {u.shape}, {v.shape} do not match truth "
            f"{truth.u_true.shape}, {truth.v_true.shape} for data {(n, p)}"
        )
    xi_hat = (u * np.asarray(d)) @ v.T
    return {
        "space_loss_u": subspace_distance(truth.u_true, u),
        "space_loss_v": subspace_distance(truth.v_true, v),
        "recovery_loss": float(np.sum((xi_hat - truth.xi) ** 2) / np.sum(truth.xi ** 2)),
        "l0_u": np.count_nonzero(u, axis=0).tolist(),
        "l0_v": np.count_nonzero(v, axis=0).tolist(),
        "joint_u": int(np.count_nonzero(np.any(u != 0, axis=1))),
        "joint_v": int(np.count_nonzero(np.any(v != 0, axis=1))),
        "time_ratio": fit_time / baseline_time if baseline_time > 0 else float("nan"),
    }


def rep_seeds(seed, rep):
    """Noise and fit seeds of repetition ``rep``, derived statelessly."""
    noise = np.random.SeedSequence(seed, spawn_key=(rep, _NOISE))
    fit_seed = int(np.random.SeedSequence(seed, spawn_key=(rep, _FIT)).generate_state(1)[0])
    return noise, fit_seed


def run_rep(scenario, rep, model=None):
    """Simulate, fit both methods and evaluate one repetition.

    Returns ``(record, timing)``; ``record`` holds only deterministic
    quantities, ``timing`` the wall-clock seconds. A failed fit is recorded
    under ``"error"`` instead of metrics.
    """
    model = model or build_model(scenario)
    noise_seed, fit_seed = rep_seeds(scenario.seed, rep)
    x = add_noise(model.xi, scenario.noise, noise_seed)

    t0 = time.perf_counter()
    full = reduced_svd(x, min(x.shape))
    t_svd = time.perf_counter() - t0
    svd = type(full)(full.left[:, :scenario.rank], full.singular_values[:scenario.rank],
                     full.right[:, :scenario.rank])

    record = {"rep": rep, "fit_seed": fit_seed}
    timing = {"rep": rep, "svd_seconds": t_svd}
    svd_metrics = evaluate(svd, model, x, t_svd, t_svd)
    svd_metrics.pop("time_ratio")
    record["svd"] = svd_metrics
    config = SsvdConfig(**{**scenario.fit.__dict__, "seed": fit_seed})
    t0 = time.perf_counter()
    try:
        result = fit(x, config)
    except SsvdError as err:
        timing["ssvd_seconds"] = time.perf_counter() - t0
        record["ssvd"] = {"error": type(err).__name__, "message": str(err)}
        return record, timing
    t_fit = time.perf_counter() - t0
    metrics = evaluate(result, model, x, t_svd, t_fit)
    timing["ssvd_seconds"] = t_fit
    timing["time_ratio"] = metrics.pop("time_ratio")
    metrics["iterations"] = result.iterations
    metrics["converged"] = result.converged
    record["ssvd"] = metrics
    return record, timing


def _stats(values):
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return {"median": None, "mad": None, "mad_scaled": None}
    raw = mad(a)
    return {"median": float(np.median(a)), "mad": raw, "mad_scaled": MAD_TO_SD * raw}


def _metric_columns(scenario):
    cols = list(LOSSES)
    cols += [f"l0_u{l + 1}" for l in range(scenario.rank)]
    cols += [f"l0_v{l + 1}" for l in range(scenario.rank)]
    if scenario.rank > 1:
        cols += ["joint_u", "joint_v"]
    return cols


def _column(metrics, name):
    if name.startswith("l0_"):
        side, l = name[3], int(name[4:]) - 1
        return metrics[f"l0_{side}"][l]
    return metrics[name]


@dataclass
class EvalReport:
    """Per-method medians and MADs over reps, plus the raw per-rep records.

    ``to_dict`` is fully deterministic for a given scenario; wall-clock
    numbers live separately in ``timing``.
    """

    scenario: Scenario
    records: list
    timing: list

    @property
    def failed(self):
        return [r for r in self.records if "error" in r["ssvd"]]

    def metric_values(self, method, name):
        return [_column(r[method], name) for r in self.records if "error" not in r[method]]

    def summary(self):
        out = {}
        for method in METHODS:
            out[method] = {c: _stats(self.metric_values(method, c))
                           for c in _metric_columns(self.scenario)}
        out["ssvd"]["n_failed"] = len(self.failed)
        return out

    def timing_summary(self):
        ratios = [t["time_ratio"] for t in self.timing if "time_ratio" in t]
        return {
            "time_ratio": _stats(ratios),
            "ssvd_seconds": _stats([t["ssvd_seconds"] for t in self.timing]),
            "svd_seconds": _stats([t["svd_seconds"] for t in self.timing]),
            "per_rep": self.timing,
        }

    def to_dict(self):
        return {"scenario": self.scenario.to_dict(), "summary": self.summary(),
                "reps": self.records}

    def table(self):
        """Aligned plain-text summary: one row per method, median (scaled MAD)."""
        cols = _metric_columns(self.scenario)
        summary = self.summary()
        ratio = self.timing_summary()["time_ratio"]
        head = ["method"] + cols + ["time_ratio"]
        rows = []
        for method in METHODS:
            cells = [method]
            for c in cols:
                s = summary[method][c]
                cells.append("-" if s["median"] is None else f"{s['median']:.4g} ({s['mad_scaled']:.2g})")
            if method == "ssvd" and ratio["median"] is not None:
                cells.append(f"{ratio['median']:.3g} ({ratio['mad_scaled']:.2g})")
            else:
                cells.append("1")
            rows.append(cells)
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
        lines = [f"{self.scenario.name}: n={self.scenario.n} p={self.scenario.p} "
                 f"d={list(self.scenario.singular_values)} noise={self.scenario.noise} "
                 f"reps={self.scenario.reps} failed={len(self.failed)}",
                 fmt(head)] + [fmt(r) for r in rows]
        return "\n".join(lines) + "\n"


def run_scenario(scenario, threads=1, progress=None):
    """Run every repetition of ``scenario`` and aggregate.

    Reps run in parallel over ``threads`` workers; each draws from its own
    seeded substreams, so results do not depend on ``threads`` (timings do).
    """
    if threads < 1:
        raise ValueError("threads must be at least 1")
    model = build_model(scenario)

    def one(rep):
        out = run_rep(scenario, rep, model)
        if progress:
            progress(rep, out[0])
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(scenario.reps)))
    else:
        results = [one(rep) for rep in range(scenario.reps)]
    return EvalReport(scenario, [r for r, _ in results], [t for _, t in results])
