import numpy as np
import pytest
from hypothesis import given, strategies as st
from statsmodels.stats.multitest import multipletests

from ssvd.errors import DegenerateScale, InsufficientSelection
from ssvd.linalg import orthonormality_error, reduced_svd, subspace_distance
from ssvd.screening import holm_reject, initialize, screen_axis, select_submatrix

pvals = st.lists(st.floats(0, 1), min_size=1, max_size=60)


def test_holm_hand_example():
    assert holm_reject([0.001, 0.02, 0.9], 0.05).tolist() == [0, 1]


def test_holm_trivial_cases():
    assert holm_reject([1.0, 1.0, 1.0], 0.05).size == 0
    assert holm_reject([0.04], 0.05).tolist() == [0]
    assert holm_reject([], 0.05).size == 0


def test_holm_rejects_invalid():
    with pytest.raises(ValueError):
        holm_reject([0.1, 1.2], 0.05)


@pytest.mark.property
@given(pvals, st.floats(0.001, 0.5))
def test_holm_agrees_with_statsmodels(p, alpha):
    ours = holm_reject(p, alpha)
    reject, *_ = multipletests(p, alpha=alpha, method="holm")
    # statsmodels compares adjusted p-values, which can differ from the
    # step-down cutoffs by one rounding step on exact boundaries
    p = np.asarray(p)
    cut = alpha / (len(p) - np.argsort(np.argsort(p, kind="stable"), kind="stable"))
    boundary = np.isclose(p, cut, rtol=1e-12, atol=0)
    if not boundary.any():
        assert ours.tolist() == np.flatnonzero(reject).tolist()


@pytest.mark.property
@given(pvals, st.floats(0.001, 0.5), st.floats(0.0, 1.0))
def test_holm_bracketing_and_monotone(p, alpha, shrink):
    a = np.asarray(p)
    holm = set(holm_reject(a, alpha).tolist())
    bonferroni = set(np.flatnonzero(a <= alpha / a.size).tolist())
    unadjusted = set(np.flatnonzero(a <= alpha).tolist())
    assert bonferroni <= holm <= unadjusted
    if shrink > 0:
        assert set(holm_reject(a, alpha * shrink).tolist()) <= holm


def test_null_false_selection_rate():
    hits = 0
    for seed in range(50):
        x = np.random.default_rng(seed).standard_normal((200, 300))
        hits += screen_axis(x).selected.size > 0
    assert hits / 50 <= 0.05 + 0.08


def test_planted_rows_are_found():
    x = np.random.default_rng(3).standard_normal((200, 300))
    x[:10] += 5.0
    assert set(range(10)) <= set(screen_axis(x).selected.tolist())


def test_constant_matrix_is_degenerate():
    with pytest.raises(DegenerateScale):
        screen_axis(np.full((20, 30), 2.5))


def test_permutation_relabels_selection():
    gen = np.random.default_rng(4)
    x = gen.standard_normal((100, 80))
    x[[3, 40, 77]] += 2.0
    perm = gen.permutation(100)
    base = screen_axis(x).selected
    moved = screen_axis(x[perm]).selected
    assert sorted(perm[moved].tolist()) == base.tolist()


def _sparse_rank_one(n=300, p=400, nu=30, nv=40, seed=0):
    gen = np.random.default_rng(seed)
    u = np.zeros(n)
    v = np.zeros(p)
    u[gen.choice(n, nu, replace=False)] = gen.uniform(1, 2, nu) * gen.choice([-1, 1], nu)
    v[gen.choice(p, nv, replace=False)] = gen.uniform(1, 2, nv) * gen.choice([-1, 1], nv)
    return u / np.linalg.norm(u), v / np.linalg.norm(v)


def test_noisy_planted_init_is_close():
    u, v = _sparse_rank_one()
    x = 60.0 * np.outer(u, v) + 0.1 * np.random.default_rng(1).standard_normal(u.shape + v.shape)
    init = initialize(x, 1)
    sel = init.selection
    assert set(np.flatnonzero(init.u0[:, 0]).tolist()) <= set(sel.rows.tolist())
    assert set(np.flatnonzero(init.v0[:, 0]).tolist()) <= set(sel.cols.tolist())
    truth = reduced_svd(60.0 * np.outer(u, v), 1)
    assert subspace_distance(init.u0, truth.left) < 0.1
    assert subspace_distance(init.v0, truth.right) < 0.1
    assert orthonormality_error(init.u0) <= 1e-10


def test_noiseless_init_is_exact():
    u, v = _sparse_rank_one(seed=5)
    init = initialize(25.0 * np.outer(u, v), 1)
    assert init.selection.rows.tolist() == np.flatnonzero(u).tolist()
    assert init.selection.cols.tolist() == np.flatnonzero(v).tolist()
    assert subspace_distance(init.u0, u[:, None]) <= 1e-8
    assert subspace_distance(init.v0, v[:, None]) <= 1e-8


def test_pure_noise_init_fails():
    fails = 0
    for seed in range(10):
        x = np.random.default_rng(seed).standard_normal((150, 200))
        try:
            initialize(x, 1)
        except InsufficientSelection as err:
            fails += 1
            assert err.n_rows < 1 or err.n_cols < 1
    assert fails >= 8


def test_one_global_cutoff():
    x = np.random.default_rng(2).standard_normal((60, 90))
    sel = select_submatrix(x, beta=0.9)
    assert sel.huber_delta == pytest.approx(np.quantile(np.abs(x), 0.9))
    assert sel.row_stats.shape == (60,) and sel.col_stats.shape == (90,)
