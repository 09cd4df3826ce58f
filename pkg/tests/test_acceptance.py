"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The simulation criteria run the bundled scenarios at 20 reps, which takes a
few minutes on one core.
"""
import subprocess
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

from ssvd.core import SsvdConfig, fit
from ssvd.linalg import qr_orthonormalize, subspace_distance
from ssvd.rank import estimate_rank
from ssvd.simlab.model import Scenario, add_noise, build_model, run_scenario
from ssvd.simlab.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def verdict(capsys):
    def report(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{label}] {detail}")
        assert ok, detail
    return report


@lru_cache(maxsize=None)
def scenario_report(name):
    return run_scenario(load_scenario(name))


def median_counting_failures(report, method, metric, worst=np.inf):
    # a failed rep counts as the worst possible outcome rather than vanishing
    values = report.metric_values(method, metric)
    values += [worst] * (report.scenario.reps - len(values))
    return float(np.median(values))


def sparse_frame(gen, dim, supports):
    m = np.zeros((dim, len(supports)))
    for l, k in enumerate(supports):
        idx = gen.choice(dim, k, replace=False)
        m[idx, l] = gen.uniform(0.5, 2.0, k) * gen.choice([-1, 1], k)
    return qr_orthonormalize(m)[0]


def joint_support(m):
    return np.flatnonzero(np.any(m != 0, axis=1)).tolist()


def test_criterion_1_noiseless_exact_recovery(verdict):
    gen = np.random.default_rng(2024)
    u = sparse_frame(gen, 1024, [40, 25])
    v = sparse_frame(gen, 2048, [60, 35])
    details, ok = [], True
    for rank, d in ((1, [100.0]), (2, [100.0, 50.0])):
        uu, vv = u[:, :rank], v[:, :rank]
        t0 = time.perf_counter()
        out = fit((uu * d) @ vv.T, SsvdConfig(rank=rank))
        elapsed = time.perf_counter() - t0
        lu, lv = subspace_distance(out.u_hat, uu), subspace_distance(out.v_hat, vv)
        supp = joint_support(out.u_hat) == joint_support(uu) and \
            joint_support(out.v_hat) == joint_support(vv)
        if rank == 1:
            supp = supp and out.u_support[0].tolist() == np.flatnonzero(uu[:, 0]).tolist()
        ok &= lu <= 1e-6 and lv <= 1e-6 and supp and elapsed < 5.0
        details.append(f"rank {rank}: L_u={lu:.1e} L_v={lv:.1e} support={'exact' if supp else 'WRONG'} "
                       f"{elapsed:.2f}s")
    verdict("1 noiseless recovery", ok, "; ".join(details))


def test_criterion_2_gauss_d100(verdict):
    rep = scenario_report("table1_d100_gauss")
    lu = median_counting_failures(rep, "ssvd", "space_loss_u")
    lv = median_counting_failures(rep, "ssvd", "space_loss_v")
    rec = median_counting_failures(rep, "ssvd", "recovery_loss")
    l0 = median_counting_failures(rep, "ssvd", "l0_u1", worst=0)
    ok = 0.006 <= lu <= 0.025 and 0.016 <= lv <= 0.065 and 0.023 <= rec <= 0.09 and 20 <= l0 <= 60
    verdict("2 Gaussian d=100", ok,
            f"median L_u={lu:.4f} L_v={lv:.4f} L_rec={rec:.4f} |u|_0={l0:g} "
            f"failed reps={len(rep.failed)}")


def test_criterion_3_ordinary_svd_fails(verdict):
    rep = scenario_report("table1_d50_gauss")
    svd_lu = median_counting_failures(rep, "svd", "space_loss_u")
    svd_rec = median_counting_failures(rep, "svd", "recovery_loss")
    ssvd_lu = median_counting_failures(rep, "ssvd", "space_loss_u")
    ok = svd_lu >= 0.3 and svd_rec >= 1.0 and ssvd_lu <= 0.15
    verdict("3 SVD failure at d=50", ok,
            f"SVD L_u={svd_lu:.4f} L_rec={svd_rec:.4f}; FIT-SSVD L_u={ssvd_lu:.4f}")


def test_criterion_4_heavy_tails_hurt(verdict):
    gauss = scenario_report("table1_d50_gauss")
    heavy = scenario_report("table2_d50_t5")
    assert gauss.scenario.seed == heavy.scenario.seed
    worse, lines = 0, []
    for metric in ("space_loss_u", "space_loss_v", "recovery_loss"):
        g = median_counting_failures(gauss, "ssvd", metric)
        t = median_counting_failures(heavy, "ssvd", metric)
        worse += t >= g
        lines.append(f"{metric} gauss {g:.4f} t5 {t:.4f}")
    verdict("4 heavy-tail ordering", worse >= 2, f"t5 worse on {worse}/3 ({'; '.join(lines)})")


def test_criterion_5_speed(verdict):
    ratios = {}
    for d in (50, 100, 200):
        rep = scenario_report(f"table1_d{d}_gauss")
        ratios[d] = rep.timing_summary()["time_ratio"]["median"]
    ok = all(r is not None and r <= 1.0 for r in ratios.values())
    verdict("5 speed vs full SVD", ok,
            "median time ratio " + ", ".join(f"d={d}: {r:.3f}" for d, r in ratios.items()))


def test_criterion_6_property_suites(verdict):
    t0 = time.perf_counter()
    done = subprocess.run([sys.executable, "-m", "pytest", "-q", "-m", "property", "-p", "no:cacheprovider"],
                          cwd=ROOT, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    tail = done.stdout.strip().splitlines()[-1] if done.stdout.strip() else done.stderr[-200:]
    verdict("6 property suites", done.returncode == 0 and elapsed < 60,
            f"{tail} (wall {elapsed:.1f}s)")


def test_criterion_7_rank_selection(verdict):
    sc = Scenario(rank=2, singular_values=(200.0, 100.0), u_signals=("peak", "step"),
                  v_signals=("poly", "sing"))
    xi = build_model(sc).xi
    planted = [estimate_rank(add_noise(xi, "gauss_unit", s), seed=s).r_hat for s in range(20)]
    noise = [estimate_rank(add_noise(np.zeros_like(xi), "gauss_unit", 100 + s), seed=s).r_hat
             for s in range(20)]
    hits, nulls = planted.count(2), noise.count(0)
    verdict("7 rank selection", hits >= 18 and nulls >= 18,
            f"planted rank 2 found {hits}/20 (others {sorted(r for r in planted if r != 2)}); "
            f"noise rank 0 in {nulls}/20")
