"""Acceptance criteria AC1-AC8, one PASS/FAIL line each in the terminal summary."""

import json
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from fisgen.fcm import FCMConfig, fcm_cluster, update_centers, update_memberships
from fisgen.inference import FISModel, predict_inputs
from fisgen.membership import build_partition, eval_partition_many, partition_from_centers
from fisgen.rulegen import Rule, RuleSet
from fisgen.sampling import welch_t_test

import oracles
from test_sampling import WELCH_FIXTURES


def test_ac1_fcm_correctness(verdict):
    rng = np.random.default_rng(20240601)
    worst_row = worst_rise = worst_mean = 0.0
    start = time.perf_counter()
    for case in range(200):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(k, 31))
        d = int(rng.integers(1, 4))
        x = rng.uniform(0.0, 10.0, size=(n, d))
        rows = []
        res = fcm_cluster(x, FCMConfig(k, seed=case), on_iteration=lambda it, c, U: rows.append(U.sum(axis=1)))
        rows.append(res.memberships.sum(axis=1))
        worst_row = max(worst_row, max(float(np.max(np.abs(r - 1.0))) for r in rows))
        worst_rise = max(worst_rise, float(np.max(np.diff(res.objective_history), initial=0.0)))
        if k == 1:
            worst_mean = max(worst_mean, float(np.max(np.abs(res.centers[0] - x.mean(axis=0)))))
    elapsed = time.perf_counter() - start
    ok = worst_row <= 1e-9 and worst_rise <= 1e-9 and worst_mean <= 1e-9 and elapsed < 10.0
    detail = f"row-sum dev {worst_row:.1e}, objective rise {worst_rise:.1e}, k=1 mean dev {worst_mean:.1e}, {elapsed:.2f}s"
    print("AC1", detail)
    verdict("AC1", ok, detail)
    assert ok, detail


def test_ac2_ruspini_partition(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        mf_count = int(rng.integers(2, 10))
        values = rng.uniform(0.0, 1000.0, size=int(rng.integers(mf_count * 3, 80)))
        part = build_partition(values, mf_count, fcm_config=FCMConfig(mf_count, seed=int(rng.integers(2**32))))
        lo, hi = part.centers[0], part.centers[-1]
        pts = rng.uniform(lo, hi, size=1000)
        worst = max(worst, float(np.max(np.abs(eval_partition_many(part, pts).sum(axis=1) - 1.0))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 5.0
    detail = f"max |sum - 1| {worst:.1e} over 100x1000 points, {elapsed:.2f}s"
    print("AC2", detail)
    verdict("AC2", ok, detail)
    assert ok, detail


# fixed fixtures: (points, centers for the membership update, U for the center update, m)
ORACLE_FIXTURES = [
    ([[2.0]], [[0.0], [10.0]], None, 2.0),
    ([[0.0], [4.0]], None, [[0.8], [0.2]], 2.0),
    ([[0.0], [1.0]], [[0.5]], [[1.0], [1.0]], 2.0),
    ([[0.0], [0.0], [10.0], [10.0]], [[1.0], [9.0]], [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]], 2.0),
    ([[1.0, 2.0], [3.5, -1.0], [0.0, 0.0], [7.0, 4.0], [2.0, 2.0]], [[1.0, 1.0], [6.0, 3.0], [2.0, 2.0]],
     [[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.7, 0.1, 0.2], [0.05, 0.9, 0.05], [0.1, 0.1, 0.8]], 1.7),
    ([[0.5, 1.0, -2.0], [3.0, 3.0, 3.0], [-1.0, 0.0, 4.0], [2.0, -2.0, 0.0]], [[0.0, 0.0, 0.0], [2.0, 1.0, 1.0]],
     [[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.35, 0.65]], 2.5),
]


def test_ac3_oracle_equivalence(verdict):
    worst = 0.0
    for points, centers, U, m in ORACLE_FIXTURES:
        if centers is not None:
            got = update_memberships(np.array(points), np.array(centers), m)
            worst = max(worst, float(np.max(np.abs(got - np.array(oracles.memberships_bruteforce(points, centers, m))))))
        if U is not None:
            got = update_centers(np.array(points), np.array(U), m)
            worst = max(worst, float(np.max(np.abs(got - np.array(oracles.centers_bruteforce(points, U, m))))))
    # hand values for the two one-dimensional fixtures
    hand = [
        abs(update_memberships(np.array([[2.0]]), np.array([[0.0], [10.0]]), 2.0)[0, 0] - 1.0 / (1.0 + (2.0 / 8.0) ** 2)),
        abs(update_centers(np.array([[0.0], [4.0]]), np.array([[0.8], [0.2]]), 2.0)[0, 0] - 0.16 / 0.68),
    ]
    sym = fcm_cluster(np.array([[0.0], [0.0], [10.0], [10.0]]), FCMConfig(2), init_memberships=ORACLE_FIXTURES[3][2])
    fixed = oracles.fcm_fixed_point([[0.0], [0.0], [10.0], [10.0]], ORACLE_FIXTURES[3][2], 2.0)
    conv = float(np.max(np.abs(sym.centers - np.array(fixed))))
    worst = max(worst, *hand)
    ok = worst <= 1e-9 and conv <= 1e-3
    detail = f"max deviation from brute force {worst:.1e}; symmetric 2-cluster centers within {conv:.1e}"
    print("AC3", detail)
    verdict("AC3", ok, detail)
    assert ok, detail


def _random_fis(rng):
    inputs = []
    for name in ("A", "B"):
        size = int(rng.integers(2, 6))
        inputs.append(partition_from_centers(name, np.sort(rng.choice(100, size, replace=False)).astype(float), [f"{name}{i}" for i in range(size)]))
    out_size = int(rng.integers(2, 6))
    output = partition_from_centers("Y", np.sort(rng.choice(5000, out_size, replace=False)).astype(float), [f"Y{i}" for i in range(out_size)])
    keys = {(int(rng.integers(1, inputs[0].size + 1)), int(rng.integers(1, inputs[1].size + 1)), int(rng.integers(1, out_size + 1))) for _ in range(12)}
    rules = tuple(Rule(key[:2], key[2], float(rng.uniform(0.01, 5.0))) for key in sorted(keys))
    return FISModel(tuple(inputs), output, RuleSet(rules))


def test_ac4_weight_scaling_invariance(verdict):
    rng = np.random.default_rng(99)
    worst = 0.0
    coverage_same = True
    for _ in range(50):
        model = _random_fis(rng)
        c = float(10.0 ** rng.uniform(-3, 3))
        scaled = FISModel(
            model.input_partitions,
            model.output_partition,
            RuleSet(tuple(Rule(r.antecedents, r.consequent, r.weight * c) for r in model.rules)),
        )
        pts = rng.uniform(-5.0, 105.0, size=(40, 2))
        for a, b in zip(predict_inputs(model, pts), predict_inputs(scaled, pts)):
            if (a.value is None) != (b.value is None):
                coverage_same = False
            elif a.value is not None:
                worst = max(worst, abs(a.value - b.value) / max(1.0, abs(a.value)))
    ok = coverage_same and worst <= 1e-12
    detail = f"50 models, max relative prediction change {worst:.1e}, coverage unchanged: {coverage_same}"
    print("AC4", detail)
    verdict("AC4", ok, detail)
    assert ok, detail


@pytest.fixture(scope="module")
def cli_runs(tmp_path_factory):
    """The default experiment through the CLI, twice."""
    runs = []
    for name in ("first", "second"):
        out = tmp_path_factory.mktemp(name)
        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "fisgen", "experiment", "--out-dir", str(out)], capture_output=True, text=True
        )
        runs.append((out, time.perf_counter() - start, proc))
    return runs


def test_ac5_rule_arithmetic(cli_runs, verdict):
    out, _, proc = cli_runs[0]
    assert proc.returncode == 0, proc.stderr
    counts = json.loads((out / "report.json").read_text())["counts"]
    slots = set(counts["rule_slots_per_sample"].values())
    got = (slots, counts["possible_rules"], counts["comparison_cells"], counts["ttest_pairs"])
    ok = got == ({1275}, 343, 30, 45)
    detail = f"rule slots per sample {sorted(slots)}, possible rules {got[1]}, comparison cells {got[2]}, t-test pairs {got[3]}"
    print("AC5", detail)
    verdict("AC5", ok, detail)
    assert ok, detail


def test_ac6_end_to_end_determinism(cli_runs, verdict):
    (a, ta, pa), (b, tb, pb) = cli_runs
    assert pa.returncode == 0 and pb.returncode == 0, pa.stderr + pb.stderr
    same = (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    ok = same and ta < 60.0 and tb < 60.0
    detail = f"report.json byte-identical: {same}; runs took {ta:.1f}s and {tb:.1f}s"
    print("AC6", detail)
    verdict("AC6", ok, detail)
    assert ok, detail


def test_ac7_top_n_versus_sampled(cli_runs, verdict):
    out, _, proc = cli_runs[0]
    assert proc.returncode == 0, proc.stderr
    doc = json.loads((out / "report.json").read_text())
    summary = doc["comparison"]["summary"]
    favoring = doc["qualitative"]["measures_top_n_mean_at_least_sampled"]
    holds = len(favoring) >= 2
    means = ", ".join(f"{m} {v['mean']['top_n']:.0f}/{v['mean']['sampled']:.0f}" for m, v in summary.items())
    detail = f"Top-N/Sampled mean pct best: {means}; Top-N ahead on {len(favoring)} of 3"
    print("AC7", detail)
    if not holds:
        # data-dependent, so only a warning
        warnings.warn(f"AC7 soft check not met: {detail}")
    verdict("AC7", True, detail + ("" if holds else " (soft check not met, warning only)"))


def test_ac8_welch_statistics(verdict):
    worst_t = worst_p = 0.0
    for x, y, t, df, p in WELCH_FIXTURES:
        res = welch_t_test(x, y)
        worst_t = max(worst_t, abs(res.t_statistic - t))
        worst_p = max(worst_p, abs(res.p_value - p))
    same = welch_t_test([2.0, 7.5, 1.25, 9.0], [2.0, 7.5, 1.25, 9.0])
    exact = same.t_statistic == 0.0 and same.p_value == 1.0
    ok = worst_t <= 1e-6 and worst_p <= 1e-4 and exact
    detail = f"max |dt| {worst_t:.1e}, max |dp| {worst_p:.1e}; identical samples give t={same.t_statistic}, p={same.p_value}"
    print("AC8", detail)
    verdict("AC8", ok, detail)
    assert ok, detail
