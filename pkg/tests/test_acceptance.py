"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""

import json
import time
from itertools import combinations

import mpmath
import numpy as np
import pytest

from teleoscm import models
from teleoscm.cli import main
from teleoscm.dsep import d_separated
from teleoscm.repro import run_repro_heating, run_repro_smoking
from teleoscm.scm import Dag

from dsep_oracle import brute_d_separated
from properties import fisher_type1_rate, twin_matches_abducted_sfm, constant_policy_matches_do, phi_max_error, sfm_is_acyclic

SEEDS = range(20)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


@pytest.fixture(scope="module")
def heating_runs():
    runs = []
    for s in SEEDS:
        t0 = time.perf_counter()
        rep = run_repro_heating(seed=s)
        runs.append((rep, time.perf_counter() - t0))
    return runs


@pytest.fixture(scope="module")
def smoking_runs():
    return [run_repro_smoking(seed=s) for s in SEEDS]


def _test(rep, stage, x, y, given=()):
    for t in rep[stage]["tests"]:
        if (t["x"], t["y"], t["given"]) == (x, y, list(given)):
            return t
    raise KeyError((stage, x, y, given))


def test_criterion_1_causal_regime(heating_runs, report):
    good = 0
    slowest = max(t for _, t in heating_runs)
    for rep, _ in heating_runs:
        hw = _test(rep, "causal", "H", "W")
        hw_t = _test(rep, "causal", "H", "W", ["T"])
        ht = _test(rep, "causal", "H", "T")
        good += (not hw["dependent"]) and hw_t["p_value"] < 1e-6 and ht["p_value"] < 1e-6
    ok = good >= 18 and slowest < 5.0
    assert report(1, ok, f"{good}/20 seeds meet thresholds, slowest run {slowest:.2f}s")


def _cell_correlation():
    """corr(W*, H*) by enumerating the four equally likely (W, H) cells."""
    cells = [(w, h) for w in (0, 1) for h in (0, 1)]
    ws = np.array([w for w, _ in cells], float)
    hs = np.array([1.0 if w + h < 0.5 else 0.0 for w, h in cells])
    cov = np.mean(ws * hs) - ws.mean() * hs.mean()
    return cov / (ws.std() * hs.std())


def test_criterion_2_agent_regime(heating_runs, report, capsys, tmp_path):
    theory = _cell_correlation()
    assert abs(theory - (-1 / np.sqrt(3))) < 1e-12
    tests = [_test(rep, "agent", "H_star", "W_star") for rep, _ in heating_runs]
    hits = sum(t["p_value"] < 1e-6 for t in tests)
    mean_r = float(np.mean([t["r"] for t in tests]))

    agent = tmp_path / "agent.csv"
    sfm = tmp_path / "sfm.json"
    main(["apply", str(models.path("heating")), str(models.path("heating_policy")), "-o", str(sfm)])
    main(["sample", str(sfm), "-n", "10000", "--seed", "0", "--observed-only", "-o", str(agent)])
    capsys.readouterr()
    code = main(["detect-agent", str(models.path("heating")), str(agent)])
    out = json.loads(capsys.readouterr().out)
    cli_ok = (
        code == 3
        and set(out["candidates"]) == {"W", "H"}
        and {"pair": ["H", "W"], "children": ["T"]} in out["common_children"]
    )
    ok = hits == 20 and abs(mean_r - theory) < 0.02 and cli_ok
    assert report(
        2, ok,
        f"{hits}/20 with p<1e-6, mean r {mean_r:.3f} vs theory {theory:.3f}, "
        f"detect-agent exit {code} candidates {out['candidates']}",
    )


def test_criterion_3_verification(heating_runs, report):
    consistent = sum(rep["verify"]["verdict"] == "consistent" for rep, _ in heating_runs)
    assert report(3, consistent >= 19, f"{consistent}/20 consistent")


def test_criterion_4_smoking(smoking_runs, report, capsys):
    mpmath.mp.dps = 30
    closed = float(0.5 * mpmath.ncdf(0.5) + 0.25)
    base_ok = do_d_ok = do_p_ok = 0
    for rep in smoking_runs:
        b = rep["pmf"]["baseline"]["1"]
        d = rep["pmf"]["do(D=0)"]["1"]
        p = rep["pmf"]["do(P=0)"]["1"]
        base_ok += abs(b - closed) <= 0.02
        do_d_ok += abs(d - b) <= 0.02 and rep["tests"]["do(D=0)"]["p_value"] > 0.05
        do_p_ok += p == 0.0 and rep["tests"]["do(P=0)"]["p_value"] < 1e-10
    listened = 0
    for s in SEEDS:
        code = main([
            "discover-intention", str(models.path("smoking")),
            "--policy", str(models.path("smoking_policy")), "--target", "S",
            "--candidates", "P,D", "-n", "10000", "--seed", str(s),
            "--pair", "P=0:2", "--pair", "D=0:1",
        ])
        out = json.loads(capsys.readouterr().out)
        listened += code == 0 and out["listened"] == ["P"]
    ok = base_ok == 20 and do_d_ok >= 18 and do_p_ok == 20 and listened == 20
    assert report(
        4, ok,
        f"baseline within 0.02 of {closed:.4f}: {base_ok}/20; do(D=0) unchanged: {do_d_ok}/20; "
        f"do(P=0) zero: {do_p_ok}/20; listened={{P}}: {listened}/20",
    )


def test_criterion_5_sfm_acyclic(report):
    failures = sum(not sfm_is_acyclic(s) for s in range(500))
    assert report(5, failures == 0, f"{failures} acyclicity failures in 500 pairs")


def test_criterion_6_equivalences(report):
    l1 = sum(not twin_matches_abducted_sfm(s) for s in range(60))
    l2 = sum(not constant_policy_matches_do(s) for s in range(60))
    assert report(6, l1 == 0 and l2 == 0, f"mismatches: counterfactual {l1}/60, do {l2}/60")


def test_criterion_7_dsep_oracle(report):
    rng = np.random.default_rng(2024)
    queries = mismatches = 0
    for _ in range(250):
        k = int(rng.integers(2, 6))
        names = [f"V{i}" for i in range(k)]
        order = rng.permutation(k)
        p = rng.uniform(0.2, 0.7)
        edges = frozenset(
            (names[order[i]], names[order[j]])
            for i in range(k) for j in range(i + 1, k) if rng.random() < p
        )
        dag = Dag(tuple(names), edges)
        for x, y in combinations(names, 2):
            rest = [v for v in names if v not in (x, y)]
            for m in range(0, min(2, len(rest)) + 1):
                for z in combinations(rest, m):
                    queries += 1
                    mismatches += d_separated(dag, x, y, z) != brute_d_separated(dag, x, y, z)
    assert report(7, mismatches == 0, f"{mismatches} mismatches over {queries} queries on 250 DAGs")


def test_criterion_8_calibration(report):
    err = phi_max_error(1000)
    rate = fisher_type1_rate(1000, 500)
    ok = err <= 1e-7 and 0.03 <= rate <= 0.07
    assert report(8, ok, f"max Phi error {err:.2e}, type-I rate {rate:.3f}")
