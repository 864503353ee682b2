"""End-to-end reproductions of the heating and smoking simulations."""

from __future__ import annotations

import zlib
from pathlib import Path

import numpy as np

from . import models
from .dsep import d_separated
from .io import dumps_report
from .operators import Do, build_sfm, star
from .sampling import sample_dataset
from .scm import induce_dag
from .stats import fisher_z_test, partial_correlation, two_proportion_test
from .teleo import SimulatedAgent, detect_agent, discover_intention, markov_check, verify_sfm_hypothesis

N = 10_000
ALPHA = 0.05
MAX_COND = 1


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")


def derive_seed(seed: int, label: str) -> int:
    """Per-stage seed: first word of SeedSequence([seed, crc32(label)])."""
    return int(np.random.SeedSequence([seed, zlib.crc32(label.encode())]).generate_state(1)[0])


class _Stages:
    def __init__(self):
        self.current = "setup"

    def __call__(self, name: str):
        self.current = name
        return self

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.current, exc) from exc
        return False


def _pair_test(data, x, y, given=()):
    r = partial_correlation(data, x, y, given)
    res = fisher_z_test(r, data.n, len(given), ALPHA)
    return {"x": x, "y": y, "given": list(given), "r": r, **res.to_json()}


def run_repro_heating(seed: int = 0, out=None, n: int = N) -> dict:
    stage = _Stages()
    report: dict = {"experiment": "heating", "seed": seed, "n": n, "alpha": ALPHA, "max_cond": MAX_COND}
    with stage("causal"):
        model = models.heating()
        dag = induce_dag(model)
        causal = sample_dataset(model, n, derive_seed(seed, "causal"))
        mc = markov_check(dag, causal, model.endogenous_names, ALPHA, MAX_COND)
        report["causal"] = {
            "graph": {
                "H_W": d_separated(dag, "H", "W"),
                "H_W_given_T": d_separated(dag, "H", "W", ["T"]),
                "H_T": d_separated(dag, "H", "T"),
            },
            "tests": [
                _pair_test(causal, "H", "W"),
                _pair_test(causal, "H", "W", ["T"]),
                _pair_test(causal, "H", "T"),
            ],
            "markov": mc.to_json(),
        }
    with stage("agent"):
        policy = models.HEATING_POLICY
        sfm = build_sfm(model, policy.target, policy.policy)
        agent = sample_dataset(sfm, n, derive_seed(seed, "agent")).select(sfm.observed)
        detection = detect_agent(model, agent, ALPHA, MAX_COND)
        report["agent"] = {
            "policy": "if(T < 0.5, 1, 0)",
            "tests": [_pair_test(agent, star("H"), star("W"))],
            "detection": detection.to_json(),
        }
    with stage("verify"):
        verification = verify_sfm_hypothesis(sfm, agent, ALPHA, MAX_COND)
        report["verify"] = verification.to_json()
    report["verdicts"] = [mc.verdict, detection.markov.verdict, verification.verdict]
    report["expected_verdicts"] = ["consistent", "violated", "consistent"]
    if out is not None:
        Path(out).write_text(dumps_report(report), encoding="utf-8", newline="\n")
    return report


def _pmf(column) -> dict:
    k = int(column.sum())
    return {"0": (column.size - k) / column.size, "1": k / column.size}


def run_repro_smoking(seed: int = 0, out=None, n: int = N) -> dict:
    stage = _Stages()
    report: dict = {"experiment": "smoking", "seed": seed, "n": n, "alpha": ALPHA}
    col = star("S")
    with stage("baseline"):
        base = models.smoking()
        agent = SimulatedAgent(base, models.SMOKING_POLICY)
        baseline = agent(None, n, derive_seed(seed, "baseline")).column(col)
    with stage("do_D"):
        do_d = agent(Do("D", 0.0), n, derive_seed(seed, "do_D")).column(col)
    with stage("do_P"):
        do_p = agent(Do("P", 0.0), n, derive_seed(seed, "do_P")).column(col)
    with stage("compare"):
        k0 = int(baseline.sum())
        report["policy"] = "if(P > 1, 1, 0)"
        report["pmf"] = {"baseline": _pmf(baseline), "do(D=0)": _pmf(do_d), "do(P=0)": _pmf(do_p)}
        report["tests"] = {
            "do(D=0)": two_proportion_test(k0, n, int(do_d.sum()), n, ALPHA).to_json(),
            "do(P=0)": two_proportion_test(k0, n, int(do_p.sum()), n, ALPHA).to_json(),
        }
    with stage("discovery"):
        disc = discover_intention(
            base, agent, "S", ["P", "D"], n=n, alpha=ALPHA, seed=derive_seed(seed, "discovery"),
            value_pairs={"P": (0.0, 2.0), "D": (0.0, 1.0)},
        )
        report["discovery"] = disc.to_json()
    if out is not None:
        out = Path(out)
        out.write_text(dumps_report(report), encoding="utf-8", newline="\n")
        lines = ["regime,value,probability"]
        for regime, pmf in report["pmf"].items():
            lines.extend(f"{regime},{v},{p!r}" for v, p in pmf.items())
        out.with_suffix(".pmf.csv").write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return report
