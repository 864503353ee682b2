"""Teleological inference: Markov checks, agent detection, intention discovery."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Mapping

import numpy as np

from .dsep import IndependenceStatement, d_separated, implied_independencies
from .operators import Do, Intentional, TwinModel, apply_do, build_sfm, star
from .sampling import Dataset, sample_dataset
from .scm import Dag, ModelError, ScmModel, descendants, induce_dag, induce_full_graph
from .stats import (
    DegenerateInput,
    TestResult,
    fisher_z_test,
    partial_correlation,
    two_proportion_test,
)


@dataclass(frozen=True)
class CheckedStatement:
    statement: IndependenceStatement
    result: TestResult | None
    note: str | None = None

    def to_json(self) -> dict:
        out = {"statement": self.statement.to_json(), "text": str(self.statement)}
        out["test"] = self.result.to_json() if self.result is not None else None
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class MarkovReport:
    tested: tuple[CheckedStatement, ...]
    alpha: float
    warnings: tuple[str, ...] = ()
    # d-connected pairs that nevertheless test independent; informational only
    unexplained_independencies: tuple[CheckedStatement, ...] = ()

    @property
    def violations(self) -> tuple[CheckedStatement, ...]:
        return tuple(c for c in self.tested if c.result is not None and c.result.dependent)

    @property
    def verdict(self) -> str:
        return "violated" if self.violations else "consistent"

    @property
    def vacuous(self) -> bool:
        return not self.tested

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "alpha": self.alpha,
            "vacuous": self.vacuous,
            "tested": [c.to_json() for c in self.tested],
            "violations": [c.to_json() for c in self.violations],
            "warnings": list(self.warnings),
            "unexplained_independencies": [c.to_json() for c in self.unexplained_independencies],
        }


def _check(data: Dataset, st: IndependenceStatement, alpha: float) -> CheckedStatement:
    try:
        r = partial_correlation(data, st.x, st.y, st.given)
        return CheckedStatement(st, fisher_z_test(r, data.n, len(st.given), alpha))
    except DegenerateInput as exc:
        return CheckedStatement(st, None, f"not tested: {exc}")


def _require_columns(data: Dataset, names: Iterable[str]) -> None:
    missing = sorted(set(names) - set(data.columns))
    if missing:
        raise KeyError(f"data is missing column(s) {', '.join(missing)}")


def markov_check(
    dag: Dag, data: Dataset, observed: Iterable[str], alpha: float = 0.05, max_cond: int = 1
) -> MarkovReport:
    """Test every independence the graph implies among ``observed``."""
    observed = sorted(set(observed))
    _require_columns(data, observed)
    tested = tuple(_check(data, st, alpha) for st in implied_independencies(dag, observed, max_cond))
    warnings = []
    if not tested:
        warnings.append("graph implies no independencies among the observed variables; consistency is vacuous")
    warnings.extend(f"{c.statement}: {c.note}" for c in tested if c.result is None)
    return MarkovReport(tested, alpha, tuple(warnings))


# --------------------------------------------------------------------------
# Agent detection


@dataclass(frozen=True)
class DetectionReport:
    markov: MarkovReport
    candidates: tuple[str, ...]
    # violated pair -> children the two variables share (collider localization)
    common_children: tuple[tuple[tuple[str, str], tuple[str, ...]], ...]

    @property
    def detected(self) -> bool:
        return self.markov.verdict == "violated"

    def to_json(self) -> dict:
        return {
            "detected": self.detected,
            "candidates": list(self.candidates),
            "localization": "heuristic: variables in violated statements and their shared children",
            "common_children": [
                {"pair": list(pair), "children": list(ch)} for pair, ch in self.common_children
            ],
            "markov": self.markov.to_json(),
        }


def unstar_columns(data: Dataset, names: Iterable[str]) -> Dataset:
    """Relabel ``X_star`` columns as ``X`` when the base names are absent."""
    names = list(names)
    if all(n in data.columns for n in names):
        return data
    if all(star(n) in data.columns for n in names):
        return data.rename({star(n): n for n in names})
    return data


def detect_agent(
    model: ScmModel, data: Dataset, alpha: float = 0.05, max_cond: int = 1
) -> DetectionReport:
    """Flag an intentional intervention as a Markov violation against ``model``'s DAG.

    A violation is sufficient evidence of an agent; its absence does not rule
    one out (e.g. an agent that sets its variable at random).
    """
    dag = induce_dag(model)
    data = unstar_columns(data, model.endogenous_names)
    report = markov_check(dag, data, model.endogenous_names, alpha, max_cond)
    candidates: set[str] = set()
    shared = []
    for c in report.violations:
        st = c.statement
        candidates.update((st.x, st.y))
        common = sorted(dag.children_of(st.x) & dag.children_of(st.y))
        shared.append(((st.x, st.y), tuple(common)))
    return DetectionReport(report, tuple(sorted(candidates)), tuple(shared))


def verify_sfm_hypothesis(
    sfm: TwinModel, data: Dataset, alpha: float = 0.05, max_cond: int = 1
) -> MarkovReport:
    """Markov check of observed data against a hypothesized SFM.

    Uses the SFM's full graph, exogenous vertices included, so backdoor paths
    through shared exogenous variables are accounted for. Also lists pairs the
    graph connects but the data shows independent (not part of the verdict).
    """
    graph = induce_full_graph(sfm)
    observed = list(sfm.observed)
    if not all(o in data.columns for o in observed) and sfm.kind == "intentional":
        data = data.rename({b: star(b) for b in sfm.base.endogenous_names})
    report = markov_check(graph, data, observed, alpha, max_cond)

    unexplained = []
    obs = sorted(observed)
    for x, y in combinations(obs, 2):
        rest = [v for v in obs if v not in (x, y)]
        for k in range(0, min(max_cond, len(rest)) + 1):
            for z in combinations(rest, k):
                if not d_separated(graph, x, y, z):
                    c = _check(data, IndependenceStatement.make(x, y, z), alpha)
                    if c.result is not None and not c.result.dependent:
                        unexplained.append(c)
    return MarkovReport(report.tested, alpha, report.warnings, tuple(unexplained))


# --------------------------------------------------------------------------
# Intention discovery

AgentSystem = Callable[[Do, int, int], Dataset]


class SimulatedAgent:
    """Sampling oracle: experimenter intervenes on the base system, agent then acts.

    The experimenter's ``do`` changes the mechanism in both worlds; the agent's
    policy is validated once against the unintervened model it knows.
    """

    def __init__(self, base: ScmModel, policy: Intentional):
        build_sfm(base, policy.target, policy.policy)
        self.base = base
        self.policy = policy

    def __call__(self, intervention: Do | None, n: int, seed: int) -> Dataset:
        model = self.base
        if intervention is not None:
            model = apply_do(model, intervention.target, intervention.value)
        sfm = build_sfm(model, self.policy.target, self.policy.policy, check_goals=False)
        return sample_dataset(sfm, n, seed).select(sfm.observed)


@dataclass(frozen=True)
class CandidateResult:
    name: str
    values: tuple[float, float]
    summaries: tuple[float, float]  # proportion (binary target) or mean of target_star
    test: TestResult

    def to_json(self) -> dict:
        return {
            "candidate": self.name,
            "interventions": [{"op": "do", "target": self.name, "value": v} for v in self.values],
            "target_summary": list(self.summaries),
            "test": self.test.to_json(),
        }


@dataclass(frozen=True)
class DiscoveryReport:
    target: str
    candidates: tuple[CandidateResult, ...]
    listened: tuple[str, ...]
    alpha: float
    corrected_alpha: float

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "alpha": self.alpha,
            "bonferroni_alpha": self.corrected_alpha,
            "candidates": [c.to_json() for c in self.candidates],
            "listened": list(self.listened),
        }


def default_value_pair(base: ScmModel, candidate: str, n: int, seed: int) -> tuple[float, float]:
    """(0, 1) for binary-valued candidates, else mean -/+ one standard deviation."""
    col = sample_dataset(base, n, seed).column(candidate)
    if np.all((col == 0.0) | (col == 1.0)):
        return (0.0, 1.0)
    mu, sd = float(col.mean()), float(col.std())
    return (mu - sd, mu + sd)


def _shift_test(low: np.ndarray, high: np.ndarray, alpha: float) -> tuple[tuple[float, float], TestResult]:
    binary = np.all((low == 0.0) | (low == 1.0)) and np.all((high == 0.0) | (high == 1.0))
    if binary:
        k1, k2 = int(low.sum()), int(high.sum())
        return (k1 / low.size, k2 / high.size), two_proportion_test(k1, low.size, k2, high.size, alpha)
    summaries = (float(low.mean()), float(high.mean()))
    values = np.concatenate([low, high])
    n = values.size
    if np.ptp(values) == 0.0:
        return summaries, TestResult(0.0, 1.0, n, alpha)
    regime = np.concatenate([np.zeros(low.size), np.ones(high.size)])
    r = float(np.corrcoef(regime, values)[0, 1])
    return summaries, fisher_z_test(float(np.clip(r, -1, 1)), n, 0, alpha)


def discover_intention(
    base: ScmModel,
    agent_system: AgentSystem,
    target: str,
    candidates: Iterable[str],
    n: int = 10_000,
    alpha: float = 0.05,
    seed: int = 0,
    value_pairs: Mapping[str, tuple[float, float]] | None = None,
) -> DiscoveryReport:
    """Find which descendants of ``target`` the agent's policy listens to.

    Each candidate is set to two values in turn and the distribution of
    ``target_star`` is compared across the two regimes. Both regimes reuse
    ``seed``, so everything but the manipulated candidate is held fixed.
    A candidate counts as listened to when its p-value beats the Bonferroni
    level ``alpha / len(candidates)``.
    """
    dag = induce_dag(base)
    desc = descendants(dag, target) - {target}
    candidates = list(dict.fromkeys(candidates))
    if not candidates:
        raise ModelError("no candidates given")
    bad = [c for c in candidates if c not in desc]
    if bad:
        raise ModelError(f"candidate(s) {', '.join(bad)} are not proper descendants of {target!r}")
    value_pairs = dict(value_pairs or {})
    corrected = alpha / len(candidates)
    col = star(target)
    results = []
    for c in candidates:
        lo, hi = value_pairs.get(c) or default_value_pair(base, c, n, seed)
        low = agent_system(Do(c, lo), n, seed).column(col)
        high = agent_system(Do(c, hi), n, seed).column(col)
        summaries, test = _shift_test(low, high, corrected)
        results.append(CandidateResult(c, (float(lo), float(hi)), summaries, test))
    listened = tuple(r.name for r in results if r.test.dependent)
    return DiscoveryReport(target, tuple(results), listened, alpha, corrected)
