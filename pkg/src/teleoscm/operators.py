"""Model-to-model operators: do, mechanism change, counterfactual twins, SFMs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from .expr import Expression, Num, free_variables, parse_expression, rename
from .scm import (
    STAR,
    Endogenous,
    ModelError,
    ScmModel,
    descendants,
    induce_dag,
    require_valid,
    validate_model,
)


@dataclass(frozen=True)
class Do:
    target: str
    value: float


@dataclass(frozen=True)
class Mechanism:
    target: str
    equation: Expression


@dataclass(frozen=True)
class Counterfactual:
    target: str
    value: float
    evidence: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Intentional:
    target: str
    policy: Expression


InterventionSpec = Union[Do, Mechanism, Counterfactual, Intentional]


@dataclass(frozen=True)
class TwinModel(ScmModel):
    """Base world plus a ``_star`` replica sharing the exogenous variables.

    ``kind`` is ``"counterfactual"`` (unstarred world observed, replica
    intervened) or ``"intentional"`` (an SFM: replica observed, its target
    driven by a policy that reads the unstarred world).
    """

    base: ScmModel
    kind: str
    target: str
    observed: tuple[str, ...]
    evidence: tuple[tuple[str, float], ...] = ()
    tolerance: float = 0.0

    @property
    def starred_names(self) -> tuple[str, ...]:
        return tuple(star(n) for n in self.base.endogenous_names)


def star(name: str) -> str:
    return name + STAR


def apply_do(model: ScmModel, target: str, value: float) -> ScmModel:
    """Replace ``target``'s equation with the constant ``value``."""
    value = float(value)
    if not math.isfinite(value):
        raise ModelError("intervention value must be finite")
    return model.replace_equation(target, Num(value))


def apply_mechanism_change(model: ScmModel, target: str, equation: Expression | str) -> ScmModel:
    if isinstance(equation, str):
        equation = parse_expression(equation)
    var = model.variable(target)
    allowed = (set(model.endogenous_names) - {target}) | {var.exogenous}
    unknown = sorted(free_variables(equation) - allowed)
    if unknown:
        raise ModelError(f"mechanism for {target!r} reads {', '.join(unknown)}, which it may not")
    out = model.replace_equation(target, equation)
    problems = validate_model(out)
    if problems:
        raise ModelError("mechanism change yields an invalid model: " + "; ".join(map(str, problems)))
    return out


def _replica(model: ScmModel) -> list[Endogenous]:
    names = set(model.endogenous_names) | set(model.exogenous_names)
    clash = sorted(n for n in model.endogenous_names if star(n) in names)
    if clash:
        raise ModelError(f"replica names collide with existing variables: {', '.join(star(n) for n in clash)}")
    mapping = {n: star(n) for n in model.endogenous_names}
    return [Endogenous(star(v.name), v.exogenous, rename(v.equation, mapping)) for v in model.endogenous]


def _check_evidence(model: ScmModel, evidence: Mapping[str, float]) -> tuple[tuple[str, float], ...]:
    out = []
    for k, v in evidence.items():
        if k not in model.endogenous_names:
            raise ModelError(f"evidence variable {k!r} is not endogenous")
        out.append((k, float(v)))
    return tuple(out)


def _twin(model, target, equation, kind, observed, evidence, tolerance, suffix) -> TwinModel:
    require_valid(model)
    model.variable(target)
    replica = _replica(model)
    replica = [
        Endogenous(r.name, r.exogenous, equation) if r.name == star(target) else r for r in replica
    ]
    twin = TwinModel(
        name=f"{model.name}_{suffix}",
        endogenous=model.endogenous + tuple(replica),
        exogenous=model.exogenous,
        base=model,
        kind=kind,
        target=target,
        observed=observed,
        evidence=_check_evidence(model, evidence),
        tolerance=float(tolerance),
    )
    require_valid(twin)
    return twin


def build_twin(
    model: ScmModel,
    target: str,
    value: float,
    evidence: Mapping[str, float] | None = None,
    tolerance: float = 0.0,
) -> TwinModel:
    """Twin model for the counterfactual "had ``target`` been ``value``".

    The unstarred world is the observed one; sampling conditions the shared
    exogenous draws on ``evidence`` before evaluating both worlds.
    """
    value = float(value)
    if not math.isfinite(value):
        raise ModelError("counterfactual value must be finite")
    return _twin(
        model, target, Num(value), "counterfactual", model.endogenous_names,
        evidence or {}, tolerance, "twin",
    )


def build_sfm(
    model: ScmModel,
    target: str,
    policy: Expression | str,
    evidence: Mapping[str, float] | None = None,
    tolerance: float = 0.0,
    check_goals: bool = True,
) -> TwinModel:
    """Structural final model for an agent setting ``target_star := policy``.

    The policy reads unstarred (counterfactual, unintervened) variables, each of
    which must be a descendant of ``target`` (``target`` itself included) unless
    ``check_goals`` is off. Turn it off when ``model`` is itself the result of
    an experimenter's intervention and the goal check was done on the model the
    agent actually knows.
    """
    if isinstance(policy, str):
        policy = parse_expression(policy)
    require_valid(model)
    model.variable(target)
    goals = free_variables(policy)
    not_endo = sorted(g for g in goals if g not in model.endogenous_names)
    if not_endo:
        raise ModelError(f"policy reads {', '.join(not_endo)}; it may only read endogenous variables")
    if check_goals:
        desc = descendants(induce_dag(model), target)
        outside = sorted(goals - desc)
        if outside:
            raise ModelError(
                f"policy goal(s) {', '.join(outside)} are not descendants of {target!r}"
            )
    return _twin(
        model, target, policy, "intentional", tuple(star(n) for n in model.endogenous_names),
        evidence or {}, tolerance, "sfm",
    )


def apply_spec(model: ScmModel, spec: InterventionSpec) -> ScmModel:
    if isinstance(spec, Do):
        return apply_do(model, spec.target, spec.value)
    if isinstance(spec, Mechanism):
        return apply_mechanism_change(model, spec.target, spec.equation)
    if isinstance(spec, Counterfactual):
        return build_twin(model, spec.target, spec.value, spec.evidence)
    if isinstance(spec, Intentional):
        return build_sfm(model, spec.target, spec.policy)
    raise TypeError(f"unknown intervention spec {spec!r}")
