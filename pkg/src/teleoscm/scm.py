"""Structural causal models, their validation, and induced graphs."""

from __future__ import annotations

import dataclasses
import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .expr import IDENT_RE, Expression, free_variables, parse_expression

STAR = "_star"


class ModelError(ValueError):
    """Raised for invalid models or graph queries."""


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ModelError(f"bernoulli p must lie in [0, 1], got {self.p}")

    def to_json(self) -> dict:
        return {"type": "bernoulli", "p": self.p}


@dataclass(frozen=True)
class Normal:
    mean: float
    variance: float

    def __post_init__(self):
        if not math.isfinite(self.mean) or not math.isfinite(self.variance):
            raise ModelError("normal parameters must be finite")
        if self.variance < 0:
            raise ModelError(f"normal variance must be >= 0, got {self.variance}")

    def to_json(self) -> dict:
        return {"type": "normal", "mean": self.mean, "variance": self.variance}


DistributionSpec = Bernoulli | Normal


@dataclass(frozen=True)
class Endogenous:
    name: str
    exogenous: str
    equation: Expression


@dataclass(frozen=True)
class Exogenous:
    name: str
    distribution: DistributionSpec


@dataclass(frozen=True)
class ScmModel:
    """A Markovian SCM: one exogenous partner per endogenous variable.

    Declaration order of ``endogenous`` and ``exogenous`` is the canonical
    variable order everywhere (columns, tie-breaks).
    """

    name: str
    endogenous: tuple[Endogenous, ...]
    exogenous: tuple[Exogenous, ...]

    @cached_property
    def endogenous_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.endogenous)

    @cached_property
    def exogenous_names(self) -> tuple[str, ...]:
        return tuple(u.name for u in self.exogenous)

    def variable(self, name: str) -> Endogenous:
        for v in self.endogenous:
            if v.name == name:
                return v
        raise ModelError(f"unknown endogenous variable {name!r}")

    def replace_equation(self, target: str, equation: Expression) -> "ScmModel":
        self.variable(target)
        endo = tuple(
            Endogenous(v.name, v.exogenous, equation) if v.name == target else v
            for v in self.endogenous
        )
        return dataclasses.replace(self, endogenous=endo)


def make_model(
    name: str,
    equations: Iterable[tuple[str, str, str | Expression]],
    noises: Mapping[str, DistributionSpec] | Iterable[tuple[str, DistributionSpec]],
) -> ScmModel:
    """Convenience constructor: ``equations`` holds (name, exogenous, source)."""
    endo = tuple(
        Endogenous(n, u, parse_expression(eq) if isinstance(eq, str) else eq)
        for n, u, eq in equations
    )
    items = noises.items() if isinstance(noises, Mapping) else noises
    return ScmModel(name, endo, tuple(Exogenous(n, d) for n, d in items))


# --------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True)
class Dag:
    vertices: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pa: dict[str, set[str]] = {v: set() for v in self.vertices}
        ch: dict[str, set[str]] = {v: set() for v in self.vertices}
        if len(pa) != len(self.vertices):
            raise ModelError("duplicate vertex names")
        for a, b in self.edges:
            if a not in pa or b not in pa:
                raise ModelError(f"edge {a}->{b} has an endpoint outside the vertex set")
            pa[b].add(a)
            ch[a].add(b)
        object.__setattr__(self, "_parents", {v: frozenset(s) for v, s in pa.items()})
        object.__setattr__(self, "_children", {v: frozenset(s) for v, s in ch.items()})

    def check(self, v: str) -> None:
        if v not in self._parents:
            raise ModelError(f"unknown vertex {v!r}")

    def parents_of(self, v: str) -> frozenset[str]:
        self.check(v)
        return self._parents[v]

    def children_of(self, v: str) -> frozenset[str]:
        self.check(v)
        return self._children[v]


def parents(dag: Dag, v: str) -> frozenset[str]:
    return dag.parents_of(v)


def descendants(dag: Dag, v: str) -> frozenset[str]:
    """All vertices reachable from ``v`` by a directed path, ``v`` included."""
    dag.check(v)
    seen = {v}
    stack = [v]
    while stack:
        for c in dag._children[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def ancestors(dag: Dag, vs: Iterable[str]) -> frozenset[str]:
    seen = set()
    stack = list(vs)
    for v in stack:
        dag.check(v)
    seen.update(stack)
    while stack:
        for p in dag._parents[stack.pop()]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


def topological_order(dag: Dag) -> list[str]:
    """Kahn's algorithm, always emitting the earliest-declared ready vertex."""
    indeg = {v: len(dag._parents[v]) for v in dag.vertices}
    rank = {v: i for i, v in enumerate(dag.vertices)}
    ready = [rank[v] for v in dag.vertices if indeg[v] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        v = dag.vertices[heapq.heappop(ready)]
        order.append(v)
        for c in dag._children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, rank[c])
    if len(order) != len(dag.vertices):
        done = set(order)
        stuck = [v for v in dag.vertices if v not in done]
        raise ModelError(f"graph has a cycle through {', '.join(stuck)}")
    return order


def is_acyclic(dag: Dag) -> bool:
    try:
        topological_order(dag)
    except ModelError:
        return False
    return True


def _graph(model: ScmModel, include_exogenous: bool) -> Dag:
    endo = set(model.endogenous_names)
    exo = set(model.exogenous_names)
    edges = set()
    for v in model.endogenous:
        for name in free_variables(v.equation):
            if name in endo or (include_exogenous and name in exo):
                edges.add((name, v.name))
    vertices = model.endogenous_names
    if include_exogenous:
        vertices = model.exogenous_names + vertices
    return Dag(tuple(vertices), frozenset(edges))


def induce_dag(model: ScmModel) -> Dag:
    """Graph over endogenous variables: A -> B iff A appears in B's equation."""
    dag = _graph(model, include_exogenous=False)
    topological_order(dag)
    return dag


def induce_full_graph(model: ScmModel) -> Dag:
    """Graph over exogenous and endogenous variables.

    Exogenous vertices only get an edge into the equations that actually read
    them, so an intervened variable's partner is left dangling.
    """
    dag = _graph(model, include_exogenous=True)
    topological_order(dag)
    return dag


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    rule: str
    variable: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.variable}: {self.message}"


def twin_partner(name: str) -> str | None:
    """``X`` for ``X_star``; None for unstarred names."""
    return name[: -len(STAR)] if name.endswith(STAR) and len(name) > len(STAR) else None


def validate_model(model: ScmModel) -> list[Violation]:
    """Check every structural invariant; an empty list means the model is valid.

    Replica variables ``X_star`` may share the exogenous partner of ``X`` (twin
    models); any other sharing is a violation.
    """
    out: list[Violation] = []
    endo_names = model.endogenous_names
    exo_names = model.exogenous_names
    endo = set(endo_names)
    exo = set(exo_names)

    for kind, names in (("endogenous", endo_names), ("exogenous", exo_names)):
        seen = set()
        for n in names:
            if not IDENT_RE.match(n) or n in ("and", "or", "not", "if"):
                out.append(Violation("identifier", n, f"invalid {kind} name"))
            if n in seen:
                out.append(Violation("duplicate", n, f"duplicate {kind} name"))
            seen.add(n)
    for n in endo & exo:
        out.append(Violation("duplicate", n, "name used for both an endogenous and an exogenous variable"))

    users: dict[str, list[str]] = {}
    for v in model.endogenous:
        if v.exogenous not in exo:
            out.append(Violation("partner", v.name, f"exogenous partner {v.exogenous!r} is not declared"))
        users.setdefault(v.exogenous, []).append(v.name)
        for ref in sorted(free_variables(v.equation)):
            if ref == v.name:
                out.append(Violation("self-reference", v.name, "equation references its own variable"))
            elif ref in exo:
                if ref != v.exogenous:
                    out.append(Violation("foreign-exogenous", v.name, f"equation reads {ref!r}, which is not its partner"))
            elif ref not in endo:
                out.append(Violation("unknown-variable", v.name, f"equation reads undeclared variable {ref!r}"))

    for u in exo_names:
        names = users.get(u, [])
        if not names:
            out.append(Violation("partner", u, "exogenous variable has no endogenous partner"))
            continue
        bases = {twin_partner(n) or n for n in names}
        ok = len(bases) == 1 and len(names) == len(set(names)) and len(names) <= 2
        if len(names) == 2:
            ok = ok and sum(twin_partner(n) is not None for n in names) == 1
        if not ok:
            out.append(Violation("partner", u, f"shared by {', '.join(names)}"))

    if not any(v.rule in ("unknown-variable", "duplicate") for v in out):
        dag = _graph(model, include_exogenous=False)
        if not is_acyclic(dag):
            out.append(Violation("acyclic", model.name, "induced graph has a cycle"))
    return out


def require_valid(model: ScmModel) -> None:
    problems = validate_model(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(map(str, problems)))
