"""d-separation queries and the independencies a graph implies.

``d_separated`` uses the reachable-by-active-trail search (Koller & Friedman,
Algorithm 3.1), which decides the same relation as checking every path for a
blocked chain/fork or an unactivated collider.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .scm import Dag, ModelError, ancestors


@dataclass(frozen=True, order=True)
class IndependenceStatement:
    x: str
    y: str
    given: tuple[str, ...] = ()

    @classmethod
    def make(cls, x: str, y: str, given: Iterable[str] = ()) -> "IndependenceStatement":
        given = tuple(sorted(set(given)))
        if x == y:
            raise ModelError("independence statement needs two distinct variables")
        if x in given or y in given:
            raise ModelError("conditioning set overlaps the tested pair")
        x, y = sorted((x, y))
        return cls(x, y, given)

    def __str__(self) -> str:
        cond = f" | {', '.join(self.given)}" if self.given else ""
        return f"{self.x} _||_ {self.y}{cond}"

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "given": list(self.given)}


def _reachable(dag: Dag, source: str, given: frozenset[str]) -> set[str]:
    """Vertices connected to ``source`` by an active trail given ``given``."""
    activating = ancestors(dag, given) if given else frozenset()
    # (vertex, arrived_from_child): True means travelling up against an edge
    frontier = [(source, True)]
    visited: set[tuple[str, bool]] = set()
    reached: set[str] = set()
    while frontier:
        v, up = frontier.pop()
        if (v, up) in visited:
            continue
        visited.add((v, up))
        if v not in given:
            reached.add(v)
        if up:
            if v not in given:
                frontier.extend((p, True) for p in dag.parents_of(v))
                frontier.extend((c, False) for c in dag.children_of(v))
        else:
            if v not in given:
                frontier.extend((c, False) for c in dag.children_of(v))
            if v in activating:
                frontier.extend((p, True) for p in dag.parents_of(v))
    return reached


def d_separated(dag: Dag, x: str, y: str, given: Iterable[str] = ()) -> bool:
    given = frozenset(given)
    for v in (x, y, *given):
        dag.check(v)
    if x == y:
        raise ModelError("d-separation needs two distinct variables")
    if x in given or y in given:
        raise ModelError("conditioning set overlaps the tested pair")
    return y not in _reachable(dag, x, given)


def implied_independencies(
    dag: Dag, observed: Iterable[str], max_cond: int = 1
) -> list[IndependenceStatement]:
    """Every (x, y | Z) over ``observed`` with |Z| <= max_cond that the graph implies."""
    obs = sorted(set(observed))
    for v in obs:
        dag.check(v)
    out = []
    for x, y in combinations(obs, 2):
        rest = [v for v in obs if v not in (x, y)]
        for k in range(0, min(max_cond, len(rest)) + 1):
            for z in combinations(rest, k):
                if d_separated(dag, x, y, z):
                    out.append(IndependenceStatement(x, y, z))
    out.sort()
    return out
