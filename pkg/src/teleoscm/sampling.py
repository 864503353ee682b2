"""Seeded ancestral sampling and rejection-based abduction.

Random streams
--------------
Shard ``k`` of a call with seed ``s`` draws from
``numpy.random.Generator(PCG64(SeedSequence([s, k])))``; an unsharded call is
shard 0. Within a shard, exogenous columns are drawn one after another in
declaration order: Bernoulli(p) as ``uniform < p`` and Normal(m, v) as
``m + sqrt(v) * standard_normal``. Two models with the same exogenous
declarations therefore see identical exogenous values for the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from . import _core
from .expr import EvaluationError, evaluate
from .scm import Bernoulli, ModelError, ScmModel, induce_dag, require_valid, topological_order

DEFAULT_MAX_TRIES = 10**6


class SamplingError(RuntimeError):
    pass


class InfeasibleEvidence(SamplingError):
    def __init__(self, message: str, acceptance_rate: float):
        self.acceptance_rate = acceptance_rate
        super().__init__(message)


@dataclass(frozen=True)
class Dataset:
    columns: tuple[str, ...]
    values: np.ndarray  # shape (n, len(columns)), float64
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != len(self.columns):
            raise ValueError("dataset values must be an n x len(columns) matrix")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("dataset column names must be unique")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"dataset has no column {name!r}") from None

    def select(self, names) -> "Dataset":
        idx = [self.columns.index(c) for c in names]
        return Dataset(tuple(names), self.values[:, idx], dict(self.provenance))

    def rename(self, mapping: Mapping[str, str]) -> "Dataset":
        return Dataset(tuple(mapping.get(c, c) for c in self.columns), self.values, dict(self.provenance))

    def equals(self, other: "Dataset") -> bool:
        """Bit-exact equality of columns and values."""
        return (
            self.columns == other.columns
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )


def shard_rng(seed: int, shard: int = 0) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, shard])))


def draw_exogenous(model: ScmModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exogenous draws, shape (n_exogenous, n), in declaration order."""
    out = np.empty((len(model.exogenous), n))
    for i, u in enumerate(model.exogenous):
        d = u.distribution
        if isinstance(d, Bernoulli):
            out[i] = rng.random(n) < d.p
        else:
            out[i] = d.mean + math.sqrt(d.variance) * rng.standard_normal(n)
    return out


@lru_cache(maxsize=256)
def _plan(model: ScmModel):
    require_valid(model)
    order = topological_order(induce_dag(model))
    names = model.exogenous_names + model.endogenous_names
    slots = {name: i for i, name in enumerate(names)}
    programs = [
        (name, slots[name], _core.compile_expression(model.variable(name).equation, slots))
        for name in order
    ]
    return slots, programs


def forward(model: ScmModel, exo: np.ndarray, run=None) -> np.ndarray:
    """Evaluate all endogenous equations given exogenous rows.

    ``exo`` has shape (n_exogenous, n). Returns shape (n_endogenous, n) in
    declaration order. ``run`` overrides the kernel (used by tests/benchmarks).
    """
    run = run or _core.run_program
    slots, programs = _plan(model)
    n = exo.shape[1]
    n_exo = len(model.exogenous)
    table = np.empty((n_exo + len(model.endogenous), n))
    table[:n_exo] = exo
    err = np.empty(n, dtype=np.uint8)
    for name, slot, prog in programs:
        out = table[slot]
        run(prog.codes, prog.args, prog.consts, table, out, err)
        bad = err.astype(bool) | ~np.isfinite(out)
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            env = {v: float(table[i, row]) for v, i in slots.items()}
            try:
                evaluate(model.variable(name).equation, env)
                detail = "non-finite result"
            except EvaluationError as exc:
                detail = str(exc)
            raise SamplingError(f"row {row}, variable {name!r}: {detail}")
    return table[n_exo:]


def _split(n: int, shards: int) -> list[int]:
    if shards < 1:
        raise ValueError("shards must be >= 1")
    base, extra = divmod(n, shards)
    return [base + (1 if k < extra else 0) for k in range(shards)]


def _evidence(model) -> tuple[dict, float]:
    ev = dict(getattr(model, "evidence", ()) or ())
    return ev, float(getattr(model, "tolerance", 0.0))


def sample_dataset(model: ScmModel, n: int, seed: int, shards: int = 1) -> Dataset:
    """Draw ``n`` i.i.d. rows; shard ``k`` uses the stream for ``(seed, k)``.

    Twin models that carry evidence draw their exogenous rows through
    :func:`rejection_condition` on the base model first.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    require_valid(model)
    evidence, tol = _evidence(model)
    parts = []
    for k, m in enumerate(_split(n, shards)):
        if evidence:
            exo = rejection_condition(model.base, evidence, tol, m, seed, shard=k).values.T
        else:
            exo = draw_exogenous(model, m, shard_rng(seed, k))
        parts.append(forward(model, np.ascontiguousarray(exo)).T)
    values = np.concatenate(parts, axis=0) if parts else np.empty((0, len(model.endogenous)))
    prov = {"model": model.name, "seed": seed, "n": n, "shards": shards}
    if getattr(model, "kind", None):
        prov["op"] = model.kind
    return Dataset(model.endogenous_names, values, prov)


def rejection_condition(
    model: ScmModel,
    evidence: Mapping[str, float],
    tolerance: float = 0.0,
    n: int = 1,
    seed: int = 0,
    max_tries: int = DEFAULT_MAX_TRIES,
    shard: int = 0,
) -> Dataset:
    """Exogenous rows whose forward evaluation matches ``evidence``.

    Draws are checked in stream order and the first ``n`` accepted rows are
    returned, so the result is the sequential draw-and-check outcome. Raises
    :class:`InfeasibleEvidence` once ``max_tries`` draws are used up.
    """
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    for name in evidence:
        if name not in model.endogenous_names:
            raise ModelError(f"evidence variable {name!r} is not endogenous")
    rng = shard_rng(seed, shard)
    idx = np.array([model.endogenous_names.index(k) for k in evidence], dtype=np.intp)
    target = np.array([float(v) for v in evidence.values()])[:, None]
    accepted: list[np.ndarray] = []
    got = 0
    tries = 0
    while got < n:
        remaining = max_tries - tries
        if remaining <= 0:
            rate = got / tries if tries else 0.0
            raise InfeasibleEvidence(
                f"evidence {dict(evidence)} accepted {got} of {tries} draws "
                f"(rate {rate:.3g}); needed {n}",
                rate,
            )
        rate = got / tries if got else 0.0
        want = (n - got) / rate * 1.1 if rate > 0 else (n - got) * 4
        batch = int(min(remaining, max(256, want)))
        exo = draw_exogenous(model, batch, rng)
        endo = forward(model, exo)
        ok = np.all(np.abs(endo[idx] - target) <= tolerance, axis=0)
        tries += batch
        if ok.any():
            rows = exo[:, ok]
            accepted.append(rows)
            got += rows.shape[1]
    values = np.concatenate(accepted, axis=1)[:, :n].T if accepted else np.empty((0, len(model.exogenous)))
    return Dataset(
        model.exogenous_names,
        values,
        {"model": model.name, "seed": seed, "n": n, "evidence": dict(evidence), "tries": tries},
    )
