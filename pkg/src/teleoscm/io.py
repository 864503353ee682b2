"""File formats: model JSON, intervention JSON, CSV datasets, DOT graphs, reports."""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .expr import ExprError, Expression, parse_expression, rename, to_source
from .operators import Counterfactual, Do, Intentional, InterventionSpec, Mechanism, TwinModel, star
from .sampling import Dataset
from .scm import (
    Bernoulli,
    Endogenous,
    Exogenous,
    ModelError,
    Normal,
    ScmModel,
    induce_full_graph,
    twin_partner,
)


class SchemaError(ValueError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer  # JSON pointer; "" is the whole document
        super().__init__(f"{pointer or '(document)'}: {message}")


def _obj(value, pointer, required, optional=()):
    if not isinstance(value, dict):
        raise SchemaError(pointer, "expected an object")
    for key in required:
        if key not in value:
            raise SchemaError(pointer, f"missing required key {key!r}")
    for key in value:
        if key not in required and key not in optional:
            raise SchemaError(f"{pointer}/{key}", "unknown key")
    return value


def _str(value, pointer) -> str:
    if not isinstance(value, str):
        raise SchemaError(pointer, "expected a string")
    return value


def _num(value, pointer) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(pointer, "expected a finite number")
    return float(value)


def _list(value, pointer) -> list:
    if not isinstance(value, list):
        raise SchemaError(pointer, "expected an array")
    return value


def _expr(value, pointer) -> Expression:
    try:
        return parse_expression(_str(value, pointer))
    except ExprError as exc:
        raise SchemaError(pointer, str(exc)) from None


def _distribution(value, pointer):
    kind = _obj(value, pointer, ("type",), ("p", "mean", "variance")).get("type")
    try:
        if kind == "bernoulli":
            _obj(value, pointer, ("type", "p"))
            return Bernoulli(_num(value["p"], f"{pointer}/p"))
        if kind == "normal":
            _obj(value, pointer, ("type", "mean", "variance"))
            return Normal(_num(value["mean"], f"{pointer}/mean"), _num(value["variance"], f"{pointer}/variance"))
    except ModelError as exc:
        raise SchemaError(pointer, str(exc)) from None
    raise SchemaError(f"{pointer}/type", f"unknown distribution type {kind!r}")


def model_from_json(doc: Any) -> ScmModel:
    """Build a model from parsed JSON; twin models carry an extra ``twin`` object."""
    _obj(doc, "", ("name", "endogenous", "exogenous"), ("twin",))
    name = _str(doc["name"], "/name")
    endo = []
    for i, item in enumerate(_list(doc["endogenous"], "/endogenous")):
        p = f"/endogenous/{i}"
        _obj(item, p, ("name", "exogenous", "equation"))
        endo.append(
            Endogenous(
                _str(item["name"], f"{p}/name"),
                _str(item["exogenous"], f"{p}/exogenous"),
                _expr(item["equation"], f"{p}/equation"),
            )
        )
    exo = []
    for i, item in enumerate(_list(doc["exogenous"], "/exogenous")):
        p = f"/exogenous/{i}"
        _obj(item, p, ("name", "distribution"))
        exo.append(Exogenous(_str(item["name"], f"{p}/name"), _distribution(item["distribution"], f"{p}/distribution")))
    model = ScmModel(name, tuple(endo), tuple(exo))
    if "twin" in doc:
        return _twin_from_json(model, doc["twin"])
    return model


def _twin_from_json(model: ScmModel, doc) -> TwinModel:
    p = "/twin"
    _obj(doc, p, ("kind", "target", "base_name"), ("evidence", "tolerance"))
    kind = _str(doc["kind"], f"{p}/kind")
    if kind not in ("counterfactual", "intentional"):
        raise SchemaError(f"{p}/kind", "expected 'counterfactual' or 'intentional'")
    target = _str(doc["target"], f"{p}/target")
    evidence = doc.get("evidence", {})
    _obj(evidence, f"{p}/evidence", (), tuple(evidence) if isinstance(evidence, dict) else ())
    ev = tuple((k, _num(v, f"{p}/evidence/{k}")) for k, v in evidence.items())
    tol = _num(doc.get("tolerance", 0.0), f"{p}/tolerance")

    base_vars = tuple(v for v in model.endogenous if twin_partner(v.name) is None)
    base = ScmModel(_str(doc["base_name"], f"{p}/base_name"), base_vars, model.exogenous)
    names = base.endogenous_names
    if target not in names:
        raise SchemaError(f"{p}/target", f"{target!r} is not a base endogenous variable")
    expected = tuple(star(n) for n in names)
    replicas = tuple(v for v in model.endogenous if twin_partner(v.name) is not None)
    if model.endogenous_names != names + expected:
        raise SchemaError("/endogenous", "twin models list the base variables, then their _star replicas in the same order")
    mapping = {n: star(n) for n in names}
    for b, r in zip(base.endogenous, replicas):
        if r.exogenous != b.exogenous:
            raise SchemaError("/endogenous", f"{r.name} must share exogenous {b.exogenous!r}")
        if b.name != target and r.equation != rename(b.equation, mapping):
            raise SchemaError("/endogenous", f"{r.name} must replicate the equation of {b.name}")
    observed = expected if kind == "intentional" else names
    return TwinModel(
        name=model.name,
        endogenous=model.endogenous,
        exogenous=model.exogenous,
        base=base,
        kind=kind,
        target=target,
        observed=observed,
        evidence=ev,
        tolerance=tol,
    )


def model_to_json(model: ScmModel) -> dict:
    doc: dict[str, Any] = {
        "name": model.name,
        "endogenous": [
            {"name": v.name, "exogenous": v.exogenous, "equation": to_source(v.equation)}
            for v in model.endogenous
        ],
        "exogenous": [{"name": u.name, "distribution": u.distribution.to_json()} for u in model.exogenous],
    }
    if isinstance(model, TwinModel):
        twin: dict[str, Any] = {"kind": model.kind, "target": model.target, "base_name": model.base.name}
        if model.evidence:
            twin["evidence"] = dict(model.evidence)
        if model.tolerance:
            twin["tolerance"] = model.tolerance
        doc["twin"] = twin
    return doc


def dumps_model(model: ScmModel) -> str:
    return json.dumps(model_to_json(model), indent=2) + "\n"


def read_model(path) -> ScmModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"not valid JSON: {exc}") from None
    return model_from_json(doc)


def write_model(model: ScmModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8", newline="\n")


# --------------------------------------------------------------------------
# Intervention specs


def spec_from_json(doc: Any) -> InterventionSpec:
    op = _obj(doc, "", ("op", "target"), ("value", "equation", "evidence")).get("op")
    target = _str(doc["target"], "/target")
    if op == "do":
        _obj(doc, "", ("op", "target", "value"))
        return Do(target, _num(doc["value"], "/value"))
    if op == "mechanism":
        _obj(doc, "", ("op", "target", "equation"))
        return Mechanism(target, _expr(doc["equation"], "/equation"))
    if op == "counterfactual":
        _obj(doc, "", ("op", "target", "value", "evidence"))
        ev = doc["evidence"]
        _obj(ev, "/evidence", (), tuple(ev) if isinstance(ev, dict) else ())
        return Counterfactual(
            target, _num(doc["value"], "/value"), {k: _num(v, f"/evidence/{k}") for k, v in ev.items()}
        )
    if op == "intentional":
        _obj(doc, "", ("op", "target", "equation"))
        return Intentional(target, _expr(doc["equation"], "/equation"))
    raise SchemaError("/op", f"unknown operator {op!r}")


def read_spec(path) -> InterventionSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"not valid JSON: {exc}") from None
    return spec_from_json(doc)


# --------------------------------------------------------------------------
# CSV


def dumps_csv(data: Dataset) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(data.columns)
    for row in data.values.tolist():
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()


def write_csv(data: Dataset, path) -> None:
    Path(path).write_text(dumps_csv(data), encoding="utf-8", newline="\n")


def read_csv(path, allowed: Iterable[str] | None = None) -> Dataset:
    """Read a dataset; ``allowed`` restricts which header names are accepted."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError("", "CSV file has no header row")
    header = tuple(rows[0])
    if allowed is not None:
        allowed = set(allowed)
        unknown = [h for h in header if h not in allowed]
        if unknown:
            raise SchemaError("", f"unknown column(s) in header: {', '.join(unknown)}")
    values = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError("", f"line {i} has {len(row)} fields, header has {len(header)}")
        try:
            values[i - 2] = [float(v) for v in row]
        except ValueError:
            raise SchemaError("", f"line {i} has a non-numeric field") from None
    return Dataset(header, values, {"path": str(path)})


# --------------------------------------------------------------------------
# DOT


def _q(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def dumps_dot(model: ScmModel) -> str:
    """Graphviz source: exogenous dashed, unobserved twin world gray."""
    gray: set[str] = set()
    if isinstance(model, TwinModel):
        gray = set(model.endogenous_names) - set(model.observed)
    lines = [f"digraph {_q(model.name)} {{"]
    if model.endogenous or model.exogenous:
        lines.append("  node [shape=ellipse];")
    for u in model.exogenous:
        lines.append(f"  {_q(u.name)} [style=dashed];")
    for v in model.endogenous:
        attrs = "style=solid" + (", color=gray, fontcolor=gray" if v.name in gray else "")
        lines.append(f"  {_q(v.name)} [{attrs}];")
    graph = induce_full_graph(model)
    exo = set(model.exogenous_names)
    rank = {n: i for i, n in enumerate(graph.vertices)}
    for a, b in sorted(graph.edges, key=lambda e: (rank[e[1]], rank[e[0]])):
        style = "dashed" if a in exo else "solid"
        color = ", color=gray" if b in gray else ""
        lines.append(f"  {_q(a)} -> {_q(b)} [style={style}{color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_dot(model: ScmModel, path) -> None:
    Path(path).write_text(dumps_dot(model), encoding="utf-8", newline="\n")


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
