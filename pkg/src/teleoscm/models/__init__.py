"""The heating (collider) and smoking (fork) systems, shipped as model files."""

from __future__ import annotations

import json
from importlib import resources

from ..expr import parse_expression
from ..io import model_from_json
from ..operators import Intentional

HEATING_POLICY = Intentional("H", parse_expression("if(T < 0.5, 1, 0)"))
SMOKING_POLICY = Intentional("S", parse_expression("if(P > 1, 1, 0)"))


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.json")


def load(name: str):
    return model_from_json(json.loads(path(name).read_text(encoding="utf-8")))


def heating():
    return load("heating")


def smoking():
    return load("smoking")
