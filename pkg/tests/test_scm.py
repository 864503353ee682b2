import numpy as np
import pytest

from teleoscm.expr import free_variables
from teleoscm.scm import (
    Bernoulli,
    Dag,
    ModelError,
    Normal,
    descendants,
    induce_dag,
    induce_full_graph,
    is_acyclic,
    make_model,
    parents,
    topological_order,
    validate_model,
)

from randmodels import random_model


def rules(model):
    return {(v.rule, v.variable) for v in validate_model(model)}


def test_heating_is_valid(heating):
    assert validate_model(heating) == []


def test_self_reference_is_reported():
    m = make_model("m", [("X", "U_X", "X + U_X")], {"U_X": Bernoulli(0.5)})
    assert ("self-reference", "X") in rules(m)


def test_shared_exogenous_is_reported():
    m = make_model(
        "m", [("A", "U", "U"), ("B", "U", "U + A")], [("U", Bernoulli(0.5))]
    )
    assert ("partner", "U") in rules(m)


@pytest.mark.parametrize(
    "equations, noises, rule",
    [
        ([("X", "U_X", "Y")], {"U_X": Bernoulli(0.5)}, "unknown-variable"),
        ([("X", "U_X", "U_X"), ("Y", "U_Y", "U_X")], {"U_X": Bernoulli(0.5), "U_Y": Bernoulli(0.5)}, "foreign-exogenous"),
        ([("X", "U_Q", "1")], {"U_X": Bernoulli(0.5)}, "partner"),
        ([("X", "U_X", "Y + U_X"), ("Y", "U_Y", "X + U_Y")], {"U_X": Bernoulli(0.5), "U_Y": Bernoulli(0.5)}, "acyclic"),
        ([("X", "U_X", "U_X"), ("X", "U_Y", "U_Y")], {"U_X": Bernoulli(0.5), "U_Y": Bernoulli(0.5)}, "duplicate"),
        ([("if", "U_X", "U_X")], {"U_X": Bernoulli(0.5)}, "identifier"),
    ],
)
def test_other_violations(equations, noises, rule):
    m = make_model("m", equations, noises)
    assert rule in {v.rule for v in validate_model(m)}


def test_distribution_parameters_are_checked():
    with pytest.raises(ModelError):
        Bernoulli(1.5)
    with pytest.raises(ModelError):
        Normal(0.0, -1.0)
    Normal(0.0, 0.0)  # point mass allowed
    Bernoulli(0.0)


def test_heating_edges(heating):
    assert induce_dag(heating).edges == {("W", "T"), ("H", "T")}


def test_smoking_edges(smoking):
    assert induce_dag(smoking).edges == {("S", "P"), ("S", "D")}


def test_single_variable_has_no_edges():
    m = make_model("one", [("X", "U_X", "U_X")], {"U_X": Normal(0, 1)})
    assert induce_dag(m).edges == frozenset()


def test_cycle_is_an_error():
    m = make_model(
        "cyc", [("X", "U_X", "Y + U_X"), ("Y", "U_Y", "X")], {"U_X": Normal(0, 1), "U_Y": Normal(0, 1)}
    )
    with pytest.raises(ModelError, match="cycle"):
        induce_dag(m)


def test_parents(heating, smoking):
    assert parents(induce_dag(heating), "T") == {"W", "H"}
    assert parents(induce_dag(heating), "W") == set()
    assert parents(induce_dag(smoking), "P") == {"S"}
    with pytest.raises(ModelError):
        parents(induce_dag(heating), "Q")


def test_descendants(heating, smoking):
    assert descendants(induce_dag(smoking), "S") == {"S", "P", "D"}
    assert descendants(induce_dag(smoking), "P") == {"P"}
    assert descendants(induce_dag(heating), "H") == {"H", "T"}
    with pytest.raises(ModelError):
        descendants(induce_dag(heating), "Q")


def test_topological_order(heating):
    assert topological_order(induce_dag(heating)) == ["W", "H", "T"]
    assert topological_order(Dag(("c", "a", "b"), frozenset())) == ["c", "a", "b"]
    assert topological_order(Dag(("A", "B", "C"), frozenset({("A", "B"), ("B", "C")}))) == ["A", "B", "C"]
    assert topological_order(Dag(("C", "B", "A"), frozenset({("A", "B"), ("B", "C")}))) == ["A", "B", "C"]


def test_full_graph_includes_exogenous(heating):
    g = induce_full_graph(heating)
    assert g.vertices == ("U_W", "U_T", "U_H", "W", "T", "H")
    assert ("U_T", "T") in g.edges and ("W", "T") in g.edges


def test_dag_rejects_dangling_edges():
    with pytest.raises(ModelError):
        Dag(("a",), frozenset({("a", "b")}))


@pytest.mark.parametrize("seed", range(60))
def test_graph_properties_on_random_models(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    assert validate_model(model) == []
    dag = induce_dag(model)
    assert is_acyclic(dag)
    order = topological_order(dag)
    assert sorted(order) == sorted(dag.vertices)
    assert order == topological_order(dag)
    pos = {v: i for i, v in enumerate(order)}
    assert all(pos[a] < pos[b] for a, b in dag.edges)
    for v in dag.vertices:
        desc = descendants(dag, v)
        assert v in desc
        assert not (parents(dag, v) & desc)
    for v in model.endogenous:
        refs = {r for r in free_variables(v.equation) if r in model.endogenous_names}
        assert refs == set(parents(dag, v.name))
