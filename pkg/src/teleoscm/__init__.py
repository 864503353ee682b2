"""Structural causal models with intentional interventions.

Build SCMs, apply do / mechanism-change / counterfactual / intentional
operators, sample them, and run agent detection and intention discovery.
"""

from ._core import BACKEND
from .dsep import IndependenceStatement, d_separated, implied_independencies
from .expr import evaluate, free_variables, parse_expression, to_source
from .operators import (
    Counterfactual,
    Do,
    Intentional,
    Mechanism,
    TwinModel,
    apply_do,
    apply_mechanism_change,
    apply_spec,
    build_sfm,
    build_twin,
)
from .sampling import Dataset, rejection_condition, sample_dataset
from .scm import (
    Bernoulli,
    Dag,
    ModelError,
    Normal,
    ScmModel,
    descendants,
    induce_dag,
    induce_full_graph,
    make_model,
    parents,
    topological_order,
    validate_model,
)
from .stats import fisher_z_test, partial_correlation, std_normal_cdf, two_proportion_test
from .teleo import (
    SimulatedAgent,
    detect_agent,
    discover_intention,
    markov_check,
    verify_sfm_hypothesis,
)

__version__ = "0.1.0"

__all__ = [
    "apply_do",
    "apply_mechanism_change",
    "apply_spec",
    "BACKEND",
    "Bernoulli",
    "build_sfm",
    "build_twin",
    "Counterfactual",
    "d_separated",
    "Dag",
    "Dataset",
    "descendants",
    "detect_agent",
    "discover_intention",
    "Do",
    "evaluate",
    "fisher_z_test",
    "free_variables",
    "implied_independencies",
    "IndependenceStatement",
    "induce_dag",
    "induce_full_graph",
    "Intentional",
    "make_model",
    "markov_check",
    "Mechanism",
    "ModelError",
    "Normal",
    "parents",
    "parse_expression",
    "partial_correlation",
    "rejection_condition",
    "sample_dataset",
    "ScmModel",
    "SimulatedAgent",
    "std_normal_cdf",
    "to_source",
    "topological_order",
    "TwinModel",
    "two_proportion_test",
    "validate_model",
    "verify_sfm_hypothesis",
]
