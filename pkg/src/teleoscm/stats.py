"""Fisher z conditional-independence test and a pooled two-proportion test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

R_CLAMP = 1.0 - 1e-12


class DegenerateInput(ValueError):
    """Constant columns or too few rows for the requested test."""


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic: float
    p_value: float
    n: int
    decision_alpha: float

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")
        if not 0.0 < self.decision_alpha < 1.0:
            raise ValueError(f"alpha {self.decision_alpha} outside (0, 1)")

    @property
    def dependent(self) -> bool:
        return self.p_value < self.decision_alpha

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "alpha": self.decision_alpha,
            "dependent": self.dependent,
        }


def std_normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _two_sided(z: float) -> float:
    # 2 * (1 - Phi(|z|)) written without the cancellation in the tail
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def partial_correlation(data, x: str, y: str, given: Iterable[str] = ()) -> float:
    """Sample partial correlation of ``x`` and ``y`` given ``given``.

    Computed from least-squares residuals on ``[1, given...]``, which stays
    accurate when a conditioning column is a near-exact function of others.
    """
    given = list(given)
    n = data.n
    if n <= len(given) + 3:
        raise DegenerateInput(f"need more than {len(given) + 3} rows, got {n}")
    cols = {}
    for name in (x, y, *given):
        col = data.column(name)
        if np.ptp(col) == 0.0:
            raise DegenerateInput(f"column {name!r} is constant")
        cols[name] = col
    a = cols[x] - cols[x].mean()
    b = cols[y] - cols[y].mean()
    if given:
        Z = np.column_stack([cols[g] - cols[g].mean() for g in given])
        coef, *_ = np.linalg.lstsq(Z, np.column_stack([a, b]), rcond=None)
        res = np.column_stack([a, b]) - Z @ coef
        a, b = res[:, 0], res[:, 1]
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0.0:
        raise DegenerateInput(f"{x!r} or {y!r} is fully explained by the conditioning set")
    return float(np.clip(float(a @ b) / denom, -1.0, 1.0))


def fisher_z_test(r: float, n: int, cond_size: int = 0, alpha: float = 0.05) -> TestResult:
    if not abs(r) <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {r}")
    dof = n - cond_size - 3
    if dof <= 0:
        raise DegenerateInput(f"need n > {cond_size + 3}, got {n}")
    r = max(-R_CLAMP, min(R_CLAMP, r))
    z = math.atanh(r) * math.sqrt(dof)
    return TestResult(z, _two_sided(z), n, alpha)


def two_proportion_test(k1: int, n1: int, k2: int, n2: int, alpha: float = 0.05) -> TestResult:
    """Pooled two-sided z-test for equal proportions."""
    if n1 <= 0 or n2 <= 0:
        raise DegenerateInput("both samples need at least one observation")
    if not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise ValueError("successes must lie in [0, n]")
    pooled = (k1 + k2) / (n1 + n2)
    if pooled in (0.0, 1.0):
        return TestResult(0.0, 1.0, n1 + n2, alpha)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    z = (k1 / n1 - k2 / n2) / se
    return TestResult(z, _two_sided(z), n1 + n2, alpha)
