import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from teleoscm.sampling import Dataset, sample_dataset
from teleoscm.stats import (
    DegenerateInput,
    TestResult,
    fisher_z_test,
    partial_correlation,
    std_normal_cdf,
    two_proportion_test,
)

from properties import fisher_type1_rate, phi_max_error

finite = st.floats(-40, 40, allow_nan=False)


def test_phi_examples():
    assert std_normal_cdf(0.0) == 0.5
    assert abs(std_normal_cdf(1.959964) - 0.975) <= 1e-6
    assert abs(std_normal_cdf(0.5) - 0.691462) <= 1e-6


def test_phi_against_oracle():
    assert phi_max_error(1000) <= 1e-7


@given(finite)
def test_phi_symmetry(z):
    assert abs(std_normal_cdf(z) + std_normal_cdf(-z) - 1.0) <= 1e-7


@given(finite, finite)
def test_phi_monotone(a, b):
    lo, hi = sorted((a, b))
    assert std_normal_cdf(lo) <= std_normal_cdf(hi)


def test_fisher_examples():
    assert fisher_z_test(0.0, 10_000).p_value == 1.0
    assert abs(fisher_z_test(0.0196, 10_000).p_value - 0.05) <= 0.002
    r = fisher_z_test(1.0, 100)
    assert r.p_value == 0.0 and r.dependent
    assert fisher_z_test(-1.0, 100).p_value == 0.0


def test_fisher_matches_mpmath():
    for r, n, k in [(0.03, 1000, 0), (0.1, 200, 1), (-0.25, 50, 2)]:
        z = mpmath.atanh(r) * mpmath.sqrt(n - k - 3)
        want = float(2 * (1 - mpmath.ncdf(abs(z))))
        assert abs(fisher_z_test(r, n, k).p_value - want) <= 1e-9


def test_fisher_errors():
    with pytest.raises(ValueError):
        fisher_z_test(0.1, 4, 1)
    with pytest.raises(ValueError):
        fisher_z_test(1.5, 100)


@given(st.floats(0, 0.99), st.floats(0, 0.99), st.integers(10, 10_000))
def test_fisher_monotone_in_r(a, b, n):
    lo, hi = sorted((a, b))
    assert fisher_z_test(hi, n).p_value <= fisher_z_test(lo, n).p_value


@given(st.floats(0.001, 0.99), st.integers(10, 5000), st.integers(10, 5000))
def test_fisher_monotone_in_n(r, a, b):
    lo, hi = sorted((a, b))
    assert fisher_z_test(r, hi).p_value <= fisher_z_test(r, lo).p_value


def test_two_proportion_examples():
    assert two_proportion_test(5000, 10_000, 5000, 10_000).p_value == 1.0
    r = two_proportion_test(5960, 10_000, 0, 10_000)
    assert r.p_value < 1e-10 and r.dependent
    assert two_proportion_test(0, 10, 0, 20).p_value == 1.0
    assert two_proportion_test(10, 10, 20, 20).p_value == 1.0
    with pytest.raises(ValueError):
        two_proportion_test(0, 0, 1, 10)
    with pytest.raises(ValueError):
        two_proportion_test(11, 10, 1, 10)


def test_two_proportion_matches_mpmath():
    k1, n1, k2, n2 = 560, 1000, 510, 1000
    p = mpmath.mpf(k1 + k2) / (n1 + n2)
    z = (mpmath.mpf(k1) / n1 - mpmath.mpf(k2) / n2) / mpmath.sqrt(p * (1 - p) * (1 / mpmath.mpf(n1) + 1 / mpmath.mpf(n2)))
    want = float(2 * (1 - mpmath.ncdf(abs(z))))
    assert abs(two_proportion_test(k1, n1, k2, n2).p_value - want) <= 1e-9


def test_result_invariants():
    r = TestResult(1.0, 0.04, 10, 0.05)
    assert r.dependent
    assert not TestResult(1.0, 0.05, 10, 0.05).dependent
    with pytest.raises(ValueError):
        TestResult(1.0, 1.5, 10, 0.05)


def test_partial_correlation_examples(heating):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(100)
    d = Dataset(("a", "b"), np.column_stack([x, x]))
    assert partial_correlation(d, "a", "b") == pytest.approx(1.0, abs=1e-12)
    rs = []
    for s in range(5):
        b = np.random.default_rng(s).random((10_000, 2)) < 0.5
        rs.append(partial_correlation(Dataset(("a", "b"), b.astype(float)), "a", "b"))
    assert abs(np.mean(rs)) < 0.03
    data = sample_dataset(heating, 10_000, seed=1)
    assert abs(partial_correlation(data, "W", "H", ["T"])) > 0.2


def test_partial_correlation_is_pearson_without_conditioning():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.standard_normal((200, 3))
        a[:, 1] += 0.5 * a[:, 0]
        d = Dataset(("x", "y", "z"), a)
        assert abs(partial_correlation(d, "x", "y") - np.corrcoef(a[:, 0], a[:, 1])[0, 1]) <= 1e-12


def test_partial_correlation_recursive_formula():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((500, 3))
    a[:, 0] += a[:, 2]
    a[:, 1] += a[:, 2]
    d = Dataset(("x", "y", "z"), a)
    c = np.corrcoef(a.T)
    want = (c[0, 1] - c[0, 2] * c[1, 2]) / math.sqrt((1 - c[0, 2] ** 2) * (1 - c[1, 2] ** 2))
    assert partial_correlation(d, "x", "y", ["z"]) == pytest.approx(want, abs=1e-10)


def test_partial_correlation_degenerate():
    d = Dataset(("x", "y"), np.column_stack([np.ones(50), np.arange(50.0)]))
    with pytest.raises(DegenerateInput):
        partial_correlation(d, "x", "y")
    small = Dataset(("x", "y", "z"), np.random.default_rng(0).standard_normal((4, 3)))
    with pytest.raises(DegenerateInput):
        partial_correlation(small, "x", "y", ["z"])


def test_type_one_rate():
    assert 0.03 <= fisher_type1_rate(1000, 500) <= 0.07
