import numpy as np
import pytest

from ratedro.errors import DataError, DegenerateDataError, UsageError
from ratedro.processes import Family, FiniteIidModel, ParametricIidModel, Trajectory
from ratedro.statistics import (
    StatisticKind,
    ar_coefficients,
    asymptotic_statistic,
    doublet_distribution,
    empirical_distribution,
    sample_mean,
    scaled_sample_mean,
)


@pytest.mark.parametrize(
    "values,d,expected",
    [((1, 1, 2, 2), 2, (0.5, 0.5)), ((3,), 3, (0, 0, 1)), ((1, 2, 1, 1, 3), 3, (0.6, 0.2, 0.2))],
)
def test_empirical_distribution(values, d, expected):
    out = empirical_distribution(Trajectory(np.array(values)), d)
    np.testing.assert_allclose(out.value, expected)
    assert out.sample_size == len(values)


def test_empirical_state_out_of_range():
    with pytest.raises(DataError):
        empirical_distribution(Trajectory(np.array([1, 4])), 3)


def test_doublet_alternating():
    out = doublet_distribution(Trajectory(np.array([2, 1, 2, 1]), prepended_state=1), 2)
    np.testing.assert_allclose(out.value, [[0, 0.5], [0.5, 0]])


def test_doublet_self_loops():
    out = doublet_distribution(Trajectory(np.array([1, 1]), prepended_state=1), 2)
    np.testing.assert_allclose(out.value, [[1, 0], [0, 0]])


def test_doublet_needs_initial_state():
    with pytest.raises(DataError):
        doublet_distribution(Trajectory(np.array([1, 2])), 2)


def test_doublet_row_column_balance(rng):
    x = rng.integers(1, 4, size=37)
    s = doublet_distribution(Trajectory(x, prepended_state=2), 3).value
    assert np.max(np.abs(s.sum(axis=0) - s.sum(axis=1))) <= 1 / 37 + 1e-15


def test_scaled_sample_mean_examples():
    assert scaled_sample_mean(Trajectory(np.array([1.0, 2.0, 3.0])), 0.0).value == pytest.approx([2.0])
    assert scaled_sample_mean(Trajectory(np.array([2.0, 2.0])), 0.5).value == pytest.approx([1.0])
    out = scaled_sample_mean(Trajectory(np.array([[2.0, 2.0]])), np.diag([0.5, 0.0]))
    np.testing.assert_allclose(out.value, [1.0, 2.0])


def test_sample_mean_scalar():
    assert sample_mean(Trajectory(np.array([1.0, 2.0, 6.0]))).value == pytest.approx(3.0)


def test_ar_coefficients_examples():
    ls, yw = ar_coefficients(Trajectory(np.array([1.0, 1.0, 1.0])))
    assert ls.value == pytest.approx(1.0) and yw.value == pytest.approx(2 / 3)
    ls, yw = ar_coefficients(Trajectory(np.array([1.0, -1.0, 1.0])))
    assert ls.value == pytest.approx(-1.0) and yw.value == pytest.approx(-2 / 3)


def test_ar_degenerate():
    with pytest.raises(DegenerateDataError):
        ar_coefficients(Trajectory(np.array([0.0, 0.0])))


def test_asymptotic_statistic_examples():
    p = np.array([0.2, 0.8])
    np.testing.assert_allclose(asymptotic_statistic(FiniteIidModel(p), StatisticKind.EMPIRICAL_DIST), p)
    m = ParametricIidModel(Family.EXPONENTIAL, 2.0)
    assert asymptotic_statistic(m, StatisticKind.SAMPLE_MEAN) == pytest.approx(0.5)
    m = ParametricIidModel(Family.BINOMIAL, 0.5, 10)
    assert asymptotic_statistic(m, StatisticKind.SAMPLE_MEAN) == pytest.approx(5.0)


def test_asymptotic_statistic_incompatible():
    with pytest.raises(UsageError):
        asymptotic_statistic(FiniteIidModel([0.5, 0.5]), StatisticKind.SAMPLE_MEAN)
