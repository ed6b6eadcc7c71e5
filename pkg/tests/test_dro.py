import math

import numpy as np
import pytest
from oracles import markov_grid_oracle, random_balanced_2x2

from ratedro.dro import (
    AmbiguitySpec,
    Branch,
    ar_ball_interval,
    ar_ball_worst_case,
    ellipsoid_linear_worst_case,
    entropy_dro_dual,
    entropy_dual_batch,
    entropy_primal_oracle,
    markov_ball_worst_case,
    moment_set_worst_case,
    wasserstein_batch,
    wasserstein_set_worst_case,
)
from ratedro.errors import DomainError, ParameterDomainError
from ratedro.rates import ArKind, relative_entropy

# -- entropy ball


def test_entropy_radius_zero_is_expected_cost():
    l, s = np.array([3.0, -1.0, 2.0]), np.array([0.2, 0.5, 0.3])
    assert entropy_dro_dual(l, s, 0.0).value == pytest.approx(s @ l, abs=1e-12)


@pytest.mark.parametrize("r", [0.05, 0.5, 2.0])
def test_entropy_point_mass(r):
    l = np.array([1.0, 4.0, 2.0])
    s = np.array([1.0, 0.0, 0.0])
    expected = math.exp(-r) * 1.0 + (1 - math.exp(-r)) * 4.0
    assert entropy_dro_dual(l, s, r).value == pytest.approx(expected, abs=1e-8)


def test_entropy_two_point_example():
    out = entropy_dro_dual([0.0, 1.0], [0.5, 0.5], 0.1)
    assert out.value == pytest.approx(0.7128786315, abs=1e-8)
    theta = out.worst_case_model
    assert theta.sum() == pytest.approx(1.0)
    assert relative_entropy([0.5, 0.5], theta) <= 0.1 + 1e-7


def test_entropy_off_simplex():
    with pytest.raises(DomainError):
        entropy_dro_dual([0.0, 1.0], [0.7, 0.7], 0.1)


def test_entropy_batch_matches_single(rng):
    L = rng.normal(size=(20, 4))
    S = rng.dirichlet(np.ones(4), size=20)
    vals, _ = entropy_dual_batch(L, S, 0.2)
    for k in range(20):
        assert vals[k] == pytest.approx(entropy_dro_dual(L[k], S[k], 0.2).value, abs=1e-10)


def test_primal_oracle_agrees_with_dual(rng):
    for _ in range(5):
        d = int(rng.integers(2, 7))
        l, s, r = rng.normal(size=d), rng.dirichlet(np.ones(d)), float(rng.random())
        primal = entropy_primal_oracle(l, s, r, screen=20_000)
        assert primal == pytest.approx(entropy_dro_dual(l, s, r).value, abs=1e-6)


def test_primal_oracle_radius_zero():
    l, s = np.array([1.0, 2.0]), np.array([0.3, 0.7])
    assert entropy_primal_oracle(l, s, 0.0) == pytest.approx(1.7, abs=1e-8)


def test_primal_oracle_monotone_in_radius():
    l, s = np.array([0.0, 2.0, 1.0]), np.array([0.5, 0.2, 0.3])
    vals = [entropy_primal_oracle(l, s, r, screen=10_000) for r in (0.0, 0.05, 0.2, 0.6)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# -- polytope sets


def test_moment_examples():
    assert moment_set_worst_case([0.0, 1.0], [0.5, 0.5], 0.0, 1).value == pytest.approx(0.5)
    assert moment_set_worst_case([0.0, 1.0, 0.0], [1 / 3] * 3, 0.0, 1).value == pytest.approx(1.0)
    assert moment_set_worst_case([1.0, 5.0, 2.0], [0.5, 0.2, 0.3], 1e6, 4).value == pytest.approx(5.0)


def test_wasserstein_examples():
    assert wasserstein_set_worst_case([0.0, 1.0], [0.5, 0.5], 0.2).value == pytest.approx(0.7)
    assert wasserstein_set_worst_case([2.0, 1.0], [0.5, 0.5], 0.0).value == pytest.approx(1.5)
    s = np.array([0.2, 0.3, 0.5])
    l = np.array([1.0, 3.0, 0.0])
    eps = float(s @ np.abs(np.arange(3) - 1))
    assert wasserstein_set_worst_case(l, s, eps).value == pytest.approx(3.0)


def test_wasserstein_batch_matches_lp(rng):
    L = rng.normal(size=(4, 6))
    S = rng.dirichlet(np.ones(6), size=15)
    for eps in (0.0, 0.1, 0.7, 3.0):
        batch = wasserstein_batch(L, S, eps)
        for i in range(len(S)):
            for x in range(len(L)):
                assert batch[i, x] == pytest.approx(wasserstein_set_worst_case(L[x], S[i], eps).value, abs=1e-9)


# -- continuous balls


def test_ellipsoid_examples():
    s = np.array([0.3, -0.2])
    assert ellipsoid_linear_worst_case([1, 0], 0.0, s, np.eye(2), 0.0).value == pytest.approx(0.3)
    assert ellipsoid_linear_worst_case([1, 0], 0.0, s, np.eye(2), 0.5).value == pytest.approx(1.3)
    out = ellipsoid_linear_worst_case([1, 1], 0.0, s, np.diag([1.0, 4.0]), 2.0)
    assert out.value == pytest.approx(0.1 + 4.472135955, abs=1e-9)


def test_ellipsoid_singular():
    with pytest.raises(DomainError):
        ellipsoid_linear_worst_case([1, 0], 0.0, [0, 0], np.ones((2, 2)), 1.0)


def test_ar_ball_radius_zero():
    lo, hi = ar_ball_interval(0.3, 0.0, ArKind.LS)
    assert lo == pytest.approx(0.3, abs=1e-9) and hi == pytest.approx(0.3, abs=1e-9)
    out = ar_ball_worst_case(lambda t: (t - 1) ** 2, 0.3, 0.0, ArKind.LS)
    assert out.value == pytest.approx(0.49, abs=1e-8)


def test_ar_ball_interval_example():
    lo, hi = ar_ball_interval(0.0, 0.1, ArKind.LS)
    assert hi == pytest.approx(0.4705345451, abs=1e-9)
    assert lo == pytest.approx(-0.4705345451, abs=1e-9)


def test_ar_ball_empty():
    out = ar_ball_worst_case(lambda t: t, 2.0, 0.5, ArKind.LS)
    assert out.branch is Branch.BALL_EMPTY
    assert out.value == pytest.approx(1.0)


# -- Markov ball


def test_markov_radius_zero():
    s = np.array([[0.4, 0.1], [0.1, 0.4]])
    L = np.array([[1.0, 0.0], [2.0, 3.0]])
    assert markov_ball_worst_case(L, s, 0.0).value == pytest.approx(np.sum(L * s), abs=1e-8)


def test_markov_matches_grid_oracle(rng):
    for _ in range(3):
        s = random_balanced_2x2(rng)
        L = rng.random((2, 2))
        r = float(rng.random() * 0.5)
        assert markov_ball_worst_case(L, s, r).value == pytest.approx(markov_grid_oracle(L, s, r), abs=5e-3)


def test_markov_monotone_in_radius():
    s = np.array([[0.3, 0.2], [0.2, 0.3]])
    L = np.array([[0.0, 1.0], [0.5, 2.0]])
    vals = [markov_ball_worst_case(L, s, r).value for r in (0.0, 0.05, 0.2)]
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9


def test_markov_shape_mismatch():
    with pytest.raises(DomainError):
        markov_ball_worst_case(np.zeros((3, 3)), np.full((2, 2), 0.25), 0.1)


def test_spec_validation():
    with pytest.raises(ParameterDomainError):
        AmbiguitySpec("entropy", -0.1)
    with pytest.raises(ParameterDomainError):
        AmbiguitySpec("ar", 0.1)
    with pytest.raises(ParameterDomainError):
        AmbiguitySpec("ellipsoid", 0.1)
