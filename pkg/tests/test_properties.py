"""Property-based checks of the structural invariants."""
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ratedro.dro import (
    AmbiguitySpec,
    LossTable,
    ellipsoid_linear_worst_case,
    entropy_dro_dual,
    moment_set_worst_case,
    predictor,
    prescriptor,
    wasserstein_set_worst_case,
)
from ratedro.dro.markov import random_balanced_doublet, transition_center
from ratedro.harness import CurvePoint, read_curve_csv, write_csv
from ratedro.processes import Family, FiniteIidModel, ScalarArModel, Trajectory, simulate
from ratedro.rates import (
    ArKind,
    ar_rate,
    conditional_relative_entropy,
    cramer_rate,
    gaussian_quadratic_rate,
    relative_entropy,
)
from ratedro.statistics import StatisticKind, StatisticValue, ar_coefficients, empirical_distribution

PROPS = settings(max_examples=60, deadline=None)
seeds = st.integers(0, 2**63 - 1)
unit = st.floats(0.0, 1.0)


@st.composite
def simplex(draw, d=None, lo=1e-3):
    d = draw(st.integers(2, 6)) if d is None else d
    w = np.array(draw(st.lists(st.floats(lo, 1.0), min_size=d, max_size=d).filter(lambda v: sum(v) > 0)))
    return w / w.sum()


@st.composite
def balanced_doublet(draw, m=None):
    m = draw(st.integers(2, 4)) if m is None else m
    return random_balanced_doublet(m, np.random.default_rng(draw(seeds)))


# -- processes and statistics


@PROPS
@given(seeds, st.integers(1, 60), st.integers(1, 60))
def test_simulate_prefix(seed, t1, extra):
    for model in (FiniteIidModel([0.2, 0.8]), ScalarArModel(0.4)):
        a = simulate(model, t1, seed).values
        b = simulate(model, t1 + extra, seed).values
        np.testing.assert_array_equal(a, b[:t1])


@PROPS
@given(st.lists(st.integers(1, 5), min_size=1, max_size=80))
def test_empirical_is_multiple_of_one_over_T(values):
    s = empirical_distribution(Trajectory(np.array(values)), 5)
    T = len(values)
    counts = s.value * T
    np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)


@PROPS
@given(arrays(float, st.integers(2, 40), elements=st.floats(-10, 10)))
def test_yule_walker_in_open_interval(x):
    assume(np.dot(x[:-1], x[:-1]) > 1e-12)
    _, yw = ar_coefficients(Trajectory(x))
    assert -1 < yw.value < 1


# -- rate functions


@PROPS
@given(st.integers(2, 6).flatmap(lambda d: st.tuples(simplex(d, lo=0.0), simplex(d))))
def test_relative_entropy_nonnegative(pair):
    s, theta = pair
    assert relative_entropy(s, theta) >= 0
    assert relative_entropy(theta, theta) == 0


@PROPS
@given(st.floats(0.0, 1.0), st.floats(0.01, 0.99))
def test_bernoulli_two_point_reduction(s, theta):
    a = cramer_rate(Family.BERNOULLI, s, theta)
    b = relative_entropy([s, 1 - s], [theta, 1 - theta])
    assert a == pytest.approx(b, abs=1e-12)


@PROPS
@given(st.integers(2, 5).flatmap(lambda d: st.tuples(simplex(d), simplex(d), simplex(d))), unit)
def test_relative_entropy_convex_in_s(triple, w):
    s1, s2, theta = triple
    mid = w * s1 + (1 - w) * s2
    lhs = relative_entropy(mid, theta)
    rhs = w * relative_entropy(s1, theta) + (1 - w) * relative_entropy(s2, theta)
    assert lhs <= rhs + 1e-10


@PROPS
@given(st.integers(2, 4).flatmap(lambda m: st.tuples(balanced_doublet(m), balanced_doublet(m), balanced_doublet(m))), unit)
def test_conditional_relative_entropy_convex_in_s(triple, w):
    s1, s2, theta = triple
    mid = w * s1 + (1 - w) * s2
    lhs = conditional_relative_entropy(mid, theta)
    rhs = w * conditional_relative_entropy(s1, theta) + (1 - w) * conditional_relative_entropy(s2, theta)
    assert lhs <= rhs + 1e-10


LAMBDAS = np.arange(50) / 50.0


def assert_radially_monotone(values, full):
    values = np.asarray(values)
    assert np.all(np.diff(values) >= -1e-12)
    if full > 1e-6:
        assert np.all(np.diff(values) > 0)


@PROPS
@given(st.integers(2, 5).flatmap(lambda d: st.tuples(simplex(d), simplex(d))))
def test_radial_monotonicity_relative_entropy(pair):
    s, theta = pair
    vals = [relative_entropy(s, (1 - lam) * s + lam * theta) for lam in LAMBDAS]
    assert_radially_monotone(vals, relative_entropy(s, theta))


@PROPS
@given(st.integers(2, 4).flatmap(lambda m: st.tuples(balanced_doublet(m), balanced_doublet(m))))
def test_radial_monotonicity_conditional(pair):
    s, theta = pair
    c = transition_center(s)
    vals = [conditional_relative_entropy(s, (1 - lam) * c + lam * theta) for lam in LAMBDAS]
    assert_radially_monotone(vals, conditional_relative_entropy(s, theta))


@PROPS
@given(arrays(float, 2, elements=st.floats(-3, 3)), arrays(float, 2, elements=st.floats(-3, 3)))
def test_radial_monotonicity_gaussian(s, theta):
    S = np.array([[2.0, 0.3], [0.3, 1.0]])
    vals = [gaussian_quadratic_rate(s, (1 - lam) * s + lam * theta, S) for lam in LAMBDAS]
    assert_radially_monotone(vals, gaussian_quadratic_rate(s, theta, S))


@PROPS
@given(st.floats(-0.99, 0.99), st.floats(-1.0, 1.0), st.sampled_from([ArKind.LS, ArKind.YW]))
def test_radial_monotonicity_ar(s, theta, kind):
    vals = [ar_rate(s, (1 - lam) * s + lam * theta, kind) for lam in LAMBDAS]
    assert_radially_monotone(vals, ar_rate(s, theta, kind))


@PROPS
@given(st.floats(-2.0, 2.0), st.floats(-0.999, 0.999))
def test_yule_walker_ball_inside_least_squares_ball(s, theta):
    assert ar_rate(s, theta, ArKind.YW) >= ar_rate(s, theta, ArKind.LS)


# -- predictors


losses = st.integers(2, 5).flatmap(
    lambda d: st.tuples(arrays(float, d, elements=st.floats(-5, 5)), simplex(d))
)


@PROPS
@given(losses, st.floats(0, 1), st.floats(0, 1))
def test_entropy_monotone_in_radius_and_dominates_nominal(ls, r1, r2):
    l, s = ls
    lo, hi = sorted((r1, r2))
    a, b = entropy_dro_dual(l, s, lo).value, entropy_dro_dual(l, s, hi).value
    assert s @ l <= a + 1e-9
    assert a <= b + 1e-9


@PROPS
@given(losses, st.floats(0, 2), st.floats(0, 2))
def test_wasserstein_and_moment_monotone_in_radius(ls, e1, e2):
    l, s = ls
    lo, hi = sorted((e1, e2))
    for solve in (wasserstein_set_worst_case, lambda l, s, e: moment_set_worst_case(l, s, e, 2)):
        a, b = solve(l, s, lo).value, solve(l, s, hi).value
        assert s @ l <= a + 1e-9
        assert a <= b + 1e-9


@PROPS
@given(
    arrays(float, 2, elements=st.floats(-3, 3)),
    arrays(float, 2, elements=st.floats(-3, 3)),
    st.floats(0, 2),
    arrays(float, (2, 2), elements=st.floats(-2, 2)),
    arrays(float, 2, elements=st.floats(-2, 2)),
)
def test_ellipsoid_coordinate_invariance(a, s, r, M, c):
    assume(abs(np.linalg.det(M)) > 0.1)
    Sigma = np.array([[1.5, 0.2], [0.2, 0.7]])
    base = ellipsoid_linear_worst_case(a, 0.3, s, Sigma, r).value
    # Under u = M theta + c the same cost reads (M^{-T} a) u + (b - a M^{-1} c), the
    # statistic becomes M s + c and the covariance M Sigma M^T.
    Minv = np.linalg.inv(M)
    a_u = Minv.T @ a
    b_u = 0.3 - a @ Minv @ c
    moved = ellipsoid_linear_worst_case(a_u, b_u, M @ s + c, M @ Sigma @ M.T, r).value
    assert moved == pytest.approx(base, abs=1e-10 * max(1.0, abs(base)))


@PROPS
@given(
    st.integers(2, 4).flatmap(lambda d: st.tuples(arrays(float, (3, d), elements=st.floats(-5, 5)), simplex(d))),
    st.floats(-10, 10),
    st.sampled_from(["empirical", "penalized", "entropy", "wasserstein", "moment"]),
    st.floats(0, 0.5),
)
def test_uniform_shift_moves_values_not_decision(ls, c, kind, r):
    L, s = ls
    stat = StatisticValue(StatisticKind.EMPIRICAL_DIST, s, 10)
    spec = AmbiguitySpec(kind, r, moments=2)
    base = predictor(LossTable(L), stat, spec)
    moved = predictor(LossTable(L + c), stat, spec)
    for p, q in zip(base, moved):
        assert q.value == pytest.approx(p.value + c, abs=1e-7)
    values = np.array([p.value for p in base])
    gap = np.sort(values)[1] - values.min()
    assume(gap > 1e-6)
    assert prescriptor(base) == prescriptor(moved)


# -- CSV


finite = st.floats(allow_nan=False, allow_infinity=False)


@PROPS
@given(st.lists(st.tuples(st.integers(1, 10**6), st.integers(1, 10**6), unit, finite, finite, finite, finite), max_size=6))
def test_csv_round_trip(tmp_path_factory, rows):
    pts = [CurvePoint(T, n, p, a, b, c, "entropy", abs(r), 0) for T, n, p, a, b, c, r in rows]
    pts.sort(key=lambda pt: (pt.T, pt.spec, pt.radius))
    path = tmp_path_factory.mktemp("csv") / "c.csv"
    write_csv(pts, path)
    back = read_curve_csv(path)
    assert back == pts
