"""Independent brute-force oracles shared by the unit and acceptance tests."""
import numpy as np

from ratedro.rates import conditional_relative_entropy_batch


def markov_grid_oracle(L, s, r, res=1000):
    """Max of ``sum(L * theta)`` over a grid of balanced 2x2 doublets in the ball.

    Balance forces ``theta_12 = theta_21``, leaving two free coordinates.
    """
    a = np.arange(res + 1) / res
    A, B = np.meshgrid(a, a[: res // 2 + 1], indexing="ij")
    C = 1 - A - 2 * B
    ok = C >= -1e-12
    A, B, C = A[ok], B[ok], np.clip(C[ok], 0, None)
    th = np.stack([np.stack([A, B], -1), np.stack([B, C], -1)], 1)
    inside = conditional_relative_entropy_batch(np.asarray(s, float), th) <= r
    return float(np.max(np.einsum("ij,kij->k", L, th[inside])))


def random_balanced_2x2(rng):
    p, q = rng.dirichlet([1, 1, 1])[:2]
    q = q / 2
    return np.array([[p, q], [q, 1 - p - 2 * q]])
