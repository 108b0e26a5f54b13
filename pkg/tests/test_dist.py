import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import entropy as scipy_entropy

from entropic_causality.dist import (
    InfeasibleThreshold,
    as_dist,
    as_joint,
    conditional_profile,
    entropy,
    extended_entropy,
    sample_dirichlet,
    sample_low_entropy,
)


def dists(max_n=12):
    return st.lists(st.floats(0, 1), min_size=1, max_size=max_n).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: np.asarray(v) / sum(v)
    )


@pytest.mark.parametrize("p, h", [([0.5, 0.5], 1.0), ([1.0, 0.0, 0.0], 0.0)])
def test_entropy_trivial(p, h):
    assert entropy(p) == pytest.approx(h, abs=1e-12)


def test_entropy_against_scipy():
    assert entropy([0.6, 0.4]) == pytest.approx(scipy_entropy([0.6, 0.4], base=2), abs=1e-12)
    assert entropy([0.6, 0.4]) == pytest.approx(0.970951, abs=1e-6)


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [], [[0.5, 0.5]], [np.nan, 1.0]])
def test_as_dist_rejects(bad):
    with pytest.raises(ValueError):
        as_dist(bad)


def test_as_joint_rejects_bad_sum():
    with pytest.raises(ValueError):
        as_joint([[0.5, 0.1], [0.1, 0.1]])


@given(dists())
def test_entropy_bounds(p):
    h = entropy(p)
    assert 0.0 <= h <= math.log2(p.size) + 1e-12
    assert h == pytest.approx(scipy_entropy(p, base=2), abs=1e-9)


@given(dists(), st.randoms())
def test_entropy_permutation_invariant(p, r):
    q = list(p)
    r.shuffle(q)
    assert entropy(q) == pytest.approx(entropy(p), abs=1e-12)


def test_extended_entropy_examples():
    assert extended_entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert extended_entropy([0.25]) == pytest.approx(0.5)
    assert extended_entropy([]) == 0.0
    with pytest.raises(ValueError):
        extended_entropy([0.7, 0.6])


def test_conditional_profile_table1_slice():
    # three cause states, five exogenous states, 1-based function table
    fmap = np.array([[2, 3, 2, 1, 1], [3, 2, 3, 3, 1], [3, 1, 2, 3, 2]]) - 1
    x = np.array([0.2, 0.3, 0.5])
    e = np.array([0.1, 0.15, 0.2, 0.25, 0.3])
    j = np.zeros((3, 3))
    for i in range(3):
        for k in range(5):
            j[i, fmap[i, k]] += x[i] * e[k]
    fam, _ = conditional_profile(j, "X|Y")
    col = np.array([x[0] * (e[3] + e[4]), x[1] * e[4], x[2] * e[1]])
    np.testing.assert_allclose(fam.conds[0], col / col.sum(), atol=1e-12)


def test_conditional_profile_independent_and_diagonal():
    _, ents = conditional_profile(np.full((2, 2), 0.25), "X|Y")
    np.testing.assert_allclose(ents, [1.0, 1.0])
    _, ents = conditional_profile(np.eye(3) / 3, "X|Y")
    np.testing.assert_allclose(ents, 0.0)


def test_conditional_profile_zero_slice_and_axis():
    j = np.array([[0.5, 0.0], [0.5, 0.0]])
    fam, ents = conditional_profile(j, "X|Y")
    assert fam.conds[1] is None and fam.present() == [0]
    assert ents.tolist() == [1.0]
    fam, ents = conditional_profile(j, "Y|X")
    np.testing.assert_allclose(ents, [0.0, 0.0])
    with pytest.raises(ValueError):
        conditional_profile(j, "Z")


@given(st.integers(2, 6), st.integers(2, 6), st.integers(0, 2**31))
def test_profile_mixture_recovers_marginal(n, m, seed):
    rng = np.random.default_rng(seed)
    j = rng.dirichlet(np.ones(n * m)).reshape(n, m)
    fam, _ = conditional_profile(j, "X|Y")
    np.testing.assert_allclose(fam.mixture(), j.sum(axis=1), atol=1e-12)


def test_dirichlet_degenerate_and_deterministic():
    assert sample_dirichlet(1, 0.3, np.random.default_rng(0)).tolist() == [1.0]
    a = sample_dirichlet(3, 1.0, np.random.default_rng(9))
    b = sample_dirichlet(3, 1.0, np.random.default_rng(9))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_dirichlet(3, 0.0, np.random.default_rng(0))


def test_dirichlet_mean_uniform_simplex():
    rng = np.random.default_rng(1)
    n, draws = 1000, 10_000
    total = np.zeros(n)
    sq = np.zeros(n)
    for _ in range(draws):
        d = sample_dirichlet(n, 1.0, rng)
        total += d
        sq += d * d
    mean = total / draws
    # Var of a Dir(1) coordinate is (n - 1) / (n^2 (n + 1))
    se = math.sqrt((n - 1) / (n * n * (n + 1)) / draws)
    assert np.abs(mean - 1 / n).max() < 5 * se
    assert np.mean(np.abs(mean - 1 / n) < 3 * se) > 0.99


@given(st.integers(2, 8), st.floats(0.01, 10), st.integers(0, 2**31))
def test_dirichlet_on_simplex(n, alpha, seed):
    d = sample_dirichlet(n, alpha, np.random.default_rng(seed))
    assert d.shape == (n,) and np.all(d >= 0)
    assert d.sum() == pytest.approx(1.0, abs=1e-9)


def test_low_entropy_first_batch_accepts_at_log_n():
    rng = np.random.default_rng(3)
    d = sample_low_entropy(8, 3.0, rng, max_halvings=0)
    assert entropy(d) <= 3.0


def test_low_entropy_threshold_met():
    d = sample_low_entropy(16, 0.5, np.random.default_rng(4))
    assert entropy(d) <= 0.5


def test_low_entropy_iteration_cap():
    with pytest.raises(InfeasibleThreshold):
        sample_low_entropy(2, 1e-12, np.random.default_rng(5), max_halvings=2)


def test_low_entropy_count_rows():
    out = sample_low_entropy(6, 1.0, np.random.default_rng(6), count=3)
    assert out.shape == (3, 6)
    assert all(entropy(r) <= 1.0 for r in out)


@given(st.integers(2, 30), st.floats(0.05, 4.0), st.integers(0, 2**31))
def test_low_entropy_property(n, theta, seed):
    d = sample_low_entropy(n, theta, np.random.default_rng(seed))
    assert entropy(d) <= theta + 1e-12
