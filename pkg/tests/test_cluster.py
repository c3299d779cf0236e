"""Cluster cascades and the total-progeny law.

Oracles are closed forms of the Borel-Tanner pmf head:
P(Z=1) = e^{-a}, P(Z=2) = a e^{-2a}, P(Z=3) = 1.5 a^2 e^{-3a},
with mean total size 1/(1-a) and generation means E[Z_n] = a^n.
"""

import math

import numpy as np
import pytest

import rhp
from rhp.errors import ClusterOverflowError, SubcriticalityError

ALPHA = 0.5
N_TREES = 20_000


@pytest.fixture(scope="module")
def trees():
    kernel = rhp.ExponentialKernel(ALPHA, 1.0)
    rng = rhp.substream(21)
    return [rhp.simulate_cluster(kernel, 0.0, rng) for _ in range(N_TREES)]


@pytest.fixture(scope="module")
def sizes(trees):
    return np.array([t.size for t in trees], dtype=float)


class TestSimulateCluster:
    def test_zero_alpha_is_bare_root(self, kernel0):
        t = rhp.simulate_cluster(kernel0, 3.0, rhp.substream(22))
        assert t.size == 1
        assert t.root_time == 3.0
        assert list(t.times) == [3.0]
        assert list(t.parents) == [-1]

    def test_tree_structure(self, trees):
        t = max(trees, key=lambda t: t.size)  # deepest tree in the batch
        assert t.size > 5
        assert t.generations[0] == 0 and t.parents[0] == -1
        off = np.arange(t.size)[t.generations > 0]
        assert np.all(t.times[t.parents[off]] < t.times[off])
        assert np.all(t.generations[t.parents[off]] == t.generations[off] - 1)
        assert t.generation_size(0) == 1  # Z_0 = 1 always

    def test_horizon_truncation(self, kernel05):
        for r in range(50):
            t = rhp.simulate_cluster(kernel05, 2.0, rhp.substream(23, r), horizon=4.0)
            assert np.all((t.times >= 2.0) & (t.times <= 4.0))
        t = rhp.simulate_cluster(kernel05, 2.0, rhp.substream(23, 99), horizon=2.0)
        assert t.size == 1  # displacements are strictly positive

    def test_overflow_guard(self):
        hot = rhp.ExponentialKernel(0.95, 1.0)
        with pytest.raises(ClusterOverflowError, match="nodes"):
            for r in range(200):  # some draw must exceed 20 nodes at alpha 0.95
                rhp.simulate_cluster(hot, 0.0, rhp.substream(24, r), max_nodes=20)

    def test_determinism(self, kernel05):
        a = rhp.simulate_cluster(kernel05, 0.0, rhp.substream(25, 0))
        b = rhp.simulate_cluster(kernel05, 0.0, rhp.substream(25, 0))
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.parents, b.parents)


class TestProgenyLaw:
    def test_mean_size(self, sizes, mean_within):
        mean_within(sizes, 1.0 / (1.0 - ALPHA))

    def test_size_one_frequency(self, sizes, mean_within):
        mean_within((sizes == 1).astype(float), math.exp(-ALPHA))

    def test_generation_means(self, trees, mean_within):
        for n in (1, 2, 3):
            zn = rhp.generation_counts(trees, n)
            mean_within(zn, ALPHA**n)

    def test_mean_se_helper(self, sizes):
        mean, se = rhp.total_progeny_mean_se(sizes)
        assert mean == pytest.approx(np.mean(sizes))
        assert se == pytest.approx(np.std(sizes, ddof=1) / math.sqrt(len(sizes)))
        with pytest.raises(ValueError):
            rhp.total_progeny_mean_se(np.array([1.0]))

    def test_mean_cluster_size(self, kernel05, kernel0):
        assert rhp.mean_cluster_size(kernel05) == pytest.approx(2.0)
        assert rhp.mean_cluster_size(kernel0) == pytest.approx(1.0)


class TestSizePmf:
    def test_head_closed_forms(self):
        a = ALPHA
        p = rhp.cluster_size_pmf(a, 3)
        assert p[0] == 0.0
        assert p[1] == pytest.approx(math.exp(-a), rel=1e-12)
        assert p[2] == pytest.approx(a * math.exp(-2 * a), rel=1e-12)
        assert p[3] == pytest.approx(1.5 * a * a * math.exp(-3 * a), rel=1e-12)

    def test_normalization_and_mean(self):
        p = rhp.cluster_size_pmf(ALPHA, 500)
        assert abs(p.sum() - 1.0) <= 1e-6
        n = np.arange(len(p))
        assert np.sum(n * p) == pytest.approx(1.0 / (1.0 - ALPHA), abs=1e-4)

    def test_zero_alpha(self):
        p = rhp.cluster_size_pmf(0.0, 4)
        assert list(p) == [0.0, 1.0, 0.0, 0.0, 0.0]

    def test_validation(self):
        with pytest.raises(SubcriticalityError):
            rhp.cluster_size_pmf(1.0, 10)
        with pytest.raises(SubcriticalityError):
            rhp.cluster_size_pmf(-0.1, 10)
        with pytest.raises(ValueError):
            rhp.cluster_size_pmf(0.5, 0)

    def test_empirical_head_matches(self, sizes, chi2_pvalue):
        n_max = 12
        p = rhp.cluster_size_pmf(ALPHA, n_max)
        observed = np.array([np.sum(sizes == k) for k in range(1, n_max + 1)], dtype=float)
        observed[-1] += np.sum(sizes > n_max)
        probs = p[1:].copy()  # size 0 is impossible, drop its empty cell
        probs[-1] += 1.0 - p.sum()
        assert chi2_pvalue(observed, probs) > 0.005
