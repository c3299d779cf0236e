import math

import numpy as np
import pytest
from scipy import stats as sps

import rhp


@pytest.fixture
def exp1():
    return rhp.Exponential(1.0)


@pytest.fixture
def exp2():
    return rhp.Exponential(2.0)


@pytest.fixture
def gamma21():
    return rhp.Gamma(2.0, 1.0)


@pytest.fixture
def kernel05():
    return rhp.ExponentialKernel(0.5, 1.0)


@pytest.fixture
def kernel0():
    return rhp.ExponentialKernel(0.0, 1.0)


@pytest.fixture
def triangle_model():
    """Tabulated triangle density on [0, 2] (mean 1, bounded support)."""
    grid = np.linspace(0.0, 2.0, 81)
    dens = np.where(grid <= 1.0, grid, 2.0 - grid)
    dens = dens / np.trapezoid(dens, grid)
    return rhp.Tabulated(grid, dens)


@pytest.fixture
def chi2_pvalue():
    """Chi-square gof p-value with expected-count >= 5 tail merging."""

    def _run(observed_counts: np.ndarray, probabilities: np.ndarray) -> float:
        observed_counts = np.asarray(observed_counts, dtype=float)
        probabilities = np.asarray(probabilities, dtype=float)
        n = observed_counts.sum()
        expected = probabilities * n
        cut = int(np.max(np.nonzero(expected >= 5.0)[0]))
        obs = np.append(observed_counts[:cut], observed_counts[cut:].sum())
        exp = np.append(expected[:cut], expected[cut:].sum())
        exp = exp * obs.sum() / exp.sum()
        return float(sps.chisquare(obs, exp).pvalue)

    return _run


@pytest.fixture
def mean_within():
    """Assert |mean(samples) - target| <= z * SE and return the z-score."""

    def _run(samples, target: float, z: float = 3.0) -> float:
        samples = np.asarray(samples, dtype=float)
        se = float(np.std(samples, ddof=1) / math.sqrt(len(samples)))
        score = abs(float(np.mean(samples)) - target) / se
        assert score <= z, f"mean {np.mean(samples):.6g} vs {target:.6g}: {score:.2f} SE"
        return score

    return _run
