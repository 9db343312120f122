"""Shared fixtures: seeded datasets, small solver configs, a brute-force simplex QP oracle."""

from itertools import combinations

import numpy as np
import pytest

from afcf.config import get_settings
from afcf.models.graph import SolverConfig
from afcf.services.dataset_service import validate_dataset


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Each test sees settings built from its own environment."""
    monkeypatch.delenv("AFCF_OUTPUT_DIR", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def make_dataset(sizes, d=2, seed=0, shift=3.0):
    """
    Groups of the given sizes; group r is centred at (r·shift, 0, …).

    Truth is the sign of the first feature around the global mean.
    """
    rng = np.random.default_rng(seed)
    groups = np.repeat(np.arange(len(sizes)), sizes)
    features = rng.standard_normal((d, groups.size))
    features[0] += shift * (rng.random(groups.size) < 0.5)
    truth = (features[0] > features[0].mean()).astype(np.int64)
    return validate_dataset(features, groups, truth)


@pytest.fixture
def balanced_dataset():
    """40 samples, two groups of 20: m = 8 gives exactly proportional quotas 4/4."""
    return make_dataset([20, 20], seed=1)


@pytest.fixture
def skewed_dataset():
    """30 + 10 samples: m = 8 gives quotas 6/2, again exactly proportional."""
    return make_dataset([30, 10], seed=2)


@pytest.fixture
def fast_solver():
    return SolverConfig(max_iter=60, fw_max_iter=100)


def qp_value(Q, c, z):
    return 0.5 * float(z @ Q @ z) + float(c @ z)


def simplex_qp_oracle(Q, c):
    """
    Exact min_{z∈Δ} ½zᵀQz + cᵀz for small m (Q positive definite).

    Enumerates supports S, solves the KKT system on the face
    {z_S ≥ 0, Σz_S = 1} and keeps the best nonnegative candidate.
    """
    m = Q.shape[0]
    best_val, best_z = np.inf, None
    for size in range(1, m + 1):
        for support in combinations(range(m), size):
            S = list(support)
            kkt = np.zeros((size + 1, size + 1))
            kkt[:size, :size] = Q[np.ix_(S, S)]
            kkt[:size, size] = 1.0
            kkt[size, :size] = 1.0
            rhs = np.concatenate([-c[S], [1.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            if (sol[:size] < -1e-12).any():
                continue
            z = np.zeros(m)
            z[S] = np.clip(sol[:size], 0.0, None)
            z /= z.sum()
            val = qp_value(Q, c, z)
            if val < best_val:
                best_val, best_z = val, z
    return best_z, best_val
