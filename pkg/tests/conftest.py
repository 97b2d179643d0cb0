import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from ptflat import LatticeParams


def multiset_distance(a, b) -> float:
    """Largest pairwise gap under the best one-to-one matching of two complex multisets."""
    a, b = np.asarray(a, dtype=complex).ravel(), np.asarray(b, dtype=complex).ravel()
    assert a.shape == b.shape
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def random_params(rng, **fixed) -> LatticeParams:
    values = dict(gamma=rng.uniform(0, 2), v=rng.uniform(0, 3), j_coupling=rng.uniform(0, 2),
                  r=rng.uniform(0.05, 2), phi=rng.uniform(-math.pi, math.pi))
    values.update(fixed)
    return LatticeParams(**values)


CHIRAL_CHAIN = dict(v=1.5, j_coupling=1.0, r=1.0, phi=math.pi / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
