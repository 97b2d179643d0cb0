import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptflat.cubic import CubicCoefficients, cubic_residual_scale, solve_cubic, solve_cubic_batch
from conftest import multiset_distance

coef = st.floats(-50, 50, allow_nan=False)


def residual_ok(p, q, roots):
    scale = max(1.0, abs(p) ** 1.5, abs(q))
    return np.abs(roots ** 3 + p * roots + q).max() <= 1e-12 * scale


def test_simple_factorization():
    np.testing.assert_allclose(solve_cubic(CubicCoefficients(-1, 0)), [-1, 0, 1], atol=1e-15)


def test_cube_roots_of_eight():
    roots = solve_cubic(CubicCoefficients(0, -8))
    w = np.exp(2j * math.pi / 3)
    assert multiset_distance(roots, [2, 2 * w, 2 * w * w]) <= 1e-13


def test_ordering_real_then_imag():
    roots = solve_cubic(CubicCoefficients(0, -8))
    keys = [(z.real, z.imag) for z in roots]
    assert keys == sorted(keys)


def test_triple_root():
    np.testing.assert_array_equal(solve_cubic(CubicCoefficients(0, 0)), [0, 0, 0])


@settings(max_examples=300, deadline=None)
@given(coef, coef)
def test_real_coefficients_against_numpy(p, q):
    roots = solve_cubic(CubicCoefficients(p, q))
    assert residual_ok(p, q, roots)
    assert abs(roots.sum()) <= 1e-12 * max(1.0, abs(p) ** 0.5, abs(q) ** (1 / 3))
    # closed under conjugation
    assert multiset_distance(roots, roots.conj()) <= 1e-12 * max(1.0, np.abs(roots).max())
    # np.roots (companion eigenvalues) is an independent route, loose near double roots
    ref = np.roots([1, 0, p, q])
    assert multiset_distance(roots, ref) <= 1e-5 * max(1.0, np.abs(ref).max())


@settings(max_examples=200, deadline=None)
@given(coef, coef, coef, coef)
def test_complex_coefficients(pr, pi_, qr, qi):
    p, q = complex(pr, pi_), complex(qr, qi)
    roots = solve_cubic(CubicCoefficients(p, q))
    assert residual_ok(p, q, roots)


def test_batch_matches_scalar(rng):
    p = rng.normal(size=50) * 5
    q = rng.normal(size=50) * 5
    batch = solve_cubic_batch(p, q)
    for i in range(50):
        np.testing.assert_allclose(batch[i], solve_cubic(CubicCoefficients(p[i], q[i])), atol=1e-14)


def test_near_double_root_stays_accurate():
    # (E - 1)^2 (E + 2) = E^3 - 3E + 2, nudged
    roots = solve_cubic(CubicCoefficients(-3.0, 2.0 + 1e-13))
    assert residual_ok(-3.0, 2.0 + 1e-13, roots)
    assert cubic_residual_scale(-3.0, 2.0) == pytest.approx(3.0 ** 1.5)
