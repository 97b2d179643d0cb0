import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptflat import LatticeParams, ParameterError, build_hamiltonian, real_space_chiral, real_space_parity
from ptflat.bands import bloch_roots
from ptflat.lattice import fourier_momenta, site_index
from ptflat.spectral import eigendecompose, eigenvalue_multiplicity
from conftest import multiset_distance, random_params


def offdiag_nonzeros(h):
    m = np.abs(h) > 0
    np.fill_diagonal(m, False)
    return int(m.sum())


def test_layout():
    assert [site_index(1, s) for s in range(3)] == [0, 1, 2]
    assert site_index(4, 2) == 11


def test_trimer():
    h = build_hamiltonian(LatticeParams(gamma=0, v=1.3, j_coupling=0, r=5, n_cells=1, boundary="open"))
    ev = np.sort(np.linalg.eigvalsh(h.matrix))
    np.testing.assert_allclose(ev, [-math.sqrt(2) * 1.3, 0, math.sqrt(2) * 1.3], atol=1e-14)


def test_decoupled_cells():
    h = build_hamiltonian(LatticeParams(gamma=0, v=0.8, j_coupling=0, r=0, n_cells=10))
    dec = eigendecompose(h.matrix, vectors=False)
    for e in (-math.sqrt(2) * 0.8, 0.0, math.sqrt(2) * 0.8):
        assert eigenvalue_multiplicity(dec, e, 1e-9) == 10


def test_periodic_needs_three_cells():
    for n in (1, 2):
        with pytest.raises(ParameterError):
            build_hamiltonian(LatticeParams(gamma=0, v=1, j_coupling=0, r=1, n_cells=n))
    build_hamiltonian(LatticeParams(gamma=0, v=1, j_coupling=0, r=1, n_cells=2, boundary="open"))


def test_diagonal_and_blocks():
    p = LatticeParams(gamma=0.3, v=0.7, j_coupling=1.1, r=0.6, phi=0.9, n_cells=4)
    h = build_hamiltonian(p).matrix
    np.testing.assert_allclose(np.diag(h), np.tile([0.3j, 0, -0.3j], 4))
    assert h[site_index(2, 0), site_index(2, 2)] == pytest.approx(1.1 * np.exp(0.9j))
    assert h[site_index(2, 2), site_index(2, 0)] == pytest.approx(1.1 * np.exp(-0.9j))
    assert h[site_index(1, 0), site_index(4, 1)] == 0.3  # wrapped r/2 bond
    np.testing.assert_array_equal(h - np.diag(np.diag(h)), (h - np.diag(np.diag(h))).conj().T)


def test_bond_count():
    n = 7
    hermitian = build_hamiltonian(LatticeParams(gamma=0.2, v=1, j_coupling=0, r=1, n_cells=n)).matrix
    assert offdiag_nonzeros(hermitian) == 2 * (2 * n + 4 * n)
    # the A-C bond adds one Hermitian pair per cell
    flux = build_hamiltonian(LatticeParams(gamma=0.2, v=1, j_coupling=0.5, r=1, phi=0.4, n_cells=n)).matrix
    assert offdiag_nonzeros(flux) == 2 * (3 * n + 4 * n)


@pytest.mark.parametrize("n", [3, 6, 9, 12])
def test_fourier_union(n, rng):
    for _ in range(5):
        p = random_params(rng, n_cells=n)
        dec = eigendecompose(build_hamiltonian(p).matrix, vectors=False)
        oracle = bloch_roots(p, fourier_momenta(n)).ravel()
        assert multiset_distance(dec.values, oracle) <= 1e-9 or _near_ep(oracle)


def _near_ep(values, width=1e-4):
    # eigenvalues within sqrt(eps) of each other are only resolved to ~1e-8
    v = np.sort_complex(values)
    return np.min(np.abs(np.diff(v))) < width


def test_parity():
    np.testing.assert_array_equal(real_space_parity(1), np.fliplr(np.eye(3)))
    p5 = real_space_parity(5)
    np.testing.assert_array_equal(p5 @ p5, np.eye(15))


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2), st.floats(0, 3), st.floats(0, 2), st.floats(0, 2),
       st.floats(-math.pi, math.pi), st.integers(3, 9), st.sampled_from(["open", "periodic"]))
def test_real_space_pt(g, v, j, r, phi, n, boundary):
    p = LatticeParams(gamma=g, v=v, j_coupling=j, r=r, phi=phi, n_cells=n, boundary=boundary)
    h = build_hamiltonian(p).matrix
    par = real_space_parity(n)
    assert np.abs(par @ h.conj() @ par - h).max() <= 1e-12


@pytest.mark.parametrize("j,phi,chiral", [(0, 0.7, True), (1, math.pi / 2, True), (1, math.pi / 3, False)])
def test_real_space_chiral(j, phi, chiral):
    for boundary in ("open", "periodic"):
        p = LatticeParams(gamma=0.4, v=0.9, j_coupling=j, r=1.2, phi=phi, n_cells=5, boundary=boundary)
        h = build_hamiltonian(p).matrix
        c = real_space_chiral(5)
        np.testing.assert_array_equal(c @ c, np.eye(15))
        residual = np.abs(c @ h @ c + h).max()
        assert bool(residual <= 1e-12) is chiral


def test_hermitian_limit():
    p = LatticeParams(gamma=0, v=0.9, j_coupling=0.7, r=1.2, phi=0.3, n_cells=6)
    h = build_hamiltonian(p).matrix
    np.testing.assert_allclose(h, h.conj().T, atol=0)
    dec = eigendecompose(h, vectors=False)
    assert np.abs(dec.values.imag).max() <= 1e-12


def test_open_boundary_flat_band_multiplicity():
    p = LatticeParams.at_flat_band(v=1.4, j_coupling=0.8, r=0.9, phi=1.0, n_cells=8, boundary="open")
    dec = eigendecompose(build_hamiltonian(p).matrix, vectors=False)
    assert eigenvalue_multiplicity(dec, p.e_fb, 1e-6) >= 7
