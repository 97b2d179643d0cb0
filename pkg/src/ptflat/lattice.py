"""Real-space Hamiltonian on N unit cells.

Sites are interleaved by cell: index ``3*(j-1) + s`` for cell ``j`` in 1..N and
sublattice ``s`` in (A, B, C) = (0, 1, 2). This layout is used everywhere,
including every file written by the CLI.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import Boundary, LatticeParams

A, B, C = 0, 1, 2
SITE_NAMES = ("A", "B", "C")


def site_index(cell: int, site: int) -> int:
    """Matrix index of ``site`` in 1-based ``cell``."""
    return 3 * (cell - 1) + site


@dataclass(frozen=True)
class RealSpaceHamiltonian:
    matrix: np.ndarray
    n_cells: int
    boundary: Boundary

    @property
    def dim(self) -> int:
        return 3 * self.n_cells

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def build_hamiltonian(params: LatticeParams) -> RealSpaceHamiltonian:
    n = params.n_cells
    periodic = params.boundary is Boundary.PERIODIC
    if periodic and n < 3:
        raise ParameterError(
            "periodic boundary needs n_cells >= 3: with fewer cells the r/2 bonds "
            "to the left and right neighbours land on the same or the own site")
    h = np.zeros((3 * n, 3 * n), dtype=complex)
    ac = params.j_coupling * np.exp(1j * params.phi)
    half_r = params.r / 2.0
    for j in range(1, n + 1):
        a, b, c = (site_index(j, s) for s in (A, B, C))
        h[a, a] = 1j * params.gamma
        h[c, c] = -1j * params.gamma
        h[a, c] = ac
        h[c, a] = np.conj(ac)
        h[a, b] = h[b, a] = params.v
        h[c, b] = h[b, c] = params.v
        for nb in (j - 1, j + 1):
            if periodic:
                nb = (nb - 1) % n + 1
            elif not 1 <= nb <= n:
                continue
            bn = site_index(nb, B)
            h[a, bn] = h[bn, a] = half_r
            h[c, bn] = h[bn, c] = half_r
    return RealSpaceHamiltonian(h, n, params.boundary)


def real_space_parity(n_cells: int) -> np.ndarray:
    """Permutation A_j <-> C_{N+1-j}, B_j <-> B_{N+1-j}."""
    if n_cells < 1:
        raise ParameterError("n_cells must be >= 1")
    dim = 3 * n_cells
    p = np.zeros((dim, dim))
    for j in range(1, n_cells + 1):
        m = n_cells + 1 - j
        p[site_index(m, C), site_index(j, A)] = 1.0
        p[site_index(m, A), site_index(j, C)] = 1.0
        p[site_index(m, B), site_index(j, B)] = 1.0
    return p


def real_space_chiral(n_cells: int) -> np.ndarray:
    """Cell-wise chiral operator: swap A_j and C_j, flip the sign of B_j.

    Anticommutes with H whenever the A-C bond is purely imaginary or absent.
    Involution, so it is its own inverse.
    """
    if n_cells < 1:
        raise ParameterError("n_cells must be >= 1")
    cell = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])
    return np.kron(np.eye(n_cells), cell)


def fourier_momenta(n_cells: int) -> np.ndarray:
    """Momenta ``2 pi n / N`` for n = 1..N, allowed under periodic boundaries."""
    return 2.0 * np.pi * np.arange(1, n_cells + 1) / n_cells
