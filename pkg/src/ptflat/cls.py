"""Compact localized states of the flat band, including the open-chain edge modes.

Cells are numbered from 1, matching the real-space layout of ``lattice``.
States are stored unnormalized as constructed, except the Bloch-like
superposition, which is unit norm.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import OffManifoldError, ParameterError
from .lattice import real_space_parity, site_index
from .model import Boundary, LatticeParams

FLAT_TOL = 1e-12


class Variant(str, enum.Enum):
    I = "I"
    II = "II"


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class CellTriple(NamedTuple):
    psi_a: complex
    psi_b: complex
    psi_c: complex


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size % 3:
            raise ParameterError("amplitudes must be a flat array of length 3N")
        if not np.all(np.isfinite(amps)):
            raise ParameterError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_cells(self) -> int:
        return self.amplitudes.size // 3

    def cell(self, j: int) -> CellTriple:
        i = site_index(j, 0)
        return CellTriple(*(complex(x) for x in self.amplitudes[i:i + 3]))

    def cells(self) -> np.ndarray:
        """Amplitudes reshaped to (N, 3) rows of (A, B, C)."""
        return self.amplitudes.reshape(-1, 3)

    def support(self, tol: float = 0.0) -> list[int]:
        """1-based cells carrying any amplitude above ``tol``."""
        return [j + 1 for j, row in enumerate(self.cells()) if np.abs(row).max() > tol]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __add__(self, other):
        return StateVector(self.amplitudes + other.amplitudes)

    def __mul__(self, scalar):
        return StateVector(self.amplitudes * scalar)

    __rmul__ = __mul__


def _require_flat(params: LatticeParams):
    if not params.chiral and not params.on_flat_band(FLAT_TOL):
        raise OffManifoldError(
            f"flat band needs gamma = J sin(phi) = {params.gamma_fb:.12g}, got {params.gamma:.12g}")


def flat_band_energy(params: LatticeParams) -> float:
    """Energy of the states built here: zero under chiral symmetry, -J cos(phi) otherwise."""
    return 0.0 if params.chiral else params.e_fb


def make_varphi(params: LatticeParams) -> CellTriple:
    """Central cell of the confined modes.

    Under chiral flux the B site carries ``i (J sin(phi) - gamma) / v``, which is
    ``i (J - gamma) / v`` at phi = pi/2 and vanishes on the flat-band
    condition. Without chiral symmetry B is empty: ``(1, 0, -1)``.
    """
    if params.v <= 0:
        raise ParameterError("v must be > 0 to build the confined modes")
    _require_flat(params)
    if params.chiral:
        b = 1j * (params.j_coupling * math.sin(params.phi) - params.gamma) / params.v
        if params.on_flat_band(FLAT_TOL):
            b = 0j
        return CellTriple(1.0 + 0j, b, -1.0 + 0j)
    return CellTriple(1.0 + 0j, 0j, -1.0 + 0j)


def make_phi(params: LatticeParams) -> CellTriple:
    """Flanking cells ``(r/2v, 0, -r/2v)``."""
    if params.v <= 0:
        raise ParameterError("v must be > 0 to build the confined modes")
    a = params.r / (2.0 * params.v)
    return CellTriple(a + 0j, 0j, -a + 0j)


def _place(n_cells: int, pattern: dict[int, CellTriple]) -> StateVector:
    amps = np.zeros(3 * n_cells, dtype=complex)
    for j, triple in pattern.items():
        i = site_index(j, 0)
        amps[i:i + 3] = triple
    return StateVector(amps)


def pt_partner(psi: StateVector, n_cells: int | None = None) -> StateVector:
    """Parity reflection (A_j <-> C_{N+1-j}) followed by complex conjugation."""
    n = psi.n_cells if n_cells is None else n_cells
    if 3 * n != psi.amplitudes.size:
        raise ParameterError(f"state has {psi.amplitudes.size} amplitudes, expected {3 * n}")
    return StateVector((real_space_parity(n) @ psi.amplitudes).conj())


def edge_mode(params: LatticeParams, variant: Variant | str, side: Side | str) -> StateVector:
    """Edge modes of the open chain.

    Variant I occupies two cells, ``[varphi, phi, 0, ...]``; variant II three,
    ``[phi, varphi, phi, 0, ...]``. The right-hand mode is the PT partner of
    the left one.
    """
    variant, side = Variant(variant), Side(side)
    if params.boundary is not Boundary.OPEN:
        raise ParameterError("edge modes exist only under open boundaries")
    need = 2 if variant is Variant.I else 3
    if params.n_cells < need:
        raise ParameterError(f"edge mode {variant.value} needs n_cells >= {need}")
    varphi, phi = make_varphi(params), make_phi(params)
    if variant is Variant.I:
        left = _place(params.n_cells, {1: varphi, 2: phi})
    else:
        left = _place(params.n_cells, {1: phi, 2: varphi, 3: phi})
    return left if side is Side.LEFT else pt_partner(left, params.n_cells)


def inner_cls(params: LatticeParams, center_cell: int) -> StateVector:
    """Confined mode ``[..., phi, varphi, phi, ...]`` centred on ``center_cell``.

    Without chiral symmetry the flat band is made of single-cell cages, and the
    state occupies ``center_cell`` alone with ``(1, 0, -1)``.
    """
    n = params.n_cells
    _require_flat(params)
    if not params.chiral:
        if not 1 <= center_cell <= n:
            raise ParameterError(f"center_cell must lie in 1..{n}")
        return _place(n, {center_cell: CellTriple(1.0 + 0j, 0j, -1.0 + 0j)})
    varphi, phi = make_varphi(params), make_phi(params)
    if params.boundary is Boundary.OPEN:
        if not 2 <= center_cell <= n - 1:
            raise ParameterError(f"under open boundaries center_cell must lie in 2..{n - 1}")
        return _place(n, {center_cell - 1: phi, center_cell: varphi, center_cell + 1: phi})
    if n < 3:
        raise ParameterError("periodic confined modes need n_cells >= 3")
    if not 1 <= center_cell <= n:
        raise ParameterError(f"center_cell must lie in 1..{n}")
    left = (center_cell - 2) % n + 1
    right = center_cell % n + 1
    return _place(n, {left: phi, center_cell: varphi, right: phi})


def flat_band_superposition(params: LatticeParams, zeta: Iterable[complex]) -> StateVector:
    """Normalized ``sum_j zeta_j (A_j - C_j) / sqrt(2 Omega)``, ``Omega = sum |zeta_j|^2``."""
    if not params.on_flat_band(FLAT_TOL):
        raise OffManifoldError("flat-band superpositions need gamma = J sin(phi)")
    zeta = np.asarray(list(zeta), dtype=complex)
    if zeta.size != params.n_cells:
        raise ParameterError(f"need {params.n_cells} coefficients, got {zeta.size}")
    omega = float(np.sum(np.abs(zeta) ** 2))
    if omega == 0.0:
        raise ParameterError("at least one coefficient must be nonzero")
    cells = np.zeros((params.n_cells, 3), dtype=complex)
    cells[:, 0] = zeta
    cells[:, 2] = -zeta
    return StateVector(cells.reshape(-1) / math.sqrt(2.0 * omega))


def verify_eigenstate(h, psi: StateVector, energy: complex) -> float:
    """Relative residual ``|H psi - E psi| / |psi|``."""
    h = np.asarray(h)
    amps = psi.amplitudes
    if h.shape != (amps.size, amps.size):
        raise ParameterError(f"matrix shape {h.shape} does not match state length {amps.size}")
    return float(np.linalg.norm(h @ amps - energy * amps) / np.linalg.norm(amps))


def zero_mode_basis(params: LatticeParams) -> list[StateVector]:
    """The 4 edge modes and N-4 inner confined modes of the open chiral chain.

    Inner modes are centred on cells 3..N-2; the ones centred on 2 and N-1
    coincide with the variant-II edge modes.
    """
    if params.boundary is not Boundary.OPEN or not params.chiral:
        raise ParameterError("zero-mode basis is defined for the open chain with chiral flux")
    if params.n_cells < 4:
        raise ParameterError("zero-mode basis needs n_cells >= 4")
    states = [edge_mode(params, v, s) for v in Variant for s in Side]
    states += [inner_cls(params, c) for c in range(3, params.n_cells - 1)]
    return states


def span_rank(states: Iterable[StateVector], rtol: float = 1e-8) -> int:
    """Numerical rank: singular values above ``rtol`` times the largest."""
    mat = np.column_stack([s.amplitudes for s in states])
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rtol * sv[0]))
