"""Lattice parameters, Bloch Hamiltonian and the unit-cell symmetry operators.

The unit cell is a triangle of sites (A, B, C): A has gain ``+i*gamma``, C has
loss ``-i*gamma``, B is passive. B couples to A and C with ``v`` inside the cell
and with ``r/2`` to the A and C sites of both neighbouring cells (cross-stitch).
A and C are joined by the nonreciprocal bond ``J exp(+i*phi)`` (row A, column C),
whose phase threads a synthetic flux ``phi`` through every triangle.

Convention: the flux-carrying bond points A -> C with phase ``exp(+i*phi)``.
Reversing it flips the sign of ``phi`` and therefore of the flat-band energy.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SYMMETRY_TOL = 1e-12


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


def normalize_angle(phi: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    out = math.remainder(phi, 2 * math.pi)
    if out <= -math.pi:
        out += 2 * math.pi
    return out


def is_chiral_flux(j_coupling: float, phi: float, tol: float = SYMMETRY_TOL) -> bool:
    """True when J = 0 or phi = n*pi + pi/2, i.e. the A-C bond is purely imaginary."""
    return j_coupling == 0 or abs(j_coupling * math.cos(phi)) <= tol


@dataclass(frozen=True)
class LatticeParams:
    """Immutable parameter set of the lattice.

    Parameters
    ----------
    gamma : float
        Gain/loss rate on A/C sites, ``>= 0``.
    v : float
        Intracell B-A and B-C coupling, ``>= 0``.
    j_coupling : float
        Magnitude of the A-C coupling, ``>= 0``.
    r : float
        Cross-stitch intercell coupling; each bond carries ``r/2``.
    phi : float
        Synthetic flux in radians, stored normalized to (-pi, pi].
    n_cells : int
        Number of unit cells for real-space work.
    boundary : Boundary
        Periodic or open boundary condition.
    """

    gamma: float
    v: float
    j_coupling: float
    r: float
    phi: float = 0.0
    n_cells: int = 1
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        for name in ("gamma", "v", "j_coupling", "r", "phi"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("gamma", "v", "j_coupling", "r"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ParameterError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "phi", normalize_angle(self.phi))
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @classmethod
    def at_flat_band(cls, v: float, j_coupling: float, r: float, phi: float, **kwargs) -> "LatticeParams":
        """Build parameters with ``gamma = J sin(phi)``.

        Raises ParameterError when that value is negative, since the model only
        represents gain on A and loss on C.
        """
        phi = normalize_angle(phi)
        gamma = j_coupling * math.sin(phi)
        if gamma < 0:
            if gamma > -SYMMETRY_TOL * max(1.0, j_coupling):
                gamma = 0.0
            else:
                raise ParameterError(
                    f"flat band at phi={phi:.6g} needs gamma={gamma:.6g} < 0; "
                    "swap the gain and loss sublattices or use -phi")
        return cls(gamma=gamma, v=v, j_coupling=j_coupling, r=r, phi=phi, **kwargs)

    def replace(self, **changes) -> "LatticeParams":
        fields = dict(gamma=self.gamma, v=self.v, j_coupling=self.j_coupling, r=self.r,
                      phi=self.phi, n_cells=self.n_cells, boundary=self.boundary)
        fields.update(changes)
        return LatticeParams(**fields)

    @property
    def gamma_fb(self) -> float:
        return self.j_coupling * math.sin(self.phi)

    @property
    def e_fb(self) -> float:
        return -self.j_coupling * math.cos(self.phi)

    @property
    def chiral(self) -> bool:
        return is_chiral_flux(self.j_coupling, self.phi)

    def on_flat_band(self, tol: float = SYMMETRY_TOL) -> bool:
        return abs(self.gamma - self.gamma_fb) <= tol * max(1.0, self.j_coupling)

    def to_dict(self) -> dict:
        return dict(gamma=self.gamma, v=self.v, j_coupling=self.j_coupling, r=self.r,
                    phi=self.phi, n_cells=self.n_cells, boundary=self.boundary.value)


def coupling_s(params: LatticeParams, k):
    """Effective B coupling ``v + r cos k`` at momentum ``k`` (scalar or array)."""
    return params.v + params.r * np.cos(k)


def bloch_hamiltonian(params: LatticeParams, k: float) -> np.ndarray:
    """3x3 Bloch matrix in the (A, B, C) basis."""
    s = coupling_s(params, k)
    g, j, phi = params.gamma, params.j_coupling, params.phi
    return np.array([
        [1j * g, s, j * np.exp(1j * phi)],
        [s, 0.0, s],
        [j * np.exp(-1j * phi), s, -1j * g],
    ], dtype=complex)


def parity_operator() -> np.ndarray:
    """Anti-diagonal permutation swapping the A and C components."""
    return np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def chiral_operator() -> np.ndarray:
    return np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])


def pt_defect(matrix: np.ndarray, parity: np.ndarray | None = None) -> float:
    """Max-norm of ``P conj(H) P - H``; time reversal is entrywise conjugation."""
    matrix = np.asarray(matrix)
    if parity is None:
        parity = parity_operator()
    return float(np.max(np.abs(parity @ matrix.conj() @ parity - matrix)))


def chiral_defect(matrix: np.ndarray, chiral: np.ndarray | None = None) -> float:
    """Max-norm of ``C H C + H`` (C is its own inverse)."""
    matrix = np.asarray(matrix)
    if chiral is None:
        chiral = chiral_operator()
    return float(np.max(np.abs(chiral @ matrix @ chiral + matrix)))


def check_pt_symmetry(params: LatticeParams, k: float, tol: float = SYMMETRY_TOL) -> bool:
    if tol <= 0:
        raise ParameterError("tol must be positive")
    return pt_defect(bloch_hamiltonian(params, k)) <= tol


def check_chiral_symmetry(params: LatticeParams, k: float, tol: float = SYMMETRY_TOL) -> bool:
    if tol <= 0:
        raise ParameterError("tol must be positive")
    return chiral_defect(bloch_hamiltonian(params, k)) <= tol
