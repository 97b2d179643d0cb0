"""Band structure from the characteristic cubic of the Bloch matrix.

``det(H_k - E) = 0`` reduces to ``E**3 + p E + q = 0`` with
``p = -(2 s**2 + J**2 - gamma**2)`` and ``q = -2 s**2 J cos(phi)``, where
``s = v + r cos k``. There is no ``E**2`` term because ``H_k`` is traceless.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cubic import CubicCoefficients, solve_cubic_batch
from .model import LatticeParams, bloch_hamiltonian, coupling_s

_PERMS = np.array(list(itertools.permutations(range(3))))
_TIE_RTOL = 1e-12


def characteristic_cubic(params: LatticeParams, k: float) -> CubicCoefficients:
    s2 = coupling_s(params, k) ** 2
    j, g = params.j_coupling, params.gamma
    p = -(2.0 * s2 + j * j - g * g)
    q = -2.0 * s2 * j * math.cos(params.phi)
    return CubicCoefficients(float(p), float(q))


def cubic_coefficient_arrays(params: LatticeParams, k):
    s2 = coupling_s(params, np.asarray(k, dtype=float)) ** 2
    j, g = params.j_coupling, params.gamma
    p = -(2.0 * s2 + j * j - g * g)
    q = -2.0 * s2 * j * math.cos(params.phi)
    return p, q


def bloch_roots(params: LatticeParams, k) -> np.ndarray:
    """Sorted band energies at each momentum in ``k``; shape ``k.shape + (3,)``."""
    return solve_cubic_batch(*cubic_coefficient_arrays(params, k))


def brillouin_grid(n_k: int) -> np.ndarray:
    """``n_k`` uniformly spaced momenta in (-pi, pi], always ending at pi."""
    if n_k < 2:
        raise ValueError("n_k must be >= 2")
    i = np.arange(1, n_k + 1)
    return np.pi * (2.0 * i / n_k - 1.0)


def track_branches(roots: np.ndarray) -> np.ndarray:
    """Relabel per-k root triples into three continuous branches.

    Between consecutive momenta the permutation with the smallest total
    distance in the complex plane wins. Near-ties, which happen at band
    touchings, go to the permutation that changes the imaginary parts least.
    """
    roots = np.asarray(roots)
    out = np.empty_like(roots)
    out[0] = roots[0]
    for i in range(1, roots.shape[0]):
        cand = roots[i][_PERMS]
        cost = np.abs(cand - out[i - 1]).sum(axis=1)
        best = cost.min()
        tied = cost <= best + _TIE_RTOL * max(1.0, best, float(np.abs(out[i - 1]).max()))
        if tied.sum() > 1:
            im_cost = np.where(tied, np.abs(cand.imag - out[i - 1].imag).sum(axis=1), np.inf)
            choice = int(np.argmin(im_cost))
        else:
            choice = int(np.argmin(cost))
        out[i] = cand[choice]
    return out


@dataclass(frozen=True)
class BandStructure:
    """Bands sampled on a momentum grid.

    Attributes
    ----------
    k : ndarray, shape (n_k,)
        Sorted momenta in (-pi, pi].
    energies : ndarray, shape (n_k, 3)
        Complex energies, columns are continuity-tracked branches.
    params : LatticeParams
    """

    k: np.ndarray
    energies: np.ndarray
    params: LatticeParams

    @property
    def max_imag(self) -> float:
        return float(np.abs(self.energies.imag).max())

    def branch(self, index: int) -> np.ndarray:
        return self.energies[:, index]


def band_structure(params: LatticeParams, n_k: int) -> BandStructure:
    k = brillouin_grid(n_k)
    return BandStructure(k=k, energies=track_branches(bloch_roots(params, k)), params=params)


class FlatBand(NamedTuple):
    """Flat-band gain/loss rate and energy for given (J, phi)."""

    gamma: float
    energy: float

    @property
    def needs_reversed_gain(self) -> bool:
        """Negative gamma: the flat band exists only with gain on C and loss on A."""
        return self.gamma < 0


def flat_band_params(j_coupling: float, phi: float) -> FlatBand:
    if j_coupling < 0:
        raise ValueError("j_coupling must be >= 0")
    return FlatBand(j_coupling * math.sin(phi), -j_coupling * math.cos(phi))


def flat_band_vector_residual(params: LatticeParams, k: float) -> float:
    """``|H_k f - E_FB f|`` for the antisymmetric trimer state ``f = (1, 0, -1)/sqrt 2``."""
    f = np.array([1.0, 0.0, -1.0]) / math.sqrt(2.0)
    h = bloch_hamiltonian(params, k)
    return float(np.linalg.norm(h @ f - params.e_fb * f))


class DimerSpectrum(NamedTuple):
    eigenvalues: tuple
    antisymmetric_eigenvalue: complex | None


def pt_dimer_spectrum(j_coupling: float, gamma: float, phi: float, tol: float = 1e-12) -> DimerSpectrum:
    """Spectrum of the A-C dimer left when B decouples.

    The eigenvalues ``+-sqrt(J**2 - gamma**2)`` do not depend on ``phi``. The
    antisymmetric state ``(1, -1)`` is an eigenvector only on the flat-band
    condition, and then its eigenvalue is ``-J cos(phi)``; otherwise the second
    field is None.
    """
    root = complex(np.sqrt(complex(j_coupling ** 2 - gamma ** 2)))
    eigs = tuple(sorted((-root, root), key=lambda z: (z.real, z.imag)))
    h = np.array([[1j * gamma, j_coupling * np.exp(1j * phi)],
                  [j_coupling * np.exp(-1j * phi), -1j * gamma]])
    image = h @ np.array([1.0, -1.0])
    lam = image[0]
    anti = None
    if abs(image[1] + lam) <= tol * max(1.0, j_coupling, gamma):
        anti = complex(lam)
    return DimerSpectrum(eigs, anti)


def flatness_deviation(bs: BandStructure, e_fb: float) -> float:
    """Worst-case distance of the nearest band to ``e_fb`` over the k-grid.

    Nearest-branch rather than a labelled branch, since labels are ambiguous
    through exceptional points.
    """
    if bs.energies.size == 0:
        raise ValueError("empty band structure")
    return float(np.abs(bs.energies - e_fb).min(axis=1).max())
