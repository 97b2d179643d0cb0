"""Where the flat band touches the dispersive bands, and when the spectrum turns complex."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bands import BandStructure, bloch_roots, brillouin_grid
from .errors import OffManifoldError, OutOfDomainError
from .model import LatticeParams, coupling_s, is_chiral_flux

# Relative tolerance for deciding that a momentum sits exactly on k = 0 or pi.
EDGE_TOL = 1e-12


class PointOrder(str, enum.Enum):
    EP2 = "EP2"
    EP3 = "EP3"
    DIABOLIC = "diabolic"


class BandLocation(str, enum.Enum):
    INSIDE_GAP = "inside_gap"
    INTERSECTING = "intersecting"
    OUTSIDE_BANDS = "outside_bands"


@dataclass(frozen=True)
class DegeneracyPoint:
    k: float
    order: PointOrder
    energy: complex
    merged: bool = False


@dataclass(frozen=True)
class PhaseClassification:
    ep_count: int
    flat_band_location: BandLocation
    boundary_case: bool


def discriminant(params: LatticeParams, k):
    """``27 s**4 J**2 cos(phi)**2 - (2 s**2 + J**2 - gamma**2)**3``.

    Equals ``(4 p**3 + 27 q**2) / 4`` of the band cubic, so it vanishes exactly
    where two or three bands coincide; positive means a complex pair.
    """
    s2 = coupling_s(params, k) ** 2
    j, g = params.j_coupling, params.gamma
    return 27.0 * s2 ** 2 * j * j * math.cos(params.phi) ** 2 - (2.0 * s2 + j * j - g * g) ** 3


def _cos_branch_momenta(c: float, tol: float = EDGE_TOL):
    """Momenta in (-pi, pi] with cos k = c, and whether they sit on a zone edge/centre."""
    if c > 1.0 + tol or c < -1.0 - tol:
        return [], False
    if abs(c - 1.0) <= tol:
        return [0.0], True
    if abs(c + 1.0) <= tol:
        return [math.pi], True
    k = math.acos(c)
    return [-k, k], False


def find_eps(params: LatticeParams, tol: float = 1e-12) -> list[DegeneracyPoint]:
    """Momenta where the flat band touches a dispersive band.

    Requires ``gamma = J sin(phi)``. The touchings solve
    ``v + r cos k = +-J cos(phi)``; a solution at k = 0 or pi is reported once
    with ``merged=True``. Under chiral symmetry both branches coincide at
    ``s = 0`` and the points are EP3s (diabolic points in the Hermitian case
    gamma = 0), otherwise EP2s.
    """
    if not params.on_flat_band(tol):
        raise OffManifoldError(
            f"find_eps needs gamma = J sin(phi) = {params.gamma_fb:.12g}, got {params.gamma:.12g}")
    if params.r == 0:
        return []
    c = params.j_coupling * math.cos(params.phi)
    chiral = is_chiral_flux(params.j_coupling, params.phi)
    if chiral:
        order = PointOrder.DIABOLIC if params.gamma == 0 else PointOrder.EP3
        targets = [0.0]
    else:
        order = PointOrder.EP2
        targets = [c, -c]
    e_fb = complex(params.e_fb)
    points = []
    for target in targets:
        ks, merged = _cos_branch_momenta((target - params.v) / params.r)
        points.extend(DegeneracyPoint(k, order, e_fb, merged) for k in ks)
    points.sort(key=lambda pt: pt.k)
    return points


def _count_branch(c: float, tol: float):
    ks, merged = _cos_branch_momenta(c, tol)
    return len(ks), merged


def classify_phase(j_coupling: float, v: float, r: float, phi: float,
                   tol: float = EDGE_TOL) -> PhaseClassification:
    """EP count and flat-band placement on the flat-band manifold.

    With ``u = J |cos(phi)|``: four EPs for ``u < r - v``, two for
    ``|v - r| < u < v + r``, none with the flat band in the gap for
    ``u < v - r``, none with it outside the bands for ``u > v + r``. On the
    boundaries a merged pair counts once (three or one EP).
    """
    if r <= 0:
        raise ValueError("classify_phase needs r > 0")
    u = abs(j_coupling * math.cos(phi))
    if u <= tol * max(1.0, j_coupling):
        u = 0.0
    n_plus, m_plus = _count_branch((u - v) / r, tol)
    if u == 0.0:
        count, boundary = n_plus, True
    else:
        n_minus, m_minus = _count_branch((-u - v) / r, tol)
        count = n_plus + n_minus
        boundary = m_plus or m_minus
    if count > 0:
        location = BandLocation.INTERSECTING
    elif u > v + r:
        location = BandLocation.OUTSIDE_BANDS
    else:
        location = BandLocation.INSIDE_GAP
    return PhaseClassification(count, location, bool(boundary))


def critical_gamma(v: float, r: float, j_coupling: float, phi: float,
                   tol: float = 1e-12) -> tuple[float, float]:
    """Gain/loss rates at which the gap at k = pi (minus) or k = 0 (plus) closes.

    ``gamma_c = sqrt(2 (v +- r)**2 + J**2 - 3 cbrt((v +- r)**4 J**2 cos(phi)**2))``.
    The radicand is non-negative by AM-GM; rounding residue within ``tol``
    of the scale is taken as zero, anything more negative raises.
    """
    if min(v, r, j_coupling) < 0:
        raise ValueError("couplings must be >= 0")
    out = []
    for s in (v - r, v + r):
        a = s * s
        scale = max(1.0, 2.0 * a + j_coupling ** 2)
        radicand = 2.0 * a + j_coupling ** 2 - 3.0 * np.cbrt(a * a * j_coupling ** 2 * math.cos(phi) ** 2)
        if radicand < 0:
            if radicand < -tol * scale:
                raise OutOfDomainError(f"negative radicand {radicand:.3e} at v+-r={s}")
            radicand = 0.0
        out.append(math.sqrt(radicand))
    return out[0], out[1]


def diabolic_points(v: float, r: float) -> list[float]:
    """Band touchings of the Hermitian chiral lattice (J = gamma = 0): s_k = 0."""
    if r <= 0:
        raise ValueError("r must be > 0")
    if v < r:
        k = math.acos(-v / r)
        return [-k, k]
    if v == r:
        return [math.pi]
    return []


def reality_check(bs: BandStructure, tol: float) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return bs.max_imag <= tol


def max_imag_on_grid(params: LatticeParams, n_k: int) -> float:
    """Largest ``|Im E|`` on the standard k-grid; no branch tracking needed."""
    return float(np.abs(bloch_roots(params, brillouin_grid(n_k)).imag).max())


def threshold_gamma(params: LatticeParams, n_k: int = 2001, im_tol: float = 1e-8,
                    gamma_lo: float = 0.0, gamma_hi: float | None = None,
                    xtol: float = 1e-10) -> float:
    """Smallest gamma at which some band on the k-grid has ``|Im E| > im_tol``.

    Bisection on gamma, assuming a single real-to-complex transition in
    ``[gamma_lo, gamma_hi]``; the returned value is broken and lies within
    ``xtol`` of the last unbroken one. Independent of the closed-form thresholds.
    """
    def broken(g):
        return max_imag_on_grid(params.replace(gamma=g), n_k) > im_tol

    if gamma_hi is None:
        gamma_hi = max(1.0, 2.0 * (params.v + params.r + params.j_coupling))
    if broken(gamma_lo):
        return gamma_lo
    if not broken(gamma_hi):
        raise OutOfDomainError(f"spectrum still real at gamma={gamma_hi}")
    lo, hi = gamma_lo, gamma_hi
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if broken(mid):
            hi = mid
        else:
            lo = mid
    return hi
