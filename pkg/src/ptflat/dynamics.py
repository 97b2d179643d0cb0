"""Time evolution ``i d(psi)/dt = H psi``.

Fixed-step classical RK4 is the production path: unitary or symplectic
integrators do not apply to a non-Hermitian ``H``. Propagation in the
eigenbasis is kept as an independent cross-check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .cls import StateVector
from .errors import IllConditionedError, ParameterError
from .spectral import EigenDecomposition, matrix_inf_norm

log = logging.getLogger(__name__)

OVERFLOW_AMPLITUDE = 1e150
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution.

    ``states[i]`` is the wavefunction at ``times[i]``; ``intensities`` holds
    ``|psi|**2`` per site. ``overflowed`` marks a run cut short because
    amplitudes blew up (broken PT phase over long times).
    """

    times: np.ndarray
    states: np.ndarray
    dt: float
    overflowed: bool = False
    intensities: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "intensities", np.abs(self.states) ** 2)

    @property
    def n_cells(self) -> int:
        return self.states.shape[1] // 3

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


def default_step(h) -> float:
    return 0.01 / max(1.0, matrix_inf_norm(h))


def _rk4_step(h, psi, dt):
    k1 = -1j * (h @ psi)
    k2 = -1j * (h @ (psi + 0.5 * dt * k1))
    k3 = -1j * (h @ (psi + 0.5 * dt * k2))
    k4 = -1j * (h @ (psi + dt * k3))
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(h, psi0: StateVector, t_final: float, dt: float | None = None,
           stride: int = 10, cap_step: bool = True) -> Trajectory:
    """Integrate from t = 0 to ``t_final`` with RK4.

    Parameters
    ----------
    h : array_like or RealSpaceHamiltonian
    psi0 : StateVector
    t_final : float
    dt : float, optional
        Requested step. With ``cap_step`` the step actually used is
        ``min(dt, 0.01 / max(1, |H|_inf))``; without a ``dt`` that cap is the step.
    stride : int
        Keep every ``stride``-th step; t = 0 and ``t_final`` are always kept.
    cap_step : bool
        Disable only to study the integrator itself at a prescribed step.
    """
    h = np.asarray(h, dtype=complex)
    psi = np.array(psi0.amplitudes, dtype=complex)
    if h.shape != (psi.size, psi.size):
        raise ParameterError(f"matrix shape {h.shape} does not match state length {psi.size}")
    if not t_final > 0:
        raise ParameterError("t_final must be positive")
    if dt is not None and not dt > 0:
        raise ParameterError("dt must be positive")
    if stride < 1:
        raise ParameterError("stride must be >= 1")
    step = default_step(h) if dt is None else (min(dt, default_step(h)) if cap_step else dt)

    n_full = int(math.floor(t_final / step + 1e-9))
    remainder = t_final - n_full * step
    if remainder <= 1e-12 * t_final:
        remainder = 0.0
    steps = [step] * n_full + ([remainder] if remainder > 0 else [])

    times, states = [0.0], [psi.copy()]
    t = 0.0
    overflowed = False
    for i, dti in enumerate(steps, start=1):
        psi = _rk4_step(h, psi, dti)
        t = t_final if i == len(steps) else i * step
        if not np.all(np.isfinite(psi)) or np.abs(psi).max() > OVERFLOW_AMPLITUDE:
            log.warning("amplitude overflow at t=%.6g; trajectory truncated", t)
            overflowed = True
            break
        if i % stride == 0 or i == len(steps):
            times.append(t)
            states.append(psi.copy())
    return Trajectory(np.array(times), np.array(states), step, overflowed)


def propagate_by_eigenbasis(dec: EigenDecomposition, psi0: StateVector, t: float) -> StateVector:
    """``V exp(-i Lambda t) V^-1 psi0``; refuses a near-defective eigenbasis."""
    v = dec.vectors
    if v.shape[1] != v.shape[0]:
        raise ParameterError("decomposition carries no eigenvectors")
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllConditionedError(
            f"eigenvector matrix condition {cond:.3e} exceeds {MAX_CONDITION:.0e}; "
            "the matrix is (nearly) defective, use evolve() instead")
    coeffs = np.linalg.solve(v, psi0.amplitudes)
    return StateVector(v @ (np.exp(-1j * dec.values * t) * coeffs))


def intensity_outside_support(traj: Trajectory, support_cells: Iterable[int]) -> float:
    """Largest fraction of total intensity found outside ``support_cells`` (1-based)."""
    support = set(support_cells)
    n = traj.n_cells
    mask = np.ones(3 * n, dtype=bool)
    for j in support:
        if 1 <= j <= n:
            mask[3 * (j - 1):3 * j] = False
    total = traj.intensities.sum(axis=1)
    outside = traj.intensities[:, mask].sum(axis=1)
    frac = np.divide(outside, total, out=np.zeros_like(total), where=total > 0)
    return float(frac.max())
