"""Closed-form roots of the depressed cubic ``E**3 + p*E + q = 0``.

Real coefficients go through a dedicated path (trigonometric form for three
real roots, real Cardano otherwise) so that the output is exactly one real root
plus an exact conjugate pair, or three reals. Complex coefficients use complex
Cardano with the cancellation-free choice of cube-root branch. Every root is
then polished by guarded Newton steps.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SQRT3_2 = np.sqrt(3.0) / 2.0
_OMEGA = np.exp(2j * np.pi / 3.0)
_NEWTON_STEPS = 2


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of ``E**3 + p*E + q``."""

    p: complex
    q: complex

    @property
    def is_real(self) -> bool:
        return np.imag(self.p) == 0 and np.imag(self.q) == 0

    def __call__(self, e):
        return e ** 3 + self.p * e + self.q


def cubic_residual_scale(p, q):
    """Scale used in the residual contract: ``max(1, |p|**1.5, |q|)``."""
    p = np.abs(p)
    q = np.abs(q)
    return np.maximum(1.0, np.maximum(p ** 1.5, q))


def _polish(roots, p, q, dtype):
    """Guarded Newton: a step is kept only if it lowers the residual."""
    roots = roots.astype(dtype, copy=True)
    # near-vanishing derivatives give huge or non-finite trials; the guard rejects them
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(_NEWTON_STEPS):
            f = roots ** 3 + p * roots + q
            df = 3 * roots ** 2 + p
            ok = df != 0
            step = np.zeros_like(roots)
            np.divide(f, df, out=step, where=ok)
            trial = roots - step
            f_trial = trial ** 3 + p * trial + q
            better = ok & (np.abs(f_trial) < np.abs(f))
            roots = np.where(better, trial, roots)
    return roots


def _real_roots(p, q):
    """Roots for real p, q arrays of shape (n,). Returns (n, 3) complex."""
    n = p.shape[0]
    out = np.empty((n, 3), dtype=complex)

    disc = -(4.0 * p ** 3 + 27.0 * q ** 2)
    three = disc > 0

    if np.any(three):
        pt, qt = p[three], q[three]
        m = 2.0 * np.sqrt(-pt / 3.0)
        arg = np.clip(3.0 * qt / (pt * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        ks = np.arange(3) * (2.0 * np.pi / 3.0)
        r = m[:, None] * np.cos(theta[:, None] - ks[None, :])
        r = _polish(r, pt[:, None], qt[:, None], float)
        out[three] = r

    one = ~three
    if np.any(one):
        po, qo = p[one], q[one]
        h = np.maximum(qo ** 2 / 4.0 + po ** 3 / 27.0, 0.0)
        sh = np.sqrt(h)
        sign = np.where(qo > 0, -1.0, 1.0)
        a = sign * np.cbrt(np.abs(qo) / 2.0 + sh)
        b = np.zeros_like(a)
        nz = a != 0
        b[nz] = -po[nz] / (3.0 * a[nz])
        t1 = _polish((a + b)[:, None], po[:, None], qo[:, None], float)[:, 0]
        pair = (-(a + b) / 2.0) + 1j * (_SQRT3_2 * np.abs(a - b))
        pair = _polish(pair[:, None], po[:, None], qo[:, None], complex)[:, 0]
        # Newton on the pair member must not flip it across the real axis.
        pair = pair.real + 1j * np.abs(pair.imag)
        out[one, 0] = t1
        out[one, 1] = pair.conj()
        out[one, 2] = pair
    return out


def _complex_roots(p, q):
    n = p.shape[0]
    d = np.sqrt(q ** 2 / 4.0 + p ** 3 / 27.0)
    u3a = -q / 2.0 + d
    u3b = -q / 2.0 - d
    u3 = np.where(np.abs(u3a) >= np.abs(u3b), u3a, u3b)
    u = u3 ** (1.0 / 3.0)
    out = np.zeros((n, 3), dtype=complex)
    nz = u != 0
    for j in range(3):
        uj = u[nz] * _OMEGA ** j
        out[nz, j] = uj - p[nz] / (3.0 * uj)
    # u == 0 only when p == q == 0: triple root at zero, already filled.
    return _polish(out, p[:, None], q[:, None], complex)


def sort_roots(roots):
    """Sort along the last axis by real part, then imaginary part."""
    roots = np.asarray(roots)
    idx = np.lexsort((roots.imag, roots.real), axis=-1)
    return np.take_along_axis(roots, idx, axis=-1)


def solve_cubic_batch(p, q):
    """Vectorized roots of ``E**3 + p E + q`` for arrays of coefficients.

    Returns an array of shape ``p.shape + (3,)``, each row sorted by
    (real, imaginary).
    """
    p = np.asarray(p)
    q = np.asarray(q)
    p, q = np.broadcast_arrays(p, q)
    shape = p.shape
    pf = p.reshape(-1)
    qf = q.reshape(-1)
    if np.iscomplexobj(pf) or np.iscomplexobj(qf):
        real = (np.imag(pf) == 0) & (np.imag(qf) == 0)
    else:
        real = np.ones(pf.shape, dtype=bool)
    out = np.empty(pf.shape + (3,), dtype=complex)
    if np.any(real):
        out[real] = _real_roots(np.real(pf[real]).astype(float), np.real(qf[real]).astype(float))
    if np.any(~real):
        out[~real] = _complex_roots(pf[~real].astype(complex), qf[~real].astype(complex))
    return sort_roots(out).reshape(shape + (3,))


def solve_cubic(c: CubicCoefficients) -> np.ndarray:
    """Three roots of ``E**3 + p E + q``, sorted by (real, imaginary)."""
    return solve_cubic_batch(np.array([c.p]), np.array([c.q]))[0]
