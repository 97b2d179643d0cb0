"""Dense eigensolver for complex non-Hermitian matrices.

Pipeline: diagonal balancing, Householder reduction to upper Hessenberg form,
explicitly shifted complex QR sweeps with deflation, then eigenvectors by
inverse iteration on the original (unbalanced) matrix. Near exceptional points
eigenvectors become ill-conditioned; only the residual bound is guaranteed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConvergenceError, NumericalError

EPS = np.finfo(float).eps
SWEEPS_PER_DIM = 40
RESIDUAL_RTOL = 1e-9
MULTIPLICITY_TOL = 1e-6


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenpairs sorted by (real, imaginary) part of the eigenvalue.

    ``vectors[:, i]`` is the unit-norm right eigenvector for ``values[i]`` and
    ``residuals[i]`` its ``|H v - lambda v|``.
    """

    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray


def matrix_inf_norm(h) -> float:
    h = np.asarray(h)
    return float(np.abs(h).sum(axis=1).max()) if h.size else 0.0


def balance(a: np.ndarray):
    """Diagonal similarity ``D^-1 A D`` with powers of two equalizing row/column norms."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    d = np.ones(n)
    radix = 2.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            s = c + r
            f = 1.0
            g = r / radix
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                a[i, :] /= f
                a[:, i] *= f
    return a, d


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg matrix unitarily similar to ``a`` (Householder)."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        u = x.copy()
        u[0] += phase * alpha
        u /= np.linalg.norm(u)
        h[k + 1:, k:] -= 2.0 * np.outer(u, u.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ u, u.conj())
        h[k + 2:, k] = 0.0
    return h


def _wilkinson_shift(h, hi):
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det)
    mu1, mu2 = tr / 2.0 + disc, tr / 2.0 - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_sweep(h, lo, hi, mu):
    """One explicitly shifted QR step on the active block ``h[lo:hi+1, lo:hi+1]``."""
    idx = np.arange(lo, hi + 1)
    h[idx, idx] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = h[k, k], h[k + 1, k]
        r = np.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1.0, 0.0
        else:
            c, s = a / r, b / r
        x = h[k, k:hi + 1].copy()
        y = h[k + 1, k:hi + 1]
        h[k, k:hi + 1] = np.conj(c) * x + np.conj(s) * y
        h[k + 1, k:hi + 1] = -s * x + c * y
        h[k + 1, k] = 0.0
        rots.append((c, s))
    for k, (c, s) in zip(range(lo, hi), rots):
        top = min(k + 2, hi + 1)
        x = h[lo:top, k].copy()
        y = h[lo:top, k + 1]
        h[lo:top, k] = x * c + y * s
        h[lo:top, k + 1] = -x * np.conj(s) + y * np.conj(c)
    h[idx, idx] += mu


def hessenberg_eigenvalues(h: np.ndarray, max_sweeps: int | None = None) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by shifted QR with deflation."""
    h = np.array(h, dtype=complex)
    n = h.shape[0]
    if n == 0:
        return np.empty(0, dtype=complex)
    if max_sweeps is None:
        max_sweeps = SWEEPS_PER_DIM * n
    scale = max(np.abs(h).max(), np.finfo(float).tiny)
    values = np.empty(n, dtype=complex)
    hi = n - 1
    sweeps = 0
    since_deflation = 0
    while hi >= 0:
        if hi == 0:
            values[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = scale
            if abs(h[lo, lo - 1]) <= EPS * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            values[hi] = h[hi, hi]
            hi -= 1
            since_deflation = 0
            continue
        if sweeps >= max_sweeps:
            raise ConvergenceError(
                f"QR iteration did not converge after {sweeps} sweeps "
                f"({n - hi - 1} of {n} eigenvalues deflated)",
                converged=n - hi - 1, iterations=sweeps)
        if since_deflation and since_deflation % 10 == 0:
            # Exceptional shift breaks cycles that Wilkinson shifts can fall into.
            mu = h[hi, hi] + 1.5 * abs(h[hi, hi - 1]) * np.exp(1j * since_deflation)
        else:
            mu = _wilkinson_shift(h, hi)
        _qr_sweep(h, lo, hi, mu)
        sweeps += 1
        since_deflation += 1
    return values


def sort_order(values: np.ndarray) -> np.ndarray:
    return np.lexsort((values.imag, values.real))


def _inverse_iteration(a, lam, start, previous, norm_a, steps=3):
    """Right eigenvector for ``lam`` by inverse iteration on ``a``.

    ``previous`` holds already-computed vectors of the same eigenvalue cluster;
    the new vector is orthogonalized against them so that semisimple
    eigenvalues get an independent basis. If that leaves the eigenspace (a
    defective eigenvalue), the plain iterate is returned.
    """
    n = a.shape[0]
    shift = lam + 8.0 * EPS * max(norm_a, 1.0) * (1.0 + 0.5j)
    lu = sla.lu_factor(a - shift * np.eye(n), check_finite=False)

    def iterate(x, orthogonalize):
        for _ in range(steps):
            x = sla.lu_solve(lu, x, check_finite=False)
            if orthogonalize:
                for w in previous:
                    x = x - w * (w.conj() @ x)
            nrm = np.linalg.norm(x)
            if not np.isfinite(nrm) or nrm == 0.0:
                return None
            x = x / nrm
        return x

    def residual(x):
        return np.linalg.norm(a @ x - lam * x)

    x = iterate(start, orthogonalize=bool(previous))
    if previous:
        plain = iterate(start, orthogonalize=False)
        if x is None or (plain is not None and residual(x) > 1e3 * max(residual(plain), EPS * norm_a)):
            x = plain
    if x is None:
        raise NumericalError(f"inverse iteration broke down at eigenvalue {lam}")
    return x


def eigendecompose(h, vectors: bool = True) -> EigenDecomposition:
    """Eigenvalues and right eigenvectors of a dense complex matrix.

    Raises
    ------
    ConvergenceError
        If QR exceeds ``40 * dim`` sweeps.
    NumericalError
        If an eigenpair misses the residual bound ``1e-9 * max(1, |H|_inf)``.
    """
    a = np.array(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    balanced, _ = balance(a)
    values = hessenberg_eigenvalues(hessenberg(balanced))
    order = sort_order(values)
    values = values[order]
    if not vectors:
        return EigenDecomposition(values, np.empty((n, 0), dtype=complex), np.empty(0))

    norm_a = matrix_inf_norm(a)
    bound = RESIDUAL_RTOL * max(1.0, norm_a)
    cluster_tol = 1e-8 * max(1.0, norm_a)
    rng = np.random.default_rng(12345)
    vecs = np.empty((n, n), dtype=complex)
    res = np.empty(n)
    for i, lam in enumerate(values):
        previous = [vecs[:, j] for j in range(i) if abs(values[j] - lam) <= cluster_tol]
        start = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x = _inverse_iteration(a, lam, start / np.linalg.norm(start), previous, norm_a)
        pivot = np.argmax(np.abs(x))
        x = x * (abs(x[pivot]) / x[pivot])
        vecs[:, i] = x
        res[i] = np.linalg.norm(a @ x - lam * x)
    worst = int(np.argmax(res)) if n else 0
    if n and res[worst] > bound:
        raise NumericalError(
            f"eigenpair {worst} (lambda={values[worst]:.6g}) has residual {res[worst]:.3e} > {bound:.3e}")
    return EigenDecomposition(values, vecs, res)


def eigenvalue_multiplicity(dec: EigenDecomposition, e0: complex, tol: float = MULTIPLICITY_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return int(np.count_nonzero(np.abs(dec.values - e0) <= tol))
