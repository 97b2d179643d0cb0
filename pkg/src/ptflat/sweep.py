"""Parameter sweeps over a process pool with a deterministic merge.

Grid points are split into contiguous chunks; results are reassembled by grid
index, so the output does not depend on the chunking or the worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .analysis import classify_phase, find_eps, max_imag_on_grid
from .model import LatticeParams

MAX_POINTS = 10 ** 6
WORKERS_ENV = "PTFLAT_WORKERS"


@dataclass
class SweepResult:
    results: list
    failed: dict = field(default_factory=dict)

    @property
    def complete(self) -> bool:
        return not self.failed


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _run_chunk(func, start, points):
    out, errors = [], {}
    for i, pt in enumerate(points, start=start):
        try:
            out.append((i, func(pt)))
        except Exception as exc:  # reported per point, the sweep carries on
            errors[i] = f"{type(exc).__name__}: {exc}"
    return out, errors


def run_sweep(func: Callable, points: Sequence, workers: int | None = None,
              chunk_size: int | None = None) -> SweepResult:
    """Evaluate ``func`` on every point; failed points are listed, not fatal.

    ``func`` must be a picklable top-level callable when ``workers > 1``.
    """
    n = len(points)
    if n == 0:
        raise ValueError("empty grid")
    if n > MAX_POINTS:
        raise ValueError(f"grid has {n} points, limit is {MAX_POINTS}")
    workers = worker_count() if workers is None else max(1, workers)
    if chunk_size is None:
        chunk_size = max(1, math.ceil(n / (4 * workers)))
    chunks = [(s, list(points[s:s + chunk_size])) for s in range(0, n, chunk_size)]

    results = [None] * n
    failed = {}
    if workers == 1:
        outcomes = [_run_chunk(func, s, pts) for s, pts in chunks]
    else:
        outcomes = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_run_chunk, func, s, pts): (s, len(pts)) for s, pts in chunks}
            for fut in as_completed(futures):
                s, m = futures[fut]
                try:
                    outcomes.append(fut.result())
                except Exception as exc:  # worker process died
                    outcomes.append(([], {i: f"{type(exc).__name__}: {exc}" for i in range(s, s + m)}))
    for out, errors in outcomes:
        for i, value in out:
            results[i] = value
        failed.update(errors)
    return SweepResult(results, dict(sorted(failed.items())))


@dataclass(frozen=True)
class GammaPoint:
    params: LatticeParams
    n_k: int


def gamma_scan_point(pt: GammaPoint) -> float:
    return max_imag_on_grid(pt.params, pt.n_k)


@dataclass(frozen=True)
class PhasePoint:
    u: float
    v: float
    r: float
    phi: float


def _j_for(u, phi):
    c = abs(math.cos(phi))
    if c == 0:
        raise ValueError("phase grid needs cos(phi) != 0")
    return u / c


def phase_point(pt: PhasePoint) -> dict:
    """EP count two ways: closed-form classification and explicit EP momenta."""
    j = _j_for(pt.u, pt.phi)
    cls = classify_phase(j, pt.v, pt.r, pt.phi)
    params = LatticeParams.at_flat_band(v=pt.v, j_coupling=j, r=pt.r, phi=pt.phi)
    eps = find_eps(params)
    return {
        "ep_count": cls.ep_count,
        "location": cls.flat_band_location.value,
        "boundary_case": cls.boundary_case,
        "found_eps": len(eps),
    }


def region_code(ep_count: int, location: str) -> str:
    if ep_count:
        return str(ep_count)
    return "0_outside" if location == "outside_bands" else "0_inside"
