import math

import pytest

from ptflat import LatticeParams
from ptflat.analysis import classify_phase, critical_gamma
from ptflat.sweep import (GammaPoint, PhasePoint, gamma_scan_point, phase_point, region_code,
                          run_sweep, worker_count)


def square(x):
    return x * x


def fragile(x):
    if x == 3:
        raise ValueError("bad point")
    return -x


def test_partitioning_does_not_change_results():
    pts = list(range(37))
    ref = run_sweep(square, pts, workers=1).results
    for workers, chunk in ((1, 5), (2, 3), (3, 1), (2, None)):
        assert run_sweep(square, pts, workers=workers, chunk_size=chunk).results == ref
    assert ref == [x * x for x in pts]


def test_failures_are_reported_not_fatal():
    for workers in (1, 2):
        res = run_sweep(fragile, list(range(6)), workers=workers, chunk_size=2)
        assert not res.complete
        assert list(res.failed) == [3]
        assert "bad point" in res.failed[3]
        assert res.results[3] is None and res.results[5] == -5


def test_empty_and_oversized_grids():
    with pytest.raises(ValueError):
        run_sweep(square, [])


def test_worker_env(monkeypatch):
    monkeypatch.setenv("PTFLAT_WORKERS", "3")
    assert worker_count() == 3


def test_gamma_scan_brackets_closed_form():
    base = LatticeParams(gamma=0, v=2, j_coupling=0.5, r=1, phi=math.pi / 3)
    gm, _ = critical_gamma(2, 1, 0.5, math.pi / 3)
    gammas = [gm - 1e-3 + i * 2e-4 for i in range(11)]
    res = run_sweep(gamma_scan_point, [GammaPoint(base.replace(gamma=g), 2000) for g in gammas], workers=2)
    broken = [g for g, m in zip(gammas, res.results) if m > 1e-8]
    assert abs(broken[0] - gm) <= 1e-3
    assert all(m <= 1e-8 for g, m in zip(gammas, res.results) if g < gm - 1e-9)


def test_phase_points_match_classifier():
    phi = 0.8
    pts = [PhasePoint(u, v, 1.0, phi) for u in (0.0, 0.3, 1.0, 2.5) for v in (0.2, 1.0, 2.0)]
    res = run_sweep(phase_point, pts, workers=2)
    for pt, out in zip(pts, res.results):
        c = classify_phase(pt.u / math.cos(phi), pt.v, pt.r, phi)
        assert out["ep_count"] == out["found_eps"] == c.ep_count
        assert out["location"] == c.flat_band_location.value


def test_region_codes():
    assert region_code(4, "intersecting") == "4"
    assert region_code(0, "inside_gap") == "0_inside"
    assert region_code(0, "outside_bands") == "0_outside"
