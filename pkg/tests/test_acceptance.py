"""End-to-end exit criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; the lines are repeated in
the pytest terminal summary. Run alone with ``pytest tests/test_acceptance.py``.
"""
import math

import numpy as np
import pytest
import scipy.linalg

from ptflat import (LatticeParams, Side, Variant, bloch_hamiltonian, build_hamiltonian, edge_mode,
                    eigendecompose, evolve, inner_cls, make_phi, make_varphi, propagate_by_eigenbasis,
                    zero_mode_basis, StateVector)
from ptflat.analysis import classify_phase, critical_gamma, discriminant, find_eps, threshold_gamma
from ptflat.bands import band_structure, bloch_roots, flat_band_params, flatness_deviation
from ptflat.cls import span_rank, verify_eigenstate
from ptflat.dynamics import intensity_outside_support
from ptflat.lattice import fourier_momenta
from ptflat.model import chiral_defect, check_chiral_symmetry, check_pt_symmetry, pt_defect
from ptflat.spectral import eigenvalue_multiplicity, matrix_inf_norm
from conftest import multiset_distance

pytestmark = pytest.mark.acceptance

SEED = 7
RESULTS = {}

CHIRAL_CHAIN = dict(v=1.5, j_coupling=1.0, r=1.0, phi=math.pi / 2)


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} ({detail})"
    RESULTS[number] = line
    print(line)
    assert ok, line


def test_01_flat_band_exactness():
    rng = np.random.default_rng(SEED)
    worst_flat = worst_energy = 0.0
    for _ in range(100):
        j = rng.uniform(0, 2)
        phi = rng.uniform(0, math.pi)
        while phi == 0.0:
            phi = rng.uniform(0, math.pi)
        v, r = rng.uniform(0, 3), rng.uniform(0, 2)
        while r == 0.0:
            r = rng.uniform(0, 2)
        p = LatticeParams(gamma=j * math.sin(phi), v=v, j_coupling=j, r=r, phi=phi)
        bs = band_structure(p, 1001)
        fb = flat_band_params(j, phi)
        worst_flat = max(worst_flat, flatness_deviation(bs, -j * math.cos(phi)))
        worst_energy = max(worst_energy, abs(fb.energy + j * math.cos(phi)), abs(p.e_fb + j * math.cos(phi)))
    report(1, "flat-band exactness", worst_flat <= 1e-10 and worst_energy <= 1e-10,
           f"max flatness deviation {worst_flat:.2e}, max energy error {worst_energy:.2e}")


def test_02_fourier_oracle():
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(50):
        base = dict(gamma=rng.uniform(0, 2), v=rng.uniform(0, 3), j_coupling=rng.uniform(0, 2),
                    r=rng.uniform(0, 2), phi=rng.uniform(-math.pi, math.pi))
        for n in range(3, 13):
            p = LatticeParams(n_cells=n, boundary="periodic", **base)
            values = eigendecompose(build_hamiltonian(p).matrix, vectors=False).values
            oracle = bloch_roots(p, fourier_momenta(n)).ravel()
            worst = max(worst, multiset_distance(values, oracle))
    report(2, "Fourier oracle", worst <= 1e-9, f"max multiset distance {worst:.2e} over 500 lattices")


def _expected_phase(x, y, tol=1e-9):
    """EP count and boundary flag read straight off the region inequalities (r = 1)."""
    if x <= tol:
        count = 2 if y < 1 - tol else (1 if abs(y - 1) <= tol else 0)
        return count, True
    on = [abs(x - (1 - y)) <= tol and y <= 1 + tol, abs(x - (y - 1)) <= tol and y >= 1 - tol,
          abs(x - (y + 1)) <= tol]
    if any(on):
        if on[0] and on[2]:
            return 2, True        # v = 0, u = r: both pairs merge, one at k = 0 and one at pi
        if on[0]:
            return 3, True
        return 1, True
    if y < 1 and x < 1 - y:
        return 4, False
    if abs(y - 1) < x < y + 1:
        return 2, False
    return 0, False


def _expected_location(x, y, count):
    if count:
        return "intersecting"
    return "outside_bands" if x > y + 1 else "inside_gap"


def test_03_phase_diagram():
    phi = math.pi / 3
    axis = np.linspace(0, 3, 100)
    mismatches, worst_disc, worst_pair, seen = 0, 0.0, 0.0, set()

    def check(x, y):
        nonlocal mismatches, worst_disc, worst_pair
        j = x / math.cos(phi)
        c = classify_phase(j, y, 1.0, phi)
        count, boundary = _expected_phase(x, y)
        ok = (c.ep_count, c.boundary_case, c.flat_band_location.value) == (
            count, boundary, _expected_location(x, y, count))
        p = LatticeParams.at_flat_band(v=y, j_coupling=j, r=1.0, phi=phi)
        pts = find_eps(p)
        ok = ok and len(pts) == count
        for pt in pts:
            worst_disc = max(worst_disc, abs(discriminant(p, pt.k)))
            roots = bloch_roots(p, pt.k)
            worst_pair = max(worst_pair, min(abs(roots[0] - roots[1]), abs(roots[1] - roots[2]),
                                             abs(roots[0] - roots[2])))
        mismatches += not ok
        seen.add(count)

    for y in axis:
        for x in axis:
            check(x, y)
    # measure-zero boundaries, sampled on purpose
    for y in np.linspace(0.05, 0.95, 7):
        check(1 - y, y)          # three EPs
    for y in np.linspace(1.2, 2.8, 7):
        check(y - 1, y)          # one EP at k = pi
    for y in np.linspace(0.1, 1.9, 7):
        check(y + 1, y)          # one EP at k = 0
    ok = mismatches == 0 and worst_disc <= 1e-9 and worst_pair <= 1e-6 and {0, 1, 2, 3, 4} <= seen
    report(3, "EP phase diagram", ok,
           f"{mismatches} mismatches, max |disc| {worst_disc:.2e}, max root gap {worst_pair:.2e}, counts {sorted(seen)}")


def test_04_critical_gamma():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(20):
        r = rng.uniform(0.2, 2.0)
        v = r + rng.uniform(0.1, 2.0)
        phi = rng.uniform(0.1, math.pi - 0.1)
        j = rng.uniform(0.0, 0.95) * (v - r) / abs(math.cos(phi))
        p = LatticeParams(gamma=0.0, v=v, j_coupling=j, r=r, phi=phi)
        assert classify_phase(j, v, r, phi).flat_band_location.value == "inside_gap"
        gm, _ = critical_gamma(v, r, j, phi)
        worst = max(worst, abs(threshold_gamma(p, n_k=2001, im_tol=1e-8) - gm))
    p0 = LatticeParams(gamma=0.0, v=2.0, j_coupling=0.0, r=1.0)
    err0 = abs(threshold_gamma(p0, n_k=2001, im_tol=1e-8) - math.sqrt(2) * (2.0 - 1.0))
    report(4, "critical non-Hermiticity", worst <= 1e-3 and err0 <= 1e-6,
           f"max |threshold - gamma_c-| {worst:.2e} over 20 sets, J=0 error {err0:.2e}")


def test_05_zero_mode_census():
    p = LatticeParams(gamma=1.0, n_cells=10, boundary="open", **CHIRAL_CHAIN)
    h = build_hamiltonian(p).matrix
    mult = eigenvalue_multiplicity(eigendecompose(h), 0.0, 1e-6)
    basis = zero_mode_basis(p)
    rank = span_rank(basis)
    worst = max(verify_eigenstate(h, s, 0.0) for s in basis)
    report(5, "zero-mode census", mult == 10 and rank == 10 and len(basis) == 10 and worst <= 1e-12,
           f"multiplicity {mult}, rank {rank}, max residual {worst:.2e}")


def test_06_state_values():
    p = LatticeParams(gamma=0.5, **CHIRAL_CHAIN)
    varphi, phi = make_varphi(p), make_phi(p)
    ok = tuple(varphi) == (1, 1j / 3, -1) and tuple(phi) == (1 / 3, 0, -1 / 3)
    report(6, "state values", ok, f"varphi={tuple(varphi)}, phi={tuple(phi)}")


def test_07_confinement():
    p = LatticeParams(gamma=1.0, n_cells=10, boundary="open", **CHIRAL_CHAIN)
    h = build_hamiltonian(p).matrix
    cases = [(edge_mode(p, Variant.I, Side.LEFT), {1, 2}), (inner_cls(p, 4), {3, 4, 5}),
             (edge_mode(p, Variant.II, Side.RIGHT), {8, 9, 10})]
    leak = drift = 0.0
    for psi, support in cases:
        traj = evolve(h, psi, 20.0)
        leak = max(leak, intensity_outside_support(traj, support))
        drift = max(drift, float(np.abs(traj.intensities - traj.intensities[0]).max()))
    report(7, "confinement dynamics", leak <= 1e-8 and drift <= 1e-6,
           f"max leaked fraction {leak:.2e}, max per-site drift {drift:.2e}")


def test_08_eigensolver_contract():
    rng = np.random.default_rng(SEED + 7)
    worst_res = worst_trace = worst_det = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 51))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        dec = eigendecompose(a)
        worst_res = max(worst_res, dec.residuals.max() / max(1.0, matrix_inf_norm(a)))
        worst_trace = max(worst_trace, abs(dec.values.sum() - np.trace(a)) / n)
        lu, piv = scipy.linalg.lu_factor(a)
        det = np.prod(np.diag(lu)) * (-1) ** np.count_nonzero(piv != np.arange(n))
        worst_det = max(worst_det, abs(np.prod(dec.values) - det) / abs(det))
    ok = worst_res <= 1e-9 and worst_trace <= 1e-9 and worst_det <= 1e-7
    report(8, "eigensolver contract", ok,
           f"max scaled residual {worst_res:.2e}, trace error per dim {worst_trace:.2e}, det rel error {worst_det:.2e}")


def test_09_symmetry_suite():
    rng = np.random.default_rng(SEED + 8)
    failures = 0
    for i in range(200):
        chiral_branch = i % 3
        phi = rng.uniform(-math.pi, math.pi)
        j = rng.uniform(0.1, 2)
        if chiral_branch == 0:
            j = 0.0
        elif chiral_branch == 1:
            phi = rng.choice([-1, 1]) * math.pi / 2
        p = LatticeParams(gamma=rng.uniform(0, 2), v=rng.uniform(0, 3), j_coupling=j,
                          r=rng.uniform(0, 2), phi=phi)
        k = rng.uniform(-math.pi, math.pi)
        h = bloch_hamiltonian(p, k)
        failures += not check_pt_symmetry(p, k, 1e-12)
        expect_chiral = chiral_branch < 2 or abs(j * math.cos(phi)) <= 1e-12
        failures += check_chiral_symmetry(p, k, 1e-12) is not expect_chiral
        # negative controls
        bad = h.copy()
        bad[0, 0] = 2j * p.gamma
        failures += p.gamma > 1e-6 and pt_defect(bad) <= 1e-12
        off = p.replace(j_coupling=1.0, phi=math.pi / 3)
        failures += chiral_defect(bloch_hamiltonian(off, k)) <= 1e-12
    report(9, "PT/chiral symmetry suite", failures == 0, f"{failures} failures over 200 samples")


def test_10_integrator_order():
    p = LatticeParams(gamma=0.3, v=2.0, j_coupling=0.5, r=1.0, phi=math.pi / 3, n_cells=3)
    h = build_hamiltonian(p).matrix
    dec = eigendecompose(h)
    rng = np.random.default_rng(SEED + 9)
    x = rng.normal(size=9) + 1j * rng.normal(size=9)
    psi0 = StateVector(x / np.linalg.norm(x))
    ref = propagate_by_eigenbasis(dec, psi0, 1.0).amplitudes

    def error(dt):
        traj = evolve(h, psi0, 1.0, dt=dt, cap_step=False, stride=10 ** 6)
        return np.linalg.norm(traj.states[-1] - ref)

    ratio = error(0.1) / error(0.05)
    report(10, "integrator order", 14 <= ratio <= 18, f"error ratio {ratio:.3f}")
