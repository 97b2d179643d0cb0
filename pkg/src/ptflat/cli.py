"""Command-line front end.

Every command writes its outputs plus ``config.json``, the fully resolved
configuration; ``ptflat replay config.json`` reproduces the same files.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, svg
from .analysis import classify_phase, critical_gamma, discriminant, find_eps
from .bands import band_structure, flatness_deviation
from .cls import (Side, Variant, edge_mode, flat_band_energy, flat_band_superposition,
                  inner_cls, verify_eigenstate)
from .dynamics import evolve, intensity_outside_support
from .errors import NumericalError, ParameterError, PtflatError
from .lattice import build_hamiltonian
from .model import Boundary, LatticeParams
from .spectral import eigendecompose, eigenvalue_multiplicity
from .sweep import (GammaPoint, PhasePoint, gamma_scan_point, phase_point, region_code,
                    run_sweep)

log = logging.getLogger("ptflat")

COMMANDS = ("bands", "phase", "eps", "spectrum", "cls", "evolve", "sweep")
FORMATS = ("csv", "json", "svg")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(PtflatError, ValueError):
    pass


_NUM = r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"


def _parse_scaled(text: str, token: str, unit: float) -> float:
    """Parse ``[sign][num][*]token[/num]`` or a plain number."""
    s = text.strip().replace(" ", "").lower()
    m = re.fullmatch(rf"([+-]?)({_NUM})?\*?{token}(?:/({_NUM}))?", s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise ConfigError(f"division by zero in {text!r}")
        return sign * num * unit / den
    m = re.fullmatch(rf"([+-]?(?:{_NUM}))/({_NUM})", s)
    try:
        if m:
            return float(m.group(1)) / float(m.group(2))
        return float(s)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse {text!r}") from None


def parse_angle(text: str) -> float:
    """``pi/3``, ``-pi/2``, ``2pi/3``, ``0.5`` ..."""
    return _parse_scaled(text, "pi", math.pi)


def resolve_gamma(text: str, j_coupling: float, phi: float) -> float:
    """A number, or a multiple of the flat-band rate: ``fb``, ``fb/2``, ``3fb/2``."""
    gamma = _parse_scaled(text, "fb", j_coupling * math.sin(phi))
    if gamma < 0:
        raise ConfigError(f"gamma resolves to {gamma:.6g} < 0")
    return gamma


PRESETS = {
    "fig3a": dict(params=dict(j="1/2", phi="pi/3", r=1.0, v=2.0, gamma="fb/2")),
    "fig3b": dict(params=dict(j="1/2", phi="pi/3", r=1.0, v=2.0, gamma="fb")),
    "fig3c": dict(params=dict(j="1/2", phi="pi/3", r=1.0, v=2.0, gamma="3fb/2")),
    "fig4": dict(params=dict(j="1", phi="pi/2", r=1.0, v=1.5, gamma="1/2", n=10, boundary="open")),
    "fig5a": dict(params=dict(j="1", phi="pi/2", r=1.0, v=1.5, gamma="1/2", n=10, boundary="open"),
                  options=dict(state="edge", variant="I", side="left", t_final=20.0)),
    "fig5b": dict(params=dict(j="1", phi="pi/2", r=1.0, v=1.5, gamma="1/2", n=10, boundary="open"),
                  options=dict(state="inner", center=4, t_final=20.0)),
}


def _number(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    return _parse_scaled(str(text), "pi", math.pi)


@dataclass
class RunConfig:
    command: str
    params: LatticeParams
    options: dict = field(default_factory=dict)
    output: Path = Path(".")
    formats: tuple = FORMATS

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"unknown formats {sorted(bad)}")
        self.output = Path(self.output)

    def to_dict(self) -> dict:
        return {"command": self.command, "params": self.params.to_dict(),
                "options": dict(sorted(self.options.items())), "formats": list(self.formats)}

    @classmethod
    def from_dict(cls, data: dict, output) -> "RunConfig":
        try:
            params = LatticeParams(**data["params"])
            return cls(data["command"], params, dict(data.get("options", {})), output,
                       tuple(data.get("formats", FORMATS)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None


# --- command implementations -------------------------------------------------

def _want(cfg, fmt):
    return fmt in cfg.formats


def _cmd_bands(cfg: RunConfig) -> dict:
    n_k = int(cfg.options.get("nk", 501))
    if n_k < 2:
        raise ConfigError("--nk must be >= 2")
    bs = band_structure(cfg.params, n_k)
    p = cfg.params
    summary = {"n_k": n_k, "max_imag": bs.max_imag, "e_fb": p.e_fb, "gamma_fb": p.gamma_fb,
               "flatness_deviation": flatness_deviation(bs, p.e_fb)}
    if _want(cfg, "csv"):
        io.write_bands_csv(cfg.output / "bands.csv", bs)
    if _want(cfg, "svg"):
        title = f"(v={p.v:g}, J={p.j_coupling:g}, gamma={p.gamma:.4g})"
        svg.bands_svg(bs, title).save(cfg.output / "bands.svg")
    if _want(cfg, "json"):
        io.write_json(cfg.output / "bands.json", summary)
    return summary


def _parse_grid(text) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", str(text))
    if not m:
        raise ConfigError(f"grid must look like 100x100, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _phase_axes(cfg):
    nx, ny = _parse_grid(cfg.options.get("grid", "100x100"))
    if nx < 1 or ny < 1:
        raise ConfigError("empty grid")
    extent = float(cfg.options.get("extent", 3.0)) * cfg.params.r
    xs = np.linspace(0.0, extent, nx) if nx > 1 else np.array([0.0])
    ys = np.linspace(0.0, extent, ny) if ny > 1 else np.array([0.0])
    return xs, ys


def _cmd_phase(cfg: RunConfig) -> dict:
    p = cfg.params
    if p.r <= 0:
        raise ConfigError("phase diagram needs r > 0")
    if abs(math.cos(p.phi)) < 1e-12:
        raise ConfigError("phase diagram is defined for phi != n*pi + pi/2")
    xs, ys = _phase_axes(cfg)
    counts, locations, boundary, codes = [], [], [], []
    for v in ys:
        row = [classify_phase(u / abs(math.cos(p.phi)), v, p.r, p.phi) for u in xs]
        counts.append([c.ep_count for c in row])
        locations.append([c.flat_band_location.value for c in row])
        boundary.append([c.boundary_case for c in row])
        codes.append([region_code(c.ep_count, c.flat_band_location.value) for c in row])
    payload = {
        "grid": {"x": "J|cos(phi)|", "y": "v", "x_values": xs, "y_values": ys,
                 "r": p.r, "phi": p.phi, "shape": [len(ys), len(xs)]},
        "region_codes": {"4": "four EPs", "3": "three EPs (merged pair)", "2": "two EPs",
                         "1": "one EP (merged pair)", "0_inside": "no EP, flat band in the gap",
                         "0_outside": "no EP, flat band outside the dispersive bands"},
        "regions": codes, "ep_count": counts, "location": locations, "boundary_case": boundary,
    }
    if _want(cfg, "json"):
        io.write_json(cfg.output / "phase.json", payload)
    if _want(cfg, "svg"):
        svg.phase_svg(xs, ys, codes, "J|cos phi|", "v", f"r={p.r:g}").save(cfg.output / "phase.svg")
    tally = {}
    for row in codes:
        for c in row:
            tally[c] = tally.get(c, 0) + 1
    return {"regions": dict(sorted(tally.items()))}


def _cmd_eps(cfg: RunConfig) -> dict:
    p = cfg.params
    pts = find_eps(p)
    cls_ = classify_phase(p.j_coupling, p.v, p.r, p.phi) if p.r > 0 else None
    records = [{"k": pt.k, "order": pt.order.value, "energy": pt.energy, "merged": pt.merged,
                "discriminant": float(discriminant(p, pt.k))} for pt in pts]
    gm, gp = critical_gamma(p.v, p.r, p.j_coupling, p.phi)
    summary = {"points": records, "count": len(pts), "gamma_fb": p.gamma_fb, "e_fb": p.e_fb,
               "gamma_c_minus": gm, "gamma_c_plus": gp}
    if cls_ is not None:
        summary["classification"] = {"ep_count": cls_.ep_count,
                                     "location": cls_.flat_band_location.value,
                                     "boundary_case": cls_.boundary_case}
    if _want(cfg, "json"):
        io.write_json(cfg.output / "eps.json", summary)
    if _want(cfg, "csv"):
        rows = [(io.fmt(r["k"]), r["order"], io.fmt(r["energy"].real), io.fmt(r["energy"].imag),
                 int(r["merged"])) for r in records]
        io._write_rows(cfg.output / "eps.csv", ("k", "order", "re", "im", "merged"), rows)
    return {"count": len(pts)}


def _cmd_spectrum(cfg: RunConfig) -> dict:
    h = build_hamiltonian(cfg.params)
    dec = eigendecompose(h.matrix)
    e_ref = flat_band_energy(cfg.params) if (cfg.params.chiral or cfg.params.on_flat_band()) else None
    summary = {"dim": h.dim, "max_residual": float(dec.residuals.max()),
               "max_imag": float(np.abs(dec.values.imag).max())}
    if e_ref is not None:
        summary["flat_band_energy"] = e_ref
        summary["flat_band_multiplicity"] = eigenvalue_multiplicity(
            dec, e_ref, float(cfg.options.get("tol", 1e-6)))
    if _want(cfg, "csv"):
        io.write_spectrum_csv(cfg.output / "spectrum.csv", dec.values)
    if _want(cfg, "json"):
        io.write_json(cfg.output / "spectrum.json", summary)
    export = cfg.options.get("export_matrix")
    if export == "csv":
        io.write_matrix_csv(cfg.output / "hamiltonian.csv", h.matrix)
    elif export == "bin":
        io.write_matrix_bin(cfg.output / "hamiltonian.bin", h.matrix)
    elif export is not None:
        raise ConfigError(f"--export-matrix must be csv or bin, got {export!r}")
    return summary


def _build_state(cfg: RunConfig):
    o = cfg.options
    kind = o.get("state", "edge")
    p = cfg.params
    if kind == "edge":
        psi = edge_mode(p, Variant(o.get("variant", "I")), Side(o.get("side", "left")))
    elif kind == "inner":
        psi = inner_cls(p, int(o.get("center", 2)))
    elif kind == "superposition":
        zeta = o.get("zeta")
        if zeta is None:
            raise ConfigError("superposition state needs --zeta")
        psi = flat_band_superposition(p, [complex(z) for z in zeta])
    elif kind == "site":
        cell, site = int(o.get("cell", 1)), "ABC".index(str(o.get("site", "B")).upper())
        amps = np.zeros(3 * p.n_cells, dtype=complex)
        amps[3 * (cell - 1) + site] = 1.0
        from .cls import StateVector
        psi = StateVector(amps)
    else:
        raise ConfigError(f"unknown state kind {kind!r}")
    return psi


def _cmd_cls(cfg: RunConfig) -> dict:
    psi = _build_state(cfg)
    h = build_hamiltonian(cfg.params)
    energy = flat_band_energy(cfg.params)
    summary = {"energy": energy, "residual": verify_eigenstate(h.matrix, psi, energy),
               "support": psi.support()}
    if _want(cfg, "csv"):
        io.write_state_csv(cfg.output / "state.csv", psi)
    if _want(cfg, "json"):
        io.write_json(cfg.output / "cls.json", summary)
    return summary


def _cmd_evolve(cfg: RunConfig) -> dict:
    o = cfg.options
    psi = _build_state(cfg)
    h = build_hamiltonian(cfg.params)
    t_final = float(o.get("t_final", 20.0))
    dt = o.get("dt")
    traj = evolve(h.matrix, psi, t_final, None if dt is None else float(dt),
                  stride=int(o.get("stride", 10)))
    support = psi.support()
    drift = float(np.abs(traj.intensities - traj.intensities[0]).max())
    summary = {"t_final": t_final, "dt": traj.dt, "samples": len(traj.times),
               "support": support, "leaked_fraction": intensity_outside_support(traj, support),
               "max_intensity_drift": drift, "overflowed": traj.overflowed}
    if _want(cfg, "csv"):
        io.write_trajectory_csv(cfg.output / "trajectory.csv", traj)
    if _want(cfg, "svg"):
        svg.heatmap_svg(traj.times, traj.intensities, "|psi(t)|^2").save(cfg.output / "evolve.svg")
    if _want(cfg, "json"):
        io.write_json(cfg.output / "evolve.json", summary)
    if traj.overflowed:
        raise NumericalError(f"amplitude overflow before t={t_final}; partial trajectory written")
    return summary


def _cmd_sweep(cfg: RunConfig) -> dict:
    o = cfg.options
    kind = o.get("kind", "gamma")
    p = cfg.params
    workers = o.get("workers")
    if kind == "gamma":
        lo, hi, n = o.get("gamma_range", (0.0, 2.0, 201))
        lo, hi, n = float(lo), float(hi), int(n)
        if n < 1:
            raise ConfigError("empty grid")
        n_k = int(o.get("nk", 2000))
        threshold = float(o.get("im_tol", 1e-8))
        gammas = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
        points = [GammaPoint(p.replace(gamma=float(g)), n_k) for g in gammas]
        res = run_sweep(gamma_scan_point, points, workers)
        rows = []
        first = None
        for i, (g, m) in enumerate(zip(gammas, res.results)):
            broken = m is not None and m > threshold
            rows.append({"index": i, "gamma": g, "max_imag": m, "broken": broken})
            if broken and first is None:
                first = i
        gm, gp = critical_gamma(p.v, p.r, p.j_coupling, p.phi)
        summary = {"kind": kind, "n_points": n, "first_broken_gamma": None if first is None else gammas[first],
                   "bracket": None if not first else [gammas[first - 1], gammas[first]],
                   "gamma_c_minus": gm, "gamma_c_plus": gp, "failed": res.failed}
        header = ("index", "gamma", "max_imag", "broken")
        csv_rows = [(r["index"], io.fmt(r["gamma"]), "" if r["max_imag"] is None else io.fmt(r["max_imag"]),
                     int(r["broken"])) for r in rows]
    elif kind == "phase":
        if abs(math.cos(p.phi)) < 1e-12:
            raise ConfigError("phase sweep is defined for phi != n*pi + pi/2")
        xs, ys = _phase_axes(cfg)
        points = [PhasePoint(float(u), float(v), p.r, p.phi) for v in ys for u in xs]
        res = run_sweep(phase_point, points, workers)
        mismatches = sum(1 for r in res.results if r is not None and r["ep_count"] != r["found_eps"])
        summary = {"kind": kind, "n_points": len(points), "mismatches": mismatches, "failed": res.failed}
        header = ("index", "u", "v", "ep_count", "found_eps", "location", "boundary_case")
        csv_rows = [(i, io.fmt(pt.u), io.fmt(pt.v),
                     *(("", "", "", "") if r is None else
                       (r["ep_count"], r["found_eps"], r["location"], int(r["boundary_case"]))))
                    for i, (pt, r) in enumerate(zip(points, res.results))]
    else:
        raise ConfigError(f"unknown sweep kind {kind!r}")
    if _want(cfg, "csv"):
        io._write_rows(cfg.output / "sweep.csv", header, csv_rows)
    if _want(cfg, "json"):
        io.write_json(cfg.output / "sweep.json", summary)
    if res.failed:
        raise NumericalError(f"{len(res.failed)} sweep points failed; partial results written")
    return summary


HANDLERS = {"bands": _cmd_bands, "phase": _cmd_phase, "eps": _cmd_eps, "spectrum": _cmd_spectrum,
            "cls": _cmd_cls, "evolve": _cmd_evolve, "sweep": _cmd_sweep}


def run(config: RunConfig) -> int:
    """Execute one command, writing its files and ``config.json`` into ``config.output``."""
    try:
        config.output.mkdir(parents=True, exist_ok=True)
        io.write_json(config.output / "config.json", config.to_dict(), exact=True)
        summary = HANDLERS[config.command](config)
    except (ConfigError, ParameterError) as exc:
        print(f"ptflat {config.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"ptflat {config.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"ptflat {config.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"ptflat {config.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    log.info("%s: %s", config.command, summary)
    return EXIT_OK


# --- argument parsing --------------------------------------------------------

def _add_params(sp):
    g = sp.add_argument_group("lattice parameters")
    g.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set (fig3a..fig3c, fig4, fig5a, fig5b)")
    g.add_argument("--gamma", help="gain/loss rate: number or multiple of fb (e.g. fb, fb/2)")
    g.add_argument("--v", help="intracell B coupling")
    g.add_argument("--J", dest="j", help="A-C coupling magnitude")
    g.add_argument("--r", help="cross-stitch coupling")
    g.add_argument("--phi", help="flux in radians, e.g. pi/3")
    g.add_argument("--N", dest="n", type=int, help="number of unit cells")
    g.add_argument("--boundary", choices=[b.value for b in Boundary])
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument("--formats", default="csv,json,svg", help="comma-separated subset of csv,json,svg")


def _add_state(sp):
    sp.add_argument("--state", choices=["edge", "inner", "superposition", "site"])
    sp.add_argument("--variant", choices=["I", "II"])
    sp.add_argument("--side", choices=["left", "right"])
    sp.add_argument("--center", type=int)
    sp.add_argument("--zeta", help="comma-separated complex coefficients, one per cell")
    sp.add_argument("--cell", type=int)
    sp.add_argument("--site", choices=["A", "B", "C"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptflat", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bands", help="band structure on a k-grid")
    _add_params(sp)
    sp.add_argument("--nk", type=int)

    sp = sub.add_parser("phase", help="EP-count phase map over (J|cos phi|, v)")
    _add_params(sp)
    sp.add_argument("--grid", help="NXxNY, default 100x100")
    sp.add_argument("--extent", type=float, help="axis range in units of r, default 3")

    sp = sub.add_parser("eps", help="exceptional points on the flat-band manifold")
    _add_params(sp)

    sp = sub.add_parser("spectrum", help="real-space spectrum")
    _add_params(sp)
    sp.add_argument("--export-matrix", choices=["csv", "bin"])
    sp.add_argument("--tol", type=float, help="multiplicity tolerance")

    sp = sub.add_parser("cls", help="build and verify a compact localized state")
    _add_params(sp)
    _add_state(sp)

    sp = sub.add_parser("evolve", help="time evolution of a state")
    _add_params(sp)
    _add_state(sp)
    sp.add_argument("--t-final", dest="t_final", type=float)
    sp.add_argument("--dt", type=float)
    sp.add_argument("--stride", type=int)

    sp = sub.add_parser("sweep", help="parallel parameter sweep")
    _add_params(sp)
    sp.add_argument("--kind", choices=["gamma", "phase"])
    sp.add_argument("--gamma-range", dest="gamma_range", help="lo:hi:n")
    sp.add_argument("--nk", type=int)
    sp.add_argument("--grid")
    sp.add_argument("--extent", type=float)
    sp.add_argument("--workers", type=int)

    sp = sub.add_parser("replay", help="re-run a resolved config.json")
    sp.add_argument("config")
    sp.add_argument("--out", default=".")
    return ap


_PARAM_KEYS = ("gamma", "v", "j", "r", "phi", "n", "boundary")
_OPTION_KEYS = ("nk", "grid", "extent", "export_matrix", "tol", "state", "variant", "side", "center",
                "zeta", "cell", "site", "t_final", "dt", "stride", "kind", "gamma_range", "workers")


def config_from_args(args) -> RunConfig:
    preset = PRESETS.get(getattr(args, "preset", None) or "", {})
    raw = {"j": "0", "phi": "0", "r": "1", "v": "1", "gamma": "0", "n": 10, "boundary": "periodic"}
    raw.update(preset.get("params", {}))
    for key in _PARAM_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    options = dict(preset.get("options", {}))
    for key in _OPTION_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            options[key] = val
    if "zeta" in options and isinstance(options["zeta"], str):
        options["zeta"] = [z.strip() for z in options["zeta"].split(",")]
    if "gamma_range" in options and isinstance(options["gamma_range"], str):
        parts = options["gamma_range"].split(":")
        if len(parts) != 3:
            raise ConfigError("--gamma-range must be lo:hi:n")
        options["gamma_range"] = [_number(parts[0]), _number(parts[1]), int(parts[2])]
    try:
        j = _number(raw["j"])
        phi = parse_angle(str(raw["phi"]))
        params = LatticeParams(
            gamma=resolve_gamma(str(raw["gamma"]), j, phi), v=_number(raw["v"]), j_coupling=j,
            r=_number(raw["r"]), phi=phi, n_cells=int(raw["n"]), boundary=raw["boundary"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    return RunConfig(args.command, params, options, Path(args.out), formats)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "replay":
            config = RunConfig.from_dict(io.read_json(args.config), args.out)
        else:
            config = config_from_args(args)
    except (ConfigError, ParameterError, OSError, ValueError) as exc:
        ap.print_usage(sys.stderr)
        print(f"ptflat: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
