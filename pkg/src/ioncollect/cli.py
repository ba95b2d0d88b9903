"""Command-line interface.

    ioncollect <subcommand> [--config FILE] [--seed N] [--output PATH] [--format csv|json] ...

Subcommands: positions, modes, pattern, enhance, sweep, optimize-phases,
fit, compare-species. Results are written once, at the end, to ``--output``
(or stdout). On failure a JSON error record is printed to stderr and the
exit status is 2 for configuration errors and 1 otherwise.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .analysis import fit_coherent_fraction, normalize_trace, species_comparison
from .collection import CollectionAperture, relative_enhancement
from .config import RunConfig, parse_config
from .crystal import (
    CrystalGeometry,
    axial_frequency_for_length_scale,
    axial_modes,
    equilibrium_positions,
    length_scale,
    length_scale_bounds,
)
from .errors import ConfigError, IonCollectError
from .optimize import ScanSpec, optimize_phases, sweep
from .physical import axial_frequency
from .scattering import ScatterScenario, pattern

SUBCOMMANDS = ("positions", "modes", "pattern", "enhance", "sweep", "optimize-phases", "fit", "compare-species")


def fmt(value):
    """Shortest round-trip text for numbers; empty string for missing values."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render(rows: list[dict], columns: list[str], format: str) -> str:
    if format == "json":
        clean = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(clean, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _scan_spec(cfg: RunConfig, n=None, **kw) -> ScanSpec:
    return ScanSpec(
        n=cfg.n if n is None else n,
        species=cfg.species,
        alpha=cfg.alpha,
        omega_r=cfg.omega_r,
        na_grid=cfg.na_grid or (cfg.na,),
        l_range=cfg.l_range,
        samples=cfg.samples,
        samples_per_fringe=cfg.samples_per_fringe,
        thermal=cfg.thermal,
        temperature=cfg.temperature,
        thermal_keff=cfg.thermal_keff,
        mode=kw.pop("mode", cfg.scan_mode),
        seed=cfg.seed,
        n_starts=cfg.n_starts,
        **kw,
    )


def _length_scale(cfg: RunConfig) -> float:
    """l from the config: explicit l, then omega_z, then the compressed bound."""
    if cfg.l is not None:
        return cfg.l
    if cfg.omega_z is not None:
        return length_scale(cfg.omega_z, cfg.species)
    return length_scale_bounds(cfg.n, cfg.omega_r, cfg.species).l_min


def _scenario(cfg: RunConfig, l: float) -> ScatterScenario:
    geom = CrystalGeometry.harmonic(cfg.n, l)
    return ScatterScenario.for_species(
        geom, cfg.species, cfg.alpha, cfg.phases, cfg.thermal, cfg.temperature, cfg.thermal_keff
    )


def cmd_positions(cfg):
    v = equilibrium_positions(cfg.n)
    l = cfg.l if cfg.l is not None else (length_scale(cfg.omega_z, cfg.species) if cfg.omega_z else None)
    rows = [{"i": i + 1, "v": float(x), "z_um": None if l is None else float(x) * l * 1e6} for i, x in enumerate(v)]
    return rows, ["i", "v", "z_um"]


def cmd_modes(cfg):
    l = cfg.l if cfg.l is not None else (length_scale(cfg.omega_z, cfg.species) if cfg.omega_z else None)
    wz = cfg.omega_z if cfg.omega_z is not None else (axial_frequency_for_length_scale(l, cfg.species) if l else None)
    geom = CrystalGeometry.harmonic(cfg.n, l or 1.0)
    modes = axial_modes(geom, 1.0 if wz is None else wz)
    cols = ["p", "eigenvalue", "frequency_ratio", "frequency_mhz"] + [f"b_{i + 1}" for i in range(cfg.n)]
    rows = []
    for p in range(cfg.n):
        row = {
            "p": p + 1,
            "eigenvalue": float(modes.eigenvalues[p]),
            "frequency_ratio": math.sqrt(modes.eigenvalues[p]),
            "frequency_mhz": None if wz is None else float(modes.mode_frequencies[p]) / (2 * math.pi) / 1e6,
        }
        for i in range(cfg.n):
            row[f"b_{i + 1}"] = float(modes.eigenvectors[i, p])
        rows.append(row)
    return rows, cols


def cmd_pattern(cfg):
    s = _scenario(cfg, _length_scale(cfg))
    grid = np.linspace(cfg.beta_min, cfg.beta_max, cfg.pattern_points)
    pat = pattern(s, grid)
    rows = [{"beta_deg": math.degrees(b), "intensity": float(i)} for b, i in zip(pat.beta, pat.intensities)]
    return rows, ["beta_deg", "intensity"]


def cmd_enhance(cfg):
    l = _length_scale(cfg)
    res = relative_enhancement(_scenario(cfg, l), CollectionAperture(cfg.na))
    row = {
        "n": res.n,
        "l_um": l * 1e6,
        "alpha_deg": math.degrees(res.alpha),
        "NA": res.na,
        "thermal": res.thermal,
        "phi_NA": res.phi_na,
        "P_D": res.p_d,
        "P_D_rel": res.p_d_rel,
    }
    return [row], list(row)


def cmd_sweep(cfg, workers=None):
    spec = _scan_spec(cfg)
    cells = sweep(spec, n_values=cfg.n_values or (cfg.n,), na_grid=cfg.na_grid or (cfg.na,), workers=workers or cfg.workers)
    rows = []
    for c in cells:
        rec = c.record
        row = {
            "n": c.n,
            "NA": c.na,
            "alpha_deg": math.degrees(cfg.alpha),
            "mode": spec.mode,
            "thermal": spec.thermal,
            "best_P_rel": None if rec is None else rec.best,
            "argmax_l_um": None,
            "argmax_d_um": None,
            "error": c.error,
        }
        if rec is not None:
            if spec.mode == "equidistant-d":
                row["argmax_d_um"] = rec.length_scale * 1e6
            else:
                row["argmax_l_um"] = rec.length_scale * 1e6
        rows.append(row)
    return rows, ["n", "NA", "alpha_deg", "mode", "thermal", "best_P_rel", "argmax_l_um", "argmax_d_um", "error"]


def cmd_optimize_phases(cfg):
    spec = _scan_spec(cfg, mode="phases-at-lmin")
    rec = optimize_phases(spec, CollectionAperture(cfg.na))
    row = {"n": rec.n, "NA": rec.na, "l_um": rec.length_scale * 1e6, "best_P_rel": rec.best}
    for i, p in enumerate(rec.argmax):
        row[f"phase_{i + 1}"] = p
    return [row], list(row)


def read_trace(path: str):
    """Read a measured scan: columns l_um or u_tip_v, counts, optional error."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "counts" not in fields or not ({"l_um", "u_tip_v"} & set(fields)):
            raise ConfigError(f"{path}: need columns 'counts' and 'l_um' or 'u_tip_v'", key="fit.data")
        rows = list(reader)
    key = "l_um" if "l_um" in fields else "u_tip_v"
    x = np.array([float(r[key]) for r in rows])
    c = np.array([float(r["counts"]) for r in rows])
    err = np.array([float(r["error"]) for r in rows]) if "error" in fields else None
    return key, x, c, err


def cmd_fit(cfg):
    if cfg.fit_data is None:
        raise ConfigError("fit.data must name a CSV file", key="fit.data")
    key, x, counts, err = read_trace(cfg.fit_data)
    if key == "u_tip_v":
        if cfg.hardware is None:
            raise ConfigError("u_tip_v traces need trap.hardware", key="trap.hardware")
        l = np.array(
            [length_scale(axial_frequency(replace(cfg.hardware, u_tip=u), cfg.species), cfg.species) for u in x]
        )
    else:
        l = x * 1e-6
    p_exp = normalize_trace(counts, cfg.n, cfg.single_ion_rate, cfg.background_rate)
    ap = CollectionAperture(cfg.na)

    def model(li):
        return relative_enhancement(_scenario(cfg, li), ap).p_d_rel

    weights = None
    if cfg.fit_weighted:
        if err is None:
            raise ConfigError("fit.weighted needs an 'error' column", key="fit.weighted")
        sigma_p = err / ((cfg.single_ion_rate - cfg.background_rate) * cfg.n)
        weights = 1.0 / sigma_p**2
    res = fit_coherent_fraction(l, p_exp, model, weights=weights, window=cfg.fit_window)
    row = {
        "n": cfg.n,
        "points": int(res.scan_values.size),
        "f_coh": res.f_coh,
        "f_incoh": res.f_incoh,
        "f_coh_unclamped": res.unclamped,
        "residual_norm": res.residual_norm,
    }
    return [row], list(row)


def cmd_compare_species(cfg):
    cmp = species_comparison(
        cfg.n,
        cfg.na,
        cfg.alpha,
        cfg.species,
        cfg.species_b,
        thermal=cfg.thermal,
        omega_r=cfg.omega_r,
        temperature=cfg.temperature,
        thermal_keff=cfg.thermal_keff,
        samples=cfg.samples,
        samples_per_fringe=cfg.samples_per_fringe,
    )
    row = {
        "n": cfg.n,
        "NA": cfg.na,
        "species_a": cfg.species.name,
        "species_b": cfg.species_b.name,
        "thermal": cfg.thermal,
        "P_rel_a": cmp.optimum_a.best,
        "P_rel_b": cmp.optimum_b.best,
        "ratio": cmp.ratio,
        "argmax_l_a_um": cmp.optimum_a.length_scale * 1e6,
        "argmax_l_b_um": cmp.optimum_b.length_scale * 1e6,
    }
    return [row], list(row)


COMMANDS = {
    "positions": cmd_positions,
    "modes": cmd_modes,
    "pattern": cmd_pattern,
    "enhance": cmd_enhance,
    "sweep": cmd_sweep,
    "optimize-phases": cmd_optimize_phases,
    "fit": cmd_fit,
    "compare-species": cmd_compare_species,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=int, help="seed for the phase optimizer starts")
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--n", type=int, help="number of ions")
    common.add_argument("--n-values", help="comma-separated ion numbers for sweep")
    common.add_argument("--na", type=float, help="numerical aperture")
    common.add_argument("--na-grid", help="comma-separated numerical apertures for sweep")
    common.add_argument("--alpha-deg", type=float, help="excitation angle in degrees")
    common.add_argument("--l-um", type=float, help="length scale in micrometres")
    common.add_argument("--species", help="species name")
    common.add_argument("--species-b", help="second species for compare-species")
    common.add_argument("--omega-r-mhz", type=float, help="radial secular frequency / 2 pi in MHz")
    common.add_argument("--thermal", action="store_true", default=None, help="include thermal dephasing")
    common.add_argument("--thermal-keff", choices=("axial", "scalar"))
    common.add_argument("--mode", choices=("harmonic-l", "equidistant-d", "phases-at-lmin"))
    common.add_argument("--samples", type=int, help="minimum coarse scan samples")
    common.add_argument("--data", help="measured trace CSV for fit")
    common.add_argument("--workers", type=int, help="parallel sweep workers")

    parser = argparse.ArgumentParser(prog="ioncollect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _csv_list(text, cast):
    return [cast(x) for x in text.split(",") if x.strip()]


def cli_overrides(args) -> dict:
    o = {}
    pairs = [
        ("seed", "scan.seed"),
        ("output", "output.path"),
        ("format", "output.format"),
        ("n", "scenario.n"),
        ("na", "scenario.NA"),
        ("alpha_deg", "scenario.alpha_deg"),
        ("l_um", "scenario.l_um"),
        ("species", "species"),
        ("species_b", "species_b"),
        ("omega_r_mhz", "trap.omega_r_mhz"),
        ("thermal", "mode.thermal"),
        ("thermal_keff", "mode.thermal_keff"),
        ("mode", "mode.scan_mode"),
        ("samples", "scan.samples"),
        ("data", "fit.data"),
        ("workers", "scan.workers"),
    ]
    for attr, path in pairs:
        value = getattr(args, attr)
        if value is not None:
            o[path] = value
    if args.n_values:
        o["scenario.n_values"] = _csv_list(args.n_values, int)
    if args.na_grid:
        o["scenario.NA_grid"] = _csv_list(args.na_grid, float)
    return o


def error_record(exc: BaseException) -> dict:
    rec = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("key", "line", "column", "residual", "estimate"):
        value = getattr(exc, attr, None)
        if value is not None:
            rec[attr] = _json_value(value)
    return rec


def run(command: str, cfg: RunConfig) -> str:
    """Execute ``command`` and return the rendered output text."""
    rows, columns = COMMANDS[command](cfg)
    return render(rows, columns, cfg.output_format)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}", key="config") from None
        cfg = parse_config(text, env=os.environ, overrides=cli_overrides(args))
        out = run(args.command, cfg)
    except ConfigError as exc:
        print(json.dumps(error_record(exc), sort_keys=True), file=sys.stderr)
        return 2
    except (IonCollectError, ValueError, OSError) as exc:
        print(json.dumps(error_record(exc), sort_keys=True), file=sys.stderr)
        return 1
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
