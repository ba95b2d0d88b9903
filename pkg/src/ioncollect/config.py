"""Run configuration: YAML document -> validated :class:`RunConfig`.

Angles are given in degrees, lengths in micrometres and frequencies as
f = omega / 2 pi in MHz; everything is converted to SI radians once here.

Every key is optional. The documented defaults (see ``DEFAULTS``) describe
Ca40 at alpha = 45 deg, NA = 0.07, omega_r = 2 pi x 5 MHz, thermal off.

Environment variables ``IONCOLLECT_<SECTION>__<KEY>`` override document
values (e.g. ``IONCOLLECT_SCENARIO__NA=0.05``); their values are parsed as
YAML scalars.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import yaml

from .errors import ConfigError
from .optimize import MODES
from .physical import (
    TWO_PI,
    IonSpecies,
    TrapHardware,
    axial_frequency,
    get_species,
    radial_frequency,
    registered_species,
)
from .scattering import KEFF_MODES

ENV_PREFIX = "IONCOLLECT_"
FORMATS = ("csv", "json")

DEFAULTS = {
    "species": "Ca40",
    "species_b": "Ba138",
    "linewidth_mhz": None,
    "custom_species": [],
    "trap": {
        "omega_r_mhz": 5.0,
        "omega_z_mhz": None,
        "hardware": None,
    },
    "scenario": {
        "n": 2,
        "n_values": None,
        "alpha_deg": 45.0,
        "NA": 0.07,
        "NA_grid": None,
        "l_um": None,
        "phases_rad": None,
    },
    "mode": {
        "thermal": False,
        "temperature_k": None,
        "thermal_keff": "axial",
        "scan_mode": "harmonic-l",
    },
    "scan": {
        "l_range_um": None,
        "samples": 2000,
        "samples_per_fringe": 10.0,
        "seed": 0,
        "n_starts": 16,
        "workers": 1,
    },
    "pattern": {
        "beta_min_deg": 0.0,
        "beta_max_deg": 180.0,
        "points": 721,
    },
    "fit": {
        "data": None,
        "single_ion_rate": 270.0,
        "background_rate": 24.0,
        "window_um": None,
        "weighted": False,
    },
    "output": {
        "path": None,
        "format": "csv",
    },
}

HARDWARE_KEYS = ("u_tip_v", "u_rf_v", "omega_rf_mhz", "kappa", "z0_um", "r0_um")
SPECIES_KEYS = ("name", "mass_amu", "wavelength_nm", "linewidth_mhz", "charge_state")


@dataclass(frozen=True)
class RunConfig:
    species: IonSpecies
    species_b: IonSpecies
    omega_r: float  # rad/s
    omega_z: float | None  # rad/s
    hardware: TrapHardware | None
    n: int
    n_values: tuple | None
    alpha: float  # rad
    na: float
    na_grid: tuple | None
    l: float | None  # m
    phases: tuple | None
    thermal: bool
    temperature: float | None
    thermal_keff: str
    scan_mode: str
    l_range: tuple | None  # m
    samples: int
    samples_per_fringe: float
    seed: int
    n_starts: int
    workers: int
    beta_min: float
    beta_max: float
    pattern_points: int
    fit_data: str | None
    single_ion_rate: float
    background_rate: float
    fit_window: tuple | None  # m
    fit_weighted: bool
    output_path: str | None
    output_format: str


def load_document(text: str) -> dict:
    try:
        doc = yaml.safe_load(text) if text and text.strip() else None
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigError(f"parse error at line {line}, column {col}: {exc.problem}", line=line, column=col) from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"parse error: {exc}") from None
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping at the top level")
    return doc


def merge(defaults: dict, doc: dict, prefix: str = "") -> dict:
    """Overlay ``doc`` on ``defaults``, rejecting unknown keys."""
    out = copy.deepcopy(defaults)
    for key, value in doc.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            raise ConfigError(f"unknown key {path!r}", key=path)
        if isinstance(defaults[key], dict) and key != "hardware":
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a mapping", key=path)
            out[key] = merge(defaults[key], value, prefix=f"{path}.")
        else:
            out[key] = value
    return out


def env_overrides(env) -> dict:
    """Nested mapping built from ``IONCOLLECT_*`` variables."""
    doc: dict = {}
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        parts = name[len(ENV_PREFIX):].split("__")
        node = doc
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError:
            raise ConfigError(f"cannot parse environment override {name}", key=name) from None
        node[parts[-1]] = value
    return _restore_case(doc, DEFAULTS)


def _restore_case(doc, reference):
    # Environment variable names are conventionally upper case; map them back
    # onto the case used in the schema.
    out = {}
    for key, value in doc.items():
        match = next((k for k in reference if k.lower() == key.lower()), key) if isinstance(reference, dict) else key
        sub = reference.get(match) if isinstance(reference, dict) else None
        out[match] = _restore_case(value, sub) if isinstance(value, dict) else value
    return out


def set_path(doc: dict, path: str, value) -> None:
    node = doc
    parts = path.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _deep_update(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], value)
        else:
            out[key] = value
    return out


def _number(raw, key, positive=False, minimum=None, integer=False, allow_none=False):
    if raw is None and allow_none:
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key} must be a number, got {raw!r}", key=key)
    if integer and int(raw) != raw:
        raise ConfigError(f"{key} must be an integer, got {raw!r}", key=key)
    value = int(raw) if integer else float(raw)
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite", key=key)
    if positive and not value > 0:
        raise ConfigError(f"{key} must be positive, got {raw!r}", key=key)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {raw!r}", key=key)
    return value


def _na(raw, key):
    value = _number(raw, key)
    if not 0 < value < 1:
        raise ConfigError(f"{key} must lie in (0, 1), got {raw!r}", key=key)
    return value


def _choice(raw, key, choices):
    if raw not in choices:
        raise ConfigError(f"{key} must be one of {list(choices)}, got {raw!r}", key=key)
    return raw


def _species_from_mapping(raw, key):
    if not isinstance(raw, dict):
        raise ConfigError(f"{key} must be a species name or mapping", key=key)
    unknown = set(raw) - set(SPECIES_KEYS)
    if unknown:
        bad = sorted(unknown)[0]
        raise ConfigError(f"unknown key {key}.{bad!r}", key=f"{key}.{bad}")
    for req in ("name", "mass_amu", "wavelength_nm", "linewidth_mhz"):
        if req not in raw:
            raise ConfigError(f"{key}.{req} is required", key=f"{key}.{req}")
    try:
        return IonSpecies.from_amu(
            str(raw["name"]),
            _number(raw["mass_amu"], f"{key}.mass_amu", positive=True),
            _number(raw["wavelength_nm"], f"{key}.wavelength_nm", positive=True),
            _number(raw["linewidth_mhz"], f"{key}.linewidth_mhz", positive=True),
            _number(raw.get("charge_state", 1), f"{key}.charge_state", positive=True, integer=True),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key=key) from None


def _resolve_species(raw, key, custom):
    if isinstance(raw, dict):
        return _species_from_mapping(raw, key)
    if raw in custom:
        return custom[raw]
    try:
        return get_species(str(raw))
    except KeyError:
        known = sorted(set(registered_species()) | set(custom))
        raise ConfigError(f"{key}: unknown species {raw!r} (known: {', '.join(known)})", key=key) from None


def _range_um(raw, key):
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(f"{key} must be a pair [lo, hi]", key=key)
    lo = _number(raw[0], key, positive=True)
    hi = _number(raw[1], key, positive=True)
    if not lo < hi:
        raise ConfigError(f"{key} must satisfy lo < hi", key=key)
    return lo * 1e-6, hi * 1e-6


def validate(doc: dict) -> RunConfig:
    custom = {}
    if not isinstance(doc["custom_species"], list):
        raise ConfigError("custom_species must be a list", key="custom_species")
    for i, entry in enumerate(doc["custom_species"]):
        sp = _species_from_mapping(entry, f"custom_species[{i}]")
        custom[sp.name] = sp

    species = _resolve_species(doc["species"], "species", custom)
    species_b = _resolve_species(doc["species_b"], "species_b", custom)
    lw = _number(doc["linewidth_mhz"], "linewidth_mhz", positive=True, allow_none=True)
    if lw is not None:
        species = IonSpecies(species.name, species.mass, species.charge, species.wavelength, TWO_PI * lw * 1e6)

    trap = doc["trap"]
    hardware = None
    omega_z = None
    omega_r = _number(trap["omega_r_mhz"], "trap.omega_r_mhz", positive=True) * TWO_PI * 1e6
    if trap["hardware"] is not None:
        hw = trap["hardware"]
        if not isinstance(hw, dict):
            raise ConfigError("trap.hardware must be a mapping", key="trap.hardware")
        for name in hw:
            if name not in HARDWARE_KEYS:
                raise ConfigError(f"unknown key 'trap.hardware.{name}'", key=f"trap.hardware.{name}")
        vals = {}
        for name in HARDWARE_KEYS:
            if name not in hw:
                raise ConfigError(f"trap.hardware.{name} is required", key=f"trap.hardware.{name}")
            vals[name] = _number(hw[name], f"trap.hardware.{name}", positive=True)
        hardware = TrapHardware(
            u_tip=vals["u_tip_v"],
            u_rf=vals["u_rf_v"],
            omega_rf=TWO_PI * vals["omega_rf_mhz"] * 1e6,
            kappa=vals["kappa"],
            z0=vals["z0_um"] * 1e-6,
            r0=vals["r0_um"] * 1e-6,
        )
        omega_r = radial_frequency(hardware, species)
        omega_z = axial_frequency(hardware, species)
    wz = _number(trap["omega_z_mhz"], "trap.omega_z_mhz", positive=True, allow_none=True)
    if wz is not None:
        omega_z = wz * TWO_PI * 1e6

    sc = doc["scenario"]
    n = _number(sc["n"], "scenario.n", integer=True, minimum=1)
    if n > 50:
        raise ConfigError("scenario.n must be <= 50", key="scenario.n")
    n_values = None
    if sc["n_values"] is not None:
        if not isinstance(sc["n_values"], list) or not sc["n_values"]:
            raise ConfigError("scenario.n_values must be a non-empty list", key="scenario.n_values")
        n_values = tuple(_number(x, "scenario.n_values", integer=True, minimum=1) for x in sc["n_values"])
    alpha_deg = _number(sc["alpha_deg"], "scenario.alpha_deg")
    if not 0 < alpha_deg <= 90:
        raise ConfigError(f"scenario.alpha_deg must lie in (0, 90], got {alpha_deg}", key="scenario.alpha_deg")
    na = _na(sc["NA"], "scenario.NA")
    na_grid = None
    if sc["NA_grid"] is not None:
        if not isinstance(sc["NA_grid"], list) or not sc["NA_grid"]:
            raise ConfigError("scenario.NA_grid must be a non-empty list", key="scenario.NA_grid")
        na_grid = tuple(_na(x, "scenario.NA_grid") for x in sc["NA_grid"])
    l_um = _number(sc["l_um"], "scenario.l_um", positive=True, allow_none=True)
    phases = None
    if sc["phases_rad"] is not None:
        if not isinstance(sc["phases_rad"], list) or len(sc["phases_rad"]) != n:
            raise ConfigError(f"scenario.phases_rad must list {n} phases", key="scenario.phases_rad")
        phases = tuple(_number(x, "scenario.phases_rad") for x in sc["phases_rad"])

    md = doc["mode"]
    if not isinstance(md["thermal"], bool):
        raise ConfigError("mode.thermal must be true or false", key="mode.thermal")
    temperature = _number(md["temperature_k"], "mode.temperature_k", minimum=0.0, allow_none=True)
    thermal_keff = _choice(md["thermal_keff"], "mode.thermal_keff", KEFF_MODES)
    scan_mode = _choice(md["scan_mode"], "mode.scan_mode", MODES)
    if md["thermal"] and scan_mode == "equidistant-d":
        raise ConfigError("mode.thermal is not supported with equidistant-d", key="mode.thermal")

    scan = doc["scan"]
    out = doc["output"]
    pat = doc["pattern"]
    fit = doc["fit"]
    beta_min = _number(pat["beta_min_deg"], "pattern.beta_min_deg", minimum=0.0)
    beta_max = _number(pat["beta_max_deg"], "pattern.beta_max_deg")
    if not beta_min < beta_max <= 180:
        raise ConfigError("pattern.beta_max_deg must lie in (beta_min_deg, 180]", key="pattern.beta_max_deg")
    single = _number(fit["single_ion_rate"], "fit.single_ion_rate", minimum=0.0)
    bg = _number(fit["background_rate"], "fit.background_rate", minimum=0.0)
    if not single > bg:
        raise ConfigError("fit.single_ion_rate must exceed fit.background_rate", key="fit.single_ion_rate")
    if not isinstance(fit["weighted"], bool):
        raise ConfigError("fit.weighted must be true or false", key="fit.weighted")
    if out["path"] is not None and not isinstance(out["path"], str):
        raise ConfigError("output.path must be a string", key="output.path")

    return RunConfig(
        species=species,
        species_b=species_b,
        omega_r=omega_r,
        omega_z=omega_z,
        hardware=hardware,
        n=n,
        n_values=n_values,
        alpha=math.radians(alpha_deg),
        na=na,
        na_grid=na_grid,
        l=None if l_um is None else l_um * 1e-6,
        phases=phases,
        thermal=md["thermal"],
        temperature=temperature,
        thermal_keff=thermal_keff,
        scan_mode=scan_mode,
        l_range=_range_um(scan["l_range_um"], "scan.l_range_um"),
        samples=_number(scan["samples"], "scan.samples", integer=True, minimum=2),
        samples_per_fringe=_number(scan["samples_per_fringe"], "scan.samples_per_fringe", minimum=0.0),
        seed=_number(scan["seed"], "scan.seed", integer=True, minimum=0),
        n_starts=_number(scan["n_starts"], "scan.n_starts", integer=True, minimum=0),
        workers=_number(scan["workers"], "scan.workers", integer=True, minimum=1),
        beta_min=math.radians(beta_min),
        beta_max=math.radians(beta_max),
        pattern_points=_number(pat["points"], "pattern.points", integer=True, minimum=1),
        fit_data=None if fit["data"] is None else str(fit["data"]),
        single_ion_rate=single,
        background_rate=bg,
        fit_window=_range_um(fit["window_um"], "fit.window_um"),
        fit_weighted=fit["weighted"],
        output_path=out["path"],
        output_format=_choice(out["format"], "output.format", FORMATS),
    )


def parse_config(text: str = "", env=None, overrides=None) -> RunConfig:
    """Parse and validate a YAML run configuration.

    ``env`` is a mapping of environment variables (only ``IONCOLLECT_*``
    entries are used); ``overrides`` maps dotted keys to values and is
    applied last.

    Raises
    ------
    ConfigError
        On syntax errors (with ``line``/``column``) or invalid values (with
        ``key``).
    """
    doc = load_document(text)
    if env:
        doc = _deep_update(doc, env_overrides(env))
    for path, value in (overrides or {}).items():
        set_path(doc, path, value)
    merged = merge(DEFAULTS, doc)
    return validate(merged)
