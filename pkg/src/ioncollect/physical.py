"""Physical constants, ion species and trap-hardware conversions."""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 values, SI units. Kept here so every derived number is
# reproducible independently of the installed scipy version.
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
EPS0 = 8.8541878128e-12  # F / m
E_CHARGE = 1.602176634e-19  # C
AMU = 1.66053906660e-27  # kg

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IonSpecies:
    """Ion species parameters in SI units.

    Use :meth:`from_amu` to build a record from mass number, charge state,
    wavelength in nm and linewidth in MHz (Gamma / 2 pi).
    """

    name: str
    mass: float  # kg
    charge: float  # C
    wavelength: float  # m, scattering transition
    linewidth: float  # rad/s, natural linewidth of the cooling transition

    def __post_init__(self):
        for field in ("mass", "charge", "wavelength", "linewidth"):
            value = getattr(self, field)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"IonSpecies.{field} must be positive, got {value!r}")

    @classmethod
    def from_amu(cls, name, mass_amu, wavelength_nm, linewidth_mhz, charge_state=1):
        if int(charge_state) != charge_state or charge_state < 1:
            raise ValueError(f"charge_state must be a positive integer, got {charge_state!r}")
        return cls(
            name=name,
            mass=mass_amu * AMU,
            charge=int(charge_state) * E_CHARGE,
            wavelength=wavelength_nm * 1e-9,
            linewidth=TWO_PI * linewidth_mhz * 1e6,
        )

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength


@dataclass(frozen=True)
class TrapHardware:
    """Electrode voltages and geometry of a linear Paul trap with tip endcaps."""

    u_tip: float  # V
    u_rf: float  # V, RF amplitude
    omega_rf: float  # rad/s
    kappa: float  # geometric factor of the tip electrodes
    z0: float  # m, half tip-tip distance
    r0: float  # m, radial electrode distance

    def __post_init__(self):
        for field in ("u_tip", "u_rf", "omega_rf", "kappa", "z0", "r0"):
            value = getattr(self, field)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"TrapHardware.{field} must be positive, got {value!r}")


@dataclass(frozen=True)
class TrapFrequencies:
    omega_z: float  # rad/s
    omega_r: float  # rad/s

    def __post_init__(self):
        if not (self.omega_z > 0 and self.omega_r > 0):
            raise ValueError("secular frequencies must be positive")

    @classmethod
    def from_hardware(cls, hw: TrapHardware, sp: IonSpecies) -> "TrapFrequencies":
        return cls(axial_frequency(hw, sp), radial_frequency(hw, sp))


def axial_frequency(hw: TrapHardware, sp: IonSpecies) -> float:
    """Axial secular frequency sqrt(2 q U_tip kappa / (m z0^2)) in rad/s."""
    return math.sqrt(2.0 * sp.charge * hw.u_tip * hw.kappa / (sp.mass * hw.z0**2))


def radial_frequency(hw: TrapHardware, sp: IonSpecies) -> float:
    """Radial secular frequency q U_rf / (m r0^2 omega_rf sqrt 2) in rad/s."""
    return sp.charge * hw.u_rf / (sp.mass * hw.r0**2 * hw.omega_rf * math.sqrt(2.0))


def tip_voltage_for(omega_z: float, hw: TrapHardware, sp: IonSpecies) -> float:
    """Tip voltage that produces ``omega_z`` with the geometry of ``hw``."""
    return omega_z**2 * sp.mass * hw.z0**2 / (2.0 * sp.charge * hw.kappa)


def rf_voltage_for(omega_r: float, hw: TrapHardware, sp: IonSpecies) -> float:
    """RF amplitude that produces ``omega_r`` with the geometry of ``hw``."""
    return omega_r * sp.mass * hw.r0**2 * hw.omega_rf * math.sqrt(2.0) / sp.charge


def doppler_temperature(sp: IonSpecies) -> float:
    """Doppler cooling limit hbar Gamma / (2 k_B) in kelvin."""
    return HBAR * sp.linewidth / (2.0 * K_B)


# Linewidths are tabulated literature values (Gamma / 2 pi in MHz) and only
# enter through the Doppler temperature.
CA40 = IonSpecies.from_amu("Ca40", 40.0, 397.0, 21.6)
BA138 = IonSpecies.from_amu("Ba138", 138.0, 493.0, 20.1)

_REGISTRY: dict[str, IonSpecies] = {}


def register_species(sp: IonSpecies, overwrite: bool = False) -> IonSpecies:
    if sp.name in _REGISTRY and not overwrite and _REGISTRY[sp.name] != sp:
        raise KeyError(f"species {sp.name!r} already registered")
    _REGISTRY[sp.name] = sp
    return sp


def get_species(name: str) -> IonSpecies:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown species {name!r} (known: {known})") from None


def registered_species() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


register_species(CA40)
register_species(BA138)
