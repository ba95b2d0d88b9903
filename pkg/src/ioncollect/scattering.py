"""Far-field intensity of light elastically scattered by a linear ion string.

Angles: ``alpha`` is the excitation direction and ``beta`` the observation
direction, both measured from the +z (trap) axis. The detector sits on the
axis at ``beta = 0``. Every ion radiates with unit amplitude, so a single
ion gives intensity 1 in every direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .crystal import (
    CrystalGeometry,
    axial_frequency_for_length_scale,
    axial_modes,
    pair_distance_variance,
    potential_gradient,
)
from .physical import IonSpecies, doppler_temperature

KEFF_MODES = ("axial", "scalar")


def keff_squared(k, alpha, beta, mode="axial"):
    """Squared wave-vector transfer used in the thermal damping factor.

    ``axial`` projects k_out - k_in on the trap axis, k (cos beta - cos alpha),
    which is the only direction the axial modes displace the ions.
    ``scalar`` takes the full |k_out - k_in| along the collection axis,
    2 k^2 (1 - cos alpha), independent of ``beta``.
    """
    beta = np.asarray(beta, dtype=float)
    if mode == "axial":
        return (k * (np.cos(beta) - math.cos(alpha))) ** 2
    if mode == "scalar":
        return np.full_like(beta, 2.0 * k**2 * (1.0 - math.cos(alpha)))
    raise ValueError(f"thermal_keff must be one of {KEFF_MODES}, got {mode!r}")


def pair_intensity(z, k, alpha, beta, phases=None, sigma2=None, keff="axial"):
    """sum_{a,b} D_ab cos(k (z_a - z_b)(cos alpha - cos beta) + phi_a - phi_b).

    ``z`` are absolute positions (m), ``beta`` may be an array. ``D_ab`` is the
    Debye-Waller factor exp(-k_eff^2 sigma2_ab / 2) when ``sigma2`` is given.
    """
    z = np.asarray(z, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = z.size
    ia, ib = np.triu_indices(n, 1)
    arg = np.multiply.outer(k * (z[ia] - z[ib]), math.cos(alpha) - np.cos(beta))
    if phases is not None:
        phases = np.asarray(phases, dtype=float)
        arg += (phases[ia] - phases[ib]).reshape((-1,) + (1,) * beta.ndim)
    terms = np.cos(arg)
    if sigma2 is not None:
        s2 = np.asarray(sigma2, dtype=float)[ia, ib]
        terms *= np.exp(-0.5 * np.multiply.outer(s2, keff_squared(k, alpha, beta, keff)))
    return n + 2.0 * terms.sum(axis=0)


@dataclass(frozen=True, eq=False)
class ScatterScenario:
    """Ion string, excitation geometry and optional phase and thermal settings.

    ``phases`` are per-ion phase offsets; they are shifted so the first ion
    has phase 0. ``sigma2`` is the pair-separation variance matrix (m^2).
    """

    geom: CrystalGeometry
    k: float
    alpha: float
    phases: np.ndarray | None = None
    sigma2: np.ndarray | None = None
    thermal_keff: str = "axial"

    def __post_init__(self):
        if not 0 < self.alpha <= math.pi / 2 + 1e-15:
            raise ValueError(f"alpha must lie in (0, pi/2], got {self.alpha!r}")
        if not self.k > 0:
            raise ValueError(f"wavenumber must be positive, got {self.k!r}")
        if self.thermal_keff not in KEFF_MODES:
            raise ValueError(f"thermal_keff must be one of {KEFF_MODES}, got {self.thermal_keff!r}")
        n = self.geom.n
        if self.phases is not None:
            ph = np.array(self.phases, dtype=float)
            if ph.shape != (n,):
                raise ValueError(f"expected {n} phases, got shape {ph.shape}")
            ph = ph - ph[0]
            ph.setflags(write=False)
            object.__setattr__(self, "phases", ph)
        if self.sigma2 is not None:
            s2 = np.array(self.sigma2, dtype=float)
            if s2.shape != (n, n):
                raise ValueError(f"sigma2 must be {n}x{n}, got shape {s2.shape}")
            s2.setflags(write=False)
            object.__setattr__(self, "sigma2", s2)

    @classmethod
    def for_species(
        cls,
        geom: CrystalGeometry,
        sp: IonSpecies,
        alpha: float,
        phases=None,
        thermal: bool = False,
        temperature: float | None = None,
        thermal_keff: str = "axial",
    ) -> "ScatterScenario":
        """Scenario at the species wavelength.

        With ``thermal`` the pair variances follow from the axial modes of the
        harmonic well whose length scale is ``geom.l``, at ``temperature``
        (default: the species' Doppler limit).
        """
        sigma2 = None
        if thermal:
            T = doppler_temperature(sp) if temperature is None else temperature
            sigma2 = thermal_variance(geom, sp, T)
        return cls(geom, sp.wavenumber, alpha, phases, sigma2, thermal_keff)

    @property
    def n(self) -> int:
        return self.geom.n

    def with_phases(self, phases) -> "ScatterScenario":
        return ScatterScenario(self.geom, self.k, self.alpha, phases, self.sigma2, self.thermal_keff)

    @cached_property
    def _pairs(self):
        n = self.n
        ia, ib = np.triu_indices(n, 1)
        z = self.geom.positions
        kdz = (self.k * (z[ia] - z[ib]))[:, None]
        dphi = None if self.phases is None else (self.phases[ia] - self.phases[ib])[:, None]
        s2 = None if self.sigma2 is None else self.sigma2[ia, ib][:, None]
        return kdz, dphi, s2

    def __call__(self, beta):
        """Intensity at observation angle(s) ``beta``; same as :func:`intensity`."""
        beta = np.asarray(beta, dtype=float)
        if self.n == 1:
            return np.ones_like(beta)
        kdz, dphi, s2 = self._pairs
        flat = beta.reshape(-1)
        arg = kdz * (math.cos(self.alpha) - np.cos(flat))
        if dphi is not None:
            arg += dphi
        terms = np.cos(arg)
        if s2 is not None:
            terms *= np.exp(-0.5 * s2 * keff_squared(self.k, self.alpha, flat, self.thermal_keff))
        return (self.n + 2.0 * terms.sum(axis=0)).reshape(beta.shape)


def thermal_variance(geom: CrystalGeometry, sp: IonSpecies, temperature: float) -> np.ndarray:
    """Pair-separation variances of a harmonic string with length scale ``geom.l``."""
    if np.max(np.abs(potential_gradient(geom.v))) > 1e-8:
        raise ValueError("thermal dephasing requires the harmonic equilibrium geometry")
    wz = axial_frequency_for_length_scale(geom.l, sp)
    return pair_distance_variance(axial_modes(geom, wz), sp, temperature)


@dataclass(frozen=True, eq=False)
class AngularPattern:
    beta: np.ndarray  # rad
    intensities: np.ndarray


def path_difference(geom: CrystalGeometry, alpha: float, beta: float, a: int, b: int) -> float:
    """Optical path difference l (v_a - v_b)(cos alpha - cos beta) in metres (0-based indices)."""
    return geom.l * (geom.v[a] - geom.v[b]) * (math.cos(alpha) - math.cos(beta))


def intensity(s: ScatterScenario, beta):
    """Normalized far-field intensity at ``beta`` (scalar or array)."""
    out = s(beta)
    return float(out) if np.ndim(out) == 0 else out


def pattern(s: ScatterScenario, beta_grid) -> AngularPattern:
    beta = np.array(beta_grid, dtype=float)
    if beta.ndim != 1 or beta.size == 0:
        raise ValueError("beta grid must be a non-empty 1-D sequence")
    if np.any(np.diff(beta) <= 0) or beta[0] < 0 or beta[-1] > math.pi:
        raise ValueError("beta grid must be strictly increasing within [0, pi]")
    return AngularPattern(beta, s(beta))
