"""Photon flux into an axial collection cone and the derived efficiencies."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import adaptive_simpson
from .scattering import ScatterScenario

FLUX_RTOL = 1e-8
FLUX_ATOL = 1e-12


@dataclass(frozen=True)
class CollectionAperture:
    """Collection cone around +z with numerical aperture ``na = sin(theta)``."""

    na: float

    def __post_init__(self):
        if not 0 < self.na < 1:
            raise ValueError(f"NA must lie in (0, 1), got {self.na!r}")

    @classmethod
    def from_angle(cls, theta: float) -> "CollectionAperture":
        return cls(math.sin(theta))

    @property
    def theta(self) -> float:
        return math.asin(self.na)

    @property
    def solid_angle(self) -> float:
        return single_ion_flux(self.theta)


@dataclass(frozen=True)
class EnhancementResult:
    phi_na: float
    p_d: float
    p_d_rel: float
    n: int
    l: float
    alpha: float
    na: float
    phases: tuple | None = None
    thermal: bool = False


def single_ion_flux(theta: float) -> float:
    """2 pi (1 - cos theta), written to stay accurate for small angles."""
    return 4.0 * math.pi * math.sin(0.5 * theta) ** 2


def initial_panels(s: ScatterScenario, theta: float) -> int:
    fringes = s.k * s.geom.l * s.geom.span * theta / math.pi
    return max(64, 8 * math.ceil(fringes))


def flux(s: ScatterScenario, ap: CollectionAperture, rtol: float = FLUX_RTOL) -> float:
    """Flux 2 pi * integral_0^theta I(t) sin(t) dt collected by the aperture.

    Raises
    ------
    IntegrationError
        If the adaptive quadrature does not converge.
    """
    theta = ap.theta
    if s.n == 1:
        return single_ion_flux(theta)
    value, _ = adaptive_simpson(
        lambda t: 2.0 * math.pi * s(t) * np.sin(t),
        0.0,
        theta,
        rtol=rtol,
        atol=FLUX_ATOL,
        panels=initial_panels(s, theta),
    )
    return value


def relative_enhancement(s: ScatterScenario, ap: CollectionAperture) -> EnhancementResult:
    """Collection efficiency and its enhancement over ``n`` independent ions.

    P_D uses the full-sphere flux convention 4 pi n; P_D_rel divides the
    collected flux by n times the single-ion flux.
    """
    phi = flux(s, ap)
    n = s.n
    return EnhancementResult(
        phi_na=phi,
        p_d=phi / (4.0 * math.pi * n),
        p_d_rel=phi / (single_ion_flux(ap.theta) * n),
        n=n,
        l=s.geom.l,
        alpha=s.alpha,
        na=ap.na,
        phases=None if s.phases is None else tuple(float(p) for p in s.phases),
        thermal=s.sigma2 is not None,
    )
