"""Equilibrium geometry, length-scale bounds and axial normal modes of ion strings.

Positions are expressed in the dimensionless form z_i = l * v_i, where the
length scale l = (q^2 / (4 pi eps0 m omega_z^2))^(1/3) absorbs the trap
strength and the v_i only depend on the ion number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._numerics import jacobi_eigh
from .errors import EmptyRangeError, SolverError
from .physical import EPS0, HBAR, K_B, IonSpecies

# Linear-to-zigzag transition: (omega_z / omega_r)^2 < C_CRIT * n**B_CRIT.
C_CRIT = 2.94
B_CRIT = -1.8

MAX_IONS = 50


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CrystalGeometry:
    """A linear string of ``n`` ions at positions ``l * v`` (metres)."""

    n: int
    l: float
    v: np.ndarray

    def __post_init__(self):
        v = _readonly(self.v)
        object.__setattr__(self, "v", v)
        if v.shape != (self.n,):
            raise ValueError(f"expected {self.n} positions, got shape {v.shape}")
        if not self.l > 0:
            raise ValueError(f"length scale must be positive, got {self.l!r}")
        if self.n > 1 and not np.all(np.diff(v) > 0):
            raise ValueError("positions must be strictly increasing")

    @classmethod
    def harmonic(cls, n: int, l: float) -> "CrystalGeometry":
        """Equilibrium string of ``n`` ions in a harmonic well of length scale ``l``."""
        return cls(n, l, equilibrium_positions(n))

    @classmethod
    def equidistant(cls, n: int, d: float) -> "CrystalGeometry":
        """Regular string with spacing ``d``, centred at the origin (l = d)."""
        return cls(n, d, np.arange(n) - (n - 1) / 2.0)

    @property
    def positions(self) -> np.ndarray:
        return self.l * self.v

    @property
    def span(self) -> float:
        """Dimensionless extent v_n - v_1."""
        return float(self.v[-1] - self.v[0])


@dataclass(frozen=True)
class LengthScaleBounds:
    l_min: float
    l_max: float
    omega_z_max: float
    omega_z_min: float


@dataclass(frozen=True, eq=False)
class AxialModeSet:
    eigenvalues: np.ndarray  # ascending, dimensionless
    eigenvectors: np.ndarray  # columns are modes
    mode_frequencies: np.ndarray  # rad/s
    hessian: np.ndarray

    def __post_init__(self):
        for name in ("eigenvalues", "eigenvectors", "mode_frequencies", "hessian"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))


def potential_gradient(v) -> np.ndarray:
    """Gradient of sum(v^2)/2 + sum_{a<b} 1/|v_a - v_b| (the force residual)."""
    v = np.asarray(v, dtype=float)
    d = v[:, None] - v[None, :]
    np.fill_diagonal(d, np.inf)
    return v - np.sum(np.sign(d) / d**2, axis=1)


def hessian(v) -> np.ndarray:
    """Dimensionless axial Hessian of the string potential at positions ``v``."""
    v = np.asarray(v, dtype=float)
    d = np.abs(v[:, None] - v[None, :])
    np.fill_diagonal(d, np.inf)
    inv3 = 1.0 / d**3
    a = -2.0 * inv3
    np.fill_diagonal(a, 1.0 + 2.0 * np.sum(inv3, axis=1))
    return a


@lru_cache(maxsize=None)
def _equilibrium(n: int) -> tuple:
    if n == 1:
        return (0.0,)
    # Uniform start with roughly the central spacing of an n-ion string.
    v = 2.018 * n**-0.559 * (np.arange(1, n + 1) - (n + 1) / 2.0)
    res = potential_gradient(v)
    r = np.max(np.abs(res))
    for _ in range(200):
        if r < 1e-12:
            break
        step = np.linalg.solve(hessian(v), -res)
        t = 1.0
        while t > 1e-12:
            trial = v + t * step
            if np.all(np.diff(trial) > 0):
                trial_res = potential_gradient(trial)
                trial_r = np.max(np.abs(trial_res))
                if trial_r < r:
                    break
            t *= 0.5
        else:
            raise SolverError(f"line search failed for n={n}", residual=r)
        v, res, r = trial, trial_res, trial_r
    else:
        raise SolverError(f"equilibrium solver did not converge for n={n}", residual=r)
    v = 0.5 * (v - v[::-1])
    return tuple(v)


def equilibrium_positions(n: int) -> np.ndarray:
    """Dimensionless equilibrium positions of ``n`` ions, ascending.

    Solves the force balance v_i = sum_{j<i} (v_i - v_j)^-2 - sum_{j>i} (v_j - v_i)^-2
    by damped Newton iteration to a max-norm residual below 1e-12.

    Raises
    ------
    SolverError
        If the iteration does not converge within 200 steps.
    """
    n = int(n)
    if not 1 <= n <= MAX_IONS:
        raise ValueError(f"ion number must be in [1, {MAX_IONS}], got {n}")
    return np.array(_equilibrium(n))


def length_scale(omega_z: float, sp: IonSpecies) -> float:
    """Spatial length scale l in metres for axial frequency ``omega_z`` (rad/s)."""
    if not omega_z > 0:
        raise ValueError(f"omega_z must be positive, got {omega_z!r}")
    return (sp.charge**2 / (4.0 * math.pi * EPS0 * sp.mass * omega_z**2)) ** (1.0 / 3.0)


def axial_frequency_for_length_scale(l: float, sp: IonSpecies) -> float:
    """Inverse of :func:`length_scale`."""
    if not l > 0:
        raise ValueError(f"length scale must be positive, got {l!r}")
    return math.sqrt(sp.charge**2 / (4.0 * math.pi * EPS0 * sp.mass * l**3))


def critical_aspect_ratio(n: int) -> float:
    """Largest (omega_z / omega_r)^2 that keeps ``n`` ions on the axis."""
    return C_CRIT * n**B_CRIT


def minimum_axial_frequency(sp: IonSpecies) -> float:
    """Lowest useful axial frequency, (lambda/4)^-2 hbar / (2 m)."""
    return (sp.wavelength / 4.0) ** -2 * HBAR / (2.0 * sp.mass)


def length_scale_bounds(n: int, omega_r: float, sp: IonSpecies) -> LengthScaleBounds:
    """Feasible interval of the length scale for ``n`` ions at radial frequency ``omega_r``.

    The upper axial frequency keeps the string linear, the lower one keeps
    the Doppler-limited position spread below a quarter wavelength. ``n = 1``
    is accepted and uses the same formula.

    Raises
    ------
    EmptyRangeError
        If the linearity limit lies below the minimum axial frequency.
    """
    if n < 1:
        raise ValueError(f"ion number must be positive, got {n}")
    if not omega_r > 0:
        raise ValueError(f"omega_r must be positive, got {omega_r!r}")
    wz_max = omega_r * math.sqrt(critical_aspect_ratio(n))
    wz_min = minimum_axial_frequency(sp)
    if wz_min >= wz_max:
        raise EmptyRangeError(
            f"no feasible axial frequency for n={n}: omega_z_min={wz_min:.6g} rad/s "
            f">= omega_z_max={wz_max:.6g} rad/s"
        )
    return LengthScaleBounds(
        l_min=length_scale(wz_max, sp),
        l_max=length_scale(wz_min, sp),
        omega_z_max=wz_max,
        omega_z_min=wz_min,
    )


def axial_modes(geom: CrystalGeometry, omega_z: float) -> AxialModeSet:
    """Axial normal modes of a harmonic string.

    Eigenvalues mu_p of the dimensionless Hessian are ascending (1 is the
    centre-of-mass mode, 3 the breathing mode); mode frequencies are
    sqrt(mu_p) * omega_z.
    """
    a = hessian(geom.v)
    mu, b = jacobi_eigh(a)
    if np.any(mu <= 0):
        raise SolverError("non-positive axial eigenvalue", residual=float(np.min(mu)))
    return AxialModeSet(mu, b, np.sqrt(mu) * omega_z, a)


def mean_occupation(omega, temperature):
    """Bose-Einstein occupation; zero at ``temperature == 0``."""
    omega = np.asarray(omega, dtype=float)
    if temperature == 0:
        return np.zeros_like(omega)
    if temperature < 0:
        raise ValueError(f"temperature must be non-negative, got {temperature!r}")
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(HBAR * omega / (K_B * temperature))


def pair_distance_variance(modes: AxialModeSet, sp: IonSpecies, temperature: float) -> np.ndarray:
    """Variance of the axial separation of every ion pair (m^2), thermal state.

    sigma^2_ab = sum_p (b_a^p - b_b^p)^2 * hbar / (2 m omega_p) * (2 nbar_p + 1)
    """
    b = modes.eigenvectors
    wp = modes.mode_frequencies
    weight = HBAR / (2.0 * sp.mass * wp) * (2.0 * mean_occupation(wp, temperature) + 1.0)
    diff = b[:, None, :] - b[None, :, :]
    s2 = np.einsum("abp,p->ab", diff**2, weight)
    s2 = 0.5 * (s2 + s2.T)
    np.fill_diagonal(s2, 0.0)
    return s2
