"""Reduction of measured count rates and comparison with the scattering model."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .collection import CollectionAperture
from .errors import DegenerateNormalizationError, UnidentifiableFitError
from .optimize import OptimumRecord, ScanSpec, optimize_length_scale
from .physical import IonSpecies


@dataclass(frozen=True)
class CountRecord:
    """Photon count rates (counts/s) of an n-ion string at one scan setting."""

    n: int
    counts: float
    single_ion: float
    background: float
    scan_value: float = math.nan  # l in metres, or whatever parameter was scanned
    uncertainty: float = math.nan

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.counts < 0 or self.background < 0:
            raise ValueError("count rates must be non-negative")


@dataclass(frozen=True, eq=False)
class CoherentFit:
    f_coh: float
    residual_norm: float
    model: np.ndarray  # fitted P_D,rel at every used point
    scan_values: np.ndarray
    unclamped: float

    @property
    def f_incoh(self) -> float:
        return 1.0 - self.f_coh


def normalize_counts(rec: CountRecord) -> float:
    """Measured enhancement (C - C_bg) / ((C_1 - C_bg) n).

    Raises
    ------
    DegenerateNormalizationError
        If the single-ion rate does not exceed the background.
    """
    if not rec.single_ion > rec.background:
        raise DegenerateNormalizationError(
            f"single-ion rate {rec.single_ion} must exceed background {rec.background}"
        )
    return (rec.counts - rec.background) / ((rec.single_ion - rec.background) * rec.n)


def normalize_trace(counts, n, single_ion, background):
    """Vectorized :func:`normalize_counts` for a scan trace."""
    if not single_ion > background:
        raise DegenerateNormalizationError(
            f"single-ion rate {single_ion} must exceed background {background}"
        )
    counts = np.asarray(counts, dtype=float)
    return (counts - background) / ((single_ion - background) * n)


def fit_coherent_fraction(scan_values, p_exp, model, weights=None, window=None) -> CoherentFit:
    """Least-squares coherent fraction of P_exp = (1 - f) + f * P_cal(x).

    ``model`` is either a callable evaluated at every scan value or an array
    of precomputed model values. ``window = (lo, hi)`` restricts the fit to
    scan values inside the interval. The estimate is clamped to [0, 1].

    Raises
    ------
    UnidentifiableFitError
        If fewer than two points remain or the model trace is constant.
    """
    x = np.asarray(scan_values, dtype=float)
    y = np.asarray(p_exp, dtype=float)
    if callable(model):
        m = np.array([model(xi) for xi in x], dtype=float)
    else:
        m = np.asarray(model, dtype=float)
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    if not (x.shape == y.shape == m.shape == w.shape):
        raise ValueError("scan values, data, model and weights must have equal length")
    if window is not None:
        lo, hi = window
        keep = (x >= lo) & (x <= hi)
        x, y, m, w = x[keep], y[keep], m[keep], w[keep]
    if x.size < 2:
        raise UnidentifiableFitError("need at least two data points")
    if np.ptp(m) <= 1e-12 * max(1.0, float(np.max(np.abs(m)))):
        raise UnidentifiableFitError("model trace is constant; coherent fraction is not identifiable")

    dm = m - 1.0
    dy = y - 1.0
    f_raw = float(np.sum(w * dm * dy) / np.sum(w * dm * dm))
    f = min(max(f_raw, 0.0), 1.0)
    fitted = 1.0 - f + f * m
    resid = float(np.sqrt(np.sum(w * (y - fitted) ** 2)))
    return CoherentFit(f, resid, fitted, x, f_raw)


@dataclass(frozen=True)
class SpeciesComparison:
    ratio: float  # P_rel(b) / P_rel(a)
    optimum_a: OptimumRecord
    optimum_b: OptimumRecord


def species_comparison(
    n: int,
    na: float,
    alpha: float,
    species_a: IonSpecies,
    species_b: IonSpecies,
    thermal: bool = True,
    **scan,
) -> SpeciesComparison:
    """Optimized P_D,rel of species b relative to species a.

    Each species is scanned over its own feasible length-scale range; extra
    keyword arguments are passed to :class:`ScanSpec` (``omega_r``,
    ``thermal_keff``, ``l_range``, ...).
    """
    ap = CollectionAperture(na)
    base = ScanSpec(n=n, species=species_a, alpha=alpha, thermal=thermal, na_grid=(na,), **scan)
    rec_a = optimize_length_scale(base, ap)
    if species_b == species_a:
        rec_b = rec_a
    else:
        rec_b = optimize_length_scale(replace(base, species=species_b), ap)
    return SpeciesComparison(rec_b.best / rec_a.best, rec_a, rec_b)


def absolute_efficiency(p_d_rel: float, base_single_ion_abs: float) -> float:
    """Absolute detection efficiency of the string from the single-ion value."""
    if not base_single_ion_abs > 0:
        raise ValueError(f"single-ion efficiency must be positive, got {base_single_ion_abs!r}")
    return p_d_rel * base_single_ion_abs
