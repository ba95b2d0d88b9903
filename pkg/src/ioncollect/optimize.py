"""Maximization of the relative collection enhancement.

Three protocols are supported:

``harmonic-l``
    scan the length scale of a harmonic string between its feasible bounds;
``equidistant-d``
    scan the spacing of a regular string over the range of mean spacings of
    the harmonic string;
``phases-at-lmin``
    keep the most compressed harmonic string and optimize per-ion phases.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from ._numerics import golden_section_max, jacobi_eigh
from .collection import CollectionAperture, relative_enhancement
from .crystal import (
    AxialModeSet,
    CrystalGeometry,
    axial_frequency_for_length_scale,
    equilibrium_positions,
    hessian,
    length_scale_bounds,
    pair_distance_variance,
)
from .errors import IonCollectError
from .physical import CA40, TWO_PI, IonSpecies, doppler_temperature
from .scattering import KEFF_MODES, ScatterScenario

MODES = ("harmonic-l", "equidistant-d", "phases-at-lmin")

TIE_TOL = 1e-9
REFINE_RTOL = 1e-6
REFINE_CANDIDATES = 3


@dataclass(frozen=True)
class ScanSpec:
    """Optimization setup for one ion number.

    ``l_range`` overrides the feasible length-scale interval derived from
    ``omega_r``. The coarse grid uses at least ``samples`` points and at least
    ``samples_per_fringe`` points per period of the on-axis interference.
    """

    n: int
    species: IonSpecies = CA40
    alpha: float = math.pi / 4
    omega_r: float = TWO_PI * 5e6
    na_grid: tuple = (0.07,)
    l_range: tuple | None = None
    samples: int = 2000
    samples_per_fringe: float = 10.0
    thermal: bool = False
    temperature: float | None = None
    thermal_keff: str = "axial"
    mode: str = "harmonic-l"
    seed: int = 0
    n_starts: int = 16

    def __post_init__(self):
        if not 1 <= self.n <= 50:
            raise ValueError(f"n must lie in [1, 50], got {self.n}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.thermal_keff not in KEFF_MODES:
            raise ValueError(f"thermal_keff must be one of {KEFF_MODES}, got {self.thermal_keff!r}")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.l_range is not None:
            lo, hi = self.l_range
            if not 0 < lo < hi:
                raise ValueError(f"l_range must satisfy 0 < lo < hi, got {self.l_range!r}")
        if self.thermal and self.mode == "equidistant-d":
            raise ValueError("thermal dephasing is only modelled for harmonic strings")

    def length_range(self) -> tuple[float, float]:
        if self.l_range is not None:
            return tuple(self.l_range)
        b = length_scale_bounds(self.n, self.omega_r, self.species)
        return b.l_min, b.l_max

    @property
    def effective_temperature(self) -> float:
        return doppler_temperature(self.species) if self.temperature is None else self.temperature


@dataclass(frozen=True)
class OptimumRecord:
    best: float
    argmax: object  # l or d in metres, or a tuple of phases
    trace: tuple  # ((parameter, value), ...)
    mode: str
    n: int
    na: float
    alpha: float
    length_scale: float  # l of the optimum (for equidistant strings: spacing d)
    thermal: bool = False


class _Objective:
    """P_D,rel as a function of the scan parameter, with cached mode structure."""

    def __init__(self, spec: ScanSpec, ap: CollectionAperture):
        self.spec = spec
        self.ap = ap
        self.v = equilibrium_positions(spec.n)
        self._modes = None
        if spec.thermal and spec.n > 1:
            mu, b = jacobi_eigh(hessian(self.v))
            self._modes = (mu, b)

    def scenario(self, l, phases=None, equidistant=False) -> ScatterScenario:
        spec = self.spec
        if equidistant:
            geom = CrystalGeometry.equidistant(spec.n, l)
        else:
            geom = CrystalGeometry(spec.n, l, self.v)
        sigma2 = None
        if self._modes is not None:
            mu, b = self._modes
            wz = axial_frequency_for_length_scale(l, spec.species)
            modes = AxialModeSet(mu, b, np.sqrt(mu) * wz, np.zeros((spec.n, spec.n)))
            sigma2 = pair_distance_variance(modes, spec.species, spec.effective_temperature)
        return ScatterScenario(geom, spec.species.wavenumber, spec.alpha, phases, sigma2, spec.thermal_keff)

    def __call__(self, l, phases=None, equidistant=False) -> float:
        return relative_enhancement(self.scenario(l, phases, equidistant), self.ap).p_d_rel


def coarse_samples(spec: ScanSpec, lo: float, hi: float, span: float) -> int:
    """Grid size resolving the fastest on-axis fringe of the trace."""
    k = spec.species.wavenumber
    fringes = k * (hi - lo) * span * abs(math.cos(spec.alpha) - 1.0) / TWO_PI
    return max(int(spec.samples), int(math.ceil(spec.samples_per_fringe * fringes)))


def scan_and_refine(f, lo, hi, samples, rtol=REFINE_RTOL, candidates=REFINE_CANDIDATES):
    """Coarse grid scan followed by golden-section refinement of the best peaks.

    Returns ``(x_best, f_best, trace)``. Among values within ``TIE_TOL`` of the
    maximum the smallest ``x`` wins.
    """
    grid = np.linspace(lo, hi, samples)
    values = np.array([f(x) for x in grid])
    trace = [(float(x), float(y)) for x, y in zip(grid, values)]

    # Local maxima of the sampled trace, end points included.
    padded = np.concatenate([[-np.inf], values, [-np.inf]])
    peaks = np.flatnonzero((padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]))
    peaks = peaks[np.argsort(-values[peaks], kind="stable")][:candidates]

    for i in peaks:
        a = grid[max(i - 1, 0)]
        b = grid[min(i + 1, samples - 1)]
        if b > a:
            x, y = golden_section_max(f, a, b, rtol=rtol)
            trace.append((float(x), float(y)))

    trace.sort()
    best = max(y for _, y in trace)
    x_best, y_best = next((x, y) for x, y in trace if y >= best - TIE_TOL)
    return x_best, y_best, tuple(trace)


def optimize_length_scale(spec: ScanSpec, ap: CollectionAperture) -> OptimumRecord:
    """Best P_D,rel of a harmonic string over its length-scale range."""
    if spec.mode != "harmonic-l":
        spec = replace(spec, mode="harmonic-l")
    lo, hi = spec.length_range()
    obj = _Objective(spec, ap)
    span = float(obj.v[-1] - obj.v[0])
    x, y, trace = scan_and_refine(obj, lo, hi, coarse_samples(spec, lo, hi, span))
    return OptimumRecord(y, x, trace, spec.mode, spec.n, ap.na, spec.alpha, x, spec.thermal)


def optimize_equidistant(spec: ScanSpec, ap: CollectionAperture) -> OptimumRecord:
    """Best P_D,rel of a regular string.

    The spacing range is the mean nearest-neighbour distance of the harmonic
    string at the two ends of its length-scale range.
    """
    if spec.mode != "equidistant-d":
        spec = replace(spec, mode="equidistant-d", thermal=False)
    lo, hi = spec.length_range()
    v = equilibrium_positions(spec.n)
    span = float(v[-1] - v[0])
    mean_gap = span / (spec.n - 1) if spec.n > 1 else 1.0
    obj = _Objective(spec, ap)

    def f(d):
        return obj(d, equidistant=True)

    d_lo, d_hi = lo * mean_gap, hi * mean_gap
    samples = coarse_samples(spec, d_lo, d_hi, span / mean_gap)
    x, y, trace = scan_and_refine(f, d_lo, d_hi, samples)
    return OptimumRecord(y, x, trace, spec.mode, spec.n, ap.na, spec.alpha, x, False)


def aligned_phases(v, k, l, alpha) -> np.ndarray:
    """Phases that make every pair interfere constructively at beta = 0."""
    phi = -k * l * np.asarray(v) * (math.cos(alpha) - 1.0)
    return np.mod(phi - phi[0], TWO_PI)


def optimize_phases(spec: ScanSpec, ap: CollectionAperture) -> OptimumRecord:
    """Best P_D,rel at the shortest length scale over per-ion phases.

    Nelder-Mead searches are started from zero phases, from the on-axis
    aligned phases and from ``spec.n_starts`` scrambled Sobol points seeded
    with ``spec.seed``; the best local optimum is returned.
    """
    if spec.n < 2:
        raise ValueError("phase optimization needs at least two ions")
    if spec.mode != "phases-at-lmin":
        spec = replace(spec, mode="phases-at-lmin")
    l = spec.length_range()[0]
    obj = _Objective(spec, ap)
    dim = spec.n - 1

    def negative(x):
        return -obj(l, np.concatenate([[0.0], x]))

    starts = [np.zeros(dim), aligned_phases(obj.v, spec.species.wavenumber, l, spec.alpha)[1:]]
    if spec.n_starts > 0:
        sobol = qmc.Sobol(d=dim, scramble=True, seed=np.random.default_rng(spec.seed))
        starts.extend(TWO_PI * sobol.random(spec.n_starts))

    trace = []
    best_x, best_y = None, -math.inf
    for x0 in starts:
        simplex = np.vstack([x0, x0 + 0.5 * np.eye(dim)])
        res = minimize(
            negative,
            x0,
            method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": 1e-7, "fatol": 1e-11, "maxiter": 400 * dim},
        )
        x = np.mod(res.x, TWO_PI)
        y = -float(res.fun)
        phases = tuple(float(p) for p in np.concatenate([[0.0], x]))
        trace.append((phases, y))
        if y > best_y + TIE_TOL:
            best_x, best_y = phases, y
    return OptimumRecord(best_y, best_x, tuple(trace), spec.mode, spec.n, ap.na, spec.alpha, l, spec.thermal)


_DISPATCH = {
    "harmonic-l": optimize_length_scale,
    "equidistant-d": optimize_equidistant,
    "phases-at-lmin": optimize_phases,
}


def optimize(spec: ScanSpec, ap: CollectionAperture) -> OptimumRecord:
    return _DISPATCH[spec.mode](spec, ap)


@dataclass(frozen=True)
class SweepCell:
    n: int
    na: float
    record: OptimumRecord | None
    error: str | None = None


def _run_cell(args):
    spec, na = args
    try:
        return SweepCell(spec.n, na, optimize(spec, CollectionAperture(na)))
    except (IonCollectError, ValueError) as exc:
        return SweepCell(spec.n, na, None, f"{type(exc).__name__}: {exc}")


def sweep(spec: ScanSpec, n_values=None, na_grid=None, workers: int = 1) -> list[SweepCell]:
    """Optimize every (n, NA) cell; failures are recorded per cell.

    Cells are returned in input order (n outer, NA inner) regardless of
    ``workers``.
    """
    n_values = (spec.n,) if n_values is None else tuple(n_values)
    na_grid = spec.na_grid if na_grid is None else tuple(na_grid)
    jobs = []
    for n in n_values:
        try:
            cell_spec = replace(spec, n=int(n))
        except ValueError as exc:
            jobs.extend((None, na, n, str(exc)) for na in na_grid)
            continue
        jobs.extend((cell_spec, na, n, None) for na in na_grid)

    runnable = [(s, na) for s, na, _, _ in jobs if s is not None]
    if workers and workers > 1 and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = iter(list(pool.map(_run_cell, runnable)))
    else:
        results = iter([_run_cell(job) for job in runnable])

    cells = []
    for s, na, n, err in jobs:
        cells.append(next(results) if s is not None else SweepCell(int(n), na, None, f"ValueError: {err}"))
    return cells
