"""Coherent enhancement of photon collection from linear ion crystals.

Equilibrium geometry of ion strings in a harmonic axial potential, far-field
interference of elastically scattered light, collection efficiency within a
numerical aperture, thermal dephasing, and reduction of count-rate data.
"""

from .errors import (
    ConfigError,
    DegenerateNormalizationError,
    EmptyRangeError,
    IntegrationError,
    IonCollectError,
    SolverError,
    UnidentifiableFitError,
)
from .physical import (
    BA138,
    CA40,
    IonSpecies,
    TrapFrequencies,
    TrapHardware,
    axial_frequency,
    doppler_temperature,
    get_species,
    radial_frequency,
    register_species,
)
from .crystal import (
    AxialModeSet,
    CrystalGeometry,
    LengthScaleBounds,
    axial_modes,
    equilibrium_positions,
    length_scale,
    length_scale_bounds,
    pair_distance_variance,
)
from .scattering import AngularPattern, ScatterScenario, intensity, path_difference, pattern
from .collection import CollectionAperture, EnhancementResult, flux, relative_enhancement
from .optimize import (
    OptimumRecord,
    ScanSpec,
    SweepCell,
    optimize_equidistant,
    optimize_length_scale,
    optimize_phases,
    sweep,
)
from .analysis import (
    CoherentFit,
    CountRecord,
    SpeciesComparison,
    absolute_efficiency,
    fit_coherent_fraction,
    normalize_counts,
    species_comparison,
)

__version__ = "0.1.0"
