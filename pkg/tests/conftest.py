import math

import numpy as np
import pytest

from ioncollect import CollectionAperture, ScanSpec, optimize_equidistant, optimize_length_scale
from ioncollect.physical import TWO_PI

SIM_OMEGA_R = TWO_PI * 5e6
EXP_OMEGA_R = TWO_PI * 2.2e6

_cache = {}


def cached_optimum(**kw):
    """Memoized harmonic / equidistant optimum shared across test modules."""
    key = tuple(sorted(kw.items(), key=lambda kv: kv[0]))
    if key not in _cache:
        kw = dict(kw)
        na = kw.pop("na", 0.07)
        spec = ScanSpec(**kw)
        run = optimize_equidistant if spec.mode == "equidistant-d" else optimize_length_scale
        _cache[key] = run(spec, CollectionAperture(na))
    return _cache[key]


@pytest.fixture(scope="session")
def optimum():
    return cached_optimum


def closed_form_p_rel(z, k, alpha, theta, phases=None):
    """Relative enhancement from the exact per-pair flux integrals.

    Each pair contributes 2 pi [sin(c (cos a - cos theta) + d) - sin(c (cos a - 1) + d)] / c
    with c = k (z_a - z_b). ``z`` may carry a leading batch axis.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n = z.shape[-1]
    ph = np.zeros(n) if phases is None else np.asarray(phases, dtype=float)
    ia, ib = np.triu_indices(n, 1)
    c = k * (z[:, ia] - z[:, ib])
    d = ph[ia] - ph[ib]
    ca = math.cos(alpha)
    pairs = (np.sin(c * (ca - math.cos(theta)) + d) - np.sin(c * (ca - 1.0) + d)) / c
    single = 2 * math.pi * (1 - math.cos(theta))
    total = n * single + 4 * math.pi * pairs.sum(axis=-1)
    out = total / (n * single)
    return out if out.size > 1 else float(out[0])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
