import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ioncollect._numerics import adaptive_simpson, golden_section_max, jacobi_eigh
from ioncollect.errors import IntegrationError


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (6, 6), elements=st.floats(-10, 10)))
def test_jacobi_matches_lapack(m):
    a = m + m.T
    w, v = jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-9 * max(1.0, np.abs(a).max()))
    assert np.allclose(v.T @ v, np.eye(6), atol=1e-10)
    assert np.allclose(v @ np.diag(w) @ v.T, a, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_jacobi_sign_convention_and_trivial_sizes():
    w, v = jacobi_eigh([[2.0, -1.0], [-1.0, 2.0]])
    assert np.allclose(w, [1, 3])
    assert np.allclose(v, np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    w, v = jacobi_eigh([[4.0]])
    assert w.tolist() == [4.0] and v.tolist() == [[1.0]]


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (np.sin, 0.0, math.pi, 2.0),
        (np.exp, -1.0, 2.0, math.e**2 - math.exp(-1)),
        (lambda x: np.cos(200 * x), 0.0, 1.0, math.sin(200) / 200),
    ],
)
def test_adaptive_simpson_known_integrals(f, a, b, exact):
    val, err = adaptive_simpson(f, a, b, rtol=1e-10, atol=1e-14)
    assert val == pytest.approx(exact, rel=1e-9, abs=1e-12)


def test_adaptive_simpson_endpoint_singularity():
    # sqrt has an unbounded derivative at 0; only moderate accuracy is reachable
    val, _ = adaptive_simpson(np.sqrt, 0.0, 1.0, rtol=1e-6, atol=1e-12, max_level=60)
    assert val == pytest.approx(2.0 / 3.0, rel=1e-6)


def test_adaptive_simpson_reversed_and_empty():
    assert adaptive_simpson(np.sin, math.pi, 0.0)[0] == pytest.approx(-2.0, rel=1e-8)
    assert adaptive_simpson(np.sin, 1.0, 1.0) == (0.0, 0.0)


def test_adaptive_simpson_reports_failure():
    with pytest.raises(IntegrationError) as info:
        adaptive_simpson(lambda x: np.sign(x - 0.3) / np.abs(x - 0.3) ** 0.9, 0.0, 1.0, rtol=1e-14, max_level=5)
    assert math.isfinite(info.value.estimate)


def test_golden_section():
    x, fx = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, rtol=1e-9)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert fx == pytest.approx(0.0, abs=1e-15)
