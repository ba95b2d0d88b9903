import math

import pytest
import scipy.constants as sc

from ioncollect.physical import (
    BA138,
    CA40,
    TWO_PI,
    IonSpecies,
    TrapHardware,
    axial_frequency,
    doppler_temperature,
    get_species,
    radial_frequency,
    register_species,
    rf_voltage_for,
    tip_voltage_for,
)

HW = TrapHardware(u_tip=100.0, u_rf=400.0, omega_rf=TWO_PI * 29.9e6, kappa=0.1, z0=1e-3, r0=0.5e-3)


def test_axial_frequency_scales_with_sqrt_of_kappa_and_voltage():
    base = axial_frequency(HW, CA40)
    from dataclasses import replace

    assert axial_frequency(replace(HW, u_tip=200.0), CA40) == pytest.approx(math.sqrt(2) * base, rel=1e-14)
    small = [axial_frequency(replace(HW, kappa=k), CA40) for k in (1e-2, 1e-4, 1e-8)]
    assert small[0] > small[1] > small[2]
    assert small[2] == pytest.approx(base * math.sqrt(1e-8 / 0.1), rel=1e-12)


def test_axial_frequency_inverse_round_trip():
    # U_tip solved independently (scipy constants) for 2 pi x 1 MHz with z0 = 1 mm, kappa = 0.1
    # scipy may carry a newer CODATA atomic mass unit, hence rel=1e-8
    hw = TrapHardware(u_tip=81.83299321686977, u_rf=400.0, omega_rf=TWO_PI * 29.9e6, kappa=0.1, z0=1e-3, r0=0.5e-3)
    assert axial_frequency(hw, CA40) == pytest.approx(TWO_PI * 1e6, rel=1e-8)
    assert tip_voltage_for(TWO_PI * 1e6, hw, CA40) == pytest.approx(81.83299321686977, rel=1e-8)


def test_radial_frequency_scaling_and_paper_drive():
    from dataclasses import replace

    base = radial_frequency(HW, CA40)
    assert radial_frequency(replace(HW, u_rf=800.0), CA40) == pytest.approx(2 * base, rel=1e-14)
    assert radial_frequency(replace(HW, omega_rf=2 * HW.omega_rf), CA40) == pytest.approx(base / 2, rel=1e-14)
    # r0 = 0.5 mm, 29.9 MHz drive: U_rf solved independently for 2 pi x 2.2 MHz
    hw = replace(HW, u_rf=380.63376261028725)
    assert radial_frequency(hw, CA40) == pytest.approx(TWO_PI * 2.2e6, rel=1e-8)
    assert rf_voltage_for(TWO_PI * 2.2e6, hw, CA40) == pytest.approx(380.63376261028725, rel=1e-8)


def test_frequencies_monotone_in_voltage():
    from dataclasses import replace

    vs = [1.0, 2.0, 5.0, 50.0]
    ax = [axial_frequency(replace(HW, u_tip=u), CA40) for u in vs]
    rad = [radial_frequency(replace(HW, u_rf=u), CA40) for u in vs]
    assert ax == sorted(ax) and len(set(ax)) == 4
    assert rad == sorted(rad) and len(set(rad)) == 4


def test_doppler_temperature():
    unit = IonSpecies("x", 1e-26, 1.6e-19, 1e-7, 2 * sc.k / sc.hbar)
    assert doppler_temperature(unit) == pytest.approx(1.0, rel=1e-8)
    assert doppler_temperature(CA40) == pytest.approx(5.183182519235518e-4, rel=1e-8)
    half = IonSpecies("h", CA40.mass, CA40.charge, CA40.wavelength, CA40.linewidth / 2)
    assert doppler_temperature(half) == pytest.approx(doppler_temperature(CA40) / 2, rel=1e-14)


def test_builtin_species():
    assert CA40.wavelength == pytest.approx(397e-9)
    assert BA138.wavelength == pytest.approx(493e-9)
    assert CA40.charge == sc.e
    assert CA40.mass == pytest.approx(40 * sc.atomic_mass, rel=1e-9)


def test_registry_round_trip():
    sp = IonSpecies.from_amu("Sr88-test", 88.0, 422.0, 21.5)
    register_species(sp)
    got = get_species("Sr88-test")
    assert got == sp
    assert (got.mass, got.charge, got.wavelength, got.linewidth) == (sp.mass, sp.charge, sp.wavelength, sp.linewidth)
    with pytest.raises(KeyError):
        register_species(IonSpecies.from_amu("Sr88-test", 87.0, 422.0, 21.5))
    with pytest.raises(KeyError):
        get_species("nope")


@pytest.mark.parametrize("field", ["mass", "charge", "wavelength", "linewidth"])
def test_species_invariants(field):
    kw = dict(name="x", mass=1e-26, charge=1e-19, wavelength=1e-7, linewidth=1e8)
    kw[field] = 0.0
    with pytest.raises(ValueError):
        IonSpecies(**kw)


def test_hardware_invariants():
    with pytest.raises(ValueError):
        TrapHardware(u_tip=-1.0, u_rf=1.0, omega_rf=1.0, kappa=1.0, z0=1.0, r0=1.0)
