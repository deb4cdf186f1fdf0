import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qdmcavity.cavity import (
    CavityParams,
    airy_transmission,
    cavity_for_xi,
    figure2_cavity,
    linewidth_ratio,
    measure_fwhm,
    microcavity,
    modified_linewidth,
    pulled_resonance,
    round_trip_absorption,
    transmission_spectrum,
    window_response,
)
from qdmcavity.errors import (
    ConfigError,
    ConventionViolationError,
    NoHalfCrossingError,
    PeakAtBoundaryError,
    PoleAtMinusOneError,
    ZeroDispersionError,
    ZeroKappaError,
)
from qdmcavity.model import QdmParams
from qdmcavity.susceptibility import chi_printed


def test_pulled_resonance_examples():
    assert pulled_resonance(1.0, 0.0, 0.0) == 1.0
    assert pulled_resonance(1.0, 0.0, 999.0) == pytest.approx(1e-3, rel=1e-12)
    assert pulled_resonance(1.0, 0.0, 1e9) < 2e-9
    with pytest.raises(PoleAtMinusOneError):
        pulled_resonance(1.0, 0.0, -1.0)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-0.99, 1e6))
def test_pulled_resonance_between_endpoints(wc, w01, xi):
    w = pulled_resonance(wc, w01, xi)
    if xi >= 0:
        lo, hi = min(wc, w01), max(wc, w01)
        assert lo - 1e-9 <= w <= hi + 1e-9


def test_modified_linewidth_examples():
    assert modified_linewidth(1.0, 0.99, 1.0, 999.0) == pytest.approx(1e-3, rel=1e-12)
    assert modified_linewidth(1.0, 0.99, 1.0, 0.0) == 1.0
    with pytest.raises(ZeroKappaError):
        modified_linewidth(1.0, 0.99, 0.0, 1.0)
    with pytest.raises(PoleAtMinusOneError):
        modified_linewidth(1.0, 0.99, 1.0, -1.0)


@given(st.floats(0.5, 0.999), st.floats(0.5, 0.999999), st.floats(0, 1e4))
def test_linewidth_grows_with_loss(r, kappa, xi):
    assert modified_linewidth(1.0, r, kappa, xi) >= modified_linewidth(1.0, r, 1.0, xi)


def test_linewidth_ratio():
    assert linewidth_ratio(10.0, 5.0) == 2.0
    with pytest.raises(ZeroDispersionError):
        linewidth_ratio(1.0, 0.0)


def test_round_trip_absorption_guard():
    cav = figure2_cavity()
    assert round_trip_absorption(cav, 0.0) == 1.0
    printed = chi_printed(QdmParams(Te=0.0), 0.0).chi_im
    with pytest.raises(ConventionViolationError):
        round_trip_absorption(cav, printed)


def test_cavity_validation():
    with pytest.raises(ConfigError):
        CavityParams(L=1e-3, l=1e-6, r=1.0)
    with pytest.raises(ConfigError):
        CavityParams(L=1e-3, l=2e-3)
    with pytest.raises(ConfigError):
        CavityParams(L=1e-3, l=1e-6, linewidth_override=0.0)


def airy_fwhm_exact(r, fsr):
    """FWHM of the lossless Airy peak, from sin^2(phi/2) = (1-r)^2 / 4r."""
    half_phase = 2 * math.asin((1 - r) / (2 * math.sqrt(r)))
    return 2 * half_phase * fsr / (2 * math.pi)


@pytest.mark.parametrize("r", [0.9, 0.99, 0.999])
def test_empty_cavity_linewidth(r):
    cav = figure2_cavity().replace(r=r)
    w0 = cav.empty_linewidth
    grid = np.linspace(-5 * w0, 5 * w0, 20001)
    spec = transmission_spectrum(cav, None, grid)
    assert spec.T.max() == pytest.approx(1.0, abs=1e-6)
    fwhm = measure_fwhm(spec.Delta, spec.T)
    assert fwhm == pytest.approx(airy_fwhm_exact(r, cav.fsr), rel=1e-4)
    assert fwhm == pytest.approx(w0, rel=0.01)


def test_k_zero_is_empty_cavity(eit):
    cav = figure2_cavity().replace(K=0.0)
    grid = np.linspace(-3, 3, 101)
    np.testing.assert_array_equal(transmission_spectrum(cav, eit, grid).T,
                                  transmission_spectrum(cav, None, grid).T)


def test_airy_peak_with_loss():
    r, kappa = 0.99, 0.9
    expected = (1 - r) ** 2 * kappa / (1 - r * kappa) ** 2
    assert airy_transmission(r, kappa, 0.0) == pytest.approx(expected)


def test_measure_fwhm_lorentzian():
    x = np.linspace(-10, 10, 200001)
    y = 1 / (1 + (x / 0.5) ** 2)
    assert measure_fwhm(x, y) == pytest.approx(1.0, rel=1e-8)


def test_measure_fwhm_errors():
    x = np.linspace(0, 1, 11)
    with pytest.raises(PeakAtBoundaryError):
        measure_fwhm(x, x)
    with pytest.raises(NoHalfCrossingError):
        measure_fwhm(x, 1 + 0.1 * np.sin(np.pi * x))


def test_window_response_no_tunneling_is_opaque():
    resp, window = window_response(figure2_cavity(), QdmParams(Te=0.0))
    assert window == 0.0
    assert resp.transmission_peak < 1e-4


def test_cavity_for_xi_roundtrip(eit):
    cav = cavity_for_xi(microcavity(), eit, 250.0)
    resp, _ = window_response(cav, eit)
    assert resp.xi == pytest.approx(250.0, rel=1e-12)


def test_pulled_resonance_sits_at_window():
    p = QdmParams(Gamma20=1e-4, Te=4.0)
    cav = cavity_for_xi(microcavity().replace(omega_c=0.5), p, 999.0)
    resp, window = window_response(cav, p)
    w0 = cav.empty_linewidth
    grid = np.linspace(-0.05 * w0, 0.05 * w0, 4001) + resp.omega_r * -1
    spec = transmission_spectrum(cav, p, grid)
    peak = spec.Delta[np.argmax(spec.T)]
    # resonance is expressed as omega_p - omega01 = -Delta
    assert -peak == pytest.approx(resp.omega_r, abs=5 * (grid[1] - grid[0]))
    assert abs(resp.omega_r - 0.5 / 1000) < 1e-6


def test_self_consistency_near_window():
    p = QdmParams(Gamma20=1e-4, Te=4.0)
    for xi in (10.0, 100.0, 999.0):
        cav = cavity_for_xi(microcavity(), p, xi)
        resp, window = window_response(cav, p)
        half = 5 * resp.linewidth
        spec = transmission_spectrum(cav, p, np.linspace(window - half, window + half, 20001))
        measured = measure_fwhm(spec.Delta, spec.T)
        assert abs(measured - resp.linewidth) / resp.linewidth <= 0.05


def test_peak_position_is_sub_grid():
    from qdmcavity.cavity import TransmissionSpectrum, peak_position

    x = np.linspace(-1, 1, 21)
    y = 1 / (1 + ((x - 0.0123) / 0.3) ** 2)
    spec = TransmissionSpectrum(x, y, np.ones_like(x), np.zeros_like(x))
    assert abs(peak_position(spec) - 0.0123) < 0.1 * (x[1] - x[0])
    edge = TransmissionSpectrum(x, x.copy(), np.ones_like(x), np.zeros_like(x))
    assert peak_position(edge) == 1.0
