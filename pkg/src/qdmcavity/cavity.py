"""Ring cavity loaded with the quantum-dot-molecule medium.

Frequencies here are probe-frequency offsets from the exciton line,
``omega_p - omega01 = -Delta``, in Gamma10 units.  The absolute optical
frequency ``omega01`` only enters through the pulling coefficient.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    ConventionViolationError,
    NoHalfCrossingError,
    PeakAtBoundaryError,
    PoleAtMinusOneError,
    ZeroDispersionError,
    ZeroKappaError,
)
from .model import QdmParams, UnitContext
from .susceptibility import (
    Convention,
    check_grid,
    chi_canonical,
    dispersion_exact,
    find_transparency_window,
)


@dataclass(frozen=True)
class CavityParams:
    """Ring cavity of round-trip length ``L`` holding a sample of length ``l``.

    ``r`` is the intensity reflectivity shared by the two couplers, ``omega_c``
    the empty-cavity resonance as an offset from omega01, and ``K`` the
    prefactor from scaled to physical susceptibility.  The wavevector and the
    scaled omega01 are derived from ``ctx`` so that they stay consistent with
    each other.  ``linewidth_override`` replaces the Airy value of the empty
    linewidth in the linewidth formulas only.
    """

    L: float
    l: float
    r: float = 0.99
    omega_c: float = 0.0
    K: float = 1.0
    ctx: UnitContext = field(default_factory=UnitContext)
    linewidth_override: float | None = None

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ConfigError(f"reflectivity must lie in (0, 1), got {self.r}")
        if not 0 < self.l <= self.L:
            raise ConfigError("need 0 < l <= L")
        if self.K < 0:
            raise ConfigError("susceptibility prefactor K must be >= 0")
        if self.linewidth_override is not None and not self.linewidth_override > 0:
            raise ConfigError("linewidth_override must be > 0")

    @property
    def k(self) -> float:
        return self.ctx.k

    @property
    def omega_01(self) -> float:
        return self.ctx.omega01

    @property
    def fsr(self) -> float:
        """Angular free spectral range 2 pi c / L in Gamma10 units."""
        return self.ctx.omega01 * self.ctx.probe_wavelength_m / self.L

    @property
    def empty_linewidth(self) -> float:
        if self.linewidth_override is not None:
            return self.linewidth_override
        return (1 - self.r) * self.fsr / (math.pi * math.sqrt(self.r))

    @property
    def pulling_scale(self) -> float:
        """``omega01 * (l / 2L) * K``: multiplies the dispersion to give xi."""
        return self.omega_01 * self.l / (2 * self.L) * self.K

    @property
    def optical_depth_scale(self) -> float:
        """``k * l * K``: multiplies chi'' in the round-trip absorption exponent."""
        return self.k * self.l * self.K

    def replace(self, **changes) -> "CavityParams":
        return dataclasses.replace(self, **changes)


def figure2_cavity(ctx: UnitContext | None = None) -> CavityParams:
    """Desk-scale cavity for the transmission figure.

    A 0.6 mm ring (empty linewidth close to Gamma10) with a 4.3 um sample
    pulls with xi of about 2000 at T_e = 0.5, so the window peak sits within
    1e-4 of the window and the two-level case is fully absorbed.
    """
    return CavityParams(L=6.0e-4, l=4.3e-6, r=0.99, ctx=ctx or UnitContext())


def microcavity(ctx: UnitContext | None = None) -> CavityParams:
    """120 um ring with a large free spectral range.

    Keeps ``kappa >= 0.999`` at the window up to xi of about 10^3 with
    Gamma20 = 1e-4.  The sample length is a placeholder; use
    :func:`cavity_for_xi`.
    """
    return CavityParams(L=1.2e-4, l=1e-6, r=0.99, ctx=ctx or UnitContext())


@dataclass(frozen=True)
class CavityResponse:
    xi: float
    omega_r: float
    kappa: float
    linewidth: float
    transmission_peak: float


def pulling_coefficient(cav: CavityParams, disp_wrt_probe: float) -> float:
    return cav.pulling_scale * disp_wrt_probe


def pulled_resonance(omega_c: float, omega_01: float, xi: float) -> float:
    """Resonance of the loaded cavity, pulled from omega_c toward omega_01."""
    if xi <= -1:
        raise PoleAtMinusOneError(f"xi must exceed -1, got {xi}")
    return omega_c / (1 + xi) + xi * omega_01 / (1 + xi)


def round_trip_absorption(cav: CavityParams, chi_im_canonical):
    """Intensity surviving one pass through the medium, ``exp(-k l K chi'')``."""
    chi_im = np.asarray(chi_im_canonical, dtype=float)
    if np.any(chi_im < 0):
        raise ConventionViolationError(
            "negative chi'' reached the cavity; pass the canonical convention"
        )
    kappa = np.exp(-cav.optical_depth_scale * chi_im)
    return float(kappa) if kappa.ndim == 0 else kappa


def modified_linewidth(empty_linewidth: float, r: float, kappa: float, xi: float) -> float:
    if xi <= -1:
        raise PoleAtMinusOneError(f"xi must exceed -1, got {xi}")
    if kappa <= 0:
        raise ZeroKappaError("round-trip transmission kappa must be > 0")
    if kappa == 1:
        return empty_linewidth / (1 + xi)
    return empty_linewidth * (1 - r * kappa) / (math.sqrt(kappa) * (1 - r)) / (1 + xi)


def linewidth_ratio(disp_a: float, disp_b: float) -> float:
    """Linewidth ratio ``width_b / width_a`` approximated by ``disp_a / disp_b``.

    The loaded linewidth is inversely proportional to the window dispersion,
    so the configuration with the steeper dispersion has the narrower line.
    """
    if disp_b == 0:
        raise ZeroDispersionError("reference dispersion is zero")
    return disp_a / disp_b


@dataclass(frozen=True)
class TransmissionSpectrum:
    Delta: np.ndarray
    T: np.ndarray
    kappa: np.ndarray
    phase: np.ndarray

    @property
    def probe_offset(self) -> np.ndarray:
        """``omega_p - omega01`` for every grid point."""
        return -self.Delta


def airy_transmission(r: float, kappa, phase):
    kappa = np.asarray(kappa, dtype=float)
    return (1 - r) ** 2 * kappa / ((1 - r * kappa) ** 2
                                   + 4 * r * kappa * np.sin(phase / 2) ** 2)


def transmission_spectrum(cav: CavityParams, params: QdmParams | None, grid) -> TransmissionSpectrum:
    """Two-coupler ring-cavity transmission over a grid of probe detunings.

    ``params=None`` (or ``K = 0``) gives the empty cavity.  The round-trip
    phase is the empty-cavity detuning phase plus the medium phase
    ``k l K chi' / 2``; the absorption enters through kappa.
    """
    Delta = check_grid(grid)
    phase = 2 * math.pi * (-Delta - cav.omega_c) / cav.fsr
    if params is None or cav.K == 0:
        kappa = np.ones_like(Delta)
    else:
        resp = chi_canonical(params, Delta)
        phase = phase + 0.5 * cav.optical_depth_scale * np.asarray(resp.chi_re)
        kappa = round_trip_absorption(cav, np.atleast_1d(resp.chi_im))
    T = airy_transmission(cav.r, kappa, phase)
    return TransmissionSpectrum(Delta, T, np.asarray(kappa), phase)


def measure_fwhm(x, y) -> float:
    """Full width at half maximum of a single-peaked sampled curve.

    The half-maximum crossing on each side of the global maximum is located
    by linear interpolation between the bracketing samples.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    i = int(np.argmax(y))
    if i == 0 or i == y.size - 1:
        raise PeakAtBoundaryError("maximum sits at a grid endpoint")
    half = 0.5 * y[i]

    left = np.nonzero(y[:i] < half)[0]
    right = np.nonzero(y[i + 1:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise NoHalfCrossingError("curve does not drop to half maximum on both sides")
    a = left[-1]
    xl = x[a] + (half - y[a]) * (x[a + 1] - x[a]) / (y[a + 1] - y[a])
    b = i + 1 + right[0]
    xr = x[b - 1] + (half - y[b - 1]) * (x[b] - x[b - 1]) / (y[b] - y[b - 1])
    return float(abs(xr - xl))


def peak_position(spec: TransmissionSpectrum) -> float:
    """Location of the transmission maximum.

    The grid argmax is refined by the vertex of the parabola through it and
    its two neighbours, which removes the grid quantisation for smooth peaks.
    """
    x, y = spec.Delta, spec.T
    i = int(np.argmax(y))
    if i == 0 or i == y.size - 1:
        return float(x[i])
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    curv = ym - 2 * y0 + yp
    if curv >= 0:
        return float(x[i])
    # non-uniform three-point vertex; reduces to the usual formula on even grids
    hm, hp = x[i] - x[i - 1], x[i + 1] - x[i]
    num = hp**2 * (y0 - ym) - hm**2 * (y0 - yp)
    den = hp * (y0 - ym) + hm * (y0 - yp)
    return float(x[i] + 0.5 * num / den)


def window_response(cav: CavityParams, params: QdmParams) -> tuple[CavityResponse, float]:
    """Pulling, absorption and linewidth evaluated at the transparency window.

    Returns the response and the window detuning.  Without tunneling the
    two-level resonance ``Delta = 0`` is used instead; ``omega_r`` and the
    linewidth are NaN when ``xi <= -1`` or ``kappa == 0``.  The pulled resonance
    is an offset from omega01, so the pulling target is the window itself.
    """
    window = find_transparency_window(params) if params.Te > 0 else 0.0
    slope = dispersion_exact(params, window, Convention.CANONICAL).wrt_probe
    xi = pulling_coefficient(cav, slope)
    kappa = round_trip_absorption(cav, chi_canonical(params, window).chi_im)
    if xi <= -1 or kappa == 0:
        # anomalous dispersion (two-level line) or total loss: the pulled
        # line is not defined, but kappa and the peak still are
        omega_r = width = math.nan
    else:
        omega_r = pulled_resonance(cav.omega_c, -window, xi)
        width = modified_linewidth(cav.empty_linewidth, cav.r, kappa, xi)
    peak = float(airy_transmission(cav.r, kappa, 0.0))
    return CavityResponse(float(xi), float(omega_r), float(kappa), float(width), peak), float(window)


def cavity_for_xi(cav: CavityParams, params: QdmParams, xi: float) -> CavityParams:
    """Copy of ``cav`` with the sample length chosen to give ``xi`` at the window."""
    window = find_transparency_window(params) if params.Te > 0 else 0.0
    slope = dispersion_exact(params, window, Convention.CANONICAL).wrt_probe
    if slope == 0:
        raise ZeroDispersionError("window dispersion is zero")
    l = 2 * cav.L * xi / (cav.omega_01 * cav.K * slope)
    return cav.replace(l=l)
