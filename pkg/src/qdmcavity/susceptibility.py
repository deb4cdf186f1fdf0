"""Closed-form weak-probe susceptibility of the quantum-dot molecule.

Two sign conventions are provided.  ``PRINTED`` reproduces the published
formula term by term, which makes the absorptive part non-positive.
``CANONICAL`` is ``chi = -rho10 / g`` from the first-order steady state of
the density-matrix equations; its absorptive part is non-negative and it is
the only convention the cavity code accepts.

All functions broadcast over array-valued ``Delta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateDenominatorError,
    EmptyGridError,
    NoTunnelingError,
    StrictOrderViolatedError,
    ZeroTunnelingError,
)
from .model import QdmParams


class Convention(str, enum.Enum):
    PRINTED = "printed"
    CANONICAL = "canonical"


@dataclass(frozen=True)
class ComplexResponse:
    chi_re: np.ndarray | float
    chi_im: np.ndarray | float
    convention: Convention

    @property
    def chi(self):
        return np.asarray(self.chi_re) + 1j * np.asarray(self.chi_im)


@dataclass(frozen=True)
class DispersionReport:
    """Slope of the real susceptibility at a detuning.

    ``exact`` is d(chi')/d(Delta); ``wrt_probe`` is the slope against probe
    frequency, which is ``-exact`` because ``Delta = omega01 - omega_p``.
    ``approx_window`` is the closed-form window approximation (NaN without
    tunneling) and ``valid_region`` tells whether that approximation is
    expected to hold.
    """

    exact: np.ndarray | float
    wrt_probe: np.ndarray | float
    approx_window: float
    valid_region: bool


def _terms(params: QdmParams, Delta):
    G10, G20, Te, w12 = params.Gamma10, params.Gamma20, params.Te, params.omega12
    D = np.asarray(Delta, dtype=float)
    d = D - w12
    X = G10 * G20 - D * d + Te**2
    Y = D * G20 + d * G10
    den = X * X + Y * Y
    if np.any(den == 0):
        where = np.asarray(D + 0 * den).ravel()[np.flatnonzero(np.ravel(den) == 0)[0]]
        raise DegenerateDenominatorError(f"susceptibility denominator vanished at Delta={where}")
    return D, d, X, Y, den


def denominator(params: QdmParams, Delta):
    """The common denominator D of both susceptibility components."""
    return _terms(params, Delta)[4]


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


def chi_printed(params: QdmParams, Delta) -> ComplexResponse:
    D, d, X, Y, den = _terms(params, Delta)
    G10, G20, Te = params.Gamma10, params.Gamma20, params.Te
    re = (-D * G20 - d * (Te**2 - D * d)) / den
    im = (-G10 * d**2 - G20 * (G10 * G20 + Te**2)) / den
    return ComplexResponse(_scalarize(re), _scalarize(im), Convention.PRINTED)


def chi_canonical(params: QdmParams, Delta) -> ComplexResponse:
    D, d, X, Y, den = _terms(params, Delta)
    G10, G20, Te = params.Gamma10, params.Gamma20, params.Te
    re = (D * G20**2 - d * (Te**2 - D * d)) / den
    im = (G10 * d**2 + G20 * (G10 * G20 + Te**2)) / den
    return ComplexResponse(_scalarize(re), _scalarize(im), Convention.CANONICAL)


def chi(params: QdmParams, Delta, convention=Convention.CANONICAL) -> ComplexResponse:
    if Convention(convention) is Convention.PRINTED:
        return chi_printed(params, Delta)
    return chi_canonical(params, Delta)


def in_validity_region(params: QdmParams) -> bool:
    """Whether the window approximation of the dispersion is trustworthy."""
    G10, G20 = params.Gamma10, params.Gamma20
    return bool(params.Te**2 >= 100.0 * G10 * G20 and G20 <= 1e-3 * G10)


def dispersion_approx(params: QdmParams) -> float:
    """Approximate d(chi')/d(Delta) at the window ``Delta = omega12``.

    Valid for ``Gamma20 << Gamma10`` and ``Te**2 >> Gamma10*Gamma20``.
    """
    G10, G20, Te, w12 = params.Gamma10, params.Gamma20, params.Te, params.omega12
    if Te == 0:
        raise ZeroTunnelingError("window dispersion approximation needs Te > 0")
    # the common Te**2 factor is cancelled so tiny Te does not underflow
    num = -Te**2 + G20 - 2 * G10 * G20 + 2 * G20 * w12**2
    return num / (Te**2 + 2 * G10 * G20) ** 2


def dispersion_exact(
    params: QdmParams, Delta, convention=Convention.PRINTED
) -> DispersionReport:
    """Analytic derivative of chi' with respect to Delta.

    By default the printed chi' is differentiated; pass
    ``convention=CANONICAL`` for the slope the cavity actually sees.  The two
    differ only through the Gamma20 term of the numerator.
    """
    D, d, X, Y, den = _terms(params, Delta)
    G10, G20, Te = params.Gamma10, params.Gamma20, params.Te
    if Convention(convention) is Convention.PRINTED:
        num = -D * G20 - d * Te**2 + D * d * d
        dnum = -G20 - Te**2 + d * d + 2 * D * d
    else:
        num = D * G20**2 - d * Te**2 + D * d * d
        dnum = G20**2 - Te**2 + d * d + 2 * D * d
    dden = 2 * X * (-(d + D)) + 2 * Y * (G20 + G10)
    exact = (dnum * den - num * dden) / den**2
    approx = dispersion_approx(params) if Te > 0 else math.nan
    exact = _scalarize(exact)
    return DispersionReport(exact, -exact, approx, in_validity_region(params))


def find_transparency_window(
    params: QdmParams, search_half_width: float = 1.0, tol: float = 1e-9
) -> float:
    """Detuning of minimal absorption near ``Delta = omega12``.

    The absorptive part never vanishes exactly when ``Gamma20 > 0``, so the
    window is the minimiser of ``|chi''|`` on
    ``[omega12 - w, omega12 + w]``: a 1001-point scan brackets it and a
    bounded Brent search refines it to ``tol``.
    """
    if params.Te == 0:
        raise NoTunnelingError("no transparency window without tunneling")
    w12 = params.omega12
    if params.Gamma20 == 0:
        return float(w12)

    def absorption(x):
        return abs(float(chi_printed(params, x).chi_im))

    grid = np.linspace(w12 - search_half_width, w12 + search_half_width, 1001)
    i = int(np.argmin(np.abs(chi_printed(params, grid).chi_im)))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(absorption, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    return float(res.x)


@dataclass(frozen=True)
class SpectrumTable:
    """Pointwise susceptibility and dispersion over a detuning grid."""

    Delta: np.ndarray
    printed: ComplexResponse
    canonical: ComplexResponse
    dispersion: DispersionReport

    def __len__(self):
        return self.Delta.size


def check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float).ravel()
    if grid.size == 0:
        raise EmptyGridError("detuning grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise StrictOrderViolatedError("detuning grid must be strictly increasing")
    return grid


def sweep_spectrum(params: QdmParams, grid) -> SpectrumTable:
    grid = check_grid(grid)
    return SpectrumTable(
        grid,
        chi_printed(params, grid),
        chi_canonical(params, grid),
        dispersion_exact(params, grid),
    )
