"""Domain types, unit handling and parameter presets.

Every frequency, rate and energy inside the package is expressed in units of
the dephasing linewidth Gamma10 (``hbar * Gamma10 = 1``).  Physical units
(micro-electronvolts, metres) only appear at the boundary, through
:class:`UnitContext`.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from scipy import constants

from .errors import ConfigError, NegativeRateError, ZeroScaleUnitError

PRESET_NAME = "paper2010-qdm"

# hbar in eV s
_HBAR_EV_S = constants.hbar / constants.e


@dataclass(frozen=True)
class QdmParams:
    """Three-level quantum-dot-molecule parameters, in units of Gamma10.

    ``Gamma10``, ``Gamma20`` and ``Gamma12`` are dephasing linewidths of the
    coherences rho10, rho20 and rho12.  ``gamma10_pop`` and ``gamma20_pop``
    are population decay rates of the direct and indirect exciton; when left
    as ``None`` they resolve to ``Gamma10`` and ``2 * Gamma20``.
    ``Te`` is the tunneling matrix element and ``omega12`` the
    indirect-direct exciton spacing.
    """

    Gamma10: float = 1.0
    Gamma20: float = 1e-4
    Gamma12: float = 0.0
    Te: float = 0.0
    omega12: float = 0.0
    gamma10_pop: float | None = None
    gamma20_pop: float | None = None

    @property
    def gamma10(self) -> float:
        return self.Gamma10 if self.gamma10_pop is None else self.gamma10_pop

    @property
    def gamma20(self) -> float:
        return 2.0 * self.Gamma20 if self.gamma20_pop is None else self.gamma20_pop

    def replace(self, **changes) -> "QdmParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ProbeField:
    """Probe Rabi frequency ``g`` and detuning ``Delta = omega01 - omega_p``."""

    g: float
    Delta: float

    def __post_init__(self):
        if not self.g >= 0:
            raise ConfigError(f"probe Rabi frequency must be >= 0, got {self.g}")


@dataclass(frozen=True)
class UnitContext:
    """Conversion between physical units and the Gamma10 scale."""

    hbar_Gamma10_ueV: float = 6.6
    probe_wavelength_m: float = 1.36e-6

    def __post_init__(self):
        if not (self.hbar_Gamma10_ueV > 0 and self.probe_wavelength_m > 0):
            raise ConfigError("UnitContext fields must be strictly positive")

    @property
    def Gamma10_per_s(self) -> float:
        """The scale rate Gamma10 in rad/s."""
        return self.hbar_Gamma10_ueV * 1e-6 / _HBAR_EV_S

    @property
    def k(self) -> float:
        """Probe wavevector 2 pi / lambda in 1/m."""
        return 2.0 * math.pi / self.probe_wavelength_m

    @property
    def omega01(self) -> float:
        """Optical transition frequency 2 pi c / lambda in Gamma10 units."""
        return constants.c * self.k / self.Gamma10_per_s


@dataclass(frozen=True)
class PhysicalPreset:
    """Material numbers needed to give the scaled susceptibility a magnitude."""

    surface_density_per_cm2: float = 4e10
    layer_thickness_m: float = 10e-9
    confinement_factor: float = 6e-3
    dipole_length_angstrom: float = 21.0

    def __post_init__(self):
        if self.surface_density_per_cm2 < 0 or self.confinement_factor < 0:
            raise ConfigError("surface density and confinement factor must be >= 0")
        if not (self.layer_thickness_m > 0 and self.dipole_length_angstrom > 0):
            raise ConfigError("layer thickness and dipole length must be > 0")


_RATE_FIELDS = ("Gamma10", "Gamma20", "Gamma12", "gamma10_pop", "gamma20_pop", "Te")


def validate(params: QdmParams) -> QdmParams:
    """Check the invariants of ``params`` and resolve defaulted decay rates.

    Returns a copy with ``gamma10_pop`` and ``gamma20_pop`` filled in, so
    ``validate(validate(p)) == validate(p)``.

    Raises
    ------
    ZeroScaleUnitError
        If ``Gamma10 <= 0``.
    NegativeRateError
        If any rate or the tunneling element is negative.
    """
    for name in _RATE_FIELDS:
        value = getattr(params, name)
        if value is None:
            continue
        if not math.isfinite(value):
            raise ConfigError(f"{name} must be finite, got {value}")
        if value < 0:
            raise NegativeRateError(f"{name} must be >= 0, got {value}")
    if params.Gamma10 <= 0:
        raise ZeroScaleUnitError("Gamma10 is the scale unit and must be > 0")
    if not math.isfinite(params.omega12):
        raise ConfigError("omega12 must be finite")
    return dataclasses.replace(
        params, gamma10_pop=params.gamma10, gamma20_pop=params.gamma20
    )


def to_scaled(energy_ueV: float, ctx: UnitContext) -> float:
    """Energy in micro-eV expressed in units of hbar*Gamma10."""
    return energy_ueV / ctx.hbar_Gamma10_ueV


def from_scaled(value: float, ctx: UnitContext) -> float:
    return value * ctx.hbar_Gamma10_ueV


def susceptibility_prefactor(preset: PhysicalPreset, ctx: UnitContext) -> float:
    """Dimensionless factor turning the scaled susceptibility into a physical one.

    ``K = confinement * N_vol * |mu10|^2 / (eps0 * hbar * Gamma10)`` with the
    volume density ``N_vol`` obtained by spreading the surface density over
    the layer thickness.
    """
    n_vol = preset.surface_density_per_cm2 * 1e4 / preset.layer_thickness_m
    mu = constants.e * preset.dipole_length_angstrom * 1e-10
    hbar_gamma_J = ctx.hbar_Gamma10_ueV * 1e-6 * constants.e
    return preset.confinement_factor * n_vol * mu**2 / (constants.epsilon_0 * hbar_gamma_J)


# -- presets and JSON -------------------------------------------------------

def reference_preset() -> tuple[QdmParams, UnitContext, PhysicalPreset]:
    """Material parameters of the experiment paragraph (T_e = 0.01)."""
    params = QdmParams(Gamma10=1.0, Gamma20=1e-4, Gamma12=0.0, Te=0.01, omega12=0.0)
    return validate(params), UnitContext(6.6, 1.36e-6), PhysicalPreset()


def _strict_fields(cls, data: Mapping[str, Any], where: str) -> dict:
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return dict(data)


def params_from_dict(data: Mapping[str, Any]) -> QdmParams:
    """Build validated :class:`QdmParams` from a flat mapping.

    A ``"preset"`` key selects a starting point that the other keys override.
    Unknown keys are rejected.
    """
    data = dict(data)
    preset = data.pop("preset", None)
    if preset is None:
        base = QdmParams()
    elif preset == PRESET_NAME:
        base = reference_preset()[0]
    else:
        raise ConfigError(f"unknown preset {preset!r}")
    fields = _strict_fields(QdmParams, data, "QDM parameters")
    try:
        fields = {k: (None if v is None else float(v)) for k, v in fields.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"non-numeric QDM parameter: {exc}") from None
    if preset is not None and not {"gamma10_pop", "gamma20_pop"} & set(fields):
        # keep the defaulted decay rates tied to the overridden dephasing
        base = dataclasses.replace(base, gamma10_pop=None, gamma20_pop=None)
    return validate(dataclasses.replace(base, **fields))


def units_from_dict(data: Mapping[str, Any]) -> UnitContext:
    return UnitContext(**_strict_fields(UnitContext, data, "units"))


def physical_from_dict(data: Mapping[str, Any]) -> PhysicalPreset:
    return PhysicalPreset(**_strict_fields(PhysicalPreset, data, "physical preset"))


def load_params(path: str | Path) -> QdmParams:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("parameter file must contain a JSON object")
    return params_from_dict(data)
