"""Intracavity transparency with a voltage-tuned quantum-dot molecule."""

from .model import (
    PRESET_NAME,
    PhysicalPreset,
    ProbeField,
    QdmParams,
    UnitContext,
    reference_preset,
    susceptibility_prefactor,
    to_scaled,
    validate,
)
from .susceptibility import (
    ComplexResponse,
    Convention,
    chi_canonical,
    chi_printed,
    dispersion_approx,
    dispersion_exact,
    find_transparency_window,
)
from .cavity import CavityParams

__version__ = "0.1.0"
