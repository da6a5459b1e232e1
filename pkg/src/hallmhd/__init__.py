"""Pseudo-spectral Hall MHD / electron MHD simulator and diagnostics engine."""

from hallmhd.kernels import USING_COMPILED
from hallmhd.models import MhdState, PhysParams
from hallmhd.spectral import PeriodicGrid, SpectralScalar, SpectralVector

__version__ = "0.1.0"

__all__ = [
    "MhdState",
    "PeriodicGrid",
    "PhysParams",
    "SpectralScalar",
    "SpectralVector",
    "USING_COMPILED",
    "__version__",
]
