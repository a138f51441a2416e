"""Angular-spectrum reconstruction with a first-order phase correction for
continuously stratified media, passive acoustic mapping and localization."""
from .medium import (DomainError, SoundSpeedProfile, constant_profile, gaussian_profile,
                     munk_profile, phase_integral, standard_atmosphere_profile,
                     tabulated_profile)
from .pam import (LinearArray, PamMap, RfCapture, beamform, error_statistics,
                  localization_error, localize_peak)
from .propagator import (AngularSpectrum, check_validity, march_step, propagate_homogeneous,
                         propagate_marching, propagate_stratified)
from .spectral import ComplexField2D, SpectralGrid, WindowSpec

__version__ = "0.1.0"

__all__ = [
    "AngularSpectrum", "ComplexField2D", "DomainError", "LinearArray", "PamMap", "RfCapture",
    "SoundSpeedProfile", "SpectralGrid", "WindowSpec", "beamform", "check_validity",
    "constant_profile", "error_statistics", "gaussian_profile", "localization_error",
    "localize_peak", "march_step", "munk_profile", "phase_integral", "propagate_homogeneous",
    "propagate_marching", "propagate_stratified", "standard_atmosphere_profile",
    "tabulated_profile",
]
