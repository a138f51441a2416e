"""Forward-data synthesizers used to verify the reconstruction."""
from .fdtd import FdtdConfig, fdtd_simulate, recenter_spectrum, translated_row
from .greens import SourceSpec, green2d_capture, synthesize_rf
from .marching import marching_capture, marching_rf_capture, point_source_spectrum
from .noise import add_noise

__all__ = [
    "FdtdConfig", "SourceSpec", "add_noise", "fdtd_simulate", "green2d_capture",
    "marching_capture", "marching_rf_capture", "point_source_spectrum", "recenter_spectrum",
    "synthesize_rf", "translated_row",
]
