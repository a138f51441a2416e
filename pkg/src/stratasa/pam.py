"""Passive acoustic mapping from multichannel RF and point-source localization."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .medium import SoundSpeedProfile, phase_integral
from .propagator import KZ_MIN, homogeneous_transfer, stratified_transfer
from .spectral import (ComplexField2D, SpectralGrid, WindowSpec, forward_spectrum,
                       inverse_spectrum, pad_offset, time_to_frequency, window_pad_array)

CORRECTIONS = ("none", "stratified")


@dataclass(frozen=True)
class LinearArray:
    """Line of equally spaced sensors at depth ``z``."""

    n_sensors: int
    pitch: float
    origin: float
    z: float = 0.0

    @classmethod
    def centered(cls, aperture: float, pitch: float, z: float = 0.0) -> "LinearArray":
        n = int(round(aperture / pitch)) + 1
        return cls(n, pitch, -0.5 * (n - 1) * pitch, z)

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.pitch * np.arange(self.n_sensors)

    @property
    def aperture(self) -> float:
        return (self.n_sensors - 1) * self.pitch


@dataclass
class RfCapture:
    """Real RF samples ``[sensor, time]`` from a linear array at z = 0."""

    samples: np.ndarray
    dx: float
    fs: float
    aperture_origin: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 2:
            raise ValueError("RF samples must be [sensor, time]")
        if not self.fs > 0 or not self.dx > 0:
            raise ValueError("fs and dx must be positive")

    @property
    def sensor_count(self) -> int:
        return self.samples.shape[0]

    @property
    def sample_count(self) -> int:
        return self.samples.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self.aperture_origin + self.dx * np.arange(self.sensor_count)

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.sample_count) / self.fs

    def crop(self, aperture: float) -> "RfCapture":
        """Centred sub-aperture spanning ``aperture`` metres (rounded to whole pitches)."""
        n = int(round(aperture / self.dx)) + 1
        if n > self.sensor_count or n < 2:
            raise ValueError(f"cannot crop {self.sensor_count} sensors to a {aperture:g} m aperture")
        i0 = (self.sensor_count - n) // 2
        return RfCapture(self.samples[i0:i0 + n], self.dx, self.fs,
                         self.aperture_origin + i0 * self.dx, meta=dict(self.meta))

    def as_field(self) -> ComplexField2D:
        return ComplexField2D(self.samples, self.dx, 1.0 / self.fs, "time", self.aperture_origin)

    def check_spatial_nyquist(self, c0: float, f_max: float):
        limit = c0 / (2.0 * f_max)
        if self.dx > limit * (1 + 1e-9):
            raise ValueError(
                f"sensor pitch {self.dx:g} m exceeds half a wavelength ({limit:g} m) "
                f"at {f_max:g} Hz"
            )


@dataclass
class PamMap:
    intensity: np.ndarray  # [ix, iz]
    x: np.ndarray
    z: np.ndarray
    frequencies: np.ndarray
    correction: str

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else 0.0

    @property
    def dz(self) -> float:
        return float(self.z[1] - self.z[0]) if self.z.size > 1 else 0.0


@dataclass(frozen=True)
class LocalizationResult:
    x_r: float
    z_r: float
    x_true: Optional[float] = None
    z_true: Optional[float] = None
    eps_x: Optional[float] = None
    eps_z: Optional[float] = None
    eps: Optional[float] = None
    eps_wavelengths: Optional[float] = None


class NoPeakError(ValueError):
    pass


def default_dz(c0: float, f0: float) -> float:
    """One sixth of the reference wavelength."""
    return c0 / (6.0 * f0)


def beamform(rf: RfCapture, profile: SoundSpeedProfile, f_center: float, z_max: float,
             n_bins: int = 3, dz: Optional[float] = None, window: WindowSpec = WindowSpec(),
             correction: str = "none", evanescent: str = "zero",
             kz_min: float = KZ_MIN) -> PamMap:
    """Form ``I(x, z) = sum_w |F^-1[P(kx, z)]|^2`` over ``n_bins`` bins at ``f_center``.

    The temporal FFT is taken per channel before windowing and padding the
    sensor axis; both operations are linear, so the order is immaterial.
    """
    if correction not in CORRECTIONS:
        raise ValueError(f"correction must be one of {CORRECTIONS}")
    if not z_max > 0:
        raise ValueError("z_max must be positive")
    c0 = profile.c0
    dz = default_dz(c0, f_center) if dz is None else dz
    nz = int(np.floor(z_max / dz + 1e-9)) + 1

    bins = time_to_frequency(rf.as_field(), f_center, n_bins)
    rf.check_spatial_nyquist(c0, bins[-1][0] / (2 * np.pi))

    n = rf.sensor_count
    i0 = pad_offset(n, window.pad_factor)
    table = phase_integral(profile, (nz - 1) * dz, dz) if correction == "stratified" and nz > 1 else None

    intensity = np.zeros((nz, n))
    for omega, values in bins:
        padded = window_pad_array(values, window)
        P0, _ = forward_spectrum(padded, rf.dx)
        grid = SpectralGrid.build(padded.size, rf.dx, omega, c0)
        if table is None:
            H = homogeneous_transfer(grid, nz, dz, evanescent)
        else:
            H = stratified_transfer(grid, nz, dz, table, evanescent, kz_min)
        H *= P0
        planes = inverse_spectrum(H, rf.dx, axis=1)[:, i0:i0 + n]
        intensity += planes.real ** 2 + planes.imag ** 2

    freqs = np.array([w / (2 * np.pi) for w, _ in bins])
    return PamMap(intensity.T.copy(), rf.x, dz * np.arange(nz), freqs, correction)


def localize_peak(pam: PamMap, refine: bool = False) -> LocalizationResult:
    """Grid position of peak intensity; ties go to smallest z, then smallest x."""
    I = pam.intensity
    if I.size == 0:
        raise NoPeakError("empty map")
    peak = I.max()
    if not peak > 0:
        raise NoPeakError("map has no positive intensity")
    ix, iz = np.nonzero(I == peak)
    order = np.lexsort((ix, iz))
    ix, iz = int(ix[order[0]]), int(iz[order[0]])
    x, z = float(pam.x[ix]), float(pam.z[iz])
    if refine:
        x += _parabolic_offset(I[:, iz], ix) * pam.dx
        z += _parabolic_offset(I[ix, :], iz) * pam.dz
    return LocalizationResult(x, z)


def _parabolic_offset(line: np.ndarray, i: int) -> float:
    if i == 0 or i == line.size - 1:
        return 0.0
    a, b, c = line[i - 1], line[i], line[i + 1]
    den = a - 2 * b + c
    return 0.0 if den == 0 else 0.5 * (a - c) / den


def localization_error(result: LocalizationResult, x_true: float, z_true: float,
                       lambda0: float) -> LocalizationResult:
    ex = result.x_r - x_true
    ez = result.z_r - z_true
    eps = float(np.hypot(ex, ez))
    return replace(result, x_true=x_true, z_true=z_true, eps_x=ex, eps_z=ez, eps=eps,
                   eps_wavelengths=eps / lambda0)


@dataclass(frozen=True)
class ErrorSummary:
    n: int
    mean: float
    std: float
    mean_wavelengths: float
    std_wavelengths: float
    mean_abs_x: float
    mean_abs_z: float
    axial_ratio: float
    depth_profile: tuple  # (z, mean eps, std eps, count) rows


def error_statistics(results: Sequence[LocalizationResult], depth_decimals: int = 9) -> ErrorSummary:
    """Aggregate localization errors.

    ``axial_ratio`` is ``mean|eps_z| / mean|eps_x|``. The depth profile groups
    results by true depth (rounded to ``depth_decimals`` metres).
    """
    results = [r for r in results if r.eps is not None]
    if not results:
        raise ValueError("no localization results with known truth")
    eps = np.array([r.eps for r in results])
    epsw = np.array([r.eps_wavelengths for r in results])
    ax = float(np.mean(np.abs([r.eps_x for r in results])))
    az = float(np.mean(np.abs([r.eps_z for r in results])))
    ratio = az / ax if ax > 0 else (0.0 if az == 0 else float("inf"))
    zt = np.round(np.array([r.z_true for r in results]), depth_decimals)
    rows = []
    for z in np.unique(zt):
        sel = eps[zt == z]
        rows.append((float(z), float(sel.mean()), float(sel.std()), int(sel.size)))
    return ErrorSummary(len(results), float(eps.mean()), float(eps.std()), float(epsw.mean()),
                        float(epsw.std()), ax, az, ratio, tuple(rows))
