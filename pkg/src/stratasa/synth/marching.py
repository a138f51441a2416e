"""Stratified forward data by marching a point-source spectrum to the array.

This is an independent implementation of the marching recursion (it does
not call the reconstruction kernels). ``method="first_order"`` uses the
recursion ``P e^{i kz dz} (1 + lambda dz / (2 i kz))``; ``method="exact"``
uses the local dispersion relation ``sqrt(k(z)^2 - kx^2)`` for each step.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..medium import SoundSpeedProfile
from ..pam import LinearArray, RfCapture
from ..propagator import AngularSpectrum
from .greens import SourceSpec, synthesize_rf

METHODS = ("first_order", "exact")


def _kz(k, kx):
    kz = np.sqrt((k ** 2 - kx ** 2).astype(complex))
    return np.where(kz.imag < 0, -kz, kz)


def point_source_spectrum(kx: np.ndarray, k0, x_offset: float, kz_min: float = 0.05) -> np.ndarray:
    """Angular spectrum ``i / (2 kz) exp(-i kx x_offset)`` of a 2-D point source
    in its own plane; bins with ``|kz| < kz_min k0`` are dropped."""
    kz = _kz(k0, kx)
    ok = np.abs(kz) >= kz_min * k0
    safe = np.where(ok, kz, 1.0)
    return np.where(ok, 1j / (2.0 * safe), 0.0) * np.exp(-1j * kx * x_offset)


def _march(values, kx, k0, omega, depths, dz, profile, method, kz_min):
    """Advance ``values`` (..., n) through layers whose speeds are sampled at ``depths``."""
    c = profile.speed(depths)
    if method == "exact":
        for cn in c:
            values = values * np.exp(1j * _kz(omega / cn, kx) * dz)
        return values
    kz = _kz(k0, kx)
    ok = (kz.imag == 0) & (kz.real >= kz_min * k0)
    inv = np.where(ok, 1.0 / (2j * np.where(ok, kz, 1.0)), 0.0)
    base = np.exp(1j * kz * dz)
    c0 = profile.c0
    for cn in c:
        lam = (cn - c0) * (cn + c0) / cn ** 2 * k0 ** 2
        values = values * base * (1.0 + lam * dz * inv)
    return values


def marching_capture(source_plane: AngularSpectrum, profile: SoundSpeedProfile, z_max: float,
                     fine_dz: float, method: str = "first_order", kz_min: float = 0.05,
                     check_resolution: bool = True) -> AngularSpectrum:
    """Carry a spectrum from the source plane at depth ``z_max`` up to the array at z = 0.

    Layers are sampled at the start of each step along the direction of
    travel (``z_max, z_max - dz, ...``). ``fine_dz`` is rounded down so an
    integer number of steps spans ``z_max``.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    g = source_plane.grid
    if check_resolution and fine_dz > 2 * np.pi / g.k0 / 24 * (1 + 1e-9):
        raise ValueError("fine_dz must not exceed 1/24 of the reference wavelength")
    if not z_max > 0:
        raise ValueError("z_max must be positive")
    n = int(np.ceil(z_max / fine_dz - 1e-9))
    dz = z_max / n
    depths = z_max - dz * np.arange(n)
    out = _march(source_plane.values, g.kx, g.k0, g.omega, depths, dz, profile, method, kz_min)
    return AngularSpectrum(out, g, 0.0)


def marching_rf_capture(source: SourceSpec, array: LinearArray, profile: SoundSpeedProfile,
                        fs: float, duration: float, fine_dz: Optional[float] = None,
                        method: str = "first_order", kz_min: float = 0.05,
                        angle_margin: float = 0.6, max_sine: float = 0.9) -> RfCapture:
    """RF at a linear array for a point source in a stratified medium.

    Every frequency bin inside the pulse band is marched from the source
    depth to the array. The kx spectrum is tapered outside the directions
    that connect the source to the aperture (widened by ``angle_margin``
    in sine), which suppresses periodic images of the finite synthesis grid.
    The margin must exceed the stationary-phase width ``~1/sqrt(k r)`` or the
    edge sensors lose amplitude. The band is also capped at ``|sin| <= max_sine``:
    near grazing the first-order factor ``|1 + lambda dz / (2 i kz)|`` exceeds
    one by enough to swamp the field after a few hundred steps.
    """
    c0 = profile.c0
    lo, hi = source.band()
    n_t = int(round(duration * fs))
    freqs = np.fft.rfftfreq(n_t, 1.0 / fs)
    f = freqs[(freqs > 0) & (freqs >= lo) & (freqs <= hi)]
    if fine_dz is None:
        fine_dz = c0 / hi / 24.0
    z_s = source.z_s - array.z
    if not z_s > 0:
        raise ValueError("source must lie below the array")

    pitch = array.pitch
    offsets = array.x - source.x_s
    span = max(np.max(np.abs(offsets)), array.aperture)
    n_syn = int(2 ** np.ceil(np.log2(8 * (span + z_s) / pitch)))
    j0 = (n_syn - array.n_sensors) // 2
    x_first = array.origin - j0 * pitch
    kx = 2 * np.pi * np.fft.fftfreq(n_syn, pitch)[None, :]

    omega = 2 * np.pi * f[:, None]
    k0 = omega / c0
    sin_theta = offsets / np.hypot(offsets, z_s)
    s_lo = max(sin_theta.min() - angle_margin, -max_sine)
    s_hi = min(sin_theta.max() + angle_margin, max_sine)
    edge = np.clip(np.minimum(kx / k0 - s_lo, s_hi - kx / k0) / angle_margin, 0.0, 1.0)
    taper = 0.5 - 0.5 * np.cos(np.pi * edge)
    src = point_source_spectrum(kx, k0, source.x_s - x_first, kz_min) * taper

    n = int(np.ceil(z_s / fine_dz - 1e-9))
    dz = z_s / n
    depths = source.z_s - dz * np.arange(n)
    at_array = _march(src, kx, k0, omega, depths, dz, profile, method, kz_min)
    p = (np.fft.ifft(at_array, axis=1) / pitch)[:, j0:j0 + array.n_sensors].T

    # numpy bins carry exp(+i w t): conjugate the exp(-i w t) field
    delay = np.exp(-2j * np.pi * f * source.emission_time)
    spectra = np.conj(p) * (source.spectrum(f) * delay)[None, :]
    samples = synthesize_rf(spectra, f, n_t, fs)
    return RfCapture(samples, pitch, fs, array.origin,
                     meta={"synth": f"marching_{method}", "x_true": source.x_s, "z_true": source.z_s})
