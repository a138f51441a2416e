"""Windowing, zero padding and spatial/temporal Fourier transforms.

Conventions
-----------
* Spatial spectra approximate the continuous transform
  ``P(kx) = int p(x) exp(-i kx x) dx`` by ``dx * fft(p)``; the inverse is
  ``ifft(P) / dx``. The FFT itself is unnormalized forward and ``1/n``
  inverse, so the round trip is exact and Parseval reads
  ``sum |p|^2 dx == sum |P|^2 dkx / (2 pi)``.
* All kx-indexed arrays use numpy ``fftfreq`` ordering (DC first).
* Temporal spectra use numpy's sign (``exp(-i w t)`` kernel). For a
  physical field ``Re[p exp(-i w t)]`` the positive-frequency bin is the
  phase conjugate of ``p``, which is the field the propagators reconstruct.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AXIS_KINDS = ("time", "depth", "frequency")


@dataclass(frozen=True)
class ComplexField2D:
    """Field sampled on a regular grid, indexed ``data[ix, i2]``.

    The second axis is time (pitch ``d2`` in seconds), depth (metres) or a
    set of frequency bins (pitch in Hz). ``origin`` is the x coordinate of
    ``data[0]``.
    """

    data: np.ndarray
    dx: float
    d2: float
    axis_kind: str = "time"
    origin: float = 0.0

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError(f"field data must be 2-D, got shape {data.shape}")
        if not self.dx > 0 or not self.d2 > 0:
            raise ValueError("grid pitches must be positive")
        if self.axis_kind not in AXIS_KINDS:
            raise ValueError(f"axis_kind must be one of {AXIS_KINDS}")
        object.__setattr__(self, "data", data)

    @property
    def nx(self) -> int:
        return self.data.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.dx * np.arange(self.nx)


@dataclass(frozen=True)
class WindowSpec:
    kind: str = "tukey"
    cosine_fraction: float = 0.25
    pad_factor: int = 4

    def __post_init__(self):
        if self.kind != "tukey":
            raise ValueError(f"unsupported window kind {self.kind!r}")
        if not 0.0 <= self.cosine_fraction <= 1.0:
            raise ValueError("cosine_fraction must lie in [0, 1]")
        if int(self.pad_factor) != self.pad_factor or self.pad_factor < 1:
            raise ValueError("pad_factor must be an integer >= 1")


def axial_wavenumber(kx: np.ndarray, k0: float) -> np.ndarray:
    """``sqrt(k0^2 - kx^2)`` on the branch with ``Im(kz) >= 0``.

    Propagating bins get a real, non-negative kz; evanescent bins a purely
    imaginary kz with positive imaginary part, so ``exp(i kz z)`` decays.
    """
    kx = np.asarray(kx, dtype=float)
    arg = k0 * k0 - kx * kx
    kz = np.empty(kx.shape, dtype=complex)
    prop = arg >= 0
    kz[prop] = np.sqrt(arg[prop])
    kz[~prop] = 1j * np.sqrt(-arg[~prop])
    return kz


@dataclass(frozen=True)
class SpectralGrid:
    """Transverse wavenumbers for one frequency and reference sound speed."""

    kx: np.ndarray
    k0: float
    omega: float
    c0: float
    kz: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n: int, dx: float, omega: float, c0: float) -> "SpectralGrid":
        kx = 2 * np.pi * np.fft.fftfreq(n, dx)
        k0 = omega / c0
        return cls(kx=kx, k0=k0, omega=omega, c0=c0, kz=axial_wavenumber(kx, k0))

    @property
    def n(self) -> int:
        return self.kx.size

    @property
    def propagating(self) -> np.ndarray:
        return np.abs(self.kx) <= self.k0


def tukey_window(n: int, R: float) -> np.ndarray:
    """Symmetric Tukey (tapered cosine) window with cosine fraction ``R``.

    ``R = 0`` is rectangular and ``R = 1`` is the Hann window.
    """
    if n < 1:
        raise ValueError("window length must be >= 1")
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"cosine fraction must lie in [0, 1], got {R}")
    w = np.ones(n)
    if n == 1 or R == 0.0:
        return w
    i = np.arange(n)
    # distance to the nearer edge, so the two tapers are bitwise mirrors
    d = np.minimum(i, n - 1 - i) / (n - 1)
    taper = d < 0.5 * R
    w[taper] = 0.5 * (1.0 - np.cos(2.0 * np.pi * d[taper] / R))
    return w


def pad_offset(n: int, pad_factor: int) -> int:
    """Index of the first physical sample inside the padded array."""
    return (pad_factor * n - n) // 2


def window_pad_array(data: np.ndarray, spec: WindowSpec) -> np.ndarray:
    """Window along axis 0, then zero pad symmetrically to ``pad_factor * n``."""
    data = np.asarray(data)
    n = data.shape[0]
    w = tukey_window(n, spec.cosine_fraction)
    shape = (spec.pad_factor * n,) + data.shape[1:]
    out = np.zeros(shape, dtype=np.result_type(data, float))
    i0 = pad_offset(n, spec.pad_factor)
    out[i0:i0 + n] = data * w.reshape((n,) + (1,) * (data.ndim - 1))
    return out


def window_and_pad(field: ComplexField2D, spec: WindowSpec) -> ComplexField2D:
    """Taper the transverse axis and zero pad it symmetrically."""
    if field.data.size == 0:
        raise ValueError("field is empty")
    i0 = pad_offset(field.nx, spec.pad_factor)
    return ComplexField2D(
        window_pad_array(field.data, spec),
        field.dx,
        field.d2,
        field.axis_kind,
        field.origin - i0 * field.dx,
    )


def forward_spectrum(values: np.ndarray, dx: float, axis: int = -1):
    """Angular spectrum of ``values`` sampled at pitch ``dx``.

    Returns ``(spectrum, kx)`` with ``spectrum = dx * fft(values)`` along
    ``axis`` and ``kx = 2 pi fftfreq(n, dx)``.
    """
    values = np.asarray(values)
    n = values.shape[axis]
    if n < 2:
        raise ValueError("need at least two samples")
    if not dx > 0:
        raise ValueError("dx must be positive")
    return dx * np.fft.fft(values, axis=axis), 2 * np.pi * np.fft.fftfreq(n, dx)


def inverse_spectrum(spectrum: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Exact inverse of :func:`forward_spectrum`."""
    return np.fft.ifft(spectrum, axis=axis) / dx


def time_to_frequency(rf: ComplexField2D, f_center: float, n_bins: int = 3):
    """Temporal FFT per channel, keeping the ``n_bins`` bins around ``f_center``.

    Returns a list of ``(omega, values)`` pairs, lowest frequency first, where
    ``values`` has one complex entry per sensor.
    """
    if rf.axis_kind != "time":
        raise ValueError("time_to_frequency needs a time-axis field")
    if n_bins < 1 or n_bins % 2 == 0:
        raise ValueError(f"n_bins must be odd and positive, got {n_bins}")
    fs = 1.0 / rf.d2
    if not 0.0 <= f_center < fs / 2:
        raise ValueError(f"f_center {f_center:g} Hz outside [0, fs/2 = {fs / 2:g} Hz)")
    nt = rf.data.shape[1]
    df = fs / nt
    center = int(round(f_center / df))
    half = n_bins // 2
    idx = np.arange(center - half, center + half + 1)
    if idx[0] < 0 or idx[-1] > nt // 2:
        raise ValueError("requested bins fall outside the one-sided spectrum")
    if np.iscomplexobj(rf.data):
        spec = np.fft.fft(rf.data, axis=1)
    else:
        spec = np.fft.rfft(rf.data, axis=1)
    return [(2 * np.pi * i * df, spec[:, i]) for i in idx]
