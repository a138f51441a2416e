"""Source pulses and the homogeneous 2-D Green's-function RF synthesizer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..pam import LinearArray, RfCapture

FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))


@dataclass(frozen=True)
class SourceSpec:
    """Point source emitting a Gaussian-enveloped tone burst.

    ``bandwidth_fraction`` is the FWHM of the amplitude spectrum divided by
    ``f0``. ``t0`` is the envelope centre; by default four envelope standard
    deviations after t = 0.
    """

    x_s: float
    z_s: float
    f0: float
    bandwidth_fraction: float = 0.05
    amplitude: float = 1.0
    t0: Optional[float] = None

    def __post_init__(self):
        if not self.f0 > 0:
            raise ValueError("f0 must be positive")
        if not 0 < self.bandwidth_fraction < 1:
            raise ValueError("bandwidth_fraction must lie in (0, 1)")

    @property
    def sigma_f(self) -> float:
        return self.bandwidth_fraction * self.f0 / FWHM_PER_SIGMA

    @property
    def sigma_t(self) -> float:
        return 1.0 / (2.0 * np.pi * self.sigma_f)

    @property
    def emission_time(self) -> float:
        return 4.0 * self.sigma_t if self.t0 is None else self.t0

    def spectrum(self, f) -> np.ndarray:
        """Continuous Fourier transform of :meth:`waveform` for ``f > 0``,
        without the emission delay."""
        f = np.asarray(f, dtype=float)
        g = np.exp(-((f - self.f0) ** 2) / (2.0 * self.sigma_f ** 2))
        return 0.5 * self.amplitude * self.sigma_t * np.sqrt(2.0 * np.pi) * g

    def waveform(self, t) -> np.ndarray:
        tau = np.asarray(t, dtype=float) - self.emission_time
        return self.amplitude * np.exp(-tau ** 2 / (2.0 * self.sigma_t ** 2)) * np.cos(2 * np.pi * self.f0 * tau)

    def band(self, n_sigma: float = 6.0) -> tuple:
        return max(0.0, self.f0 - n_sigma * self.sigma_f), self.f0 + n_sigma * self.sigma_f


def synthesize_rf(spectra: np.ndarray, freqs: np.ndarray, n_t: int, fs: float) -> np.ndarray:
    """Real RF ``[sensor, time]`` from one-sided spectra given on rfft bins ``freqs``.

    ``spectra`` holds continuous-transform values; the discrete scaling
    (``fs`` per bin) is applied here.
    """
    full = np.zeros((spectra.shape[0], n_t // 2 + 1), dtype=complex)
    k = np.rint(freqs * n_t / fs).astype(int)
    full[:, k] = fs * spectra
    if n_t % 2 == 0:
        full[:, -1] = full[:, -1].real
    full[:, 0] = 0.0
    return np.fft.irfft(full, n_t, axis=1)


def green2d_capture(source: SourceSpec, array: LinearArray, c0: float, fs: float,
                    duration: float) -> RfCapture:
    """RF for a point source in a homogeneous 2-D medium.

    Uses the far-field asymptote of the outgoing Green's function,
    ``(1/4) sqrt(2 / (pi k r)) exp(i (k r + pi/4))``, weighted by the pulse
    spectrum. Valid for ``k r >> 1``.
    """
    x = array.x
    r = np.hypot(x - source.x_s, array.z - source.z_s)
    if np.any(r <= 1e-12 * max(1.0, abs(source.z_s))):
        raise ValueError("source coincides with a sensor")
    n_t = int(round(duration * fs))
    freqs = np.fft.rfftfreq(n_t, 1.0 / fs)
    lo, hi = source.band()
    sel = (freqs > 0) & (freqs >= lo) & (freqs <= hi)
    f = freqs[sel]
    k = 2 * np.pi * f / c0
    kr = np.multiply.outer(r, k)
    # numpy bins carry exp(+i w t), so the outgoing phase appears conjugated
    g = 0.25 * np.sqrt(2.0 / (np.pi * kr)) * np.exp(-1j * (kr + np.pi / 4))
    delay = np.exp(-2j * np.pi * f * source.emission_time)
    spectra = g * (source.spectrum(f) * delay)[None, :]
    samples = synthesize_rf(spectra, f, n_t, fs)
    return RfCapture(samples, array.pitch, fs, array.origin,
                     meta={"synth": "green", "x_true": source.x_s, "z_true": source.z_s})
