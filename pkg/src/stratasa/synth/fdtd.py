"""2-D staggered-grid pressure-velocity FDTD with a split-field PML.

Staggered differences of fourth or sixth order in space (sixth by
default), leapfrog in time. The medium
varies in z only (``c(z)`` and optionally ``rho(z)``); an optional
absorption term damps pressure at a rate matched to the power-law
attenuation at the source frequency.

Sources inject volume (``p += kappa q dt / (dx dz)``), which keeps the
pressure-to-pressure response reciprocal in heterogeneous media.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np

from ..medium import SoundSpeedProfile
from ..pam import LinearArray, RfCapture
from .greens import SourceSpec, synthesize_rf

# staggered first-derivative weights for offsets 1/2, 3/2, 5/2
STENCILS = {
    4: (9.0 / 8.0, -1.0 / 24.0, 0.0),
    6: (75.0 / 64.0, -25.0 / 384.0, 3.0 / 640.0),
}


def stencil_gain(order: int) -> float:
    """Largest modified wavenumber times ``dx / 2``; enters the stability bound."""
    c = STENCILS[order]
    return c[0] - c[1] + c[2]

PML_REFLECTION = 1e-5
DEFAULT_RHO = 1000.0


@numba.njit(cache=True, fastmath=False)
def _step(px, pz, vx, vz, ax, bx, axh, bxh, az, bz, azh, bzh, kap_dt_dx, kap_dt_dz,
          bvx, bvz, damp, c1, c2, c3):
    nx, nz = px.shape
    for i in range(2, nx - 3):
        a = axh[i]
        b = bxh[i]
        for j in range(nz):
            g = (c1 * (px[i + 1, j] + pz[i + 1, j] - px[i, j] - pz[i, j])
                 + c2 * (px[i + 2, j] + pz[i + 2, j] - px[i - 1, j] - pz[i - 1, j])
                 + c3 * (px[i + 3, j] + pz[i + 3, j] - px[i - 2, j] - pz[i - 2, j]))
            vx[i, j] = a * vx[i, j] - b * bvx[j] * g
    for i in range(nx):
        for j in range(2, nz - 3):
            g = (c1 * (px[i, j + 1] + pz[i, j + 1] - px[i, j] - pz[i, j])
                 + c2 * (px[i, j + 2] + pz[i, j + 2] - px[i, j - 1] - pz[i, j - 1])
                 + c3 * (px[i, j + 3] + pz[i, j + 3] - px[i, j - 2] - pz[i, j - 2]))
            vz[i, j] = azh[j] * vz[i, j] - bzh[j] * bvz[j] * g
    for i in range(3, nx - 2):
        a = ax[i]
        b = bx[i]
        for j in range(3, nz - 2):
            d1 = (c1 * (vx[i, j] - vx[i - 1, j]) + c2 * (vx[i + 1, j] - vx[i - 2, j])
                  + c3 * (vx[i + 2, j] - vx[i - 3, j]))
            d2 = (c1 * (vz[i, j] - vz[i, j - 1]) + c2 * (vz[i, j + 1] - vz[i, j - 2])
                  + c3 * (vz[i, j + 2] - vz[i, j - 3]))
            px[i, j] = damp[j] * (a * px[i, j] - b * kap_dt_dx[j] * d1)
            pz[i, j] = damp[j] * (az[j] * pz[i, j] - bz[j] * kap_dt_dz[j] * d2)


@dataclass(frozen=True)
class FdtdConfig:
    """Grid, time step and absorbing layer for :func:`fdtd_simulate`.

    The interior spans ``nx * nz`` nodes with node ``(0, 0)`` at
    ``(x0, z0)``; ``pml_thickness`` wavelengths of ``pml_wavelength`` are
    added on every side.
    """

    dx: float
    dz: float
    dt: float
    nx: int
    nz: int
    x0: float
    z0: float
    c_max: float
    pml_wavelength: float
    pml_thickness: float = 2.0
    order: int = 6

    def __post_init__(self):
        if min(self.dx, self.dz, self.dt) <= 0:
            raise ValueError("grid steps must be positive")
        if self.order not in STENCILS:
            raise ValueError(f"stencil order must be one of {sorted(STENCILS)}")
        if self.cfl > 1.0:
            raise ValueError(f"CFL number {self.cfl:.3f} > 1: reduce dt below {self.dt / self.cfl:.3e} s")

    @property
    def cfl(self) -> float:
        """Courant number of the chosen stencil (stable when <= 1)."""
        return stencil_gain(self.order) * self.c_max * self.dt * np.sqrt(1 / self.dx ** 2 + 1 / self.dz ** 2)

    @property
    def pml_cells(self) -> int:
        return int(np.ceil(self.pml_thickness * self.pml_wavelength / min(self.dx, self.dz)))

    @property
    def shape(self) -> tuple:
        n = self.pml_cells
        return self.nx + 2 * n, self.nz + 2 * n

    def node_x(self, i):
        return self.x0 + (np.asarray(i) - self.pml_cells) * self.dx

    def node_z(self, j):
        return self.z0 + (np.asarray(j) - self.pml_cells) * self.dz

    def index_of(self, x, z, strict: bool = True):
        i = (np.asarray(x) - self.x0) / self.dx
        j = (np.asarray(z) - self.z0) / self.dz
        ii, jj = np.rint(i).astype(int), np.rint(j).astype(int)
        if strict and (np.any(np.abs(i - ii) > 1e-6) or np.any(np.abs(j - jj) > 1e-6)):
            raise ValueError("position is not on an FDTD node")
        if np.any(ii < 0) or np.any(ii >= self.nx) or np.any(jj < 0) or np.any(jj >= self.nz):
            raise ValueError("position lies outside the interior (inside the PML or off-grid)")
        return ii + self.pml_cells, jj + self.pml_cells

    @classmethod
    def for_domain(cls, x_range, z_range, c_min: float, c_max: float, f_max: float,
                   f_min: Optional[float] = None, ppw: float = 7.0, cfl: float = 0.6,
                   pml_thickness: float = 2.0, dx: Optional[float] = None,
                   order: int = 6) -> "FdtdConfig":
        """Grid resolving ``f_max`` at ``ppw`` points per (slowest) wavelength.

        The interior is widened to whole cells so that the origin is a node.
        """
        if dx is None:
            dx = c_min / f_max / ppw
        i0, i1 = np.floor(x_range[0] / dx + 1e-9), np.ceil(x_range[1] / dx - 1e-9)
        j0, j1 = np.floor(z_range[0] / dx + 1e-9), np.ceil(z_range[1] / dx - 1e-9)
        dt = cfl / (stencil_gain(order) * c_max * np.sqrt(2.0) / dx)
        f_pml = f_max if f_min is None else f_min
        return cls(dx, dx, dt, int(i1 - i0) + 1, int(j1 - j0) + 1, i0 * dx, j0 * dx,
                   c_max, c_max / f_pml, pml_thickness, order)


def _pml_profiles(n_int: int, npml: int, h: float, c: float, dt: float):
    """Damping factors at integer and half nodes along one axis."""
    n = n_int + 2 * npml
    L = npml * h
    smax = 3.0 * c * np.log(1.0 / PML_REFLECTION) / (2.0 * L) if npml else 0.0

    def sigma(pos):
        d = np.maximum(np.maximum(npml - pos, pos - (npml + n_int - 1)), 0.0)
        return smax * (d / max(npml, 1)) ** 2

    out = []
    for pos in (np.arange(n, dtype=float), np.arange(n) + 0.5):
        s = sigma(pos)
        out.append((1 - 0.5 * s * dt) / (1 + 0.5 * s * dt))
        out.append(1.0 / (1 + 0.5 * s * dt))
    return out  # a, b, a_half, b_half


def medium_columns(profile: SoundSpeedProfile, z: np.ndarray, default_rho: float = DEFAULT_RHO):
    c = np.asarray(profile.speed(z), dtype=float)
    rho = profile.density(z)
    rho = np.full_like(c, default_rho) if rho is None else np.asarray(rho, dtype=float)
    return c, rho


def fdtd_simulate(sources: Sequence[SourceSpec], profile: SoundSpeedProfile, config: FdtdConfig,
                  receivers: LinearArray, duration: float, wavelet=None,
                  absorption_frequency: Optional[float] = None, return_energy: bool = False,
                  energy_every: int = 1):
    """Run the FDTD and record pressure at the receiver nodes.

    ``wavelet`` optionally overrides each source's time signal (a callable
    of time), which is sampled half a step early at every update. The capture is sampled at ``1 / dt`` starting at t = 0. With
    ``return_energy`` the discrete acoustic energy is also returned every
    ``energy_every`` steps.
    """
    cfg = config
    npml = cfg.pml_cells
    nxt, nzt = cfg.shape
    zn = cfg.node_z(np.arange(nzt))
    c, rho = medium_columns(profile, zn)
    rho_h = np.append(0.5 * (rho[:-1] + rho[1:]), rho[-1])
    if np.max(c) > cfg.c_max * (1 + 1e-9):
        raise ValueError("profile exceeds the configured c_max; CFL check would be invalid")
    kappa = rho * c ** 2
    dt = cfg.dt

    ax, bx, axh, bxh = _pml_profiles(cfg.nx, npml, cfg.dx, cfg.c_max, dt)
    az, bz, azh, bzh = _pml_profiles(cfg.nz, npml, cfg.dz, cfg.c_max, dt)

    damp = np.ones(nzt)
    if profile.absorption is not None and profile.absorption.alpha0_db_cm_mhz > 0:
        f_ref = absorption_frequency or (sources[0].f0 if sources else 1.0)
        sig = 2.0 * c * profile.absorption.nepers_per_metre(f_ref)
        damp = (1 - 0.5 * sig * dt) / (1 + 0.5 * sig * dt)

    ri, rj = cfg.index_of(receivers.x, np.full(receivers.n_sensors, receivers.z))
    src_idx = [cfg.index_of(s.x_s, s.z_s, strict=False) for s in sources]
    n_t = int(round(duration / dt))
    t = dt * np.arange(n_t)
    # the pressure update at step n integrates over (t_{n-1}, t_n]: sample q at the midpoint
    signals = [(wavelet or s.waveform)(t - 0.5 * dt) for s in sources]

    px = np.zeros((nxt, nzt))
    pz = np.zeros_like(px)
    vx = np.zeros_like(px)
    vz = np.zeros_like(px)
    args = (ax, bx, axh, bxh, az, bz, azh, bzh, kappa * dt / cfg.dx, kappa * dt / cfg.dz,
            dt / rho / cfg.dx, dt / rho_h / cfg.dz, damp, *STENCILS[cfg.order])
    rec = np.zeros((receivers.n_sensors, n_t))
    energy = []
    inj = [0.5 * kappa[j] * dt / (cfg.dx * cfg.dz) for _, j in src_idx]
    for n in range(1, n_t):
        _step(px, pz, vx, vz, *args)
        for (i, j), sig, w in zip(src_idx, signals, inj):
            px[i, j] += w * sig[n]
            pz[i, j] += w * sig[n]
        rec[:, n] = px[ri, rj] + pz[ri, rj]
        if return_energy and n % energy_every == 0:
            p = px + pz
            e = np.sum(p ** 2 / (2 * kappa)) + 0.5 * np.sum(rho * vx ** 2) + 0.5 * np.sum(rho_h * vz ** 2)
            energy.append(e * cfg.dx * cfg.dz)

    capture = RfCapture(rec, receivers.pitch, 1.0 / dt, receivers.origin,
                        meta={"synth": "fdtd", "dt": dt})
    if return_energy:
        return capture, np.array(energy)
    return capture


def recenter_spectrum(capture: RfCapture, injected: np.ndarray, source: SourceSpec, fs_out: float,
                      duration: float, rho_source: float = 1.0) -> RfCapture:
    """Replace the injected wavelet by ``source``'s pulse, resampled to ``fs_out``.

    The system is linear and time invariant, so the response to any source
    signal is the recorded response times the ratio of source spectra. The
    ratio is evaluated only inside ``source``'s band, where the injected
    wavelet must carry energy. Volume injection radiates pressure
    ``rho dq/dt``; dividing by ``i w rho_source`` leaves the free-field
    Green's function times the pulse, the same normalisation as
    :func:`~stratasa.synth.greens.green2d_capture`.
    """
    n_out = int(round(duration * fs_out))
    freqs = np.fft.rfftfreq(n_out, 1.0 / fs_out)
    lo, hi = source.band()
    f = freqs[(freqs > 0) & (freqs >= lo) & (freqs <= hi)]
    t = np.arange(capture.sample_count) / capture.fs
    kern = np.exp(-2j * np.pi * np.multiply.outer(t, f))
    rec = capture.samples @ kern
    q = injected @ kern
    if not np.min(np.abs(q)) > 1e-9 * np.max(np.abs(q)):
        raise ValueError("injected wavelet has no energy inside the requested band")
    delay = np.exp(-2j * np.pi * f * source.emission_time)
    spectra = rec * (source.spectrum(f) * delay / (q * 2j * np.pi * f * rho_source))[None, :]
    samples = synthesize_rf(spectra, f, n_out, fs_out)
    meta = dict(capture.meta)
    meta.update(f0=source.f0, bandwidth_fraction=source.bandwidth_fraction)
    return RfCapture(samples, capture.dx, fs_out, capture.aperture_origin, meta=meta)


def translated_row(profile: SoundSpeedProfile, config: FdtdConfig, array: LinearArray,
                   x_sources: Sequence[float], z_source: float, pulses: Sequence[SourceSpec],
                   fs: float, durations: Sequence[float], broadband_fraction: float = 0.9,
                   fdtd_duration: Optional[float] = None) -> list:
    """RF for a row of equal-depth sources from a single FDTD run.

    The medium is invariant in x, so a source at ``x_s`` seen by a sensor at
    ``x`` is the response of a source at 0 seen at ``x - x_s``. One
    broadband source at ``(0, z_source)`` is simulated with a receiver line
    covering every needed offset; each ``pulses[k]`` (only ``f0`` and
    ``bandwidth_fraction`` are used) is then synthesized by
    :func:`recenter_spectrum` with record length ``durations[k]``.

    Returns ``out[k][i]``, the capture for pulse ``k`` and source ``x_sources[i]``.
    """
    pitch = array.pitch
    x_sources = np.asarray(x_sources, dtype=float)
    shift = x_sources / pitch
    if np.any(np.abs(shift - np.rint(shift)) > 1e-6):
        raise ValueError("source x positions must be whole multiples of the sensor pitch")
    shift = np.rint(shift).astype(int)
    lo = array.origin - shift.max() * pitch
    n_line = array.n_sensors + int(shift.max() - shift.min())
    line = LinearArray(n_line, pitch, lo, array.z)

    f_lo = min(p.band()[0] for p in pulses)
    f_hi = max(p.band()[1] for p in pulses)
    f_mid = 0.5 * (f_lo + f_hi)
    frac = max(broadband_fraction, min(0.95, 1.2 * (f_hi - f_lo) / f_mid / 2.0))
    wide = SourceSpec(0.0, z_source, f_mid, frac)
    if fdtd_duration is None:
        x_far = max(abs(line.x[0]), abs(line.x[-1]))
        c_min = float(np.min(profile.speed(np.linspace(array.z, z_source, 64))))
        fdtd_duration = 2 * wide.emission_time + np.hypot(x_far, z_source - array.z) / c_min * 1.05
    wide_cap = fdtd_simulate([wide], profile, config, line, fdtd_duration)
    injected = wide.waveform(np.arange(wide_cap.sample_count) / wide_cap.fs)
    rho_s = medium_columns(profile, np.array([z_source]))[1][0]

    out = []
    for pulse, duration in zip(pulses, durations):
        row = []
        for x_s, s in zip(x_sources, shift):
            j0 = int(shift.max() - s)
            sub = RfCapture(wide_cap.samples[j0:j0 + array.n_sensors], pitch, wide_cap.fs,
                            array.origin, meta=dict(wide_cap.meta))
            src = SourceSpec(float(x_s), z_source, pulse.f0, pulse.bandwidth_fraction, pulse.amplitude)
            cap = recenter_spectrum(sub, injected, src, fs, duration, rho_source=rho_s)
            cap.meta.update(x_true=float(x_s), z_true=float(z_source))
            row.append(cap)
        out.append(row)
    return out
