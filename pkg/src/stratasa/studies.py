"""Numerical studies shared by the test suite and the experiment scripts."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .medium import PhaseIntegralTable, SoundSpeedProfile, lambda_at, one_minus_mu, phase_integral
from .pam import ErrorSummary, RfCapture, beamform, error_statistics, localization_error, localize_peak
from .propagator import AngularSpectrum, march_step, propagate_marching, propagate_stratified
from .spectral import SpectralGrid
from .synth.noise import add_noise


@dataclass(frozen=True)
class ConvergenceResult:
    frequency: float
    dz: np.ndarray
    local_error: np.ndarray
    global_error: np.ndarray

    @staticmethod
    def _orders(err):
        return np.log2(err[:-1] / err[1:])

    @property
    def local_order(self) -> np.ndarray:
        return self._orders(self.local_error)

    @property
    def global_order(self) -> np.ndarray:
        return self._orders(self.global_error)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def marching_convergence(profile: SoundSpeedProfile, frequency: float, length: float,
                         z_local: float, divisors: Sequence[int] = (24, 48, 96),
                         n_bins: int = 964, dx: float = 0.25e-3, band: float = 0.5,
                         seed: int = 0) -> ConvergenceResult:
    """Marching versus analytic propagation under successive halving of ``dz``.

    ``dz = lambda0 / d`` for each divisor ``d``. The local error is one
    marching step from ``z_local`` against the exact single-step analytic
    propagator; the global error compares the terminal plane at ``length``.
    The initial spectrum is random within ``|kx| <= band * k0`` so the
    comparison stays away from grazing bins, where the marching factor is far
    from unit modulus and the asymptotic regime starts at much smaller steps.
    """
    omega = 2 * np.pi * frequency
    lam0 = profile.c0 / frequency
    grid = SpectralGrid.build(n_bins, dx, omega, profile.c0)
    rng = np.random.default_rng(seed)
    v = (rng.normal(size=n_bins) + 1j * rng.normal(size=n_bins)) * (np.abs(grid.kx) <= band * grid.k0)

    dzs, loc, glob = [], [], []
    for d in divisors:
        n = int(round(length * d / lam0))
        dz = length / n
        dzs.append(dz)
        P = AngularSpectrum(v, grid, z_local)
        step = march_step(P, dz, float(lambda_at(profile, z_local, omega)))
        # one-interval table sharing the step's left-endpoint sample
        rise = float(one_minus_mu(profile, z_local)) * dz
        table = PhaseIntegralTable(np.array([0.0, z_local, z_local + dz]), dz,
                                   np.array([0.0, 0.0, rise]))
        exact = propagate_stratified(P, z_local + dz, table)
        loc.append(_rel(step.values, exact.values))

        P0 = AngularSpectrum(v, grid, 0.0)
        marched = propagate_marching(P0, length, dz, profile)[-1]
        analytic = propagate_stratified(P0, length, phase_integral(profile, length, dz))
        glob.append(_rel(marched.values, analytic.values))
    return ConvergenceResult(frequency, np.array(dzs), np.array(loc), np.array(glob))


@dataclass
class LocalizationRun:
    summary: ErrorSummary
    results: list
    seconds: list


def localize_all(captures: Sequence[RfCapture], profile: SoundSpeedProfile, f_center: float,
                 z_max: float, correction: str, noise_level: float = 0.0, seed: int = 0,
                 lambda0: Optional[float] = None, **beamform_kw) -> LocalizationRun:
    """Beamform and localize every capture; noise uses seed ``[seed, index]``."""
    lambda0 = profile.c0 / f_center if lambda0 is None else lambda0
    results, secs = [], []
    for i, cap in enumerate(captures):
        rf = add_noise(cap, noise_level, seed=[seed, i]) if noise_level else cap
        t0 = time.perf_counter()
        pam = beamform(rf, profile, f_center, z_max, correction=correction, **beamform_kw)
        res = localize_peak(pam)
        secs.append(time.perf_counter() - t0)
        results.append(localization_error(res, cap.meta["x_true"], cap.meta["z_true"], lambda0))
    return LocalizationRun(error_statistics(results), results, secs)
