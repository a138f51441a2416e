"""Angular-spectrum extrapolation kernels and first-order validity checks.

Time convention: fields are ``exp(-i w t)`` and forward (+z) extrapolation
multiplies by ``exp(+i kz z)``. Applied to numpy temporal bins this
reconstructs the phase conjugate of the incoming field, converging on the
source. Flipping this sign also flips the sign of the stratified correction,
so it lives only in :func:`_transfer`.

Evanescent bins (``|kx| > k0``) are zeroed by default (``"zero"``) or left to
decay as ``exp(-|kz| z)`` (``"decay"``). Bins with ``|kz| < kz_min * k0`` are
propagated homogeneously without the stratified phase term, which is
singular at grazing incidence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .medium import (PhaseIntegralTable, SoundSpeedProfile, lambda_at, one_minus_mu,
                     phase_integral)
from .spectral import SpectralGrid

EVANESCENT_POLICIES = ("zero", "decay")
KZ_MIN = 0.05


@dataclass(frozen=True)
class AngularSpectrum:
    values: np.ndarray
    grid: SpectralGrid
    z: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape[-1] != self.grid.n:
            raise ValueError("spectrum length does not match the kx grid")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class PropagatorDiagnostics:
    short_wavelength_lhs: float
    slow_change_ratio: float
    truncation_lhs: float
    evanescent_fraction: float

    @property
    def flags(self) -> dict:
        return {
            "short_wavelength": self.short_wavelength_lhs > 1.0,
            "slow_change": self.slow_change_ratio > 1.0,
            "truncation": self.truncation_lhs > 1.0,
        }

    @property
    def any_exceeded(self) -> bool:
        return any(self.flags.values())


def _check_policy(evanescent: str):
    if evanescent not in EVANESCENT_POLICIES:
        raise ValueError(f"evanescent policy must be one of {EVANESCENT_POLICIES}")


def _transfer(kz, distance, phi):
    return np.exp(1j * (kz * distance - phi))


def _corrected_bins(grid: SpectralGrid, kz_min: float) -> np.ndarray:
    return grid.propagating & (grid.kz.real >= kz_min * grid.k0)


def _phase_coefficient(grid: SpectralGrid, kz_min: float) -> np.ndarray:
    """``k0^2 / (2 kz)`` on corrected bins, 0 elsewhere."""
    coef = np.zeros(grid.n)
    ok = _corrected_bins(grid, kz_min)
    coef[ok] = grid.k0 ** 2 / (2.0 * grid.kz.real[ok])
    return coef


def _apply_policy(values, grid: SpectralGrid, evanescent: str):
    if evanescent == "zero":
        values[..., ~grid.propagating] = 0.0
    return values


def _distance(P0: AngularSpectrum, z: float) -> float:
    d = z - P0.z
    if d < 0:
        raise ValueError(f"target depth {z:g} m lies behind the spectrum plane {P0.z:g} m; "
                         "only forward propagation is supported")
    return d


def propagate_homogeneous(P0: AngularSpectrum, z: float, evanescent: str = "zero") -> AngularSpectrum:
    """Extrapolate ``P0`` to depth ``z`` with ``exp(i kz (z - z0))``."""
    _check_policy(evanescent)
    d = _distance(P0, z)
    if d == 0:
        return AngularSpectrum(P0.values.copy(), P0.grid, P0.z)
    out = P0.values * _transfer(P0.grid.kz, d, 0.0)
    return AngularSpectrum(_apply_policy(out, P0.grid, evanescent), P0.grid, z)


def propagate_stratified(P0: AngularSpectrum, z: float, table: PhaseIntegralTable,
                         evanescent: str = "zero", kz_min: float = KZ_MIN) -> AngularSpectrum:
    """Extrapolate with the first-order stratified phase correction.

    Each propagating bin gains ``exp(i (kz d - phi))`` where
    ``phi = k0^2 / (2 kz) * (I(z) - I(z0))`` and ``I`` is the tabulated
    integral of ``1 - mu``.
    """
    _check_policy(evanescent)
    d = _distance(P0, z)
    if z > table.z_end * (1 + 1e-12) + 1e-12:
        raise ValueError(f"phase table ends at {table.z_end:g} m, need {z:g} m")
    if d == 0:
        return AngularSpectrum(P0.values.copy(), P0.grid, P0.z)
    phi = _phase_coefficient(P0.grid, kz_min) * (table(z) - table(P0.z))
    out = P0.values * _transfer(P0.grid.kz, d, phi)
    return AngularSpectrum(_apply_policy(out, P0.grid, evanescent), P0.grid, z)


def march_step(Pn: AngularSpectrum, dz: float, lambda_n: float, evanescent: str = "zero",
               kz_min: float = KZ_MIN) -> AngularSpectrum:
    """One step ``P e^{i kz dz} (1 + lambda_n dz / (2 i kz))`` of the marching recursion."""
    _check_policy(evanescent)
    if not dz > 0:
        raise ValueError("dz must be positive")
    grid = Pn.grid
    ok = _corrected_bins(grid, kz_min)
    factor = np.ones(grid.n, dtype=complex)
    factor[ok] += lambda_n * dz / (2j * grid.kz.real[ok])
    out = Pn.values * _transfer(grid.kz, dz, 0.0) * factor
    return AngularSpectrum(_apply_policy(out, grid, evanescent), grid, Pn.z + dz)


def step_count(length: float, dz: float) -> int:
    n = length / dz
    if abs(n - round(n)) > 1e-6 * max(1.0, n):
        raise ValueError(f"{length:g} m is not an integer number of {dz:g} m steps")
    return int(round(n))


def propagate_marching(P0: AngularSpectrum, z_max: float, dz: float, profile: SoundSpeedProfile,
                       omega: Optional[float] = None, evanescent: str = "zero",
                       kz_min: float = KZ_MIN) -> list:
    """March from ``P0.z`` to ``z_max``, returning every plane including ``P0``.

    ``lambda`` is sampled at the left end of each step.
    """
    omega = P0.grid.omega if omega is None else omega
    n = step_count(z_max - P0.z, dz)
    planes = [P0]
    if n == 0:
        return planes
    zs = P0.z + dz * np.arange(n)
    lam = lambda_at(profile, zs, omega)
    P = P0
    for lam_n in lam:
        P = march_step(P, dz, float(lam_n), evanescent, kz_min)
        planes.append(P)
    return planes


def homogeneous_transfer(grid: SpectralGrid, nz: int, dz: float, evanescent: str = "zero") -> np.ndarray:
    """Transfer functions at depths ``0, dz, ..., (nz-1) dz`` as an ``(nz, n)`` array.

    The depth dependence is a geometric sequence, so planes are built by
    repeated multiplication with the single-step factor.
    """
    _check_policy(evanescent)
    step = _transfer(grid.kz, dz, 0.0)
    if evanescent == "zero":
        step[~grid.propagating] = 0.0
    H = np.empty((nz, grid.n), dtype=complex)
    H[0] = 1.0
    if nz > 1:
        H[1:] = step
        np.cumprod(H, axis=0, out=H)
    return H


def stratified_transfer(grid: SpectralGrid, nz: int, dz: float, table: PhaseIntegralTable,
                        evanescent: str = "zero", kz_min: float = KZ_MIN) -> np.ndarray:
    """Corrected transfer functions on the same depth grid as :func:`homogeneous_transfer`.

    The correction varies plane by plane, so every entry needs its own
    complex exponential.
    """
    _check_policy(evanescent)
    z = dz * np.arange(nz)
    arg = np.multiply.outer(z, grid.kz) - np.multiply.outer(table(z), _phase_coefficient(grid, kz_min))
    H = np.exp(1j * arg)
    if evanescent == "zero":
        H[:, ~grid.propagating] = 0.0
    H[0] = 1.0
    return H


def check_validity(profile: SoundSpeedProfile, omega: float, z_max: float, grid: SpectralGrid,
                   dz: Optional[float] = None, max_angle_deg: float = 0.0,
                   kz_min: float = KZ_MIN, mu_floor: float = 1e-6) -> PropagatorDiagnostics:
    """Evaluate the first-order validity criteria over depth and kx.

    Bins are restricted to propagation angles up to ``max_angle_deg`` from
    the axis (the default keeps the paraxial bin only) and to
    ``kz >= kz_min k0``. The terms divided by ``1 - mu`` are only evaluated
    where ``|1 - mu| >= mu_floor``; below that the medium is locally
    homogeneous and no correction is applied. Derivatives are central
    differences on the ``dz`` grid, one-sided at the ends.
    """
    k0 = omega / profile.c0
    if dz is None:
        dz = 2 * np.pi / k0 / 6
    z = np.linspace(0.0, z_max, max(3, int(np.ceil(z_max / dz)) + 1))
    c = profile.speed(z)
    omm = one_minus_mu(profile, z)
    lam = omm * k0 ** 2
    dlam = np.gradient(lam, z)
    dc = np.gradient(c, z)
    mu = 1.0 - omm
    I = phase_integral(profile, z_max, z[1] - z[0])(z)

    cos_max = np.cos(np.deg2rad(max_angle_deg))
    kz = grid.kz.real
    sel = grid.propagating & (kz >= kz_min * k0) & (kz >= cos_max * k0 * (1 - 1e-12))
    if not np.any(sel):
        sel = np.zeros(grid.n, dtype=bool)
        sel[0] = True
    kz = np.unique(kz[sel])

    active = np.abs(omm) >= mu_floor
    with np.errstate(divide="ignore", invalid="ignore"):
        dlog = np.where(active, np.abs(dlam / lam), 0.0)
        slow = np.where(active, np.abs(dc / c * mu / omm), 0.0)
    sw = dlog[:, None] / (2 * kz[None, :]) + np.abs(lam)[:, None] / (4 * kz[None, :] ** 2)
    sc = slow[:, None] / (2 * kz[None, :])
    tr = 0.25 * (k0 / kz[None, :]) ** 2 * (k0 * I[:, None]) ** 2
    evanescent = float(np.mean(~grid.propagating))
    return PropagatorDiagnostics(float(sw.max()), float(sc.max()), float(tr.max()), evanescent)
