"""Stratified sound-speed profiles and the cumulative phase integral.

A profile gives ``c(z)`` on a depth (or altitude) interval together with a
reference speed ``c0``. Derived quantities follow the usual stratified
Helmholtz notation::

    mu(z)     = c0**2 / c(z)**2
    lambda(z) = (1 - mu(z)) * (omega / c0)**2
    I(z)      = int_0^z (1 - mu(z')) dz'

Density and absorption columns ride along for the forward synthesizer only;
reconstruction uses ``c`` alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

# 1976 US Standard Atmosphere, troposphere layer.
T_SEA_LEVEL = 288.15
LAPSE_RATE = 0.0065
GAMMA_AIR = 1.4
R_AIR = 287.05
G0 = 9.80665
RHO_SEA_LEVEL = 1.225
TROPOPAUSE = 11_000.0


class DomainError(ValueError):
    """Raised when a profile is queried outside the depths it is defined on."""


def _gaussian(p, z):
    s2 = p["variance"]
    return p["c_mean"] * (1.0 + p["fraction"] * np.exp(-((z - p["z_center"]) ** 2) / (2 * s2)))


def _munk(p, z):
    zt = 2.0 * (z - p["z_axis"]) / p["B"]
    return p["c1"] * (1.0 + p["epsilon"] * (zt - 1.0 + np.exp(-zt)))


def _atmosphere(p, z):
    return np.sqrt(GAMMA_AIR * R_AIR * (T_SEA_LEVEL - LAPSE_RATE * z))


def _tabulated(p, z):
    return np.interp(z, p["z"], p["c"])


def _constant(p, z):
    return np.full(np.shape(z), p["c"], dtype=float)


_SPEEDS: dict[str, Callable] = {
    "gaussian_perturbation": _gaussian,
    "munk": _munk,
    "standard_atmosphere": _atmosphere,
    "tabulated": _tabulated,
    "constant": _constant,
}


@dataclass(frozen=True)
class Absorption:
    """Power-law absorption ``alpha = alpha0 * f_MHz**power`` in dB/cm."""

    alpha0_db_cm_mhz: float = 0.0
    power: float = 1.0

    def nepers_per_metre(self, f: float) -> float:
        db_per_m = 100.0 * self.alpha0_db_cm_mhz * (f / 1e6) ** self.power
        return db_per_m * np.log(10.0) / 20.0


@dataclass(frozen=True)
class SoundSpeedProfile:
    kind: str
    c0: float
    params: dict = field(compare=False)
    z_min: float = -np.inf
    z_max: float = np.inf
    rho: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    absorption: Optional[Absorption] = None

    def __post_init__(self):
        if self.kind not in _SPEEDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.c0 > 0:
            raise ValueError("reference sound speed c0 must be positive")

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if z.size == 0:
            return z
        lo, hi = np.min(z), np.max(z)
        tol = 1e-9 * max(1.0, abs(self.z_max) if np.isfinite(self.z_max) else 1.0)
        if lo < self.z_min - tol or hi > self.z_max + tol:
            raise DomainError(
                f"{self.kind} profile defined on [{self.z_min:g}, {self.z_max:g}] m, "
                f"queried on [{lo:g}, {hi:g}] m"
            )
        return np.clip(z, self.z_min, self.z_max)

    def speed(self, z):
        """Sound speed (m/s) at depth ``z``; scalars in, scalars out."""
        zz = self._check(z)
        c = _SPEEDS[self.kind](self.params, zz)
        return float(c) if np.ndim(z) == 0 else c

    def density(self, z):
        if self.rho is None:
            return None
        zz = self._check(z)
        r = self.rho(zz)
        return float(r) if np.ndim(z) == 0 else np.asarray(r, dtype=float)

    def with_reference(self, c0: float) -> "SoundSpeedProfile":
        return SoundSpeedProfile(self.kind, c0, self.params, self.z_min, self.z_max,
                                 self.rho, self.absorption)


def mu_at(profile: SoundSpeedProfile, z):
    c = profile.speed(z)
    return profile.c0 ** 2 / c ** 2


def one_minus_mu(profile: SoundSpeedProfile, z):
    """``1 - mu`` written as ``(c - c0)(c + c0)/c^2`` so it is zero iff c == c0."""
    c = profile.speed(z)
    c0 = profile.c0
    return (c - c0) * (c + c0) / c ** 2


def lambda_at(profile: SoundSpeedProfile, z, omega: float):
    return one_minus_mu(profile, z) * (omega / profile.c0) ** 2


@dataclass(frozen=True)
class PhaseIntegralTable:
    """Left-endpoint Riemann sum of ``1 - mu`` on a uniform depth grid."""

    z_grid: np.ndarray
    dz: float
    cumulative_I: np.ndarray

    @property
    def z_end(self) -> float:
        return float(self.z_grid[-1])

    def __call__(self, z):
        """Integral from 0 to ``z``; linear between nodes, which is exact for
        a piecewise-constant integrand."""
        z = np.asarray(z, dtype=float)
        if np.any(z < -1e-12) or np.any(z > self.z_end * (1 + 1e-12) + 1e-12):
            raise ValueError(
                f"phase table covers [0, {self.z_end:g}] m; requested up to {np.max(z):g} m"
            )
        out = np.interp(z, self.z_grid, self.cumulative_I)
        return float(out) if out.ndim == 0 else out


def phase_integral(profile: SoundSpeedProfile, z_max: float, dz: float) -> PhaseIntegralTable:
    if not dz > 0 or not z_max > 0:
        raise ValueError("z_max and dz must be positive")
    n = int(np.ceil(z_max / dz - 1e-9))
    z = dz * np.arange(n + 1)
    integrand = one_minus_mu(profile, z[:-1])
    cum = np.concatenate(([0.0], np.cumsum(integrand * dz)))
    return PhaseIntegralTable(z, dz, cum)


def constant_profile(c: float, c0: Optional[float] = None) -> SoundSpeedProfile:
    return SoundSpeedProfile("constant", c if c0 is None else c0, {"c": float(c)})


def gaussian_profile(c_mean: float, fraction: float, variance: float, z_center: float,
                     **extra) -> SoundSpeedProfile:
    """``c = c_mean (1 + fraction exp(-(z - z_center)^2 / (2 variance)))``.

    ``variance`` is in m^2; ``c0 = c_mean``.
    """
    if not fraction > -1:
        raise ValueError("fraction must exceed -1")
    if not variance > 0:
        raise ValueError("variance must be positive")
    params = dict(c_mean=c_mean, fraction=fraction, variance=variance, z_center=z_center)
    return SoundSpeedProfile("gaussian_perturbation", c_mean, params, **extra)


def munk_profile(c1: float = 1500.0, epsilon: float = 0.00737, z_axis: float = 1300.0,
                 B: float = 1300.0, **extra) -> SoundSpeedProfile:
    """Canonical Munk deep-water profile, sound channel axis at ``z_axis``."""
    if not c1 > 0 or not B > 0:
        raise ValueError("c1 and B must be positive")
    params = dict(c1=c1, epsilon=epsilon, z_axis=z_axis, B=B)
    extra.setdefault("z_min", 0.0)
    return SoundSpeedProfile("munk", c1, params, **extra)


def atmosphere_temperature(z):
    return T_SEA_LEVEL - LAPSE_RATE * np.asarray(z, dtype=float)


def atmosphere_density(z):
    """Hydrostatic troposphere density (kg/m^3)."""
    expo = G0 / (R_AIR * LAPSE_RATE) - 1.0
    return RHO_SEA_LEVEL * (atmosphere_temperature(z) / T_SEA_LEVEL) ** expo


def standard_atmosphere_profile(z_max: float = TROPOPAUSE, **extra) -> SoundSpeedProfile:
    """Troposphere of the standard atmosphere, altitude ``z`` above ground (m)."""
    if z_max > TROPOPAUSE:
        raise DomainError(f"standard atmosphere modelled up to {TROPOPAUSE:g} m only")
    c0 = float(np.sqrt(GAMMA_AIR * R_AIR * T_SEA_LEVEL))
    extra.setdefault("rho", atmosphere_density)
    return SoundSpeedProfile("standard_atmosphere", c0, {}, z_min=0.0, z_max=z_max, **extra)


def tabulated_profile(z, c, c0: Optional[float] = None, **extra) -> SoundSpeedProfile:
    """Piecewise-linear profile through ``(z, c)`` knots, no extrapolation.

    ``c0`` defaults to the depth-average of ``c`` over the knot span.
    """
    z = np.asarray(z, dtype=float)
    c = np.asarray(c, dtype=float)
    if z.ndim != 1 or z.shape != c.shape or z.size < 2:
        raise ValueError("need at least two (z, c) knots")
    if np.any(np.diff(z) <= 0):
        raise ValueError("knot depths must be strictly increasing")
    if np.any(c <= 0):
        raise ValueError("sound speeds must be positive")
    if c0 is None:
        c0 = float(np.trapezoid(c, z) / (z[-1] - z[0]))
    return SoundSpeedProfile("tabulated", c0, {"z": z, "c": c},
                             z_min=float(z[0]), z_max=float(z[-1]), **extra)


def load_profile_table(path, c0: Optional[float] = None) -> SoundSpeedProfile:
    """Read a two-column ``z_m c_mps`` text file ('#' starts a comment)."""
    table = np.loadtxt(Path(path), comments="#", ndmin=2)
    if table.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {table.shape[1]}")
    return tabulated_profile(table[:, 0], table[:, 1], c0=c0)
