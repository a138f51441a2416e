"""Named environments, source layouts and batch forward synthesis.

A :class:`Scenario` bundles a profile, array, source set and pulse. The
biomedical desk preset keeps the dimensionless ratios of the full-scale
setup (profile fraction, Gaussian width relative to the depth span,
aperture in wavelengths) on a grid a single core can simulate in minutes.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .config import RunConfig, resolve
from .medium import (Absorption, SoundSpeedProfile, constant_profile, gaussian_profile,
                     load_profile_table, munk_profile, standard_atmosphere_profile,
                     tabulated_profile)
from .pam import LinearArray, RfCapture
from .synth.fdtd import FdtdConfig, translated_row
from .synth.greens import SourceSpec, green2d_capture
from .synth.marching import marching_rf_capture

SYNTHESIZERS = ("green", "marching", "fdtd")


@dataclass(frozen=True)
class SourceSet:
    """Source positions ``((x, z), ...)``; the index is the source id."""

    positions: tuple

    def __post_init__(self):
        pos = tuple((float(x), float(z)) for x, z in self.positions)
        if not pos:
            raise ValueError("need at least one source")
        object.__setattr__(self, "positions", pos)

    @classmethod
    def grid(cls, x_values, z_values) -> "SourceSet":
        """Tensor grid with x varying fastest."""
        return cls(tuple((x, z) for z in z_values for x in x_values))

    @classmethod
    def uniform(cls, x_range, nx: int, z_range, nz: int) -> "SourceSet":
        return cls.grid(np.linspace(*x_range, nx), np.linspace(*z_range, nz))

    @property
    def x_values(self) -> tuple:
        return tuple(sorted({x for x, _ in self.positions}))

    @property
    def z_values(self) -> tuple:
        return tuple(sorted({z for _, z in self.positions}))

    def rows(self) -> list:
        """``[(z, [source ids], [x])]`` grouped by depth."""
        out = []
        for z in self.z_values:
            ids = [i for i, (_, zz) in enumerate(self.positions) if zz == z]
            out.append((z, ids, [self.positions[i][0] for i in ids]))
        return out

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class FdtdSettings:
    ppw: float = 7.0
    cfl: float = 0.6
    pml_thickness: float = 2.0
    broadband_fraction: float = 0.9
    dx: Optional[float] = None  # defaults to half the sensor pitch
    margin_wavelengths: float = 1.0
    order: int = 6


@dataclass(frozen=True)
class Scenario:
    name: str
    profile: SoundSpeedProfile
    array: LinearArray
    sources: SourceSet
    f0: float
    z_max: float
    fs: float
    synth: str = "marching"
    bandwidth_fraction: float = 0.05
    duration: Optional[float] = None
    fdtd: FdtdSettings = field(default_factory=FdtdSettings)

    def __post_init__(self):
        if self.synth not in SYNTHESIZERS:
            raise ValueError(f"synth must be one of {SYNTHESIZERS}")

    @property
    def wavelength(self) -> float:
        return self.profile.c0 / self.f0

    def source_specs(self, f0: Optional[float] = None) -> list:
        f = self.f0 if f0 is None else f0
        return [SourceSpec(x, z, f, self.bandwidth_fraction) for x, z in self.sources.positions]

    def record_duration(self, f0: Optional[float] = None) -> float:
        """Time for the farthest arrival plus both pulse tails."""
        if self.duration is not None:
            return self.duration
        spec = SourceSpec(0.0, 1.0, self.f0 if f0 is None else f0, self.bandwidth_fraction)
        pos = np.array(self.sources.positions)
        ax = self.array.x
        far = np.max(np.hypot(np.maximum(np.abs(ax[0] - pos[:, 0]), np.abs(ax[-1] - pos[:, 0])),
                              pos[:, 1] - self.array.z))
        zz = np.linspace(self.array.z, pos[:, 1].max(), 128)
        c_min = float(np.min(self.profile.speed(zz)))
        return 2 * spec.emission_time + far / c_min * 1.05

    def with_frequency(self, f0: float) -> "Scenario":
        return replace(self, f0=f0)

    def with_aperture(self, aperture: float) -> "Scenario":
        return replace(self, array=LinearArray.centered(aperture, self.array.pitch, self.array.z))


# --------------------------------------------------------------------------
# construction from configuration

def build_profile(spec: dict, base_dir=None) -> SoundSpeedProfile:
    """Profile from a validated ``profile`` mapping."""
    kind = spec["kind"]
    extra = {}
    if spec.get("density") is not None:
        rho0 = float(spec["density"])
        extra["rho"] = lambda z, rho0=rho0: np.full(np.shape(z), rho0)
    if spec.get("absorption") is not None:
        extra["absorption"] = Absorption(**spec["absorption"])
    if kind == "constant":
        p = constant_profile(spec["c"], spec.get("c0"))
        return replace(p, **extra) if extra else p
    if kind == "gaussian_perturbation":
        return gaussian_profile(spec["c_mean"], spec["fraction"], spec["variance"],
                                spec["z_center"], **extra)
    if kind == "munk":
        return munk_profile(spec["c1"], spec["epsilon"], spec["z_axis"], spec["B"],
                            z_max=spec["z_max"], **extra)
    if kind == "standard_atmosphere":
        return standard_atmosphere_profile(spec["z_max"], **extra)
    if kind == "tabulated":
        if spec.get("table"):
            path = Path(spec["table"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            p = load_profile_table(path, spec.get("c0"))
            return replace(p, **extra) if extra else p
        return tabulated_profile(spec["z"], spec["c"], spec.get("c0"), **extra)
    raise ValueError(f"unknown profile kind {kind!r}")


def scenario_from_config(cfg: RunConfig, base_dir=None) -> Scenario:
    array = LinearArray.centered(cfg.array.aperture, cfg.array.pitch, cfg.array.z)
    f = cfg.fdtd
    fdtd = FdtdSettings(f.ppw, f.cfl, f.pml_thickness, f.broadband_fraction, f.dx,
                        f.margin_wavelengths, f.order)
    return Scenario(cfg.environment, build_profile(cfg.profile, base_dir), array,
                    SourceSet(cfg.sources.positions), cfg.f_center, cfg.z_max, cfg.fs, cfg.synth,
                    cfg.bandwidth_fraction, cfg.duration, fdtd)


def biomedical(scale: str = "desk", **overrides) -> Scenario:
    """Tissue-like medium with a 25 % Gaussian speed bump, FDTD synthesis.

    ``desk``: 100 mm aperture, 11 x 9 sources over 40 mm by 50 mm (one FDTD
    run per depth row, so rows are the expensive axis).
    ``full``: 100 mm aperture, 9 x 11 sources over 80 mm by 100 mm on a
    0.2 mm grid (hours of FDTD on one core).
    """
    return scenario_from_config(resolve({"environment": "biomedical", "scale": scale, **overrides}))


def underwater(**overrides) -> Scenario:
    """Munk profile below a 190 m surface array, 70 sources at 1 kHz."""
    return scenario_from_config(resolve({"environment": "underwater", **overrides}))


def atmospheric(**overrides) -> Scenario:
    """Standard troposphere above a 6 km ground array, 209 sources at 1 Hz."""
    return scenario_from_config(resolve({"environment": "atmospheric", **overrides}))


PRESETS: dict = {"biomedical": biomedical, "underwater": underwater, "atmospheric": atmospheric}


# --------------------------------------------------------------------------
# synthesis

def fdtd_config(scenario: Scenario, frequencies: Sequence[float]) -> FdtdConfig:
    """FDTD grid covering every sensor-to-source offset needed by :func:`translated_row`."""
    s = scenario.fdtd
    arr = scenario.array
    xs = np.array(scenario.sources.x_values)
    pulses = [SourceSpec(0.0, 1.0, f, scenario.bandwidth_fraction) for f in frequencies]
    f_hi = max(p.band()[1] for p in pulses)
    f_lo = max(min(p.band()[0] for p in pulses), 1e-3 * f_hi)
    z_deep = max(scenario.sources.z_values)
    c_path = scenario.profile.speed(np.linspace(arr.z, z_deep, 4096))
    c_min = float(np.min(c_path))
    margin = s.margin_wavelengths * float(np.max(c_path)) / min(frequencies)
    x_lo = arr.x[0] - xs.max() - margin
    x_hi = arr.x[-1] - xs.min() + margin
    z_lo = arr.z - margin
    z_hi = z_deep + margin
    prof = scenario.profile
    zz = np.clip(np.linspace(z_lo - 4 * margin, z_hi + 4 * margin, 8192), prof.z_min, prof.z_max)
    c_all = prof.speed(zz)
    # slack for peaks falling between samples
    c_max = float(np.max(c_all)) * (1 + 1e-3)
    c_min = min(c_min, float(np.min(c_all)))
    dx = s.dx if s.dx is not None else 0.5 * arr.pitch
    if c_min / (max(frequencies) * dx) < 0.9 * s.ppw:
        raise ValueError(f"FDTD cell {dx:g} m gives fewer than {0.9 * s.ppw:g} points per "
                         f"wavelength at {max(frequencies):g} Hz")
    return FdtdConfig.for_domain((x_lo, x_hi), (z_lo, z_hi), c_min, c_max, f_hi, f_min=f_lo,
                                 ppw=s.ppw, cfl=s.cfl, pml_thickness=s.pml_thickness, dx=dx,
                                 order=s.order)


def _profile_fingerprint(profile: SoundSpeedProfile, z: np.ndarray) -> list:
    rho = profile.density(z)
    return [np.asarray(profile.speed(z)).tolist(), None if rho is None else np.asarray(rho).tolist()]


def _cache_key(scenario: Scenario, frequencies, z_s, xs, cfg: FdtdConfig) -> str:
    z = np.linspace(max(scenario.profile.z_min, cfg.z0),
                    min(scenario.profile.z_max, cfg.z0 + cfg.nz * cfg.dz), 33)
    desc = dict(kind=scenario.profile.kind, c0=scenario.profile.c0,
                params={k: np.asarray(v).tolist() for k, v in scenario.profile.params.items()},
                sample=_profile_fingerprint(scenario.profile, z),
                absorption=None if scenario.profile.absorption is None else asdict(scenario.profile.absorption),
                array=asdict(scenario.array), xs=list(xs), z_s=z_s, f=list(frequencies),
                bw=scenario.bandwidth_fraction, fs=scenario.fs, fdtd=asdict(scenario.fdtd),
                grid=asdict(cfg), durations=[scenario.record_duration(f) for f in frequencies])
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:24]


def synthesize(scenario: Scenario, frequencies: Optional[Sequence[float]] = None,
               cache_dir=None, progress: Optional[Callable[[str], None]] = None) -> dict:
    """Synthesize RF for every source at each of ``frequencies`` (default ``[f0]``).

    Returns ``{f: [RfCapture per source id]}``. FDTD rows are cached in
    ``cache_dir`` when given, keyed by a hash of everything that affects them.
    """
    freqs = [scenario.f0] if frequencies is None else [float(f) for f in frequencies]
    out = {f: [None] * len(scenario.sources) for f in freqs}
    say = progress or (lambda msg: None)

    if scenario.synth == "fdtd":
        cfg = fdtd_config(scenario, freqs)
        say(f"fdtd grid {cfg.shape[0]}x{cfg.shape[1]}, dt={cfg.dt:.3g} s")
        pulses = [SourceSpec(0.0, 1.0, f, scenario.bandwidth_fraction) for f in freqs]
        durations = [scenario.record_duration(f) for f in freqs]
        rows = scenario.sources.rows()
        for n, (z_s, ids, xs) in enumerate(rows):
            path = None if cache_dir is None else \
                Path(cache_dir) / f"fdtd_{_cache_key(scenario, freqs, z_s, xs, cfg)}.npz"
            caps = _load_row(path, scenario, xs, z_s, len(freqs))
            if caps is None:
                caps = translated_row(scenario.profile, cfg, scenario.array, xs, z_s, pulses,
                                      scenario.fs, durations, scenario.fdtd.broadband_fraction)
                _store_row(path, caps)
            for k, f in enumerate(freqs):
                for sid, cap in zip(ids, caps[k]):
                    out[f][sid] = cap
            say(f"depth {z_s:g} m done ({n + 1}/{len(rows)})")
    else:
        for f in freqs:
            duration = scenario.record_duration(f)
            for sid, (x, z) in enumerate(scenario.sources.positions):
                src = SourceSpec(x, z, f, scenario.bandwidth_fraction)
                if scenario.synth == "green":
                    cap = green2d_capture(src, scenario.array, scenario.profile.c0, scenario.fs, duration)
                else:
                    cap = marching_rf_capture(src, scenario.array, scenario.profile, scenario.fs, duration)
                out[f][sid] = cap
    for f in freqs:
        for sid, cap in enumerate(out[f]):
            cap.meta.update(source_id=sid, f0=f, scenario=scenario.name)
    return out


def _load_row(path, scenario, xs, z_s, n_freq):
    if path is None or not path.exists():
        return None
    arr = scenario.array
    out = []
    with np.load(path) as data:
        for k in range(n_freq):
            block = data[f"f{k}"]  # each lookup re-reads the member, so do it once
            out.append([RfCapture(block[i].copy(), arr.pitch, scenario.fs, arr.origin,
                                  meta={"synth": "fdtd", "x_true": x, "z_true": z_s})
                        for i, x in enumerate(xs)])
    return out


def _store_row(path, caps):
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {f"f{k}": np.stack([c.samples for c in row]) for k, row in enumerate(caps)}
    tmp = path.with_name(path.stem + ".partial.npz")
    np.savez(tmp, **arrays)
    tmp.replace(path)
