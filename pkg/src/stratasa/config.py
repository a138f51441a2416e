"""Run configuration: presets, merging and field-level validation.

A configuration is a nested mapping of plain values. :func:`resolve`
overlays user settings on an environment preset and validates every field
before anything is computed; :class:`RunConfig` is the validated result and
:meth:`RunConfig.to_dict` gives back a mapping that resolves to the same run.
"""
from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

ENVIRONMENTS = ("biomedical", "underwater", "atmospheric", "custom")
CORRECTION_MODES = ("none", "stratified", "both")
SWEEP_PARAMETERS = ("aperture", "frequency", "noise")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_COMMON = {
    "n_bins": 3,
    "bandwidth_fraction": 0.05,
    "duration": None,
    "dz": None,
    "window": {"cosine_fraction": 0.25, "pad_factor": 4},
    "correction": "both",
    "evanescent": "zero",
    "kz_min": 0.05,
    "noise_level": 0.0,
    "seed": 0,
    "output": "out",
    "sweep": None,
    "fdtd": {"ppw": 7.0, "cfl": 0.6, "pml_thickness": 2.0, "broadband_fraction": 0.9,
             "dx": None, "margin_wavelengths": 1.0, "order": 6},
}

PRESETS = {
    "biomedical": {
        "desk": {
            "profile": {"kind": "gaussian_perturbation", "c_mean": 1540.0, "fraction": 0.25,
                        "variance": 30e-6, "z_center": 0.035, "density": 1043.0,
                        "absorption": {"alpha0_db_cm_mhz": 0.54, "power": 1.0}},
            "array": {"aperture": 0.100, "pitch": 0.25e-3, "z": 0.0},
            "sources": {"x_range": [-0.020, 0.020], "nx": 11, "z_range": [0.010, 0.060], "nz": 9},
            "f_center": 1e6, "fs": 10e6, "z_max": 0.070, "synth": "fdtd",
        },
        "full": {
            "profile": {"kind": "gaussian_perturbation", "c_mean": 1540.0, "fraction": 0.25,
                        "variance": 30e-6, "z_center": 0.060, "density": 1043.0,
                        "absorption": {"alpha0_db_cm_mhz": 0.54, "power": 1.0}},
            "array": {"aperture": 0.100, "pitch": 0.2e-3, "z": 0.0},
            "sources": {"x_range": [-0.040, 0.040], "nx": 9, "z_range": [0.010, 0.110], "nz": 11},
            "f_center": 1e6, "fs": 10e6, "z_max": 0.120, "synth": "fdtd",
            "fdtd": {"dx": 0.2e-3},
        },
    },
    "underwater": {
        "profile": {"kind": "munk", "c1": 1500.0, "epsilon": 0.00737, "z_axis": 1300.0,
                    "B": 1300.0, "z_max": 5000.0},
        "array": {"aperture": 190.0, "pitch": 0.5, "z": 0.0},
        "sources": {"x_range": [-90.0, 90.0], "nx": 10, "z_range": [50.0, 350.0], "nz": 7},
        "f_center": 1e3, "fs": 10e3, "z_max": 400.0, "synth": "marching",
    },
    "atmospheric": {
        "profile": {"kind": "standard_atmosphere", "z_max": 11000.0},
        "array": {"aperture": 6000.0, "pitch": 50.0, "z": 0.0},
        "sources": {"x_range": [-2500.0, 2500.0], "nx": 11, "z_range": [500.0, 9000.0], "nz": 19},
        "f_center": 1.0, "fs": 10.0, "z_max": 10000.0, "synth": "marching",
    },
}

_PROFILE_FIELDS = {
    "constant": {"c": None, "c0": None},
    "gaussian_perturbation": {"c_mean": 1540.0, "fraction": 0.25, "variance": 30e-6,
                              "z_center": None},
    "munk": {"c1": 1500.0, "epsilon": 0.00737, "z_axis": 1300.0, "B": 1300.0, "z_max": 5000.0},
    "standard_atmosphere": {"z_max": 11000.0},
    "tabulated": {"table": None, "z": None, "c": None, "c0": None},
}
_PROFILE_SHARED = ("density", "absorption")


def _source_form(s: dict) -> str:
    if "positions" in s:
        return "positions"
    return "lists" if "x" in s or "z" in s else "grid"


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (over or {}).items():
        old = out.get(k)
        if not (isinstance(v, dict) and isinstance(old, dict)):
            out[k] = copy.deepcopy(v)
        elif k == "profile" and v.get("kind", old.get("kind")) != old.get("kind"):
            # a different profile kind replaces the preset profile wholesale
            out[k] = copy.deepcopy(v)
        elif k == "sources" and _source_form(v) != _source_form(old):
            out[k] = copy.deepcopy(v)
        else:
            out[k] = deep_merge(old, v)
    return out


def preset(environment: str, scale: str = "desk") -> dict:
    if environment not in ENVIRONMENTS:
        raise ConfigError("environment", f"must be one of {ENVIRONMENTS}, got {environment!r}")
    base = copy.deepcopy(_COMMON)
    base["environment"] = environment
    if environment == "custom":
        return base
    p = PRESETS[environment]
    if environment == "biomedical":
        if scale not in p:
            raise ConfigError("scale", f"must be one of {tuple(p)}, got {scale!r}")
        base["scale"] = scale
        p = p[scale]
    return deep_merge(base, p)


# ---------------------------------------------------------------------------
# validated form

@dataclass(frozen=True)
class WindowConfig:
    cosine_fraction: float = 0.25
    pad_factor: int = 4


@dataclass(frozen=True)
class ArrayConfig:
    aperture: float
    pitch: float
    z: float = 0.0


@dataclass(frozen=True)
class SourcesConfig:
    positions: tuple  # ((x, z), ...), source id order

    @property
    def x_values(self) -> tuple:
        return tuple(sorted({x for x, _ in self.positions}))

    @property
    def z_values(self) -> tuple:
        return tuple(sorted({z for _, z in self.positions}))


@dataclass(frozen=True)
class SweepConfig:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class FdtdConfigSpec:
    ppw: float = 7.0
    cfl: float = 0.6
    pml_thickness: float = 2.0
    broadband_fraction: float = 0.9
    dx: Optional[float] = None
    margin_wavelengths: float = 1.0
    order: int = 6


@dataclass(frozen=True)
class RunConfig:
    environment: str
    profile: dict
    array: ArrayConfig
    sources: SourcesConfig
    f_center: float
    fs: float
    z_max: float
    synth: str
    n_bins: int = 3
    bandwidth_fraction: float = 0.05
    duration: Optional[float] = None
    dz: Optional[float] = None
    window: WindowConfig = field(default_factory=WindowConfig)
    correction: str = "both"
    evanescent: str = "zero"
    kz_min: float = 0.05
    noise_level: float = 0.0
    seed: int = 0
    output: str = "out"
    sweep: Optional[SweepConfig] = None
    fdtd: FdtdConfigSpec = field(default_factory=FdtdConfigSpec)
    scale: Optional[str] = None
    source_spec: Any = None  # the sources mapping as given, kept for round trips

    @property
    def modes(self) -> tuple:
        return ("none", "stratified") if self.correction == "both" else (self.correction,)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("sources", "source_spec")}
        d["sources"] = copy.deepcopy(self.source_spec)
        d["sweep"] = None if self.sweep is None else {"parameter": self.sweep.parameter,
                                                       "values": list(self.sweep.values)}
        if d.get("scale") is None:
            d.pop("scale", None)
        return d


def _num(d, key, path, *, positive=False, nonneg=False, integer=False, optional=False,
         lo=None, hi=None, default=None):
    v = d.get(key, default)
    where = f"{path}.{key}" if path else key
    if v is None:
        if optional:
            return None
        raise ConfigError(where, "is required")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(where, f"must be a number, got {v!r}")
    if integer:
        if float(v) != int(v):
            raise ConfigError(where, f"must be an integer, got {v!r}")
        v = int(v)
    else:
        v = float(v)
    if positive and not v > 0:
        raise ConfigError(where, f"must be positive, got {v!r}")
    if nonneg and v < 0:
        raise ConfigError(where, f"must be non-negative, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(where, f"must be >= {lo}, got {v!r}")
    if hi is not None and v > hi:
        raise ConfigError(where, f"must be <= {hi}, got {v!r}")
    return v


def _choice(d, key, choices, path="", default=None):
    v = d.get(key, default)
    where = f"{path}.{key}" if path else key
    if v not in choices:
        raise ConfigError(where, f"must be one of {tuple(choices)}, got {v!r}")
    return v


def _mapping(d, key, path=""):
    v = d.get(key)
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ConfigError(f"{path}.{key}" if path else key, "must be a mapping")
    return v


def _no_unknown(d, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown field")


_TOP = ("environment", "scale", "profile", "array", "sources", "f_center", "fs", "z_max", "synth",
        "n_bins", "bandwidth_fraction", "duration", "dz", "window", "correction", "evanescent",
        "kz_min", "noise_level", "seed", "output", "sweep", "fdtd")


def _profile(p: dict) -> dict:
    kind = p.get("kind")
    if kind not in _PROFILE_FIELDS:
        raise ConfigError("profile.kind", f"must be one of {tuple(_PROFILE_FIELDS)}, got {kind!r}")
    allowed = ("kind",) + tuple(_PROFILE_FIELDS[kind]) + _PROFILE_SHARED
    _no_unknown(p, allowed, "profile")
    out = {"kind": kind}
    for name, default in _PROFILE_FIELDS[kind].items():
        v = p.get(name, default)
        if name in ("table", "z", "c"):
            out[name] = v
            continue
        if v is None and name in ("c0",):
            out[name] = None
            continue
        positive = name not in ("fraction", "epsilon", "z_center", "z_axis")
        out[name] = _num(p, name, "profile", positive=positive, default=default)
    if kind == "gaussian_perturbation" and not out["fraction"] > -1:
        raise ConfigError("profile.fraction", "must exceed -1")
    if kind == "standard_atmosphere" and out["z_max"] > 11000.0:
        raise ConfigError("profile.z_max", "standard atmosphere is modelled up to 11000 m only")
    if kind == "tabulated":
        if out["table"] is None and (out["z"] is None or out["c"] is None):
            raise ConfigError("profile", "tabulated profile needs 'table' (file path) or 'z' and 'c' lists")
        if out["table"] is not None and not isinstance(out["table"], str):
            raise ConfigError("profile.table", "must be a file path")
        for name in ("z", "c"):
            v = out[name]
            if v is not None and (not isinstance(v, list) or len(v) < 2
                                  or not all(isinstance(a, (int, float)) for a in v)):
                raise ConfigError(f"profile.{name}", "must be a list of at least two numbers")
    out["density"] = _num(p, "density", "profile", positive=True, optional=True)
    ab = p.get("absorption")
    if ab is not None:
        if not isinstance(ab, dict):
            raise ConfigError("profile.absorption", "must be a mapping")
        _no_unknown(ab, ("alpha0_db_cm_mhz", "power"), "profile.absorption")
        ab = {"alpha0_db_cm_mhz": _num(ab, "alpha0_db_cm_mhz", "profile.absorption", nonneg=True),
              "power": _num(ab, "power", "profile.absorption", default=1.0)}
    out["absorption"] = ab
    return out


def _sources(s) -> tuple:
    if isinstance(s, list):
        path = "sources"
        pos = []
        for i, item in enumerate(s):
            if (not isinstance(item, (list, tuple)) or len(item) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in item)):
                raise ConfigError(f"{path}[{i}]", "must be an [x, z] pair of numbers")
            pos.append((float(item[0]), float(item[1])))
        if not pos:
            raise ConfigError(path, "needs at least one source")
        return tuple(pos)
    if not isinstance(s, dict):
        raise ConfigError("sources", "must be a grid mapping or a list of [x, z] pairs")
    if "positions" in s:
        _no_unknown(s, ("positions",), "sources")
        return _sources(s["positions"])
    if "x" in s or "z" in s:
        _no_unknown(s, ("x", "z"), "sources")
        xs, zs = s.get("x"), s.get("z")
        for name, v in (("x", xs), ("z", zs)):
            if not isinstance(v, list) or not v or not all(isinstance(a, (int, float)) for a in v):
                raise ConfigError(f"sources.{name}", "must be a non-empty list of numbers")
        return tuple((float(x), float(z)) for z in zs for x in xs)
    _no_unknown(s, ("x_range", "nx", "z_range", "nz"), "sources")
    nx = _num(s, "nx", "sources", integer=True, lo=1)
    nz = _num(s, "nz", "sources", integer=True, lo=1)
    rng = {}
    for name in ("x_range", "z_range"):
        v = s.get(name)
        if (not isinstance(v, list) or len(v) != 2
                or not all(isinstance(a, (int, float)) for a in v)):
            raise ConfigError(f"sources.{name}", "must be a [start, stop] pair")
        rng[name] = (float(v[0]), float(v[1]))
    xs = np.linspace(*rng["x_range"], nx)
    zs = np.linspace(*rng["z_range"], nz)
    return tuple((float(x), float(z)) for z in zs for x in xs)


def resolve(user: Optional[dict]) -> RunConfig:
    """Merge ``user`` over its environment preset and validate the result."""
    user = {} if user is None else user
    if not isinstance(user, dict):
        raise ConfigError("config", "top level must be a mapping")
    _no_unknown(user, _TOP, "")
    env = user.get("environment", "custom")
    merged = deep_merge(preset(env, user.get("scale", "desk")), user)
    return validate(merged)


def validate(d: dict) -> RunConfig:
    _no_unknown(d, _TOP, "")
    env = _choice(d, "environment", ENVIRONMENTS)
    if "profile" not in d or not isinstance(d["profile"], dict):
        raise ConfigError("profile", "is required (a mapping with 'kind')")
    profile = _profile(d["profile"])

    a = _mapping(d, "array")
    _no_unknown(a, ("aperture", "pitch", "z"), "array")
    array = ArrayConfig(_num(a, "aperture", "array", positive=True),
                        _num(a, "pitch", "array", positive=True),
                        _num(a, "z", "array", default=0.0))
    if array.pitch > array.aperture:
        raise ConfigError("array.pitch", "must not exceed the aperture")
    if "sources" not in d:
        raise ConfigError("sources", "is required")
    positions = _sources(d["sources"])
    for i, (_, z) in enumerate(positions):
        if not z > array.z:
            raise ConfigError(f"sources[{i}]", f"source depth {z:g} m must lie beyond the array at {array.z:g} m")

    f_center = _num(d, "f_center", "", positive=True)
    fs = _num(d, "fs", "", positive=True)
    if not f_center < fs / 2:
        raise ConfigError("f_center", f"must be below the Nyquist frequency fs/2 = {fs / 2:g} Hz")
    z_max = _num(d, "z_max", "", positive=True)
    synth = _choice(d, "synth", ("green", "marching", "fdtd"))
    n_bins = _num(d, "n_bins", "", integer=True, lo=1)
    if n_bins % 2 == 0:
        raise ConfigError("n_bins", "must be odd so the bins are centred on f_center")
    bw = _num(d, "bandwidth_fraction", "", positive=True)
    if not bw < 1:
        raise ConfigError("bandwidth_fraction", "must be < 1")
    duration = _num(d, "duration", "", positive=True, optional=True)
    dz = _num(d, "dz", "", positive=True, optional=True)

    w = _mapping(d, "window")
    _no_unknown(w, ("cosine_fraction", "pad_factor"), "window")
    window = WindowConfig(_num(w, "cosine_fraction", "window", default=0.25, lo=0.0, hi=1.0),
                          _num(w, "pad_factor", "window", default=4, integer=True, lo=1))

    correction = _choice(d, "correction", CORRECTION_MODES)
    evanescent = _choice(d, "evanescent", ("zero", "decay"))
    kz_min = _num(d, "kz_min", "", nonneg=True, hi=1.0)
    noise = _num(d, "noise_level", "", nonneg=True)
    seed = _num(d, "seed", "", integer=True, nonneg=True)
    output = d.get("output", "out")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "must be a directory path")

    sweep = None
    if d.get("sweep") is not None:
        sw = d["sweep"]
        if not isinstance(sw, dict):
            raise ConfigError("sweep", "must be a mapping with 'parameter' and 'values'")
        _no_unknown(sw, ("parameter", "values"), "sweep")
        param = _choice(sw, "parameter", SWEEP_PARAMETERS, "sweep")
        vals = sw.get("values")
        if not isinstance(vals, list) or not vals or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            raise ConfigError("sweep.values", "must be a non-empty list of numbers")
        if param in ("aperture", "frequency") and min(vals) <= 0:
            raise ConfigError("sweep.values", f"{param} values must be positive")
        if param == "noise" and min(vals) < 0:
            raise ConfigError("sweep.values", "noise levels must be non-negative")
        sweep = SweepConfig(param, tuple(float(v) for v in vals))

    f = _mapping(d, "fdtd")
    _no_unknown(f, tuple(FdtdConfigSpec.__dataclass_fields__), "fdtd")
    fd = FdtdConfigSpec(
        ppw=_num(f, "ppw", "fdtd", default=7.0, positive=True),
        cfl=_num(f, "cfl", "fdtd", default=0.6, positive=True, hi=1.0),
        pml_thickness=_num(f, "pml_thickness", "fdtd", default=2.0, lo=2.0),
        broadband_fraction=_num(f, "broadband_fraction", "fdtd", default=0.9, positive=True, hi=0.95),
        dx=_num(f, "dx", "fdtd", positive=True, optional=True),
        margin_wavelengths=_num(f, "margin_wavelengths", "fdtd", default=1.0, nonneg=True),
        order=_choice(f, "order", (4, 6), "fdtd", default=6),
    )
    return RunConfig(env, profile, array, SourcesConfig(positions), f_center, fs, z_max, synth,
                     n_bins, bw, duration, dz, window, correction, evanescent, kz_min, noise, seed,
                     output, sweep, fd, d.get("scale"), copy.deepcopy(d["sources"]))
