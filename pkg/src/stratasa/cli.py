"""Command-line batch driver: ``simulate``, ``beamform``, ``sweep`` and ``report``.

Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
4 validity criteria exceeded under ``--strict``.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .config import ConfigError, RunConfig, resolve
from .pam import (NoPeakError, RfCapture, beamform, error_statistics, localization_error,
                  localize_peak)
from .propagator import check_validity
from .scenarios import Scenario, scenario_from_config, synthesize
from .spectral import SpectralGrid, WindowSpec
from .synth.noise import add_noise

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VALIDITY = 0, 2, 3, 4

LOCALIZATION_COLUMNS = ("source_id", "x_true", "z_true", "x_r", "z_r", "eps_x", "eps_z", "eps",
                        "eps_wavelengths", "corrected", "wall_time_ms")
SWEEP_COLUMNS = ("parameter", "value", "corrected", "n", "mean_eps", "std_eps",
                 "mean_eps_wavelengths", "std_eps_wavelengths", "mean_abs_eps_x",
                 "mean_abs_eps_z", "axial_ratio")
MODE_NAMES = {"none": "uncorrected", "stratified": "corrected"}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _err(msg: str):
    print(f"error: {msg}", file=sys.stderr)


def _warn(msg: str):
    print(f"warning: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# configuration plumbing

def load_run_config(args) -> tuple:
    raw = {}
    base_dir = None
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            raw = io.load_config_file(path)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read config {path}: {exc.strerror or exc}")
        except ValueError as exc:
            raise CliError(EXIT_CONFIG, f"cannot parse config {path}: {exc}")
        base_dir = path.parent
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    if getattr(args, "out", None):
        raw["output"] = args.out
    corrected = getattr(args, "corrected", None)
    if corrected is not None:
        raw["correction"] = {"on": "stratified", "off": "none", "both": "both"}[corrected]
    try:
        cfg = resolve(raw)
        scenario = scenario_from_config(cfg, base_dir)
    except ConfigError as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: {exc}")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot load profile table: {exc}")
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, f"invalid config: profile: {exc}")
    return cfg, scenario


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create output directory {out}: {exc.strerror or exc}")
    return out


def _write_resolved(cfg: RunConfig, out: Path, command: str):
    io.dump_json(out / f"config.resolved.{command}.json", cfg.to_dict())


def validity_check(cfg: RunConfig, scenario: Scenario, frequencies: Sequence[float],
                   strict: bool) -> dict:
    """Evaluate the first-order validity criteria; escalate under ``strict``."""
    report = {}
    n = scenario.array.n_sensors * cfg.window.pad_factor
    for f in frequencies:
        omega = 2 * np.pi * f
        grid = SpectralGrid.build(n, scenario.array.pitch, omega, scenario.profile.c0)
        diag = check_validity(scenario.profile, omega, scenario.z_max, grid)
        report[f] = diag
        bad = [k for k, v in diag.flags.items() if v]
        if bad:
            msg = (f"first-order validity exceeded at {f:g} Hz: " + ", ".join(bad)
                   + f" (short-wavelength {diag.short_wavelength_lhs:.3g}, slow-change "
                     f"{diag.slow_change_ratio:.3g}, truncation {diag.truncation_lhs:.3g})")
            if strict:
                raise CliError(EXIT_VALIDITY, msg)
            _warn(msg)
    return report


# ---------------------------------------------------------------------------
# core loops

def _localize(rf: RfCapture, cfg: RunConfig, scenario: Scenario, f_center: float, mode: str,
              lambda0: float):
    t0 = time.perf_counter()
    window = WindowSpec("tukey", cfg.window.cosine_fraction, cfg.window.pad_factor)
    pam = beamform(rf, scenario.profile, f_center, scenario.z_max, n_bins=cfg.n_bins, dz=cfg.dz,
                   window=window, correction=mode, evanescent=cfg.evanescent, kz_min=cfg.kz_min)
    res = localize_peak(pam)
    ms = 1e3 * (time.perf_counter() - t0)
    xt, zt = rf.meta.get("x_true"), rf.meta.get("z_true")
    if xt is not None and zt is not None:
        res = localization_error(res, float(xt), float(zt), lambda0)
    return pam, res, ms


def _row(sid, res, mode, ms):
    nan = float("nan")
    val = lambda v: nan if v is None else v
    return (sid, val(res.x_true), val(res.z_true), res.x_r, res.z_r, val(res.eps_x), val(res.eps_z),
            val(res.eps), val(res.eps_wavelengths), mode == "stratified", ms)


def _summary(results, times) -> str:
    known = [r for r in results if r.eps is not None]
    t = f"mean map time {np.mean(times):.1f} ms" if times else ""
    if not known:
        return t
    s = error_statistics(known)
    return (f"n={s.n} eps={s.mean:.4g}+-{s.std:.2g} m ({s.mean_wavelengths:.3f}+-"
            f"{s.std_wavelengths:.3f} wavelengths), |eps_z|/|eps_x|={s.axial_ratio:.2f}, {t}")


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    cfg, scenario = load_run_config(args)
    out = _out_dir(cfg)
    rf_dir = out / "rf"
    try:
        rf_dir.mkdir(exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot create {rf_dir}: {exc.strerror or exc}")
    _write_resolved(cfg, out, "simulate")
    captures = synthesize(scenario, cache_dir=out / "cache", progress=lambda m: print(m, file=sys.stderr))
    caps = captures[scenario.f0]
    for sid, cap in enumerate(caps):
        cap.meta.update(seed=cfg.seed, profile=cfg.profile, environment=cfg.environment)
        try:
            io.write_rf(rf_dir / f"source_{sid:04d}.asrf", cap)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write RF for source {sid}: {exc.strerror or exc}")
    print(f"wrote {len(caps)} RF files to {rf_dir}")
    return EXIT_OK


def cmd_beamform(args) -> int:
    cfg, scenario = load_run_config(args)
    if args.rf:
        paths = [Path(p) for p in args.rf]
    else:
        paths = sorted((Path(cfg.output) / "rf").glob("*.asrf"))
    if not paths:
        raise CliError(EXIT_CONFIG, "no RF files given (pass paths or run 'simulate' first)")
    out = _out_dir(cfg)
    _write_resolved(cfg, out, "beamform")
    if "stratified" in cfg.modes:
        validity_check(cfg, scenario, [cfg.f_center], args.strict)

    failed = 0
    loaded = []
    for i, p in enumerate(paths):
        try:
            rf = io.read_rf(p)
        except io.RfFormatError as exc:
            _err(str(exc))
            failed += 1
            continue
        sid = rf.meta.get("source_id", i)
        loaded.append((int(sid), rf))
    loaded.sort(key=lambda item: item[0])

    lambda0 = scenario.profile.c0 / cfg.f_center
    pam_dir = out / "pams"
    if args.emit_pams:
        pam_dir.mkdir(exist_ok=True)
    for mode in cfg.modes:
        rows, results, times = [], [], []
        for sid, rf in loaded:
            try:
                pam, res, ms = _localize(rf, cfg, scenario, cfg.f_center, mode, lambda0)
            except (ValueError, NoPeakError) as exc:
                _err(f"source {sid}: {exc}")
                failed += 1
                continue
            rows.append(_row(sid, res, mode, ms))
            results.append(res)
            times.append(ms)
            if args.emit_pams:
                stem = pam_dir / f"source_{sid:04d}_{MODE_NAMES[mode]}"
                io.write_pgm(stem.with_suffix(".pgm"), pam.intensity.T)
                np.save(stem.with_suffix(".npy"), pam.intensity)
        path = io.write_csv(out / f"localization_{MODE_NAMES[mode]}.csv", LOCALIZATION_COLUMNS, rows)
        print(f"{MODE_NAMES[mode]}: {_summary(results, times)} -> {path}")
    return EXIT_IO if failed else EXIT_OK


def _stats_row(parameter, value, mode, results):
    s = error_statistics(results)
    return (parameter, value, mode == "stratified", s.n, s.mean, s.std, s.mean_wavelengths,
            s.std_wavelengths, s.mean_abs_x, s.mean_abs_z, s.axial_ratio)


def run_sweep(cfg: RunConfig, scenario: Scenario, parameter: str, values: Sequence[float],
              cache_dir=None, progress=None) -> list:
    """Rows of :data:`SWEEP_COLUMNS`, ordered by value then mode."""
    rows = []
    if parameter == "frequency":
        caps = synthesize(scenario, values, cache_dir=cache_dir, progress=progress)
        for f in values:
            lam = scenario.profile.c0 / f
            for mode in cfg.modes:
                res = [_localize(rf, cfg, scenario, f, mode, lam)[1] for rf in caps[float(f)]]
                rows.append(_stats_row(parameter, f, mode, res))
        return rows
    if parameter == "aperture":
        wide = scenario.with_aperture(max(max(values), scenario.array.aperture))
        caps = synthesize(wide, cache_dir=cache_dir, progress=progress)[scenario.f0]
        lam = scenario.wavelength
        for a in values:
            for mode in cfg.modes:
                res = [_localize(rf.crop(a), cfg, scenario, scenario.f0, mode, lam)[1] for rf in caps]
                rows.append(_stats_row(parameter, a, mode, res))
        return rows
    if parameter == "noise":
        caps = synthesize(scenario, cache_dir=cache_dir, progress=progress)[scenario.f0]
        lam = scenario.wavelength
        for level in values:
            noisy = [add_noise(rf, level, seed=[cfg.seed, sid]) for sid, rf in enumerate(caps)]
            for mode in cfg.modes:
                res = [_localize(rf, cfg, scenario, scenario.f0, mode, lam)[1] for rf in noisy]
                rows.append(_stats_row(parameter, level, mode, res))
        return rows
    raise CliError(EXIT_CONFIG, f"unknown sweep parameter {parameter!r}")


def cmd_sweep(args) -> int:
    cfg, scenario = load_run_config(args)
    parameter = args.parameter or (cfg.sweep.parameter if cfg.sweep else None)
    if parameter is None:
        raise CliError(EXIT_CONFIG, "no sweep parameter: set sweep.parameter in the config or pass --parameter")
    if parameter not in ("aperture", "frequency", "noise"):
        raise CliError(EXIT_CONFIG, f"unknown sweep parameter {parameter!r}")
    if cfg.sweep is None or cfg.sweep.parameter != parameter:
        raise CliError(EXIT_CONFIG, f"sweep.values for {parameter!r} missing from the config")
    out = _out_dir(cfg)
    _write_resolved(cfg, out, "sweep")
    if "stratified" in cfg.modes:
        freqs = cfg.sweep.values if parameter == "frequency" else [cfg.f_center]
        validity_check(cfg, scenario, freqs, args.strict)
    rows = run_sweep(cfg, scenario, parameter, cfg.sweep.values, cache_dir=out / "cache",
                     progress=lambda m: print(m, file=sys.stderr))
    path = io.write_csv(out / f"sweep_{parameter}.csv", SWEEP_COLUMNS, rows)
    for r in rows:
        print(f"{parameter}={r[1]:g} {('corrected' if r[2] else 'uncorrected'):>11}: "
              f"eps={r[4]:.4g}+-{r[5]:.2g} m ({r[6]:.3f} wavelengths)")
    print(f"-> {path}")
    return EXIT_OK


def report_text(tables: dict) -> str:
    """Summary lines for localization CSVs ``{name: rows}``."""
    lines = [f"{'file':<32} {'mode':>11} {'n':>4} {'mean eps [m]':>14} {'std [m]':>11} "
             f"{'mean [wl]':>9} {'|ez|/|ex|':>9} {'ms/map':>8}"]
    means = {}
    for name, rows in tables.items():
        for flag in (0.0, 1.0):
            sel = [r for r in rows if float(r["corrected"]) == flag]
            if not sel:
                continue
            eps = np.array([r["eps"] for r in sel], dtype=float)
            wl = np.array([r["eps_wavelengths"] for r in sel], dtype=float)
            ex = np.abs([r["eps_x"] for r in sel])
            ez = np.abs([r["eps_z"] for r in sel])
            ms = np.array([r["wall_time_ms"] for r in sel], dtype=float)
            ratio = np.mean(ez) / np.mean(ex) if np.mean(ex) > 0 else float("inf")
            mode = "corrected" if flag else "uncorrected"
            means[mode] = means.get(mode, []) + list(eps)
            lines.append(f"{name:<32} {mode:>11} {len(sel):>4} {np.mean(eps):>14.6g} "
                         f"{np.std(eps):>11.3g} {np.mean(wl):>9.3f} {ratio:>9.2f} {np.mean(ms):>8.1f}")
    if "corrected" in means and "uncorrected" in means:
        u, c = np.mean(means["uncorrected"]), np.mean(means["corrected"])
        lines.append(f"improvement with correction: {100.0 * (1.0 - c / u):.1f}% "
                     f"(mean error {u:.4g} m -> {c:.4g} m)")
    return "\n".join(lines) + "\n"


def error_map(rows) -> Optional[np.ndarray]:
    """``eps`` on the source grid ``[iz, ix]``, or None when sources are not a full grid."""
    xs = sorted({r["x_true"] for r in rows})
    zs = sorted({r["z_true"] for r in rows})
    if len(xs) * len(zs) != len(rows):
        return None
    img = np.zeros((len(zs), len(xs)))
    for r in rows:
        img[zs.index(r["z_true"]), xs.index(r["x_true"])] = r["eps"]
    return img


def cmd_report(args) -> int:
    if not args.csv:
        raise CliError(EXIT_CONFIG, "no CSV files given")
    tables = {}
    for p in args.csv:
        try:
            tables[Path(p).name] = io.read_csv(p)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read {p}: {exc.strerror or exc}")
    for name, rows in tables.items():
        missing = [c for c in LOCALIZATION_COLUMNS if rows and c not in rows[0]]
        if missing:
            raise CliError(EXIT_IO, f"{name}: not a localization table (missing {missing[0]})")
    text = report_text(tables)
    print(text, end="")
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(text)
        for name, rows in tables.items():
            for flag in (0.0, 1.0):
                sel = [r for r in rows if float(r["corrected"]) == flag]
                img = error_map(sel) if sel else None
                if img is not None:
                    tag = "corrected" if flag else "uncorrected"
                    io.write_pgm(out / f"{Path(name).stem}_{tag}_error.pgm", img)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stratasa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corrected=True):
        p.add_argument("--config", help="YAML or JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config 'output')")
        p.add_argument("--seed", type=int, help="seed for noise draws (u64)")
        if corrected:
            p.add_argument("--corrected", choices=("on", "off", "both"),
                           help="reconstruct with the stratified correction, without it, or both")
            p.add_argument("--strict", action="store_true",
                           help="exit with code 4 if a first-order validity criterion is exceeded")

    p = sub.add_parser("simulate", help="synthesize one RF file per source")
    common(p, corrected=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("beamform", help="form PAMs and localize sources")
    common(p)
    p.add_argument("rf", nargs="*", help="RF files (default: <out>/rf/*.asrf)")
    p.add_argument("--emit-pams", action="store_true", help="write each PAM as .pgm and .npy")
    p.set_defaults(func=cmd_beamform)

    p = sub.add_parser("sweep", help="aggregate errors over aperture, frequency or noise")
    common(p)
    p.add_argument("--parameter", help="aperture, frequency or noise (default: config sweep.parameter)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize localization CSVs")
    p.add_argument("csv", nargs="*")
    p.add_argument("--out", help="directory for report.txt and error-map graymaps")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _err(str(exc))
        return exc.code
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
