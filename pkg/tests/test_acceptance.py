"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that pytest prints in an
"acceptance criteria" section at the end of the run. The biomedical desk
synthesis (criteria 5, 6, 7, 10) is cached between runs; its original
wall time is stored next to the cache so the runtime bound stays honest.
"""
import json
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratasa.medium import constant_profile, gaussian_profile, phase_integral
from stratasa.pam import LinearArray, beamform
from stratasa.propagator import AngularSpectrum, check_validity, propagate_homogeneous, propagate_stratified
from stratasa.scenarios import biomedical, synthesize
from stratasa.spectral import SpectralGrid, forward_spectrum, inverse_spectrum
from stratasa.studies import localize_all, marching_convergence
from stratasa.synth.greens import SourceSpec, green2d_capture

BIO = gaussian_profile(1540.0, 0.25, 30e-6, 0.035)
DESK_FREQS = (0.5e6, 1.0e6, 1.5e6)


@pytest.fixture(scope="session")
def desk(fdtd_cache):
    """Biomedical desk-scale captures at the three sweep frequencies."""
    sc = biomedical()
    timing = Path(fdtd_cache) / "desk_timing.json"
    before = set(Path(fdtd_cache).glob("fdtd_*.npz"))
    t0 = time.perf_counter()
    caps = synthesize(sc, DESK_FREQS, cache_dir=fdtd_cache)
    seconds = time.perf_counter() - t0
    fresh = set(Path(fdtd_cache).glob("fdtd_*.npz")) - before
    if fresh or not timing.exists():
        if len(fresh) == len(sc.sources.rows()):
            timing.write_text(json.dumps({"synthesis_seconds": seconds}))
        else:
            timing = None
    synth_seconds = seconds if timing is None else json.loads(timing.read_text())["synthesis_seconds"]
    return sc, caps, synth_seconds


@pytest.fixture(scope="session")
def desk_runs(desk):
    sc, caps, _ = desk
    out = {}
    for f in DESK_FREQS:
        for mode in ("none", "stratified"):
            t0 = time.perf_counter()
            out[f, mode] = (localize_all(caps[f], sc.profile, f, sc.z_max, mode), time.perf_counter() - t0)
    return out


def test_criterion_01_reduction_identity(criterion):
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in range(64, 1025):
        g = SpectralGrid.build(n, 0.25e-3, 2 * np.pi * 1e6, 1540.0)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        z = rng.uniform(1e-3, 0.07)
        table = phase_integral(constant_profile(1540.0), z, 1540.0 / 6e6)
        a = propagate_stratified(AngularSpectrum(v, g), z, table).values
        b = propagate_homogeneous(AngularSpectrum(v, g), z).values
        scale = np.where(np.abs(b) > 0, np.abs(b), 1.0)
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    ok = worst <= 1e-15
    criterion(1, ok, f"max per-bin relative difference {worst:.2e} over n = 64..1024 (limit 1e-15)")
    assert ok


def test_criterion_02_marching_consistency(criterion):
    t0 = time.perf_counter()
    res = [marching_convergence(BIO, f, length=0.06, z_local=0.03) for f in DESK_FREQS]
    secs = time.perf_counter() - t0
    loc = np.concatenate([r.local_order for r in res])
    glob = np.concatenate([r.global_order for r in res])
    ok = bool(np.all(np.abs(loc - 2) <= 0.2) and np.all(np.abs(glob - 1) <= 0.2) and secs < 10)
    criterion(2, ok, f"local orders {np.round(loc, 3).tolist()}, global orders {np.round(glob, 3).tolist()}, "
                     f"{secs:.1f} s (limit 10 s)")
    assert ok


def test_criterion_03_round_trip_parseval(criterion):
    worst = {"round": 0.0, "parseval": 0.0}

    @settings(max_examples=300, deadline=None, derandomize=True)
    @given(st.integers(2, 2048), st.floats(1e-6, 10.0), st.integers(0, 2 ** 32 - 1))
    def check(n, dx, seed):
        r = np.random.default_rng(seed)
        v = r.normal(size=n) + 1j * r.normal(size=n)
        P, _ = forward_spectrum(v, dx)
        back = inverse_spectrum(P, dx)
        e1 = np.linalg.norm(back - v) / np.linalg.norm(v)
        lhs = np.sum(np.abs(v) ** 2) * dx
        rhs = np.sum(np.abs(P) ** 2) / (n * dx)
        e2 = abs(lhs - rhs) / lhs
        worst["round"] = max(worst["round"], e1)
        worst["parseval"] = max(worst["parseval"], e2)
        assert e1 <= 1e-12 and e2 <= 1e-10

    t0 = time.perf_counter()
    failure = None
    try:
        check()
    except AssertionError as exc:
        failure = exc
    secs = time.perf_counter() - t0
    ok = failure is None and secs < 5
    criterion(3, ok, f"round trip {worst['round']:.1e} (1e-12), Parseval {worst['parseval']:.1e} (1e-10), "
                     f"300 random cases in {secs:.1f} s (limit 5 s)")
    assert ok


def test_criterion_04_homogeneous_closed_loop(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    arr = LinearArray.centered(0.120, 0.3e-3)
    k0 = 2 * np.pi * 1e6 / 1540.0
    prof = constant_profile(1540.0)
    caps = [green2d_capture(SourceSpec(x, z, 1e6), arr, 1540.0, 10e6, 140e-6)
            for x, z in zip(rng.uniform(-0.03, 0.03, 20), rng.uniform(0.015, 0.06, 20))]
    worst = {}
    for mode in ("none", "stratified"):
        run = localize_all(caps, prof, 1e6, 0.07, mode)
        worst[mode] = max(r.eps_wavelengths for r in run.results)
    secs = time.perf_counter() - t0
    ok = max(worst.values()) <= 0.5 and secs < 60
    criterion(4, ok, f"kL = {k0 * arr.aperture:.0f}, worst error {worst['none']:.3f} / {worst['stratified']:.3f} "
                     f"wavelengths (none / stratified, limit 0.5), {secs:.1f} s (limit 60 s)")
    assert ok


def test_criterion_05_stratified_improvement(criterion, desk, desk_runs):
    sc, _, synth_seconds = desk
    f0 = sc.f0
    unc, t_unc = desk_runs[f0, "none"]
    cor, t_cor = desk_runs[f0, "stratified"]
    lam = sc.wavelength
    total = synth_seconds + t_unc + t_cor
    ratio = unc.summary.mean / cor.summary.mean
    ok = cor.summary.mean <= 0.7 * lam and ratio >= 1.4 and total < 900
    criterion(5, ok, f"corrected {cor.summary.mean * 1e3:.3f}+-{cor.summary.std * 1e3:.3f} mm "
                     f"({cor.summary.mean_wavelengths:.2f} wavelengths, limit 0.7), uncorrected "
                     f"{unc.summary.mean * 1e3:.3f}+-{unc.summary.std * 1e3:.3f} mm, ratio {ratio:.2f} "
                     f"(limit 1.4), {total / 60:.1f} min incl. synthesis (limit 15)")
    assert ok


def test_criterion_06_axial_dominance(criterion, desk, desk_runs):
    sc, _, _ = desk
    unc, _ = desk_runs[sc.f0, "none"]
    r = unc.summary.axial_ratio
    ok = r > 5
    criterion(6, ok, f"uncorrected mean|eps_z| / mean|eps_x| = {r:.3g} (limit > 5)")
    assert ok


def test_criterion_07_noise_robustness(criterion, desk, desk_runs):
    sc, caps, _ = desk
    clean, _ = desk_runs[sc.f0, "stratified"]
    t0 = time.perf_counter()
    noisy = localize_all(caps[sc.f0], sc.profile, sc.f0, sc.z_max, "stratified", noise_level=5.0, seed=7)
    secs = time.perf_counter() - t0
    change = abs(noisy.summary.mean - clean.summary.mean) / clean.summary.mean
    ok = change <= 0.3 and secs < 300
    criterion(7, ok, f"corrected {clean.summary.mean * 1e3:.3f} mm -> {noisy.summary.mean * 1e3:.3f} mm at "
                     f"noise 5x peak, change {100 * change:.1f}% (limit 30%), {secs:.1f} s (limit 300 s)")
    assert ok


def test_criterion_08_validity_diagnostic(criterion):
    sc = biomedical()
    n = sc.array.n_sensors * 4

    def lhs(f):
        grid = SpectralGrid.build(n, sc.array.pitch, 2 * np.pi * f, sc.profile.c0)
        return check_validity(sc.profile, 2 * np.pi * f, sc.z_max, grid).short_wavelength_lhs

    a, b = lhs(0.5e6), lhs(1.0e6)
    ok = 0.1 <= a <= 1.0 and b < a
    criterion(8, ok, f"short-wavelength criterion {a:.3f} at 500 kHz (range [0.1, 1]), {b:.3f} at 1 MHz")
    assert ok


def test_criterion_09_performance(criterion):
    arr = LinearArray(588, 0.25e-3, -587 * 0.125e-3, 0.0)
    rf = green2d_capture(SourceSpec(0.0, 0.04, 1e6), arr, 1540.0, 10e6, 100e-6)
    dz = 0.07 / 599

    def best(mode):
        ts = []
        for _ in range(5):
            t0 = time.perf_counter()
            pam = beamform(rf, BIO, 1e6, 0.07, n_bins=1, dz=dz, correction=mode)
            ts.append(time.perf_counter() - t0)
        assert pam.intensity.shape == (588, 600)
        return min(ts)

    best("stratified")  # warm caches
    t_unc, t_cor = best("none"), best("stratified")
    ratio = t_cor / t_unc
    ok = t_cor < 1.0 and 1.5 <= ratio <= 5.0
    criterion(9, ok, f"588x600 corrected map {1e3 * t_cor:.0f} ms (limit 1000), uncorrected {1e3 * t_unc:.0f} ms, "
                     f"ratio {ratio:.2f} (range [1.5, 5])")
    assert ok


def test_criterion_10_frequency_insensitivity(criterion, desk_runs):
    means = np.array([desk_runs[f, "stratified"][0].summary.mean for f in DESK_FREQS])
    spread = (means.max() - means.min()) / means.mean()
    ok = spread < 0.25
    criterion(10, ok, "corrected mean error " + " / ".join(f"{m * 1e3:.3f}" for m in means)
              + f" mm at 0.5 / 1 / 1.5 MHz, (max-min)/mean {100 * spread:.1f}% (limit 25%)")
    assert ok
