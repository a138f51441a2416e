import numpy as np
import pytest

from stratasa.medium import constant_profile, gaussian_profile
from stratasa.pam import LinearArray
from stratasa.studies import ConvergenceResult, localize_all, marching_convergence
from stratasa.synth.greens import SourceSpec, green2d_capture


def test_orders_from_errors():
    r = ConvergenceResult(1.0, np.array([4.0, 2.0, 1.0]), np.array([16.0, 4.0, 1.0]), np.array([8.0, 4.0, 2.0]))
    np.testing.assert_allclose(r.local_order, [2.0, 2.0])
    np.testing.assert_allclose(r.global_order, [1.0, 1.0])


def test_convergence_shapes():
    prof = gaussian_profile(1540.0, 0.1, 30e-6, 0.01)
    r = marching_convergence(prof, 1e6, 0.01, 0.008, divisors=(24, 48), n_bins=128)
    assert r.dz.shape == (2,) and r.dz[0] == pytest.approx(2 * r.dz[1])
    assert np.all(r.local_error > 0) and np.all(r.global_error > 0)
    assert r.global_error[1] < r.global_error[0]


def test_localize_all_noise_is_seeded():
    arr = LinearArray.centered(0.03, 0.25e-3)
    caps = [green2d_capture(SourceSpec(x, 0.02, 1e6), arr, 1540.0, 10e6, 60e-6) for x in (-2e-3, 2e-3)]
    prof = constant_profile(1540.0)
    a = localize_all(caps, prof, 1e6, 0.03, "stratified", noise_level=3.0, seed=5)
    b = localize_all(caps, prof, 1e6, 0.03, "stratified", noise_level=3.0, seed=5)
    assert [r.eps for r in a.results] == [r.eps for r in b.results]
    assert len(a.seconds) == 2 and a.summary.n == 2
    clean = localize_all(caps, prof, 1e6, 0.03, "none")
    assert clean.summary.mean <= 0.5 * 1.54e-3
