import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratasa.spectral import (ComplexField2D, SpectralGrid, WindowSpec, axial_wavenumber,
                               forward_spectrum, inverse_spectrum, pad_offset, time_to_frequency,
                               tukey_window, window_and_pad, window_pad_array)
from stratasa.synth.greens import SourceSpec


def closed_form_tukey(n, R):
    """Textbook piecewise definition, evaluated independently of scipy."""
    if n == 1:
        return np.ones(1)
    w = np.ones(n)
    x = np.arange(n) / (n - 1)
    if R == 0:
        return w
    lo = x < R / 2
    hi = x > 1 - R / 2
    w[lo] = 0.5 * (1 + np.cos(2 * np.pi / R * (x[lo] - R / 2)))
    w[hi] = 0.5 * (1 + np.cos(2 * np.pi / R * (x[hi] - 1 + R / 2)))
    return w


class TestTukey:
    def test_rectangular(self):
        assert np.array_equal(tukey_window(5, 0.0), np.ones(5))

    @pytest.mark.parametrize("n", [2, 7, 64, 101])
    def test_r1_is_hann(self, n):
        np.testing.assert_allclose(tukey_window(n, 1.0), np.hanning(n), atol=1e-15)

    def test_closed_form_64(self):
        w = tukey_window(64, 0.25)
        np.testing.assert_allclose(w, closed_form_tukey(64, 0.25), atol=1e-14)
        assert w[0] == 0.0
        assert w[31] == pytest.approx(1.0)
        np.testing.assert_array_equal(w, w[::-1])

    @pytest.mark.parametrize("R", [-0.1, 1.5, np.nan])
    def test_bad_fraction(self, R):
        with pytest.raises(ValueError):
            tukey_window(10, R)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            tukey_window(0, 0.5)

    @given(st.integers(1, 600), st.floats(0.0, 1.0))
    def test_symmetric_and_monotone_taper(self, n, R):
        w = tukey_window(n, R)
        assert w.shape == (n,)
        np.testing.assert_allclose(w, w[::-1], atol=1e-15)
        assert np.all((w >= 0) & (w <= 1 + 1e-15))
        half = w[: (n + 1) // 2]
        assert np.all(np.diff(half) >= -1e-15)

    @given(st.integers(8, 400), st.floats(0.01, 1.0))
    def test_flat_top_fraction(self, n, R):
        w = tukey_window(n, R)
        x = np.arange(n) / (n - 1)
        inside = (x >= R / 2 + 1e-12) & (x <= 1 - R / 2 - 1e-12)
        np.testing.assert_allclose(w[inside], 1.0, atol=1e-15)


class TestWindowAndPad:
    def test_hundred_sensors(self):
        f = ComplexField2D(np.ones((100, 3), complex), 1e-3, 1e-7)
        out = window_and_pad(f, WindowSpec())
        assert out.data.shape == (400, 3)
        i0 = pad_offset(100, 4)
        assert i0 == 150
        np.testing.assert_allclose(out.data[i0:i0 + 100, 0], tukey_window(100, 0.25))
        assert np.all(out.data[:i0] == 0) and np.all(out.data[i0 + 100:] == 0)
        assert out.origin == pytest.approx(-150e-3)

    def test_identity(self):
        data = np.arange(12.0).reshape(4, 3) + 1j
        out = window_and_pad(ComplexField2D(data, 1.0, 1.0), WindowSpec(cosine_fraction=0.0, pad_factor=1))
        np.testing.assert_array_equal(out.data, data)

    def test_edge_impulse_vanishes(self):
        data = np.zeros((32, 1))
        data[0] = 1.0
        out = window_pad_array(data, WindowSpec())
        assert np.all(out == 0)

    @given(st.integers(1, 300), st.integers(1, 6))
    def test_length(self, n, pad):
        out = window_pad_array(np.ones(n), WindowSpec(pad_factor=pad))
        assert out.size == pad * n

    def test_centre_block_recoverable(self, rng):
        v = rng.normal(size=50) + 1j * rng.normal(size=50)
        spec = WindowSpec(cosine_fraction=0.25, pad_factor=3)
        out = window_pad_array(v, spec)
        i0 = pad_offset(50, 3)
        w = tukey_window(50, 0.25)
        ok = w > 0
        np.testing.assert_allclose(out[i0:i0 + 50][ok] / w[ok], v[ok], rtol=1e-14)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            WindowSpec(pad_factor=0)
        with pytest.raises(ValueError):
            WindowSpec(cosine_fraction=2.0)
        with pytest.raises(ValueError):
            WindowSpec(kind="hamming")

    def test_empty_field(self):
        with pytest.raises(ValueError):
            window_and_pad(ComplexField2D(np.zeros((0, 3)), 1.0, 1.0), WindowSpec())


class TestField:
    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            ComplexField2D(np.zeros(5), 1.0, 1.0)

    @pytest.mark.parametrize("dx,d2", [(0.0, 1.0), (1.0, -1.0)])
    def test_pitch_positive(self, dx, d2):
        with pytest.raises(ValueError):
            ComplexField2D(np.zeros((2, 2)), dx, d2)

    def test_coordinates(self):
        f = ComplexField2D(np.zeros((4, 2)), 0.5, 1.0, origin=-1.0)
        np.testing.assert_allclose(f.x, [-1.0, -0.5, 0.0, 0.5])


class TestSpectra:
    def test_constant(self):
        a, n, dx = 2.5 - 1j, 16, 0.3
        P, kx = forward_spectrum(np.full(n, a), dx)
        assert P[0] == pytest.approx(a * n * dx)
        np.testing.assert_allclose(P[1:], 0, atol=1e-13)
        assert kx[0] == 0

    def test_single_bin(self):
        n, dx, m = 64, 1e-3, 5
        kx0 = 2 * np.pi * m / (n * dx)
        x = dx * np.arange(n)
        P, kx = forward_spectrum(np.exp(1j * kx0 * x), dx)
        assert kx[m] == pytest.approx(kx0)
        nz = np.abs(P) > 1e-9
        assert np.flatnonzero(nz).tolist() == [m]

    def test_kx_grid(self):
        _, kx = forward_spectrum(np.zeros(10), 0.2)
        np.testing.assert_allclose(kx, 2 * np.pi * np.fft.fftfreq(10, 0.2))

    def test_inverse_single_bin(self):
        n, dx = 32, 0.1
        P = np.zeros(n, complex)
        P[3] = n * dx
        p = inverse_spectrum(P, dx)
        np.testing.assert_allclose(p, np.exp(2j * np.pi * 3 * np.arange(n) / n), atol=1e-14)

    def test_inverse_zero(self):
        assert np.all(inverse_spectrum(np.zeros(8, complex), 1.0) == 0)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            forward_spectrum(np.zeros(1), 1.0)
        with pytest.raises(ValueError):
            forward_spectrum(np.zeros(4), 0.0)

    @given(st.integers(2, 4096), st.floats(1e-6, 10.0), st.integers(0, 2 ** 32 - 1))
    def test_round_trip(self, n, dx, seed):
        r = np.random.default_rng(seed)
        v = r.normal(size=n) + 1j * r.normal(size=n)
        back = inverse_spectrum(forward_spectrum(v, dx)[0], dx)
        assert np.linalg.norm(back - v) <= 1e-12 * np.linalg.norm(v)

    @given(st.integers(2, 4096), st.floats(1e-6, 10.0), st.integers(0, 2 ** 32 - 1))
    def test_parseval(self, n, dx, seed):
        r = np.random.default_rng(seed)
        v = r.normal(size=n) + 1j * r.normal(size=n)
        P, _ = forward_spectrum(v, dx)
        dkx = 2 * np.pi / (n * dx)
        lhs = np.sum(np.abs(v) ** 2) * dx
        rhs = np.sum(np.abs(P) ** 2) * dkx / (2 * np.pi)
        assert abs(lhs - rhs) <= 1e-10 * lhs


class TestTimeToFrequency:
    def test_on_bin_tone(self):
        fs, nt, k = 20e6, 400, 20
        t = np.arange(nt) / fs
        rf = ComplexField2D(np.cos(2 * np.pi * k * fs / nt * t)[None, :].repeat(3, 0), 1e-3, 1 / fs)
        bins = time_to_frequency(rf, k * fs / nt, 3)
        assert [round(w / (2 * np.pi)) for w, _ in bins] == [(k - 1) * fs / nt, k * fs / nt, (k + 1) * fs / nt]
        side = max(np.max(np.abs(bins[0][1])), np.max(np.abs(bins[2][1])))
        assert np.allclose(np.abs(bins[1][1]), nt / 2)
        assert side < 1e-9 * nt

    def test_single_bin_nearest(self):
        fs, nt = 10.0, 100
        rf = ComplexField2D(np.zeros((2, nt)), 1.0, 1 / fs)
        bins = time_to_frequency(rf, 1.04, 1)
        assert len(bins) == 1
        assert bins[0][0] / (2 * np.pi) == pytest.approx(1.0)

    def test_pulse_energy_in_three_bins(self):
        fs, duration = 20e6, 100e-6
        nt = int(fs * duration)
        src = SourceSpec(0.0, 0.0, 1e6, 0.05, t0=50e-6)
        sig = src.waveform(np.arange(nt) / fs)
        rf = ComplexField2D(sig[None, :], 1e-3, 1 / fs)
        bins = time_to_frequency(rf, 1e6, 3)
        got = sum(np.abs(v[0]) ** 2 for _, v in bins)
        spec = np.fft.rfft(sig)
        f = np.fft.rfftfreq(nt, 1 / fs)
        lo, hi = src.band(6)
        band = np.sum(np.abs(spec[(f >= lo) & (f <= hi)]) ** 2)
        assert 1e6 - fs / nt <= bins[0][0] / (2 * np.pi) < 1e6 < bins[2][0] / (2 * np.pi) <= 1e6 + fs / nt
        assert got >= 0.5 * band

    def test_above_nyquist(self):
        rf = ComplexField2D(np.zeros((2, 64)), 1.0, 1e-6)
        with pytest.raises(ValueError, match="fs/2"):
            time_to_frequency(rf, 6e5, 3)

    def test_even_bins(self):
        rf = ComplexField2D(np.zeros((2, 64)), 1.0, 1e-6)
        with pytest.raises(ValueError):
            time_to_frequency(rf, 1e5, 2)

    def test_complex_input_matches_real(self, rng):
        data = rng.normal(size=(3, 128))
        a = time_to_frequency(ComplexField2D(data, 1.0, 1e-3), 100.0, 3)
        b = time_to_frequency(ComplexField2D(data.astype(complex), 1.0, 1e-3), 100.0, 3)
        for (wa, va), (wb, vb) in zip(a, b):
            assert wa == wb
            np.testing.assert_allclose(va, vb, atol=1e-12)


class TestAxialWavenumber:
    @given(st.integers(2, 2048), st.floats(1e-5, 1e-2), st.floats(1e2, 1e5))
    def test_branch_and_dispersion(self, n, dx, k0):
        grid = SpectralGrid.build(n, dx, k0 * 1500.0, 1500.0)
        kz = grid.kz
        assert np.all(kz.imag >= 0)
        prop = np.abs(grid.kx) <= k0
        assert np.all(kz.imag[prop] == 0) and np.all(kz.real[prop] >= 0)
        assert np.all(kz.real[~prop] == 0) and np.all(kz.imag[~prop] > 0)
        # residual relative to the largest operand: subtraction cancels when |kx| >> k0
        resid = np.abs(kz ** 2 + grid.kx ** 2 - k0 ** 2)
        assert np.all(resid <= 4e-16 * 4 * (grid.kx ** 2 + k0 ** 2))

    def test_exact_at_boundary(self):
        kz = axial_wavenumber(np.array([-3.0, 0.0, 3.0, 5.0]), 3.0)
        assert kz[0] == 0 and kz[2] == 0 and kz[1] == 3.0
        assert kz[3] == pytest.approx(4j)
