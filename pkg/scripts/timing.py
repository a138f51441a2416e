"""Beamforming wall time for a 588-sensor, 600-row map."""
import time

from stratasa.medium import gaussian_profile
from stratasa.pam import LinearArray, beamform
from stratasa.synth.greens import SourceSpec, green2d_capture


def main(repeats=5):
    arr = LinearArray(588, 0.25e-3, -587 * 0.125e-3, 0.0)
    rf = green2d_capture(SourceSpec(0.0, 0.04, 1e6), arr, 1540.0, 10e6, 100e-6)
    prof = gaussian_profile(1540.0, 0.25, 30e-6, 0.035)
    for n_bins in (1, 3):
        best = {}
        for mode in ("stratified", "none", "stratified"):
            ts = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                beamform(rf, prof, 1e6, 0.07, n_bins=n_bins, dz=0.07 / 599, correction=mode)
                ts.append(time.perf_counter() - t0)
            best[mode] = min(ts)
        print(f"n_bins {n_bins}: none {best['none'] * 1e3:.0f} ms, stratified {best['stratified'] * 1e3:.0f} ms, "
              f"ratio {best['stratified'] / best['none']:.2f}")


if __name__ == "__main__":
    main()
