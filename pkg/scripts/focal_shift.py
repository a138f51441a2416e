"""Axial bias of a homogeneous closed loop versus aperture and depth.

At small Fresnel numbers the intensity peak sits between the array and the
source. No refraction correction can remove this, so it sets a floor on the
error any aperture can reach.
"""
import numpy as np

from stratasa.medium import constant_profile
from stratasa.pam import LinearArray, beamform, localize_peak
from stratasa.synth.greens import SourceSpec, green2d_capture


def main():
    prof = constant_profile(1540.0)
    print("aperture mm  depth mm  dz peak mm")
    for aperture in (0.02, 0.03, 0.06, 0.1):
        arr = LinearArray.centered(aperture, 0.25e-3)
        for z in (0.01, 0.02, 0.03, 0.05):
            rf = green2d_capture(SourceSpec(0.0, z, 1e6), arr, 1540.0, 10e6, 2 * np.hypot(aperture, z) / 1540.0)
            pk = localize_peak(beamform(rf, prof, 1e6, 1.5 * z))
            print(f"{aperture * 1e3:11.0f} {z * 1e3:9.0f} {(pk.z_r - z) * 1e3:11.3f}")


if __name__ == "__main__":
    main()
