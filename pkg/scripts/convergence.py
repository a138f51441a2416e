"""Step-size convergence of the first-order marching propagator."""
import argparse

from stratasa.medium import gaussian_profile
from stratasa.studies import marching_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fraction", type=float, default=0.25)
    ap.add_argument("--freqs", type=float, nargs="+", default=[0.5e6, 1e6, 1.5e6])
    args = ap.parse_args()
    prof = gaussian_profile(1540.0, args.fraction, 30e-6, 0.035)
    for f in args.freqs:
        r = marching_convergence(prof, f, length=0.06, z_local=0.03)
        print(f"{f / 1e6:.2f} MHz")
        for i, dz in enumerate(r.dz):
            line = f"  dz {dz * 1e6:8.2f} um  local {r.local_error[i]:.3e}  global {r.global_error[i]:.3e}"
            if i:
                line += f"  orders {r.local_order[i - 1]:.3f} / {r.global_order[i - 1]:.3f}"
            print(line)


if __name__ == "__main__":
    main()
