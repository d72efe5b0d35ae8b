#!/usr/bin/env python3
"""Spectral abscissa vs wavenumber for the three standard media.

For m = 0 media the abscissa plateaus at a negative constant; for m = 2
media it scales like -c/k^2, so the |abscissa|*k^2 column converges.
"""

import argparse

import numpy as np

import dispersia as d

ZERO = d.ExpPolyKernel.zero()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k-min", type=float, default=1.0)
    parser.add_argument("--k-max", type=float, default=256.0)
    parser.add_argument("--num", type=int, default=9)
    args = parser.parse_args()

    ks = np.geomspace(args.k_min, args.k_max, args.num)
    media = {"debye": d.debye(), "lorentz": d.lorentz(), "drude": d.drude()}
    print(f"{'k':>10s} " + " ".join(f"{n:>12s} {n + '*k^2':>12s}" for n in media))
    for k in ks:
        row = [f"{k:10.2f}"]
        for kern in media.values():
            medium = d.MediumSpec(1.0, 1.0, kern, ZERO)
            absc, _ = d.spectral_abscissa(d.build_mode(medium, float(k)))
            row.append(f"{absc:12.6f} {abs(absc) * k * k:12.6f}")
        print(" ".join(row))


if __name__ == "__main__":
    main()
