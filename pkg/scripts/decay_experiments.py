#!/usr/bin/env python3
"""Run the three standard media through the full chain:
analyze -> predict -> multimode simulation -> decay fit.

Prints one summary row per medium comparing the predicted and the
observed decay behavior.
"""

import argparse

import dispersia as d
from dispersia.decay import fit_decay, predict

ZERO = d.ExpPolyKernel.zero()

MEDIA = {
    "debye": d.debye(),
    "lorentz": d.lorentz(),
    "drude": d.drude(),
}


def run(name, kernel, n_modes, T, dt):
    report = d.analyze(kernel, ZERO)
    expected = predict(report)
    medium = d.MediumSpec(1.0, 1.0, kernel, ZERO)
    modes = d.cavity_modes(1.0, n_modes)
    trace = d.run_multimode(medium, modes, dt=dt, T=T, output_stride=10)
    fit = fit_decay(trace, (T / 5, T))
    observed = f"rate {fit.rate:.4f}" if fit.kind == "exponential" else f"slope {fit.slope:.3f}"
    print(f"{name:8s} m={report.m}  predicted={expected.kind:12s} "
          f"observed={fit.kind:12s} {observed}  r2={fit.r_squared:.5f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--modes", type=int, default=100)
    parser.add_argument("--T", type=float, default=100.0)
    parser.add_argument("--dt", type=float, default=0.02)
    args = parser.parse_args()
    for name, kernel in MEDIA.items():
        run(name, kernel, args.modes, args.T, args.dt)


if __name__ == "__main__":
    main()
