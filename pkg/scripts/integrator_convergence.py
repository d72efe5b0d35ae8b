#!/usr/bin/env python3
"""Convergence study of the history-quadrature reference integrator
against the exact matrix-exponential propagator on a Debye mode.

The discrepancy should shrink like dt^2 (trapezoidal convolution).
"""

import argparse

import numpy as np

import dispersia as d


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--T", type=float, default=10.0)
    parser.add_argument("--k", type=float, default=1.0)
    parser.add_argument("--levels", type=int, default=4)
    args = parser.parse_args()

    medium = d.MediumSpec(1.0, 1.0, d.debye(), d.ExpPolyKernel.zero())
    system = d.build_mode(medium, args.k)
    prev = None
    print(f"{'dt':>10s} {'rel error':>12s} {'ratio':>8s}")
    for level in range(args.levels):
        dt = 4e-3 / 2**level
        exact = system.initial_state(1.0)
        hist = d.initial_history(dt, s_max=args.T)
        for _ in range(int(round(args.T / dt))):
            exact = d.step_exact(system, exact, dt)
            hist = d.step_history(medium, args.k, hist, dt)
        err = np.hypot(hist.e - exact[0], hist.h - exact[1]) / np.linalg.norm(exact[:2])
        ratio = f"{prev / err:8.2f}" if prev else f"{'-':>8s}"
        print(f"{dt:10.1e} {err:12.3e} {ratio}")
        prev = err


if __name__ == "__main__":
    main()
