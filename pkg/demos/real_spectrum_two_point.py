#!/usr/bin/env python3
"""Eigenvector correlations of a non-Hermitian matrix with a real spectrum.

The product (2 + G1)(2 + G2) of two shifted GUE matrices is manifestly
non-Hermitian, yet its spectrum is real: all the non-normality goes into
the eigenvectors.  This script

  * solves the cubic for the holomorphic Green's function and prints the
    spectral density on its single support interval,
  * evaluates the two-point eigenvector function O2(x, y) from boundary
    values of the traced resolvent product,
  * cross-checks both against a seeded Monte Carlo run.
"""

import math

import numpy as np

from overlap_lab import estimators, qsolver
from overlap_lab.ensembles import EnsembleSpec, sample_many

N = 100
N_SAMPLES = 300
SEED = 7


def rho(x):
    return abs(qsolver.pt_green_scalar(complex(x, 1e-9)).imag) / math.pi


def main():
    rt = qsolver.pseudo_hermitian_rt()
    print(f"shifted-GUE product, N={N}, {N_SAMPLES} samples, seed {SEED}")
    print(f"spectrum support: [0, {qsolver.PT_EDGE:.4f}]\n")

    samples = list(sample_many(
        EnsembleSpec("pseudo_hermitian_product", N), SEED, N_SAMPLES))

    lam = np.linalg.eigvals(samples[0][1])
    frac = np.mean(np.abs(lam.imag) > 1e-8 * np.maximum(np.abs(lam), 1))
    print(f"complex-eigenvalue fraction in one sample: {frac:.3f}")

    print("\nspectral density: Monte Carlo vs Im g(x + i0)/pi")
    edges = np.arange(0.0, 11.0, 0.5)
    dens = estimators.estimate_density_real(samples, edges)
    print(f"{'x':>6} {'monte carlo':>16} {'analytic':>9}")
    for i in range(2, len(edges) - 1, 4):
        c = dens.centers[i, 0]
        print(f"{c:6.2f} {dens.estimate[i].real:10.4f} "
              f"+- {dens.stderr[i]:.4f} {rho(c):9.4f}")

    print("\ntwo-point function O2(x, y) along the cross section x = 1.475")
    pair_edges = 0.1 + 0.25 * np.arange(41)
    o2 = estimators.estimate_o2_real_pairs(samples, pair_edges)
    ix = int(np.argmin(np.abs(o2.grid_centers - 1.475)))
    print(f"{'y':>6} {'monte carlo':>18} {'analytic':>10}")
    for j in range(3, 40, 6):
        y = o2.grid_centers[j]
        if abs(y - o2.grid_centers[ix]) < 0.3:
            continue
        ref = qsolver.o2_real_spectrum(rt, o2.grid_centers[ix], y)
        print(f"{y:6.2f} {o2.grid_estimate[ix, j].real:10.5f} "
              f"+- {o2.grid_stderr[ix, j]:.5f} {ref:10.5f}")
    print("\neigenvalues on a line still repel in the plane: O2 < 0 and "
          "decays\nwith separation, exactly as the boundary-value formula "
          "predicts.")


if __name__ == "__main__":
    main()
