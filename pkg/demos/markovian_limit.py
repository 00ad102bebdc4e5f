"""
Markovian limit of the collective-decay LMG model.

When the pseudo-mode decays much faster than everything else, the hierarchy
should reproduce the spin-only Lindblad equation with collective decay.
This script sweeps V at kappa/omega = 50 and prints both magnetizations.

Usage:
    python markovian_limit.py
    python markovian_limit.py --N 20 --k-max 4
"""
import argparse

import numpy as np

from heomdpt import assemble_heom, build_spin, build_z2, lindblad_preset
from heomdpt import preset, steady_state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--k-max", type=int, default=3)
    ap.add_argument("--points", type=int, default=11)
    args = ap.parse_args()

    N = args.N
    s = build_spin(N)
    print(f"{'V/gamma':>8} {'HEOM':>10} {'Lindblad':>10} {'diff':>10}")
    for V in np.linspace(0, 1, args.points):
        model = preset("lmg_collective_decay", N=N, V=V, gamma=1.0,
                       kappa=50.0, omega=1.0)
        heom = assemble_heom(model, args.k_max)
        rho = steady_state(heom, sym=build_z2(heom)).rho
        sz = np.trace(s.Sz @ rho).real / (N / 2)
        lind = steady_state(lindblad_preset("lindblad_collective_decay", N=N,
                                            V=V, gamma=1.0)).rho
        sz_m = np.trace(s.Sz @ lind).real / (N / 2)
        print(f"{V:8.3f} {sz:10.5f} {sz_m:10.5f} {sz - sz_m:10.2e}")


if __name__ == "__main__":
    main()
