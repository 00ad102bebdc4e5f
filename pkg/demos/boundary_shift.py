"""
Where does the memory-ful LMG model order?

With kappa = omega the mean-field theory brackets the transition between
V_c^- and V_c^+ (bistable in between). Here the hierarchy steady state is
swept across that window for a few N, the steepest point of <Sz> is taken
as the finite-size transition, and the parity-odd gap shows how the two
symmetry-broken states start to coexist above it.

Usage:
    python boundary_shift.py
    python boundary_shift.py --sizes 10,20 --k-max 5
"""
import argparse

import numpy as np

from heomdpt import assemble_heom, build_spin, build_z2, find_critical_point
from heomdpt import preset, sector_gaps, steady_state
from heomdpt.meanfield import critical_points


def sweep(N, k_max, grid):
    s = build_spin(N)
    sz, odd = [], []
    for V in grid:
        model = preset("lmg_collective_decay", N=N, V=V, gamma=1.0,
                       kappa=1.0, omega=1.0)
        heom = assemble_heom(model, k_max)
        sym = build_z2(heom)
        rho = steady_state(heom, sym=sym).rho
        sz.append(np.trace(s.Sz @ rho).real / (N / 2))
        odd.append(-sector_gaps(heom, sym, charges=(1,), count=1)[1][0].real)
    return np.array(sz), np.array(odd)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="6,10,14")
    ap.add_argument("--k-max", type=int, default=5)
    args = ap.parse_args()

    cp = critical_points("model1_spin", dict(V=0, gamma=1, kappa=1, omega=1,
                                             N=1))
    print(f"mean field: V_c^- = {cp['V_c_minus']:.4f}, "
          f"V_c^+ = {cp['V_c_plus']:.4f}")
    grid = np.round(np.arange(0.1, 0.6001, 0.05), 4)
    for N in [int(n) for n in args.sizes.split(",")]:
        sz, odd = sweep(N, args.k_max, grid)
        est = find_critical_point((grid, sz))
        print(f"\nN = {N}: steepest <Sz> at V = {est.value:.4f} "
              f"(window {est.window[0]:.3f}..{est.window[1]:.3f})")
        for V, a, g in zip(grid, sz, odd):
            print(f"  V={V:5.3f}  Sz/(N/2)={a:8.4f}  odd gap={g:.3e}")


if __name__ == "__main__":
    main()
