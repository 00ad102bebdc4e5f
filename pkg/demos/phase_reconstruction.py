"""
Rebuilding the two symmetric phases from the slowest parity-even mode.

Near the transition the steady state is close to an equal mixture of two
states that the slowest decaying mode of the even sector separates. This
script extracts that mode, splits it into its positive and negative parts
and compares the mixture with the steady state.

Usage:
    python phase_reconstruction.py --N 14 --V 0.34
"""
import argparse

import numpy as np

from heomdpt import assemble_heom, build_spin, build_z2, fidelity, preset
from heomdpt import reconstruct_phases, steady_state
from heomdpt.spectra import fix_hermitian_phase, sector_eigenpair


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=14)
    ap.add_argument("--V", type=float, default=0.34)
    ap.add_argument("--k-max", type=int, default=5)
    args = ap.parse_args()

    N = args.N
    s = build_spin(N)
    model = preset("lmg_collective_decay", N=N, V=args.V, gamma=1.0,
                   kappa=1.0, omega=1.0)
    heom = assemble_heom(model, args.k_max)
    sym = build_z2(heom)
    rho_ss = steady_state(heom, sym=sym).rho
    lam, vec = sector_eigenpair(heom, sym, 0, index=1)
    print(f"slowest even mode: lambda_1 = {lam:.5e}")

    mode = fix_hermitian_phase(heom.physical(vec))
    rho_a, rho_b = reconstruct_phases(mode, eigenvalue=lam, scale=heom.scale())
    for name, r in (("first", rho_a), ("second", rho_b)):
        print(f"{name:>6} part: Sz/(N/2) = {np.trace(s.Sz @ r).real / (N / 2):7.4f}")
    print(f"steady:       Sz/(N/2) = {np.trace(s.Sz @ rho_ss).real / (N / 2):7.4f}")
    print(f"F(rho_ss, mixture) = {fidelity(rho_ss, 0.5 * (rho_a + rho_b)):.5f}")


if __name__ == "__main__":
    main()
