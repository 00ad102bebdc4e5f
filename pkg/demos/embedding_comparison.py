"""
Hierarchy versus an explicit damped pseudo-mode.

For a real, positive correlation amplitude the bath is exactly one damped
bosonic mode, so the same steady state can be computed with a truncated
Fock space. Both truncations are chosen by the same convergence threshold
and the generator sizes are compared.

Usage:
    python embedding_comparison.py --N 4
"""
import argparse

import numpy as np

from heomdpt import build_spin, matched_selection, preset
from heomdpt.embedding import dim_ratio


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--eps", type=float, default=1e-3)
    args = ap.parse_args()

    N = args.N
    s = build_spin(N)
    print(f"{'V':>5} {'k_max':>5} {'Nc':>4} {'dSz':>10} {'dim ratio':>9}")
    for V in np.round(np.linspace(0.1, 1.0, 10), 3):
        model = preset("lmg_collective_decay", N=N, V=V, gamma=1.0, kappa=1.0,
                       omega=1.0)
        rep = matched_selection(model, s.Sz, eps=args.eps)
        k, nc = rep.selected_k_max, rep.selected_Nc
        diff = rep.observable_at(k) - rep.cutoff_observable_at(nc)
        print(f"{V:5.2f} {k:5d} {nc:4d} {diff:10.2e} "
              f"{dim_ratio(1, k, nc, N + 1):9.3f}")


if __name__ == "__main__":
    main()
