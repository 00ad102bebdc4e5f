"""
Weak symmetries of the HEOM generator and sector (block) extraction.

A system unitary ``exp(i alpha Q)``, with ``Q`` diagonal in the system
basis with integer levels, lifts to the hierarchy by giving every ADO
``rho^(n,m)`` the extra charge ``sum_j s_j (n_j - m_j)``. The basis element
``|r><c|`` of ADO ``(n, m)`` then carries

    charge = (q_r - q_c) + sum_j s_j (n_j - m_j)

kept as an integer for U(1) and reduced mod 2 for Z2. The per-channel signs
``s_j`` are not fixed by the physical-space symmetry alone, so they are
found by checking which choice leaves no coupling between charges.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.sparse as sp

from .errors import NotASymmetryError

__all__ = [
    "WeakSymmetry",
    "charge_labels",
    "build_z2",
    "build_u1",
    "verify_weak_symmetry",
    "block_restrict",
    "SYMMETRY_TOL",
]

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class WeakSymmetry:
    kind: str
    charges: np.ndarray
    signs: tuple
    levels: np.ndarray

    @property
    def sectors(self):
        return tuple(int(q) for q in np.unique(self.charges))

    def basis(self, charge):
        idx = np.flatnonzero(self.charges == charge)
        if idx.size == 0:
            raise ValueError(f"no basis element carries charge {charge}; "
                             f"sectors are {self.sectors}")
        return idx

    def sector_sizes(self):
        qs, counts = np.unique(self.charges, return_counts=True)
        return {int(q): int(c) for q, c in zip(qs, counts)}


def dicke_levels(d):
    """Integer ``Sz + j`` for the descending Dicke basis (index 0 = top)."""
    return np.arange(d - 1, -1, -1)


def charge_labels(heom, signs, levels=None, modulus=None):
    """Charge of every basis element of the stacked hierarchy space."""
    d = heom.d
    levels = dicke_levels(d) if levels is None else np.asarray(levels, int)
    phys = (levels[:, None] - levels[None, :]).reshape(-1)
    signs = np.asarray(signs, dtype=int)
    ado = np.array([int(np.dot(signs, np.subtract(ix.nvec, ix.mvec)))
                    for ix in heom.indices])
    charges = (ado[:, None] + phys[None, :]).reshape(-1)
    if modulus is not None:
        charges = np.mod(charges, modulus)
    return charges


def verify_weak_symmetry(heom, sym):
    """Largest generator entry linking different charges, relative to max.

    The symmetry is accepted when this is below ``SYMMETRY_TOL``.
    """
    mat = heom.matrix if hasattr(heom, "matrix") else heom
    coo = sp.coo_matrix(mat)
    if coo.nnz == 0:
        return 0.0
    mags = np.abs(coo.data)
    biggest = mags.max()
    if biggest == 0:
        return 0.0
    cross = sym.charges[coo.row] != sym.charges[coo.col]
    if not cross.any():
        return 0.0
    return float(mags[cross].max() / biggest)


def _search(heom, kind, modulus, signs, levels):
    M = heom.model.M
    if signs is not None:
        options = [tuple(int(s) for s in signs)]
        if len(options[0]) != M:
            raise ValueError(f"need {M} channel signs, got {len(options[0])}")
    else:
        options = list(product((1, -1), repeat=M))
    levels = dicke_levels(heom.d) if levels is None else np.asarray(levels, int)
    best = None
    for s in options:
        sym = WeakSymmetry(kind, charge_labels(heom, s, levels, modulus), s,
                           levels)
        res = verify_weak_symmetry(heom, sym)
        if res < SYMMETRY_TOL:
            return sym
        if best is None or res < best[0]:
            best = (res, s)
    raise NotASymmetryError(
        f"{kind} charges leak between sectors for every sign choice "
        f"(best residual {best[0]:.3e} with signs {best[1]})")


def build_z2(heom, signs=None, levels=None):
    """Parity ``exp(i pi (Sz + sum_j a_j^+ a_j))`` lifted to the hierarchy."""
    return _search(heom, "Z2", 2, signs, levels)


def build_u1(heom, signs=None, levels=None):
    """U(1) charge ``Sz + sum_j s_j a_j^+ a_j`` lifted to the hierarchy."""
    return _search(heom, "U1", None, signs, levels)


def block_restrict(heom, sym, charge):
    """Submatrix of the generator on one charge sector.

    Returns
    -------
    block : scipy.sparse.csc_matrix
    basis : ndarray of int
        Positions of the sector's basis elements in the full stacked space.
    """
    mat = heom.matrix if hasattr(heom, "matrix") else heom
    basis = sym.basis(charge)
    block = mat.tocsr()[basis][:, basis].tocsc()
    return block, basis
