"""
Collective-spin and truncated bosonic operators, plus the vectorization
calculus used to turn operator sandwiches into superoperator matrices.

Vectorization is row-major: ``|i><j|`` maps to basis element ``i * dim + j``,
so that ``vec(A @ rho @ B) == kron(A, B.T) @ vec(rho)``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SpinAlgebra",
    "BosonAlgebra",
    "build_spin",
    "build_boson",
    "vec",
    "unvec",
    "lmul",
    "rmul",
    "commutator_superop",
    "dissipator_superop",
]


@dataclass(frozen=True)
class SpinAlgebra:
    """Collective spin of ``N`` spin-1/2 in the maximal Dicke sector.

    Basis order is ``m = j, j-1, ..., -j`` so that index 0 is the fully
    polarized "up" state and ``Sz`` is diagonal with decreasing entries.
    """

    N: int
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray

    @property
    def j(self):
        return self.N / 2

    @property
    def dim(self):
        return self.N + 1

    @property
    def m_values(self):
        """Sz eigenvalue of each basis state, in basis order."""
        return self.j - np.arange(self.dim)

    def identity(self):
        return np.eye(self.dim, dtype=complex)


@dataclass(frozen=True)
class BosonAlgebra:
    """Single bosonic mode truncated at Fock level ``Nc``."""

    Nc: int
    a: np.ndarray
    adag: np.ndarray
    number: np.ndarray

    @property
    def dim(self):
        return self.Nc + 1


def build_spin(N):
    """Collective spin operators for ``N`` spins (``j = N/2``).

    Parameters
    ----------
    N : int
        Number of spin-1/2 constituents, at least 1.

    Returns
    -------
    SpinAlgebra
    """
    if int(N) != N or N < 1:
        raise ValueError(f"spin count N must be an integer >= 1, got {N!r}")
    N = int(N)
    j = N / 2
    m = j - np.arange(N + 1)
    # <j, m+1| S+ |j, m> sits at row (index of m+1) = col - 1
    ladder = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    Splus = np.diag(ladder, k=1).astype(complex)
    Sminus = Splus.conj().T.copy()
    Sz = np.diag(m).astype(complex)
    Sx = 0.5 * (Splus + Sminus)
    Sy = -0.5j * (Splus - Sminus)
    return SpinAlgebra(N=N, Sx=Sx, Sy=Sy, Sz=Sz, Splus=Splus, Sminus=Sminus)


def build_boson(Nc):
    """Annihilation, creation and number operators on ``Nc + 1`` Fock levels."""
    if int(Nc) != Nc or Nc < 0:
        raise ValueError(f"Fock cutoff Nc must be an integer >= 0, got {Nc!r}")
    Nc = int(Nc)
    a = np.diag(np.sqrt(np.arange(1, Nc + 1)), k=1).astype(complex)
    adag = a.conj().T.copy()
    number = np.diag(np.arange(Nc + 1)).astype(complex)
    return BosonAlgebra(Nc=Nc, a=a, adag=adag, number=number)


def _square(X, name="operator"):
    if not sp.issparse(X):
        X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {X.shape}")
    return X


def vec(X):
    """Row-major vectorization of a square operator."""
    X = _square(X)
    return np.asarray(X).reshape(-1).copy()


def unvec(v, dim=None):
    """Inverse of :func:`vec`."""
    v = np.asarray(v).reshape(-1)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized "
                         f"{dim}x{dim} operator")
    return v.reshape(dim, dim).copy()


def lmul(A, sparse=True):
    """Superoperator for ``rho -> A @ rho``, i.e. ``kron(A, 1)``."""
    A = _square(A)
    eye = sp.identity(A.shape[0], dtype=complex, format="csr")
    out = sp.kron(sp.csr_matrix(A, dtype=complex), eye, format="csr")
    return out if sparse else out.toarray()


def rmul(B, sparse=True):
    """Superoperator for ``rho -> rho @ B``, i.e. ``kron(1, B.T)``."""
    B = _square(B)
    eye = sp.identity(B.shape[0], dtype=complex, format="csr")
    out = sp.kron(eye, sp.csr_matrix(B.T, dtype=complex), format="csr")
    return out if sparse else out.toarray()


def commutator_superop(H, sparse=True):
    """Superoperator for ``rho -> -i [H, rho]``."""
    out = -1j * (lmul(H) - rmul(H))
    return out if sparse else out.toarray()


def dissipator_superop(c, rate=1.0, sparse=True):
    """Superoperator for ``rate * (2 c rho c^+ - {c^+ c, rho})``.

    The factor 2 in front of the jump term matches the ``D[o]`` convention
    used throughout this package, so ``rate`` multiplies the whole bracket.
    """
    c = _square(c, "jump operator")
    cd = c.conj().T
    cdc = cd @ c
    out = rate * (2 * (lmul(c) @ rmul(cd)) - lmul(cdc) - rmul(cdc))
    return out.tocsr() if sparse else out.toarray()
