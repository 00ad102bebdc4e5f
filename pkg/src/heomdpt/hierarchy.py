"""
Auxiliary-density-operator (ADO) bookkeeping and sparse assembly of the
HEOM generator for baths whose correlation function is a finite sum of
damped exponentials ``alpha(t) = sum_j G_j exp(-i w_j t - k_j |t|)``.

The stacked state holds one vectorized ``d x d`` block per retained
multi-index ``(n, m)``; block ``p`` occupies entries ``p*d**2 .. (p+1)*d**2``.
Indices are kept in ascending lexicographic order of the concatenated
tuple ``(n_1..n_M, m_1..m_M)`` and truncated triangularly,
``sum(n) + sum(m) <= k_max``.
"""
from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.sparse as sp

from .operators import commutator_superop, lmul, rmul, unvec, vec

__all__ = [
    "Channel",
    "ModelSpec",
    "HierarchyIndex",
    "HierarchyIndexSet",
    "HeomLiouvillian",
    "enumerate_indices",
    "assemble_heom",
    "heom_dimension",
    "ado_count",
    "write_triplets",
    "read_triplets",
]

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class Channel:
    """One exponential term of the bath correlation function.

    ``L`` is the system operator coupled to the term, ``G`` its complex
    amplitude, ``omega`` the oscillation frequency and ``kappa`` the decay
    rate (must be positive).
    """

    L: np.ndarray
    G: complex
    omega: float
    kappa: float

    @property
    def w(self):
        return self.kappa + 1j * self.omega


@dataclass(frozen=True)
class ModelSpec:
    """System Hamiltonian plus the list of bath channels."""

    H: np.ndarray
    channels: tuple
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "H", np.asarray(self.H, dtype=complex))
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def d(self):
        return self.H.shape[0]

    @property
    def M(self):
        return len(self.channels)

    def validate(self):
        H = self.H
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError(f"system Hamiltonian must be square, got {H.shape}")
        scale = max(np.linalg.norm(H), 1.0)
        if np.linalg.norm(H - H.conj().T) > HERMITIAN_RTOL * scale:
            raise ValueError("system Hamiltonian is not Hermitian")
        if not self.channels:
            raise ValueError("model needs at least one bath channel")
        for j, ch in enumerate(self.channels):
            if np.shape(ch.L) != H.shape:
                raise ValueError(f"channel {j}: coupling operator shape "
                                 f"{np.shape(ch.L)} does not match H {H.shape}")
            if not ch.kappa > 0:
                raise ValueError(f"channel {j}: decay rate must be > 0, "
                                 f"got {ch.kappa}")


@dataclass(frozen=True)
class HierarchyIndex:
    nvec: tuple
    mvec: tuple

    @property
    def depth(self):
        return sum(self.nvec) + sum(self.mvec)

    @property
    def key(self):
        return self.nvec + self.mvec


def ado_count(M, k_max):
    """Number of retained ADOs, ``(2M + k_max)! / ((2M)! k_max!)``."""
    return comb(2 * M + k_max, k_max)


def heom_dimension(M, k_max, d):
    """Dimension ``K * d**2`` of the truncated generator."""
    for name, val, low in (("M", M, 1), ("k_max", k_max, 0), ("d", d, 1)):
        if int(val) != val or val < low:
            raise ValueError(f"{name} must be an integer >= {low}, got {val!r}")
    return ado_count(int(M), int(k_max)) * int(d) ** 2


class HierarchyIndexSet:
    """Ordered triangular set of multi-indices with positional lookup."""

    def __init__(self, M, k_max):
        self.M = M
        self.k_max = k_max
        keys = list(_lex_tuples(2 * M, k_max))
        self.indices = [HierarchyIndex(k[:M], k[M:]) for k in keys]
        self._pos = {k: p for p, k in enumerate(keys)}

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, p):
        return self.indices[p]

    @property
    def K(self):
        return len(self.indices)

    def position(self, nvec, mvec=None):
        """Position of ``(nvec, mvec)`` or ``None`` when truncated away."""
        key = tuple(nvec) if mvec is None else tuple(nvec) + tuple(mvec)
        return self._pos.get(key)

    def depths(self):
        return np.array([ix.depth for ix in self.indices])


def _lex_tuples(length, budget):
    # ascending lexicographic order falls out of the nested loop order
    if length == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _lex_tuples(length - 1, budget - first):
            yield (first,) + rest


def enumerate_indices(M, k_max):
    """Triangularly truncated ADO index set for ``M`` channels."""
    if int(M) != M or M < 1:
        raise ValueError(f"channel count M must be a positive integer, got {M!r}")
    if int(k_max) != k_max or k_max < 0:
        raise ValueError(f"k_max must be a nonnegative integer, got {k_max!r}")
    return HierarchyIndexSet(int(M), int(k_max))


@dataclass(frozen=True)
class HeomLiouvillian:
    """Sparse HEOM generator together with its bookkeeping."""

    matrix: sp.csc_matrix
    indices: HierarchyIndexSet
    model: ModelSpec
    d: int

    @property
    def D(self):
        return self.matrix.shape[0]

    @property
    def k_max(self):
        return self.indices.k_max

    @property
    def block_size(self):
        return self.d * self.d

    def block(self, v, p):
        """The ``d x d`` operator stored at ADO position ``p`` of ``v``."""
        n2 = self.block_size
        return unvec(np.asarray(v)[p * n2:(p + 1) * n2], self.d)

    def physical(self, v):
        return self.block(v, 0)

    def trace_functional(self):
        """Row vector ``<<1^(0,0)|``: physical trace, zero on every ADO."""
        ell = np.zeros(self.D, dtype=complex)
        ell[:self.block_size] = vec(np.eye(self.d))
        return ell

    def stack(self, blocks):
        """Stack a ``{position: operator}`` mapping (missing blocks are 0)."""
        v = np.zeros(self.D, dtype=complex)
        n2 = self.block_size
        for p, X in blocks.items():
            v[p * n2:(p + 1) * n2] = vec(X)
        return v

    def initial_state(self, rho):
        """Physical block ``rho`` with every ADO set to zero."""
        return self.stack({0: np.asarray(rho, dtype=complex)})

    def adjoint_stack(self, v):
        """Map ``rho^(n,m) -> (rho^(m,n))^+`` over the whole stack."""
        out = np.zeros(self.D, dtype=complex)
        n2 = self.block_size
        for p, ix in enumerate(self.indices):
            q = self.indices.position(ix.mvec, ix.nvec)
            out[p * n2:(p + 1) * n2] = vec(self.block(v, q).conj().T)
        return out

    def scale(self):
        """Rate scale used for relative tolerances (max absolute row sum)."""
        return float(abs(self.matrix).sum(axis=1).max())


def assemble_heom(model, k_max):
    """Build the sparse HEOM generator for ``model`` truncated at ``k_max``.

    Block rows are targets. For retained ``(n, m)`` the generator couples

    * ``(n, m)`` to itself through ``-i[H, .] - sum_j (w_j n_j + w_j^* m_j)``,
      with ``w_j = kappa_j + i omega_j``;
    * ``(n - e_j, m)`` through ``G_j n_j L_j .``;
    * ``(n, m - e_j)`` through ``G_j^* m_j . L_j^+``;
    * ``(n + e_j, m)`` through ``[., L_j^+]``;
    * ``(n, m + e_j)`` through ``[L_j, .]``.

    Sources beyond the truncation are simply absent.

    Returns
    -------
    HeomLiouvillian
    """
    model.validate()
    if int(k_max) != k_max or k_max < 0:
        raise ValueError(f"k_max must be a nonnegative integer, got {k_max!r}")
    ixs = enumerate_indices(model.M, int(k_max))
    d = model.d
    K = ixs.K
    n2 = d * d

    damping = np.zeros(K, dtype=complex)
    for p, ix in enumerate(ixs):
        for j, ch in enumerate(model.channels):
            damping[p] += ch.w * ix.nvec[j] + np.conj(ch.w) * ix.mvec[j]

    eye_K = sp.identity(K, dtype=complex, format="csr")
    total = sp.kron(eye_K, commutator_superop(model.H), format="csr")
    total = total - sp.diags(np.repeat(damping, n2), format="csr")

    for j, ch in enumerate(model.channels):
        Lj = np.asarray(ch.L, dtype=complex)
        Ljd = Lj.conj().T
        blocks = {
            "A": lmul(Lj),
            "B": rmul(Ljd),
            "C": rmul(Ljd) - lmul(Ljd),
            "Cd": lmul(Lj) - rmul(Lj),
        }
        rows = {key: [] for key in blocks}
        cols = {key: [] for key in blocks}
        vals = {key: [] for key in blocks}

        def put(key, p, q, value):
            if q is not None and value != 0:
                rows[key].append(p)
                cols[key].append(q)
                vals[key].append(value)

        for p, ix in enumerate(ixs):
            n, m = list(ix.nvec), list(ix.mvec)
            if n[j] > 0:
                n[j] -= 1
                put("A", p, ixs.position(n, m), ch.G * ix.nvec[j])
                n[j] += 1
            if m[j] > 0:
                m[j] -= 1
                put("B", p, ixs.position(n, m), np.conj(ch.G) * ix.mvec[j])
                m[j] += 1
            n[j] += 1
            put("C", p, ixs.position(n, m), 1.0)
            n[j] -= 1
            m[j] += 1
            put("Cd", p, ixs.position(n, m), 1.0)
            m[j] -= 1

        for key, blk in blocks.items():
            if not vals[key]:
                continue
            pattern = sp.csr_matrix(
                (np.asarray(vals[key], dtype=complex), (rows[key], cols[key])),
                shape=(K, K))
            total = total + sp.kron(pattern, blk, format="csr")

    matrix = total.tocsc()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return HeomLiouvillian(matrix=matrix, indices=ixs, model=model, d=d)


def write_triplets(path, matrix):
    """Dump a sparse matrix as ``"D nnz"`` then ``"row col re im"`` lines."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{coo.shape[0]} {coo.nnz}\n")
        for k in order:
            z = coo.data[k]
            fh.write(f"{coo.row[k]} {coo.col[k]} {z.real:.17g} {z.imag:.17g}\n")


def read_triplets(path):
    """Inverse of :func:`write_triplets`; returns a CSC matrix."""
    with open(path, encoding="utf-8") as fh:
        D, nnz = (int(x) for x in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 4))
    if data.shape[0] != nnz:
        raise ValueError(f"header promises {nnz} entries, found {data.shape[0]}")
    rows = data[:, 0].astype(int)
    cols = data[:, 1].astype(int)
    vals = data[:, 2] + 1j * data[:, 3]
    return sp.csc_matrix((vals, (rows, cols)), shape=(D, D))
