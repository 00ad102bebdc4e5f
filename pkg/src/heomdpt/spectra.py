"""
Steady states, ordered spectra, symmetry-sector gaps, time propagation and
the phase-reconstruction analysis built on top of them.

All routines accept any *generator* object exposing ``matrix`` (sparse,
square), ``trace_functional()``, ``physical(v)`` and ``scale()``;
:class:`~heomdpt.hierarchy.HeomLiouvillian` and the Lindblad / embedding
generators of :mod:`heomdpt.embedding` all qualify.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (DegenerateSteadyStateError, NotRealEigenvalueError,
                     SolverFailure, StiffnessError)
from .symmetry import block_restrict

__all__ = [
    "SpectrumResult",
    "SteadyState",
    "Trajectory",
    "steady_state",
    "ordered_spectrum",
    "sector_gaps",
    "sector_eigenpair",
    "propagate",
    "reconstruct_phases",
    "fix_hermitian_phase",
    "fidelity",
    "expectation",
    "order_eigenvalues",
    "DENSE_THRESHOLD",
    "REALITY_THRESHOLD",
]

DENSE_THRESHOLD = 6000
REALITY_THRESHOLD = 1e-8
KRYLOV_MIN = 64
PSD_CLIP = 1e-8


def order_eigenvalues(values):
    """Permutation sorting by ``|Re|``, then ``|Im|``, then ``Im >= 0`` first."""
    values = np.asarray(values)
    return np.lexsort((values.imag < 0, np.abs(values.imag),
                       np.abs(values.real)))


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray = None
    charge: int = None
    scale: float = 1.0
    method: str = "dense"

    def __len__(self):
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]


@dataclass
class SteadyState:
    vector: np.ndarray
    rho: np.ndarray
    residual: float
    hermiticity_deviation: float
    min_eigenvalue: float
    method: str

    @property
    def d(self):
        return self.rho.shape[0]


def _matrix(op):
    return op.matrix if hasattr(op, "matrix") else sp.csc_matrix(op)


def _scale(op):
    if hasattr(op, "scale"):
        return op.scale()
    return float(abs(sp.csr_matrix(op)).sum(axis=1).max())


def _state_diagnostics(rho):
    herm = rho - rho.conj().T
    dev = float(np.linalg.norm(herm))
    wmin = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    return dev, wmin


def steady_state(gen, sym=None, charge=0, refine=3):
    """Stationary state of ``gen`` normalized to unit physical trace.

    Solves the bordered system in which one row of the generator is replaced
    by the physical-trace functional; the right-hand side is the matching
    unit vector. When a weak symmetry is supplied only the ``charge`` sector
    is factorized (the unique steady state lives in the trivial sector).
    Falls back to a shift-invert eigensolve at 0 when the bordered system
    is singular.

    Raises
    ------
    DegenerateSteadyStateError
        If the zero eigenvalue is not simple.
    """
    full = _matrix(gen)
    D = full.shape[0]
    ell_full = gen.trace_functional()
    if sym is not None:
        A, basis = block_restrict(full, sym, charge)
    else:
        A, basis = full.tocsc(), np.arange(D)
    ell = ell_full[basis]
    scale = _scale(gen)

    candidates = np.flatnonzero(np.abs(ell) > 0)
    if candidates.size == 0:
        raise DegenerateSteadyStateError(
            f"sector {charge} carries no physical trace")
    anchor = int(candidates[0])
    n = A.shape[0]
    keep = np.ones(n)
    keep[anchor] = 0.0
    bordered = (sp.diags(keep) @ A.tocsr()
                + sp.csr_matrix((ell[candidates],
                                 (np.full(candidates.size, anchor),
                                  candidates)), shape=(n, n))).tocsc()
    rhs = np.zeros(n, dtype=complex)
    rhs[anchor] = 1.0

    method = "bordered"
    try:
        lu = spla.splu(bordered)
        x = lu.solve(rhs)
        for _ in range(refine):
            r = rhs - bordered @ x
            if np.linalg.norm(r) <= 1e-14 * np.linalg.norm(x):
                break
            x = x + lu.solve(r)
        if not np.all(np.isfinite(x)):
            raise RuntimeError("non-finite bordered solution")
    except RuntimeError:
        method = "eigs"
        x = _null_vector_eigs(A, scale)

    v = np.zeros(D, dtype=complex)
    v[basis] = x
    tr = ell_full @ v
    if abs(tr) == 0:
        raise DegenerateSteadyStateError("steady-state candidate is traceless")
    v = v / tr
    resid = float(np.linalg.norm(full @ v) / np.linalg.norm(v))
    if resid > 1e-9 * scale and method == "bordered":
        method = "eigs"
        x = _null_vector_eigs(A, scale)
        v = np.zeros(D, dtype=complex)
        v[basis] = x
        v = v / (ell_full @ v)
        resid = float(np.linalg.norm(full @ v) / np.linalg.norm(v))
    rho = gen.physical(v)
    dev, wmin = _state_diagnostics(rho)
    return SteadyState(vector=v, rho=rho, residual=resid,
                       hermiticity_deviation=dev, min_eigenvalue=wmin,
                       method=method)


def _null_vector_eigs(A, scale):
    n = A.shape[0]
    if n <= DENSE_THRESHOLD:
        w, V = la.eig(A.toarray())
    else:
        try:
            w, V = spla.eigs(A, k=min(4, n - 2), sigma=1e-9 * scale,
                             which="LM", tol=1e-12)
        except (spla.ArpackNoConvergence, RuntimeError) as exc:
            raise SolverFailure(f"shift-invert steady-state solve failed: "
                                f"{exc}") from exc
    order = order_eigenvalues(w)
    w, V = w[order], V[:, order]
    if len(w) > 1 and abs(w[1]) < 1e-9 * scale:
        raise DegenerateSteadyStateError(
            f"zero eigenvalue is degenerate: lambda_1 = {w[1]:.3e}")
    return V[:, 0]


def ordered_spectrum(gen, count=None, vectors=False,
                     dense_threshold=DENSE_THRESHOLD, sigma=None, ncv=None):
    """Eigenvalues ordered by ``|Re|`` (slowest first).

    Parameters
    ----------
    gen : generator object or sparse matrix
    count : int, optional
        Number of eigenvalues to return; all of them for dense solves when
        omitted.
    vectors : bool
        Also return right eigenvectors (columns).
    dense_threshold : int
        Dimensions up to this use a full dense eigendecomposition; larger
        problems use ARPACK in shift-invert mode around ``sigma``.
    """
    A = _matrix(gen)
    n = A.shape[0]
    scale = _scale(gen)
    if count is not None and count < 1:
        raise ValueError("count must be >= 1")
    if n <= dense_threshold:
        if vectors:
            w, V = la.eig(A.toarray())
        else:
            w, V = la.eigvals(A.toarray()), None
        method = "dense"
    else:
        want = 6 if count is None else count
        nev = min(n - 2, max(2 * want, want + 8))
        shift = 1e-7 * scale if sigma is None else sigma
        if ncv is None:
            # a wide Krylov space avoids many restarts when the slowest
            # modes are oscillating and hence not the closest to the shift
            ncv = min(n - 1, max(2 * nev + 1, KRYLOV_MIN))
        try:
            w, V = spla.eigs(A, k=nev, sigma=shift, which="LM", tol=1e-11,
                             ncv=ncv, return_eigenvectors=True)
        except spla.ArpackNoConvergence as exc:
            raise SolverFailure(
                f"ARPACK did not converge for n={n}, nev={nev}: "
                f"{len(exc.eigenvalues)} eigenvalues converged") from exc
        method = "shift-invert"
        if not vectors:
            V = None
    order = order_eigenvalues(w)
    if count is not None:
        order = order[:count]
    w = w[order]
    if V is not None:
        V = V[:, order]
    return SpectrumResult(eigenvalues=w, vectors=V, scale=scale, method=method)


def sector_eigenpair(heom, sym, charge, index=0, **kwargs):
    """Eigenvalue ``index`` of one sector and its eigenvector in full space."""
    block, basis = block_restrict(heom, sym, charge)
    res = ordered_spectrum(block, count=index + 1, vectors=True, **kwargs)
    v = np.zeros(heom.D, dtype=complex)
    v[basis] = res.vectors[:, index]
    return res.eigenvalues[index], v


def sector_gaps(heom, sym, charges=None, count=2, workers=1, **kwargs):
    """Slowest eigenvalues of each symmetry sector.

    Returns
    -------
    dict
        ``{charge: ndarray of the `count` slowest eigenvalues}``; for the
        trivial sector entry 0 is the steady-state zero mode and entry 1 the
        gap.
    """
    charges = sym.sectors if charges is None else tuple(charges)

    def one(q):
        block, _ = block_restrict(heom, sym, q)
        k = min(count, block.shape[0])
        res = ordered_spectrum(block, count=k, **kwargs)
        return q, res.eigenvalues

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one, charges))
    else:
        pairs = [one(q) for q in charges]
    return dict(pairs)


@dataclass
class Trajectory:
    t: np.ndarray
    expectations: dict
    physical_trace: np.ndarray
    ado_traces: dict
    states: np.ndarray = None


def propagate(gen, initial, t_grid, observables=None, ado_positions=(),
              rtol=1e-10, atol=1e-12, store_states=False):
    """Integrate ``d|rho>>/dt = L |rho>>`` with an adaptive 8th-order scheme.

    Parameters
    ----------
    initial : ndarray
        Stacked initial state (e.g. ``heom.initial_state(rho0)``).
    t_grid : sequence of float
        Ascending output times starting at 0.
    observables : dict, optional
        ``{name: operator}`` evaluated on the physical block.
    ado_positions : sequence of int
        Hierarchy positions whose traces are recorded.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0:
        raise ValueError("t_grid must be a 1-d sequence starting at 0")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    A = _matrix(gen).tocsr()
    y0 = np.asarray(initial, dtype=complex)
    observables = observables or {}

    if t_grid.size == 1:
        Y = y0[:, None]
    else:
        sol = solve_ivp(lambda t, y: A @ y, (0.0, t_grid[-1]), y0,
                        method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
        if sol.status != 0:
            raise StiffnessError(
                f"integration stopped at t={sol.t[-1] if sol.t.size else 0:.4g}:"
                f" {sol.message}; try a shorter kappa*t span")
        Y = sol.y
        Y[:, 0] = y0

    ell = gen.trace_functional()
    traces = ell @ Y
    expect = {name: np.empty(t_grid.size, dtype=complex) for name in observables}
    ado = {p: np.empty(t_grid.size, dtype=complex) for p in ado_positions}
    for k in range(t_grid.size):
        rho = gen.physical(Y[:, k])
        for name, O in observables.items():
            expect[name][k] = np.trace(np.asarray(O) @ rho)
        for p in ado_positions:
            ado[p][k] = np.trace(gen.block(Y[:, k], p))
    return Trajectory(t=t_grid, expectations=expect, physical_trace=traces,
                      ado_traces=ado, states=Y if store_states else None)


def fix_hermitian_phase(X):
    """Remove the global phase that keeps ``X`` from being Hermitian.

    An eigenvector block of a real eigenvalue is Hermitian up to ``e^{i t}``;
    since ``Tr(X X) = e^{2 i t} Tr(H^2)`` the phase is recovered modulo pi,
    leaving Hermitian input untouched.
    """
    X = np.asarray(X, dtype=complex)
    t2 = np.trace(X @ X)
    if abs(t2) == 0:
        return X
    theta = 0.5 * np.angle(t2)
    return X * np.exp(-1j * theta)


def reconstruct_phases(rho1, eigenvalue=None, scale=1.0,
                       threshold=REALITY_THRESHOLD):
    """Split a traceless slow mode into two orthogonal density operators.

    The Hermitian part of ``rho1`` is diagonalized; positive eigenvalues
    build ``rho_plus``, the negated negative ones ``rho_minus``, each then
    normalized to unit trace.

    Returns
    -------
    rho_plus, rho_minus : ndarray

    Raises
    ------
    NotRealEigenvalueError
        If ``eigenvalue`` has an imaginary part above ``threshold * scale``.
    """
    if eigenvalue is not None:
        if abs(np.imag(eigenvalue)) > threshold * max(scale, abs(eigenvalue)):
            raise NotRealEigenvalueError(
                f"eigenvalue {eigenvalue:.6g} is not real within "
                f"{threshold:g} (relative)")
    X = np.asarray(rho1, dtype=complex)
    H = 0.5 * (X + X.conj().T)
    w, U = np.linalg.eigh(H)
    pos, neg = w > 0, w < 0
    if not pos.any() or not neg.any():
        raise ValueError("slow mode must have eigenvalues of both signs")
    rho_p = (U[:, pos] * w[pos]) @ U[:, pos].conj().T
    rho_m = (U[:, neg] * -w[neg]) @ U[:, neg].conj().T
    return rho_p / np.trace(rho_p).real, rho_m / np.trace(rho_m).real


def _psd_sqrt(A):
    w, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    w = np.clip(w, 0.0, None)
    return (U * np.sqrt(w)) @ U.conj().T


def _check_density(A, name):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if abs(np.trace(A) - 1) > 1e-6:
        raise ValueError(f"{name} must have unit trace, got {np.trace(A):.6g}")
    wmin = np.linalg.eigvalsh(0.5 * (A + A.conj().T)).min()
    if wmin < -PSD_CLIP * max(1.0, np.abs(A).max()) * 1e2:
        raise ValueError(f"{name} is not positive semidefinite "
                         f"(min eigenvalue {wmin:.3e})")
    return A


def fidelity(A, B):
    """Uhlmann fidelity ``Tr sqrt(sqrt(A) B sqrt(A))`` (not squared)."""
    A = _check_density(A, "A")
    B = _check_density(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    sA = _psd_sqrt(A)
    inner = sA @ B @ sA
    w = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0, None)
    return float(min(1.0, np.sqrt(w).sum()))


def expectation(state, O):
    """``Tr[O rho]`` on the physical block of ``state``."""
    rho = state.rho if isinstance(state, SteadyState) else np.asarray(state)
    O = np.asarray(O)
    if O.shape != rho.shape:
        raise ValueError(f"operator shape {O.shape} does not match state "
                         f"{rho.shape}")
    return complex(np.trace(O @ rho))
