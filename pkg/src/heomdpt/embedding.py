"""
Markovian embeddings used as independent oracles for the hierarchy.

* :func:`assemble_markovian` builds the Lindblad generator of the system
  plus one damped bosonic pseudo-mode per channel, truncated at ``Nc``
  Fock levels.
* :func:`assemble_lindblad` builds plain system-only Lindblad generators;
  named presets cover collective decay, ``Sx`` dephasing-like decay and the
  adiabatically eliminated pseudo-mode model.
* :func:`ado_moment` turns hierarchy traces into pseudo-mode moments.
* :func:`convergence_measures` and :func:`select_cutoff` implement the
  truncation-selection rule comparing successive truncations.

Dissipators follow ``D[o] rho = 2 o rho o^+ - {o^+ o, rho}``.
Enlarged-space ordering is system-major: ``|s> (x) |n_1> (x) ... (x) |n_M>``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, UnsupportedEmbeddingError
from .hierarchy import ado_count, assemble_heom
from .models import lmg_hamiltonian
from .operators import (build_boson, build_spin, commutator_superop,
                        dissipator_superop, unvec, vec)
from .spectra import SteadyState, sector_gaps, steady_state
from .symmetry import build_u1, build_z2

__all__ = [
    "MarkovLiouvillian",
    "LindbladGenerator",
    "ConvergenceReport",
    "assemble_markovian",
    "assemble_lindblad",
    "lindblad_preset",
    "LINDBLAD_PRESETS",
    "LINDBLAD_ALIASES",
    "canonical_lindblad_name",
    "partial_trace_modes",
    "ado_moment",
    "convergence_measures",
    "select_cutoff",
    "matched_selection",
    "dim_ratio",
    "default_symmetry",
    "tracked_eigenvalue",
]


class _VectorizedGenerator:
    """Shared helpers for generators acting on one vectorized operator."""

    @property
    def D(self):
        return self.matrix.shape[0]

    def trace_functional(self):
        return vec(np.eye(self.dim, dtype=complex))

    def scale(self):
        return float(abs(self.matrix).sum(axis=1).max())

    def full_operator(self, v):
        return unvec(v, self.dim)


@dataclass(frozen=True)
class LindbladGenerator(_VectorizedGenerator):
    """Sparse Lindblad generator on the system space alone."""

    matrix: sp.csc_matrix
    H: np.ndarray
    jumps: tuple
    name: str = "custom"

    @property
    def dim(self):
        return self.H.shape[0]

    @property
    def d(self):
        return self.dim

    def physical(self, v):
        return unvec(v, self.dim)


@dataclass(frozen=True)
class MarkovLiouvillian(_VectorizedGenerator):
    """System plus truncated pseudo-modes, as one Lindblad generator."""

    matrix: sp.csc_matrix
    cutoffs: tuple
    model: object
    d: int
    modes: tuple = field(default=())

    @property
    def dim(self):
        return self.d * int(np.prod([nc + 1 for nc in self.cutoffs]))

    @property
    def bath_dim(self):
        return self.dim // self.d

    def physical(self, v):
        """Reduced system state (partial trace over every pseudo-mode)."""
        return partial_trace_modes(unvec(v, self.dim), self.d)

    def mode_operator(self, j, op):
        """Embed a single-mode operator ``op`` of channel ``j``."""
        return _embed(self.d, self.cutoffs, j, op)


def partial_trace_modes(rho_tot, d):
    """Trace out everything after the first ``d``-dimensional factor."""
    rho_tot = np.asarray(rho_tot)
    nb = rho_tot.shape[0] // d
    return np.einsum("ibjb->ij", rho_tot.reshape(d, nb, d, nb))


def _embed(d, cutoffs, j, op):
    factors = [sp.identity(d, dtype=complex, format="csr")]
    for k, nc in enumerate(cutoffs):
        if k == j:
            factors.append(sp.csr_matrix(op, dtype=complex))
        else:
            factors.append(sp.identity(nc + 1, dtype=complex, format="csr"))
    out = factors[0]
    for f in factors[1:]:
        out = sp.kron(out, f, format="csr")
    return out


def _system(d, cutoffs, op):
    nb = int(np.prod([nc + 1 for nc in cutoffs]))
    return sp.kron(sp.csr_matrix(op, dtype=complex),
                   sp.identity(nb, dtype=complex, format="csr"), format="csr")


def assemble_markovian(model, cutoffs=None, k_max=None):
    """Generator of the system coupled to damped pseudo-modes.

    ``H = H_S + sum_j omega_j a_j^+ a_j + sqrt(G_j)(L_j a_j^+ + L_j^+ a_j)``
    with dissipators ``kappa_j D[a_j]``.

    Parameters
    ----------
    model : ModelSpec
    cutoffs : int or sequence of int, optional
        Highest Fock level per channel; defaults to ``k_max``.
    k_max : int, optional
        Used only as the default cutoff.

    Raises
    ------
    UnsupportedEmbeddingError
        If some channel amplitude is complex or negative.
    """
    model.validate()
    M = model.M
    if cutoffs is None:
        if k_max is None:
            raise ValueError("give either cutoffs or k_max")
        cutoffs = k_max
    if np.isscalar(cutoffs):
        cutoffs = (int(cutoffs),) * M
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != M or min(cutoffs) < 0:
        raise ValueError(f"need {M} nonnegative cutoffs, got {cutoffs}")
    for j, ch in enumerate(model.channels):
        G = complex(ch.G)
        if abs(G.imag) > 1e-14 * max(abs(G), 1.0) or G.real < 0:
            raise UnsupportedEmbeddingError(
                f"channel {j} amplitude G = {ch.G} has no real square root; "
                f"only the hierarchy handles this bath")

    d = model.d
    H = _system(d, cutoffs, model.H)
    dissipators = []
    modes = []
    for j, ch in enumerate(model.channels):
        bos = build_boson(cutoffs[j])
        a = _embed(d, cutoffs, j, bos.a)
        ad = a.conj().T.tocsr()
        L = _system(d, cutoffs, ch.L)
        Ld = L.conj().T.tocsr()
        g = np.sqrt(complex(ch.G).real)
        H = H + ch.omega * (ad @ a) + g * (L @ ad + Ld @ a)
        dissipators.append(dissipator_superop(a, ch.kappa))
        modes.append(a)
    total = commutator_superop(H)
    for D in dissipators:
        total = total + D
    matrix = total.tocsc()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return MarkovLiouvillian(matrix=matrix, cutoffs=cutoffs, model=model, d=d,
                             modes=tuple(modes))


def assemble_lindblad(H, jumps, name="custom"):
    """Lindblad generator ``-i[H, .] + sum_k r_k D[c_k]``.

    Parameters
    ----------
    H : (d, d) array_like
        Hermitian Hamiltonian.
    jumps : sequence of (operator, rate)
        Rates must be nonnegative.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got {H.shape}")
    if np.linalg.norm(H - H.conj().T) > 1e-12 * max(np.linalg.norm(H), 1.0):
        raise ValueError("Hamiltonian is not Hermitian")
    total = commutator_superop(H)
    clean = []
    for c, rate in jumps:
        if rate < 0:
            raise ValueError(f"jump rate must be >= 0, got {rate}")
        c = np.asarray(c, dtype=complex)
        if c.shape != H.shape:
            raise ValueError(f"jump operator shape {c.shape} does not match "
                             f"H {H.shape}")
        total = total + dissipator_superop(c, rate)
        clean.append((c, float(rate)))
    matrix = sp.csc_matrix(total)
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return LindbladGenerator(matrix=matrix, H=H, jumps=tuple(clean), name=name)


def _lindblad_collective(N, V, gamma):
    s = build_spin(N)
    return assemble_lindblad(lmg_hamiltonian(s, V),
                             [(s.Sminus, gamma / (2 * N))],
                             name="lindblad_collective_decay")


def _lindblad_sx(N, V, gamma, h):
    s = build_spin(N)
    return assemble_lindblad(lmg_hamiltonian(s, V) + h * s.Sz,
                             [(s.Sx, gamma / (2 * N))], name="lindblad_sx")


def _lindblad_eliminated(N, V, gamma, kappa, omega):
    s = build_spin(N)
    den = kappa * kappa + omega * omega
    q1, q2 = kappa * kappa / den, kappa * omega / den
    rate = gamma / (2 * N)
    H = lmg_hamiltonian(s, V) - q2 * rate * (s.Splus @ s.Sminus)
    return assemble_lindblad(H, [(s.Sminus, q1 * rate)],
                             name="lindblad_eliminated")


LINDBLAD_PRESETS = {
    "lindblad_collective_decay": (_lindblad_collective, ("N", "V", "gamma")),
    "lindblad_sx": (_lindblad_sx, ("N", "V", "gamma", "h")),
    "lindblad_eliminated": (_lindblad_eliminated,
                            ("N", "V", "gamma", "kappa", "omega")),
}
# alternative names accepted in configuration files
LINDBLAD_ALIASES = {
    "lindblad_eq7": "lindblad_collective_decay",
    "lindblad_eq9": "lindblad_sx",
    "lindblad_eqS41": "lindblad_eliminated",
}


def canonical_lindblad_name(name):
    """Resolve an alias to its preset name; other names pass through."""
    return LINDBLAD_ALIASES.get(name, name)


def lindblad_preset(name, **params):
    """Spin-only reference generators.

    ``lindblad_collective_decay``
        ``H_LMG`` with collective decay ``(gamma/2N) D[S-]``.
    ``lindblad_sx``
        ``H_LMG + h Sz`` with ``(gamma/2N) D[Sx]``.
    ``lindblad_eliminated``
        Pseudo-mode adiabatically eliminated: decay rate scaled by ``q1``
        and a ``-q2 (gamma/2N) S+ S-`` Hamiltonian shift.
    """
    name = canonical_lindblad_name(name)
    if name not in LINDBLAD_PRESETS:
        raise ConfigError(f"unknown Lindblad preset {name!r}; choose from "
                          + ", ".join(sorted(LINDBLAD_PRESETS)))
    fn, keys = LINDBLAD_PRESETS[name]
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise ConfigError(f"preset {name!r} is missing parameter(s): "
                          + ", ".join(missing))
    kwargs = {k: float(params[k]) for k in keys}
    kwargs["N"] = int(kwargs["N"])
    return fn(**kwargs)


def ado_moment(heom, state, n, m, channel=0):
    """Normally ordered pseudo-mode moment ``<a^+^m a^n>`` from an ADO trace.

    With the hierarchy normalization used here, ``rho^(n,m)`` equals
    ``(i sqrt(G))^n (-i sqrt(G))^m Tr_B[a^n rho_tot a^+^m]``, so dividing its
    trace by that prefactor recovers the moment.
    """
    if heom.model.M != 1:
        raise ValueError("ado_moment is defined for single-channel models only")
    if channel != 0:
        raise ValueError(f"channel {channel} does not exist")
    if int(n) != n or int(m) != m or n < 0 or m < 0:
        raise ValueError(f"moment orders must be nonnegative integers, got "
                         f"({n}, {m})")
    p = heom.indices.position((int(n),), (int(m),))
    if p is None:
        raise ValueError(f"ADO ({n},{m}) lies beyond k_max={heom.k_max}")
    v = state.vector if isinstance(state, SteadyState) else np.asarray(state)
    root = np.sqrt(complex(heom.model.channels[0].G))
    norm = (1j * root) ** n * (-1j * root) ** m
    return complex(np.trace(heom.block(v, p)) / norm)


def dim_ratio(M, k_max, Nc, d):
    """``dim(HEOM) / dim(embedding) = K d^2 / (d^2 (Nc+1)^(2M))``."""
    for name, val, low in (("M", M, 1), ("k_max", k_max, 0), ("Nc", Nc, 0),
                           ("d", d, 1)):
        if int(val) != val or val < low:
            raise ValueError(f"{name} must be an integer >= {low}, got {val!r}")
    return ado_count(int(M), int(k_max)) / float((int(Nc) + 1) ** (2 * int(M)))


def default_symmetry(heom):
    """Z2 parity for single-channel models, U(1) for the two-mode model."""
    if heom.model.M == 2:
        return build_u1(heom)
    return build_z2(heom)


def tracked_eigenvalue(heom, selector):
    """Evaluate a named eigenvalue of ``heom``.

    ``"gap"``
        Slowest nonzero eigenvalue of the trivial sector.
    ``"sector:k"``
        Slowest eigenvalue of charge sector ``k``.
    callable
        ``selector(heom) -> complex``.
    """
    if callable(selector):
        return complex(selector(heom))
    sym = default_symmetry(heom)
    if selector == "gap":
        return complex(sector_gaps(heom, sym, charges=(0,), count=2)[0][1])
    if isinstance(selector, str) and selector.startswith("sector:"):
        k = int(selector.split(":", 1)[1])
        return complex(sector_gaps(heom, sym, charges=(k,), count=1)[k][0])
    raise ValueError(f"unknown eigenvalue selector {selector!r}")


@dataclass
class ConvergenceReport:
    k_values: np.ndarray
    C: np.ndarray
    S: np.ndarray
    observable: np.ndarray
    eigenvalues: np.ndarray
    eps: float
    selected_k_max: int = None
    selected_Nc: int = None
    cutoff_values: np.ndarray = None
    C_cutoff: np.ndarray = None
    cutoff_observable: np.ndarray = None

    def observable_at(self, k):
        return self.observable[list(self.k_values).index(k)]

    def cutoff_observable_at(self, nc):
        return self.cutoff_observable[list(self.cutoff_values).index(nc)]


def _first_below(values, keys, eps):
    for k, c in zip(keys, values):
        if c < eps:
            return int(k)
    return None


def convergence_measures(model, k_max_range, O, selector=None, eps=1e-3):
    """Successive-truncation differences of ``<O>`` and of an eigenvalue.

    ``C[i] = |<O>(k_i) - <O>(k_i + 1)|`` and ``S[i] = |lambda(k_i) -
    lambda(k_i + 1)|`` for each ``k_i`` in ``k_max_range``; the selected
    ``k_max`` is the first ``k_i`` with ``C[i] < eps``.
    """
    ks = sorted(int(k) for k in k_max_range)
    if not ks or ks != list(k_max_range):
        raise ValueError("k_max_range must be a nonempty ascending sequence")
    levels = ks + [ks[-1] + 1]
    obs, lam = {}, {}
    for k in levels:
        heom = assemble_heom(model, k)
        sym = default_symmetry(heom)
        ss = steady_state(heom, sym=sym, charge=0)
        obs[k] = float(np.real(np.trace(np.asarray(O) @ ss.rho)))
        lam[k] = (tracked_eigenvalue(heom, selector) if selector is not None
                  else np.nan)
    C = np.array([abs(obs[k] - obs[k + 1]) for k in ks])
    S = np.array([abs(lam[k] - lam[k + 1]) for k in ks])
    return ConvergenceReport(
        k_values=np.array(ks), C=C, S=S,
        observable=np.array([obs[k] for k in ks]),
        eigenvalues=np.array([lam[k] for k in ks], dtype=complex),
        eps=float(eps), selected_k_max=_first_below(C, ks, eps))


def select_cutoff(model, cutoff_range, O, eps=1e-3):
    """First Fock cutoff whose steady ``<O>`` moves by less than ``eps``.

    Returns
    -------
    selected : int or None
    C : ndarray
    values : ndarray
        Steady ``<O>`` at each cutoff in ``cutoff_range``.
    """
    ncs = [int(c) for c in cutoff_range]
    levels = ncs + [ncs[-1] + 1]
    obs = {}
    for nc in levels:
        gen = assemble_markovian(model, cutoffs=nc)
        ss = steady_state(gen)
        obs[nc] = float(np.real(np.trace(np.asarray(O) @ ss.rho)))
    C = np.array([abs(obs[nc] - obs[nc + 1]) for nc in ncs])
    return _first_below(C, ncs, eps), C, np.array([obs[nc] for nc in ncs])


def matched_selection(model, O, eps=1e-3, k_max_range=range(1, 11),
                      cutoff_range=range(1, 16)):
    """Select ``k_max`` and ``Nc`` independently with the same threshold."""
    rep = convergence_measures(model, list(k_max_range), O, eps=eps)
    nc, Cn, vals = select_cutoff(model, list(cutoff_range), O, eps=eps)
    rep.selected_Nc = nc
    rep.cutoff_values = np.array(list(cutoff_range))
    rep.C_cutoff = Cn
    rep.cutoff_observable = vals
    return rep
