import numpy as np
import pytest
import scipy.linalg as la

from heomdpt.embedding import assemble_markovian, lindblad_preset
from heomdpt.errors import NotRealEigenvalueError
from heomdpt.hierarchy import Channel, ModelSpec, assemble_heom
from heomdpt.models import preset
from heomdpt.operators import build_boson, build_spin, vec
from heomdpt.spectra import (expectation, fidelity, order_eigenvalues,
                             ordered_spectrum, propagate, reconstruct_phases,
                             sector_gaps, steady_state)
from heomdpt.symmetry import build_z2

from conftest import lmg, random_density


def test_comparator():
    vals = np.array([-2.0, -0.1 + 1j, -0.1 - 1j, 0.0, -0.1, -0.3 + 0.5j])
    out = vals[order_eigenvalues(vals)]
    assert out[0] == 0
    assert out[1] == -0.1
    assert out[2] == -0.1 + 1j and out[3] == -0.1 - 1j
    assert out[-1] == -2.0


@pytest.mark.parametrize("N,kappa", [(2, 1.0), (5, 3.0)])
def test_dark_state_at_zero_interaction(N, kappa):
    model = preset("lmg_collective_decay", N=N, V=0.0, gamma=1, kappa=kappa,
                   omega=1.3)
    heom = assemble_heom(model, 3)
    ss = steady_state(heom)
    target = np.zeros((N + 1, N + 1))
    target[-1, -1] = 1
    assert np.allclose(ss.rho, target, atol=1e-10)
    assert np.linalg.norm(ss.vector[heom.d ** 2:]) < 1e-10
    s = build_spin(N)
    assert expectation(ss, s.Sz).real == pytest.approx(-N / 2)
    assert expectation(ss, np.eye(N + 1)) == pytest.approx(1)


def test_steady_state_invariants():
    model, heom = lmg(N=6, k_max=4, V=0.4)
    ss = steady_state(heom)
    assert np.trace(ss.rho) == pytest.approx(1, abs=1e-14)
    assert ss.hermiticity_deviation < 1e-8
    assert ss.min_eigenvalue > -1e-8
    assert ss.residual < 1e-9 * heom.scale()


def test_markov_regime_magnetization():
    model = preset("lmg_collective_decay", N=10, V=0.1, gamma=1, kappa=50,
                   omega=1)
    ss = steady_state(assemble_heom(model, 2))
    assert expectation(ss, build_spin(10).Sz).real / 5 < -0.9


def test_markov_regime_matches_lindblad():
    N = 4
    s = build_spin(N)
    for V in (0.2, 0.6):
        model = preset("lmg_collective_decay", N=N, V=V, gamma=1, kappa=50,
                       omega=1)
        heom = steady_state(assemble_heom(model, 3))
        lind = steady_state(lindblad_preset("lindblad_collective_decay", N=N, V=V, gamma=1))
        diff = expectation(heom, s.Sz) - expectation(lind, s.Sz)
        assert abs(diff.real) / (N / 2) < 1e-2


def test_spectrum_zero_mode_and_pairing():
    _, heom = lmg(N=3, k_max=3, V=0.5)
    res = ordered_spectrum(heom)
    assert res.method == "dense"
    lam = res.eigenvalues
    assert abs(lam[0]) < 1e-8
    for x in lam:
        if abs(x.imag) > 1e-9:
            assert np.min(np.abs(lam - np.conj(x))) < 1e-8 * (1 + abs(x))


def test_iterative_matches_dense():
    _, heom = lmg(N=4, k_max=3, V=0.5)
    dense = ordered_spectrum(heom).eigenvalues[:4]
    it = ordered_spectrum(heom, count=4, dense_threshold=10).eigenvalues
    assert np.allclose(dense, it, atol=1e-8)


def test_zero_coupling_spectrum():
    s = build_spin(2)
    H = s.Sx + 0.4 * s.Sz @ s.Sz
    heom = assemble_heom(ModelSpec(H, [Channel(s.Sminus, 0.0, 1, 1)]), 1)
    lam = ordered_spectrum(heom.matrix[:9, :9]).eigenvalues
    E = la.eigvalsh(H)
    allowed = (-1j * (E[:, None] - E[None, :])).ravel()
    assert all(np.min(np.abs(allowed - x)) < 1e-9 for x in lam)


def test_sector_gaps_structure():
    _, heom = lmg(N=4, k_max=3, V=0.5)
    sym = build_z2(heom)
    gaps = sector_gaps(heom, sym, count=2)
    assert abs(gaps[0][0]) < 1e-8
    assert gaps[0][1].real < -1e-6
    assert gaps[1][0].real < -1e-6
    full = ordered_spectrum(heom).eigenvalues
    assert np.min(np.abs(full - gaps[1][0])) < 1e-8


def test_property_v_trace_zero_modes():
    _, heom = lmg(N=3, k_max=3, V=0.4)
    res = ordered_spectrum(heom, vectors=True)
    ell = heom.trace_functional()
    for lam, v in zip(res.eigenvalues, res.vectors.T):
        if abs(lam.real) > 1e-6:
            assert abs(ell @ (v / np.linalg.norm(v))) < 1e-8


def test_reconstruct_phases_examples():
    p, m = reconstruct_phases(np.diag([0.5, -0.5]))
    assert np.allclose(p, np.diag([1, 0]))
    assert np.allclose(m, np.diag([0, 1]))
    sx = np.array([[0, 1], [1, 0]]) / 2
    p, m = reconstruct_phases(sx)
    plus = np.array([[1, 1], [1, 1]]) / 2
    minus = np.array([[1, -1], [-1, 1]]) / 2
    assert np.allclose(p, plus) and np.allclose(m, minus)
    assert abs(np.trace(p.conj().T @ m)) < 1e-14


def test_reconstruct_phases_refuses_complex_mode():
    with pytest.raises(NotRealEigenvalueError):
        reconstruct_phases(np.diag([0.5, -0.5]), eigenvalue=-0.1 + 0.2j)


def test_fidelity_examples(rng):
    zero = np.diag([1.0, 0.0])
    one = np.diag([0.0, 1.0])
    assert fidelity(zero, np.eye(2) / 2) == pytest.approx(1 / np.sqrt(2))
    assert fidelity(zero, one) == pytest.approx(0, abs=1e-12)
    A, B = random_density(rng, 4), random_density(rng, 4)
    assert fidelity(A, A) == pytest.approx(1, abs=1e-10)
    assert fidelity(A, B) == pytest.approx(fidelity(B, A), abs=1e-10)
    with pytest.raises(ValueError):
        fidelity(2 * A, B)
    with pytest.raises(ValueError):
        fidelity(np.ones((2, 3)), B)


def test_propagation_basics():
    model, heom = lmg(N=2, k_max=4, V=0.5)
    s = build_spin(2)
    rho0 = np.zeros((3, 3))
    rho0[0, 0] = 1
    y0 = heom.initial_state(rho0)
    one = propagate(heom, y0, [0.0], observables={"sz": s.Sz})
    assert one.expectations["sz"][0] == pytest.approx(1)
    t = np.linspace(0, 10, 41)
    tr = propagate(heom, y0, t)
    assert np.max(np.abs(tr.physical_trace - 1)) < 1e-9


def test_propagation_moment_against_embedding():
    N = 2
    model = preset("lmg_collective_decay", N=N, V=0.7, gamma=1, kappa=1,
                   omega=1)
    heom = assemble_heom(model, 6)
    emb = assemble_markovian(model, cutoffs=(8,))
    s = build_spin(N)
    # a superposition breaks parity so that <a> is not identically zero
    psi = np.array([1, 1, 0]) / np.sqrt(2)
    rho0 = np.outer(psi, psi)
    t = np.linspace(0, 5, 26)
    p10 = heom.indices.position((1,), (0,))
    tr = propagate(heom, heom.initial_state(rho0), t, ado_positions=[p10])
    G = model.channels[0].G
    a_heom = tr.ado_traces[p10] / (1j * np.sqrt(G))
    vac = np.zeros((9, 9))
    vac[0, 0] = 1
    a_op = emb.mode_operator(0, build_boson(8).a)
    te = propagate(emb, vec(np.kron(rho0, vac)), t, store_states=True)
    a_emb = np.array([np.trace(a_op @ emb.full_operator(y))
                      for y in te.states.T])
    assert np.max(np.abs(a_emb)) > 1e-2
    assert np.max(np.abs(a_heom - a_emb)) < 1e-4


def test_long_time_matches_steady_state():
    model, heom = lmg(N=3, k_max=4, V=0.2, kappa=3.0)
    s = build_spin(3)
    ss = steady_state(heom)
    rho0 = np.zeros((4, 4))
    rho0[0, 0] = 1
    tr = propagate(heom, heom.initial_state(rho0), [0, 25, 50],
                   observables={"sz": s.Sz})
    assert abs(tr.expectations["sz"][-1] - expectation(ss, s.Sz)) < 1e-6
