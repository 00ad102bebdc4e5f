import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from heomdpt.errors import NotASymmetryError
from heomdpt.hierarchy import Channel, ModelSpec, assemble_heom
from heomdpt.models import preset
from heomdpt.operators import build_spin
from heomdpt.spectra import steady_state
from heomdpt.symmetry import (WeakSymmetry, block_restrict, build_u1, build_z2,
                              charge_labels, verify_weak_symmetry)

from conftest import lmg


def dicke(N=4, k=2, g=0.5):
    m = preset("dicke_two_mode", N=N, g=g, kappa=5, omega=5, omega0=1)
    return m, assemble_heom(m, k)


def test_z2_charges_simple_elements():
    _, heom = lmg(N=4, k_max=2)
    sym = build_z2(heom)
    d = heom.d
    assert verify_weak_symmetry(heom, sym) < 1e-12
    for m in range(d):
        assert sym.charges[m * d + m] == 0
    p = heom.indices.position((1,), (0,))
    assert all(sym.charges[p * d * d + m * d + m] == 1 for m in range(d))


def test_charges_partition():
    _, heom = lmg(N=3, k_max=3)
    sym = build_z2(heom)
    assert sum(sym.sector_sizes().values()) == heom.D
    assert set(sym.sectors) == {0, 1}
    with pytest.raises(ValueError):
        block_restrict(heom, sym, 5)


def test_u1_on_dicke_and_orbit_count():
    _, heom = dicke()
    sym = build_u1(heom)
    assert verify_weak_symmetry(heom, sym) < 1e-12
    d = heom.d
    assert all(sym.charges[m * d + m] == 0 for m in range(d))
    # the sectors cannot be finer than the connected pieces of L's graph
    ncomp, _ = connected_components(abs(heom.matrix) > 0, directed=False)
    assert len(sym.sectors) <= ncomp
    for q in sym.sectors:
        idx = sym.basis(q)
        sub = heom.matrix.tocsr()[idx][:, idx]
        n, _ = connected_components(abs(sub) > 0, directed=False)
        assert n >= 1


def test_flipped_sign_is_rejected():
    _, heom = dicke()
    good = build_u1(heom)
    flipped = (-good.signs[0], good.signs[1])
    q = charge_labels(heom, flipped)
    bad = WeakSymmetry("U1", q, flipped, good.levels)
    assert verify_weak_symmetry(heom, bad) > 0.1
    with pytest.raises(NotASymmetryError):
        build_u1(heom, signs=flipped)


def test_zero_generator_any_labeling():
    s = build_spin(2)
    heom = assemble_heom(ModelSpec(0 * s.Sz, [Channel(s.Sminus, 0.0, 0.0, 1.0)]),
                         1)
    heom.matrix.data[:] = 0
    heom.matrix.eliminate_zeros()
    q = np.arange(heom.D) % 3
    assert verify_weak_symmetry(heom, WeakSymmetry("U1", q, (1,), None)) == 0


def _match(a, b, tol=1e-8):
    a, b = list(a), list(b)
    assert len(a) == len(b)
    for x in a:
        j = int(np.argmin(np.abs(np.asarray(b) - x)))
        assert abs(b[j] - x) < tol * (1 + abs(x))
        b.pop(j)


def test_block_spectra_union_equals_full():
    _, heom = lmg(N=4, k_max=2, V=0.4)
    sym = build_z2(heom)
    full = la.eigvals(heom.matrix.toarray())
    parts = []
    for q in sym.sectors:
        block, basis = block_restrict(heom, sym, q)
        parts.extend(la.eigvals(block.toarray()))
    _match(full, parts, tol=1e-7)
    b0, _ = block_restrict(heom, sym, 0)
    assert np.min(np.abs(la.eigvals(b0.toarray()))) < 1e-8


@pytest.mark.parametrize("which", ["z2", "u1"])
def test_steady_state_in_trivial_sector(which):
    if which == "z2":
        _, heom = lmg(N=4, k_max=3, V=0.4)
        sym = build_z2(heom)
    else:
        _, heom = dicke()
        sym = build_u1(heom)
    ss = steady_state(heom)
    outside = sym.charges != 0
    assert np.linalg.norm(ss.vector[outside]) < 1e-10
