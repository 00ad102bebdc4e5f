import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heomdpt.errors import DivergenceError
from heomdpt.meanfield import (QFactors, cartesian_from_spherical,
                               critical_points, equator_eigenvalues,
                               fixed_points, integrate_trajectory, jacobian,
                               pole_eigenvalues, rhs, slaved_amplitude,
                               stability)


def m1(V=0.3, kappa=1.0, omega=1.0, gamma=1.0, N=20):
    return dict(V=V, gamma=gamma, kappa=kappa, omega=omega, N=N)


def test_pole_of_full_model_is_stationary():
    p = m1()
    assert np.allclose(rhs("model1_full", p, [0, 0, 0, 0, -10]), 0)


def test_markov_limit_substitution():
    p = m1(V=0.4, kappa=1.0, omega=0.0)
    y = np.array([1.0, 2.0, -3.0])
    N, V, g = 20, 0.4, 1.0
    sx, sy, sz = y
    expect = [-2 * V / N * sy * sz + g / N * sz * sx,
              -2 * V / N * sx * sz + g / N * sz * sy,
              4 * V / N * sx * sy - g / N * (sx * sx + sy * sy)]
    assert np.allclose(rhs("model1_spin", p, y), expect)


def test_spherical_chain_rule(rng):
    p = m1(V=0.37, kappa=1.3, omega=0.8)
    r = p["N"] / 2
    for _ in range(20):
        phi, theta = rng.uniform(0, 2 * np.pi), rng.uniform(0.05, np.pi - 0.05)
        dphi, dtheta = rhs("model1_spherical", p, [phi, theta])
        st, ct, sp_, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
        jac = r * np.array([[-st * sp_, ct * cp], [st * cp, ct * sp_],
                            [0.0, -st]])
        push = jac @ [dphi, dtheta]
        cart = rhs("model1_spin", p, cartesian_from_spherical(phi, theta, r))
        assert np.linalg.norm(push - cart) < 1e-10


def test_slaving_matches_full_fixed_points():
    p = m1(V=0.45)
    for fp in fixed_points("model1_full", p):
        spin = fp.state.spin
        assert abs(slaved_amplitude("model1_full", p, spin) - fp.state.a) < 1e-10
        assert np.linalg.norm(rhs("model1_spin", p, spin)) < 1e-10


@pytest.mark.parametrize("kind", ["model1_full", "model1_spin"])
def test_fixed_point_classes(kind):
    low = {fp.label for fp in fixed_points(kind, m1(V=0.2))}
    assert low == {"pole"}
    pts = fixed_points(kind, m1(V=0.45))
    labels = [fp.label for fp in pts]
    assert labels.count("pole") == 2
    assert "equator-plus" in labels and "equator-minus" in labels
    for fp in pts:
        assert np.linalg.norm(rhs(kind, m1(V=0.45), fp.coordinates())) < 1e-10


def test_poles_present_for_any_parameters():
    for V in (0.0, 0.1, 0.9, 3.0):
        sz = sorted(fp.state.sz for fp in fixed_points("model1_spin", m1(V=V))
                    if fp.label == "pole")
        assert sz == [-10, 10]


def test_model2_phase_three_magnetization():
    p = dict(V=2.0, gamma=1.0, kappa=2.0, omega=2.0, h=1.0, N=40)
    pts = [fp for fp in fixed_points("model2_full", p) if fp.label == "phase-III"]
    assert pts
    assert all(fp.state.sz == pytest.approx(-10.0) for fp in pts)


def test_markov_south_pole_eigenvalues():
    p = m1(V=1.0, kappa=1.0, omega=0.0)
    lam = np.sort(pole_eigenvalues(p, north=False).real)
    assert np.allclose(lam, [-1.5, 0.5])
    st_ = stability("model1_spin", p, [0, 0, -10])
    assert np.allclose(np.sort(st_.eigenvalues.real), [-1.5, 0.5], atol=1e-6)
    assert st_.verdict == "unstable"


def test_south_pole_stable_below_upper_critical_point():
    p = m1()
    vc = critical_points("model1_spin", p)["V_c_plus"]
    for V, verdict in ((vc - 0.02, "stable"), (vc + 0.02, "unstable")):
        assert stability("model1_spin", m1(V=V), [0, 0, -10]).verdict == verdict


def test_north_pole_always_unstable():
    for V in (0.05, 0.3, 1.0):
        assert stability("model1_spin", m1(V=V), [0, 0, 10]).verdict == "unstable"


def _closed_vs_numeric(p):
    worst = 0.0
    for north, sz in ((True, 10), (False, -10)):
        num = np.linalg.eigvals(jacobian("model1_spin", p, [0, 0, sz]))
        num = np.delete(num, np.argmin(np.abs(num)))
        ref = pole_eigenvalues(p, north)
        worst = max(worst, _multiset_gap(num, ref))
    for fp in fixed_points("model1_spin", p):
        if fp.label.startswith("equator"):
            sign = 1 if fp.label.endswith("plus") else -1
            num = np.linalg.eigvals(jacobian("model1_spin", p, fp.coordinates()))
            num = np.delete(num, np.argmin(np.abs(num)))
            worst = max(worst, _multiset_gap(num, equator_eigenvalues(p, sign)))
    return worst


def _multiset_gap(a, b):
    b = list(b)
    worst = 0.0
    for x in a:
        j = int(np.argmin(np.abs(np.asarray(b) - x)))
        worst = max(worst, abs(b[j] - x))
        b.pop(j)
    return worst


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 1.5), st.floats(0.1, 3.0))
def test_closed_forms_match_jacobian(V, ratio):
    assert _closed_vs_numeric(m1(V=V, kappa=1.0, omega=ratio)) < 1e-6


def test_stability_rejects_non_fixed_point():
    with pytest.raises(ValueError):
        stability("model1_spin", m1(), [1.0, 2.0, 3.0])


def test_critical_point_values():
    cp = critical_points("model1_spin", m1(kappa=1, omega=1))
    assert cp["V_c_minus"] == pytest.approx(0.25, abs=1e-12)
    assert cp["V_c_plus"] == pytest.approx(1 / (2 * np.sqrt(2)), abs=1e-12)
    lim = critical_points("model1_spin", m1(kappa=1e6, omega=1e-3))
    assert abs(lim["V_c_plus"] - 0.5) < 1e-9 and abs(lim["V_c_minus"] - 0.5) < 1e-9
    m2 = critical_points("model2_full", dict(gamma=1, kappa=2, omega=2, h=1,
                                             V=0, N=10))
    assert m2["V1"] == pytest.approx(-0.75) and m2["V2"] == pytest.approx(1.0)
    for N in (10, 20, 30):
        gc = critical_points("model3", dict(g=0, kappa=5, omega=5, omega0=1, N=N))
        assert gc["g_c"] == pytest.approx(np.sqrt(5 / N))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1e3), st.floats(0.0, 1e3))
def test_q_identity(kappa, omega):
    if kappa + omega < 1e-6:
        return
    q = QFactors.from_rates(kappa, omega)
    assert abs(q.identity_residual()) < 1e-14


def test_trajectory_stays_at_stable_fixed_point():
    tr = integrate_trajectory("model1_spin", m1(V=0.1), [0, 0, -10], (0, 50))
    assert np.max(np.abs(tr.y - np.array([[0], [0], [-10]]))) < 1e-8


def test_markov_trajectory_reaches_south_pole():
    p = m1(V=0.11, kappa=1.0, omega=0.0)
    start = cartesian_from_spherical(0.4, 1.0, 10)
    tr = integrate_trajectory("model1_spin", p, start, (0, 400))
    assert tr.y[2, -1] == pytest.approx(-10, abs=1e-3)
    assert tr.norm_drift() < 1e-6


def test_bloch_norm_over_long_run():
    p = m1(V=0.6)
    start = cartesian_from_spherical(0.3, 2.0, 10)
    tr = integrate_trajectory("model1_spin", p, start, (0, 100))
    assert tr.norm_drift() < 1e-6


def test_divergence_is_reported():
    p = m1(V=0.3)
    with pytest.raises(DivergenceError):
        integrate_trajectory("model1_full", p, [0, 0, 10, 0, 0], (0, 50),
                             blowup=1.001)


def test_unknown_kind():
    with pytest.raises(ValueError):
        rhs("model9", m1(), [0, 0, 0])
