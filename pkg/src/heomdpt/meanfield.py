"""
Semiclassical (mean-field) equations for the pseudo-mode models, their fixed
points, linear stability and the closed-form critical couplings.

Variables are unscaled: spin components range over ``[-N/2, N/2]`` and the
pseudo-mode amplitude ``<a>`` is split into real and imaginary parts.

Kinds
-----
``model1_full``
    ``(a_re, a_im, sx, sy, sz)`` for the LMG model with collective decay
    into one pseudo-mode.
``model1_spin``
    ``(sx, sy, sz)`` after slaving the pseudo-mode to the spin.
``model1_spherical``
    ``(phi, theta)`` on the sphere of radius ``N/2`` for the slaved flow.
``model2_full``
    ``(a_re, a_im, sx, sy, sz)`` for the LMG model with ``h Sz`` and an
    ``Sx`` coupling.
``model3``
    Two-mode Dicke model; only :func:`critical_points` applies.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DivergenceError

__all__ = [
    "KINDS",
    "QFactors",
    "MeanFieldState",
    "FixedPoint",
    "Stability",
    "MeanFieldTrajectory",
    "rhs",
    "fixed_points",
    "stability",
    "jacobian",
    "critical_points",
    "integrate_trajectory",
    "pole_eigenvalues",
    "equator_eigenvalues",
    "slaved_amplitude",
    "cartesian_from_spherical",
]

KINDS = ("model1_full", "model1_spin", "model1_spherical", "model2_full")
VERDICT_TOL = 1e-9
ZERO_MODE_TOL = 1e-9
FIXED_POINT_TOL = 1e-10
REAL_ROOT_TOL = 1e-12

_REQUIRED = {
    "model1_full": ("V", "gamma", "kappa", "omega", "N"),
    "model1_spin": ("V", "gamma", "kappa", "omega", "N"),
    "model1_spherical": ("V", "gamma", "kappa", "omega", "N"),
    "model2_full": ("V", "gamma", "kappa", "omega", "N", "h"),
    "model3": ("g", "kappa", "omega", "omega0", "N"),
}


@dataclass(frozen=True)
class QFactors:
    q1: float
    q2: float

    @classmethod
    def from_rates(cls, kappa, omega):
        den = kappa * kappa + omega * omega
        if den == 0:
            raise ValueError("kappa and omega cannot both vanish")
        return cls(kappa * kappa / den, kappa * omega / den)

    def identity_residual(self):
        """``q1^2 + q2^2 - q1``, zero up to rounding."""
        return self.q1 ** 2 + self.q2 ** 2 - self.q1


@dataclass(frozen=True)
class MeanFieldState:
    a_re: float
    a_im: float
    sx: float
    sy: float
    sz: float

    def as_array(self):
        return np.array([self.a_re, self.a_im, self.sx, self.sy, self.sz])

    @property
    def spin(self):
        return np.array([self.sx, self.sy, self.sz])

    @property
    def a(self):
        return complex(self.a_re, self.a_im)


@dataclass
class Stability:
    eigenvalues: np.ndarray
    verdict: str
    discarded: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass
class FixedPoint:
    state: MeanFieldState
    label: str
    kind: str
    stability: Stability = None

    def coordinates(self):
        """The point in the variables of ``kind``."""
        return _coordinates(self.kind, self.state)


def _check(kind, params):
    if kind not in _REQUIRED:
        raise ValueError(f"unknown mean-field kind {kind!r}; choose from "
                         + ", ".join(_REQUIRED))
    missing = [k for k in _REQUIRED[kind] if k not in params]
    if missing:
        raise ValueError(f"{kind} needs parameter(s): " + ", ".join(missing))
    return {k: float(params[k]) for k in _REQUIRED[kind]}


def _coupling(p):
    return np.sqrt(p["gamma"] * p["kappa"] / (2 * p["N"]))


def cartesian_from_spherical(phi, theta, r):
    st = np.sin(theta)
    return np.array([r * st * np.cos(phi), r * st * np.sin(phi),
                     r * np.cos(theta)])


def rhs(kind, params, state):
    """Time derivative of the mean-field variables of ``kind``."""
    p = _check(kind, params)
    if kind == "model3":
        raise ValueError("model3 has no mean-field flow here; only "
                         "critical_points applies")
    y = state.as_array() if isinstance(state, MeanFieldState) else state
    y = np.asarray(y, dtype=float)
    V, g, N = p["V"], p["gamma"], p["N"]
    if kind == "model1_spherical":
        phi, theta = y
        q = QFactors.from_rates(p["kappa"], p["omega"])
        return np.array([
            0.5 * np.cos(theta) * (q.q2 * g - 2 * V * np.cos(2 * phi)),
            0.5 * np.sin(theta) * (q.q1 * g - 2 * V * np.sin(2 * phi)),
        ])
    if kind == "model1_spin":
        sx, sy, sz = y
        q = QFactors.from_rates(p["kappa"], p["omega"])
        return np.array([
            -2 * V / N * sy * sz + g / N * sz * (q.q1 * sx - q.q2 * sy),
            -2 * V / N * sx * sz + g / N * sz * (q.q1 * sy + q.q2 * sx),
            4 * V / N * sx * sy - g / N * q.q1 * (sx * sx + sy * sy),
        ])
    ar, ai, sx, sy, sz = y
    c = _coupling(p)
    kap, om = p["kappa"], p["omega"]
    if kind == "model1_full":
        # <S-> = sx - i sy drives the mode
        da = -(kap + 1j * om) * complex(ar, ai) - 1j * c * complex(sx, -sy)
        return np.array([
            da.real, da.imag,
            -2 * V / N * sy * sz - 2 * c * sz * ai,
            -2 * V / N * sx * sz - 2 * c * sz * ar,
            4 * V / N * sx * sy + 2 * c * (ar * sy + ai * sx),
        ])
    h = p["h"]
    da = -(kap + 1j * om) * complex(ar, ai) - 1j * c * sx
    return np.array([
        da.real, da.imag,
        -2 * V / N * sy * sz - h * sy,
        -2 * V / N * sx * sz + h * sx - 2 * c * sz * ar,
        4 * V / N * sx * sy + 2 * c * sy * ar,
    ])


def slaved_amplitude(kind, params, spin):
    """Stationary ``<a>`` for a given spin vector (``d<a>/dt = 0``)."""
    p = _check(kind, params)
    sx, sy, _ = spin
    c = _coupling(p)
    drive = complex(sx, -sy) if kind.startswith("model1") else complex(sx, 0)
    return -1j * c * drive / (p["kappa"] + 1j * p["omega"])


def _coordinates(kind, st):
    if kind in ("model1_full", "model2_full"):
        return st.as_array()
    if kind == "model1_spin":
        return st.spin
    r = np.linalg.norm(st.spin)
    theta = np.arccos(np.clip(st.sz / r, -1, 1))
    return np.array([np.arctan2(st.sy, st.sx), theta])


def _full_state(kind, params, spin):
    a = slaved_amplitude(kind, params, spin)
    return MeanFieldState(a.real, a.imag, *map(float, spin))


def _real_sqrt(x):
    root = np.sqrt(complex(x))
    if abs(root.imag) > REAL_ROOT_TOL * max(1.0, abs(root)):
        return None
    return root.real


def fixed_points(kind, params):
    """Physical fixed points of ``kind`` with their class labels.

    Formal solutions needing complex square roots are dropped. Stability is
    not evaluated here; see :func:`stability`.
    """
    p = _check(kind, params)
    N, V, g = p["N"], p["V"], p["gamma"]
    q = QFactors.from_rates(p["kappa"], p["omega"])
    r = N / 2
    spins = []
    if kind.startswith("model1"):
        spins += [("pole", (0.0, 0.0, r)), ("pole", (0.0, 0.0, -r))]
        if V != 0:
            disc = _real_sqrt(1 - (q.q1 * g / (2 * V)) ** 2)
            if disc is not None:
                for sign, label in ((1, "equator-plus"), (-1, "equator-minus")):
                    inner = 1 + sign * disc
                    if inner <= 0:
                        continue
                    sx = r * np.sqrt(inner) / np.sqrt(2)
                    sy = r * q.q1 * g / (4 * V) * np.sqrt(2) / np.sqrt(inner)
                    spins += [(label, (sx, sy, 0.0)), (label, (-sx, -sy, 0.0))]
    else:
        h = p["h"]
        shift = V - q.q2 * g / 2
        if shift != 0:
            ratio = h / shift
            root = _real_sqrt(1 - ratio * ratio)
            if root is not None:
                for s in (1, -1):
                    spins.append(("phase-I", (s * r * root, 0.0, r * ratio)))
        spins += [("phase-II", (0.0, 0.0, -r)), ("phase-IIb", (0.0, 0.0, r))]
        if V != 0:
            root = _real_sqrt(1 - (h / V) ** 2)
            if root is not None:
                for s in (1, -1):
                    spins.append(("phase-III", (0.0, s * r * root, -r * h / V)))
    out = []
    seen = set()
    for label, spin in spins:
        key = (label,) + tuple(np.round(spin, 12))
        if key in seen:
            continue
        seen.add(key)
        if kind == "model1_spherical" and label == "pole":
            # the angular chart is singular at the poles
            continue
        fp = FixedPoint(_full_state(kind, params, spin), label, kind)
        res = np.linalg.norm(rhs(kind, params, fp.coordinates()))
        scale = max(1.0, g, abs(V)) * max(1.0, r)
        if res > FIXED_POINT_TOL * scale:
            raise AssertionError(f"{label} point {spin} leaves residual "
                                 f"{res:.3e}")
        out.append(fp)
    return out


def jacobian(kind, params, point, rel_step=1e-6):
    """Central finite-difference Jacobian at ``point`` (kind coordinates)."""
    x0 = np.asarray(point, dtype=float)
    p = _check(kind, params)
    if kind == "model1_spherical":
        scale = np.ones_like(x0)
    else:
        scale = np.full_like(x0, max(p["N"] / 2, 1.0))
    J = np.empty((x0.size, x0.size))
    for i in range(x0.size):
        hstep = rel_step * max(abs(x0[i]), scale[i])
        e = np.zeros_like(x0)
        e[i] = hstep
        J[:, i] = (rhs(kind, params, x0 + e) - rhs(kind, params, x0 - e)) / (2 * hstep)
    return J


def _verdict(values):
    if values.size == 0:
        return "marginal"
    if np.all(values.real < -VERDICT_TOL):
        return "stable"
    if np.any(values.real > VERDICT_TOL):
        return "unstable"
    return "marginal"


def stability(kind, params, point):
    """Linear stability of a fixed point.

    For the norm-conserving Cartesian flows one Jacobian eigenvalue is an
    artifact of the constraint; the eigenvalue of smallest modulus is dropped
    when it is below ``ZERO_MODE_TOL``.

    Returns
    -------
    Stability
    """
    x0 = point.coordinates() if isinstance(point, FixedPoint) else np.asarray(point, float)
    p = _check(kind, params)
    res = np.linalg.norm(rhs(kind, params, x0))
    scale = max(1.0, p["gamma"], abs(p["V"])) * max(1.0, p["N"] / 2)
    if res > FIXED_POINT_TOL * scale * 10:
        raise ValueError(f"not a fixed point: |rhs| = {res:.3e}")
    w = np.linalg.eigvals(jacobian(kind, params, x0))
    discarded = np.zeros(0, dtype=complex)
    if kind != "model1_spherical":
        k = int(np.argmin(np.abs(w)))
        if abs(w[k]) < ZERO_MODE_TOL:
            discarded = w[k:k + 1]
            w = np.delete(w, k)
    w = w[np.lexsort((w.imag, w.real))]
    st = Stability(eigenvalues=w, verdict=_verdict(w), discarded=discarded)
    if isinstance(point, FixedPoint):
        point.stability = st
    return st


def pole_eigenvalues(params, north):
    """Closed-form eigenvalues of the slaved spin flow at a pole."""
    p = _check("model1_spin", params)
    q = QFactors.from_rates(p["kappa"], p["omega"])
    g, V = p["gamma"], p["V"]
    root = np.sqrt(complex(4 * (V / g) ** 2 - q.q2 ** 2))
    sgn = 1.0 if north else -1.0
    return sgn * g / 2 * np.array([q.q1 - root, q.q1 + root])


def equator_eigenvalues(params, sign):
    """Closed-form nontrivial eigenvalues of the slaved flow at an equator
    point; ``sign`` is +1 or -1 for the two families."""
    p = _check("model1_spin", params)
    q = QFactors.from_rates(p["kappa"], p["omega"])
    g, V = p["gamma"], p["V"]
    disc = np.sqrt(complex(4 * V * V - (g * q.q1) ** 2))
    lam = np.sqrt((sign * np.sign(V) * q.q2 * g * disc
                   + (g * q.q1) ** 2 - 4 * V * V) / 2)
    return np.array([-lam, lam])


def critical_points(kind, params):
    """Named critical couplings for the model family of ``kind``."""
    if kind == "model3":
        p = _check(kind, params)
        om, kap = p["omega"], p["kappa"]
        return {"g_c": float(np.sqrt(p["omega0"] * (om * om + kap * kap)
                                     / (2 * p["N"] * om)))}
    p = {k: float(v) for k, v in params.items()}
    g = p["gamma"]
    if kind.startswith("model1"):
        ratio = (p["omega"] / p["kappa"]) ** 2
        return {"V_c_plus": g / (2 * np.sqrt(1 + ratio)),
                "V_c_minus": g / (2 * (1 + ratio)),
                "V_c_markov": g / 2}
    if kind == "model2_full":
        q = QFactors.from_rates(p["kappa"], p["omega"])
        h = p["h"]
        return {"V1": min(-h + q.q2 * g / 2, q.q2 * g / 4),
                "V2": max(h, q.q2 * g / 4)}
    raise ValueError(f"unknown mean-field kind {kind!r}")


@dataclass
class MeanFieldTrajectory:
    t: np.ndarray
    y: np.ndarray
    kind: str

    def bloch_norm(self):
        if self.kind == "model1_spherical":
            return np.ones(self.t.size)
        spin = self.y[-3:]
        return np.sqrt((spin ** 2).sum(axis=0))

    def norm_drift(self):
        n = self.bloch_norm()
        return float(np.max(np.abs(n - n[0])) / n[0])


def integrate_trajectory(kind, params, initial, t_span, t_eval=None,
                         rtol=1e-10, atol=1e-12, blowup=10.0):
    """Integrate the mean-field flow from ``initial`` over ``t_span``.

    Raises
    ------
    DivergenceError
        When the state norm exceeds ``blowup`` times its initial value.
    """
    t0, t1 = map(float, t_span)
    if not (np.isfinite(t0) and np.isfinite(t1)) or t1 <= t0:
        raise ValueError(f"t_span must be finite and increasing, got {t_span}")
    _check(kind, params)
    y0 = initial.as_array() if isinstance(initial, MeanFieldState) else initial
    y0 = np.asarray(_coordinates(kind, initial) if isinstance(initial, MeanFieldState)
                    else y0, dtype=float)
    norm0 = max(np.linalg.norm(y0), 1e-300)

    def escape(t, y):
        return blowup * norm0 - np.linalg.norm(y)
    escape.terminal = True

    sol = solve_ivp(lambda t, y: rhs(kind, params, y), (t0, t1), y0,
                    method="DOP853", rtol=rtol, atol=atol, t_eval=t_eval,
                    events=escape if kind.endswith("full") else None)
    if sol.status == 1:
        raise DivergenceError(f"trajectory norm exceeded {blowup}x the "
                              f"initial value at t={sol.t_events[0][0]:.4g}")
    if sol.status < 0:
        raise DivergenceError(sol.message)
    return MeanFieldTrajectory(t=sol.t, y=sol.y, kind=kind)
