"""
Model presets: collective-spin systems coupled to damped pseudo-mode baths.

``lmg_collective_decay``
    ``H = (V/2N)(S+^2 + S-^2)`` with the spin lowering operator coupled to one
    pseudo-mode, ``G = gamma*kappa/(2N)``.
``lmg_sx``
    Same squeezing Hamiltonian plus ``h Sz``; ``Sx`` couples to one mode,
    ``G = gamma*kappa/(2N)``.
``dicke_two_mode``
    ``H = omega0 Sz`` with ``S-`` and ``S+`` coupled to two identical modes,
    ``G1 = G2 = g^2/N``.
"""
import numpy as np

from .errors import ConfigError
from .hierarchy import Channel, ModelSpec
from .operators import build_spin

__all__ = [
    "PRESET_PARAMETERS",
    "lmg_hamiltonian",
    "lmg_collective_decay",
    "lmg_sx",
    "dicke_two_mode",
    "preset",
]

PRESET_PARAMETERS = {
    "lmg_collective_decay": ("N", "V", "gamma", "kappa", "omega"),
    "lmg_sx": ("N", "V", "gamma", "kappa", "omega", "h"),
    "dicke_two_mode": ("N", "g", "kappa", "omega", "omega0"),
}


def _require(name, params):
    missing = [k for k in PRESET_PARAMETERS[name] if params.get(k) is None]
    if missing:
        raise ConfigError(f"preset {name!r} is missing parameter(s): "
                          + ", ".join(missing))


def lmg_hamiltonian(spin, V):
    """``(V/N)(Sx^2 - Sy^2) = (V/2N)(S+^2 + S-^2)``."""
    Sp, Sm = spin.Splus, spin.Sminus
    return V / (2 * spin.N) * (Sp @ Sp + Sm @ Sm)


def lmg_collective_decay(N, V, gamma, kappa, omega):
    params = dict(N=N, V=V, gamma=gamma, kappa=kappa, omega=omega)
    _require("lmg_collective_decay", params)
    spin = build_spin(N)
    G = gamma * kappa / (2 * N)
    channels = [Channel(spin.Sminus, G, float(omega), float(kappa))]
    return ModelSpec(lmg_hamiltonian(spin, V), channels,
                     name="lmg_collective_decay", params=params)


def lmg_sx(N, V, gamma, kappa, omega, h):
    params = dict(N=N, V=V, gamma=gamma, kappa=kappa, omega=omega, h=h)
    _require("lmg_sx", params)
    spin = build_spin(N)
    G = gamma * kappa / (2 * N)
    H = lmg_hamiltonian(spin, V) + h * spin.Sz
    channels = [Channel(spin.Sx, G, float(omega), float(kappa))]
    return ModelSpec(H, channels, name="lmg_sx", params=params)


def dicke_two_mode(N, g, kappa, omega, omega0):
    params = dict(N=N, g=g, kappa=kappa, omega=omega, omega0=omega0)
    _require("dicke_two_mode", params)
    spin = build_spin(N)
    G = g * g / N
    channels = [Channel(spin.Sminus, G, float(omega), float(kappa)),
                Channel(spin.Splus, G, float(omega), float(kappa))]
    return ModelSpec(omega0 * spin.Sz, channels, name="dicke_two_mode",
                     params=params)


_BUILDERS = {
    "lmg_collective_decay": lmg_collective_decay,
    "lmg_sx": lmg_sx,
    "dicke_two_mode": dicke_two_mode,
}


def preset(name, **params):
    """Build a HEOM model preset by name; unknown keys are ignored."""
    if name not in _BUILDERS:
        raise ConfigError(f"unknown HEOM preset {name!r}; choose from "
                          + ", ".join(sorted(_BUILDERS)))
    _require(name, params)
    kwargs = {k: params[k] for k in PRESET_PARAMETERS[name]}
    kwargs["N"] = int(kwargs["N"])
    return _BUILDERS[name](**kwargs)


def spin_of(model):
    """Recover the collective spin algebra a preset was built on."""
    return build_spin(int(model.params["N"]))


def normalized_sz(model, value):
    N = int(model.params["N"])
    return np.real(value) / (N / 2)
