import numpy as np
import pytest

from heomdpt.errors import ConfigError
from heomdpt.models import PRESET_PARAMETERS, preset


def test_collective_decay_amplitude():
    m = preset("lmg_collective_decay", N=10, V=0, gamma=1, kappa=1, omega=1)
    assert m.M == 1
    assert m.channels[0].G == pytest.approx(0.05)
    assert np.allclose(m.H, 0)


def test_sx_amplitude_carries_inverse_n():
    # collective coupling of S_x with the same 1/N scale as the decay model
    m = preset("lmg_sx", N=10, V=0.5, gamma=1, kappa=2, omega=2, h=1)
    assert m.channels[0].G == pytest.approx(0.1)


def test_dicke_amplitudes():
    m = preset("dicke_two_mode", N=10, g=1, kappa=5, omega=5, omega0=1)
    assert [c.G for c in m.channels] == pytest.approx([0.1, 0.1])
    assert np.allclose(m.channels[1].L, m.channels[0].L.conj().T)


def test_missing_parameter_named():
    with pytest.raises(ConfigError, match="kappa"):
        preset("lmg_collective_decay", N=4, V=0.1, gamma=1, omega=1)
    with pytest.raises(ConfigError):
        preset("nope", N=4)


def test_registry_keys():
    assert set(PRESET_PARAMETERS) == {"lmg_collective_decay", "lmg_sx",
                                      "dicke_two_mode"}
