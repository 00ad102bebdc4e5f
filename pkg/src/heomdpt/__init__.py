"""Hierarchical equations of motion for dissipative phase transitions.

The most used entry points are re-exported here; the submodules hold the
full interface.
"""
from .analysis import find_critical_point, find_kink, fit_gap_scaling
from .embedding import (assemble_lindblad, assemble_markovian,
                        convergence_measures, lindblad_preset,
                        matched_selection)
from .hierarchy import Channel, ModelSpec, assemble_heom, enumerate_indices
from .models import preset
from .operators import build_boson, build_spin
from .spectra import (expectation, fidelity, ordered_spectrum, propagate,
                      reconstruct_phases, sector_gaps, steady_state)
from .symmetry import build_u1, build_z2

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ModelSpec",
    "assemble_heom",
    "assemble_lindblad",
    "assemble_markovian",
    "build_boson",
    "build_spin",
    "build_u1",
    "build_z2",
    "convergence_measures",
    "enumerate_indices",
    "expectation",
    "fidelity",
    "find_critical_point",
    "find_kink",
    "fit_gap_scaling",
    "lindblad_preset",
    "matched_selection",
    "ordered_spectrum",
    "preset",
    "propagate",
    "reconstruct_phases",
    "sector_gaps",
    "steady_state",
]
