"""Wave mixing of short bichromatic pulse trains on a single two-level system.

Submodules: ``opalgebra`` (operator-word algebra and component amplitudes),
``lindblad`` (master-equation oracle), ``spectrum`` (comb extraction and
sweeps), ``calib`` (damped Rabi fits), ``cli`` (``qwm`` command).
"""
from .opalgebra import (
    ComponentTable,
    OperatorSum,
    RotationAngles,
    alternating_pattern,
    component_table,
    evaluate_component,
    evolution_operator,
    net_field,
    reduced_operators,
)
from .lindblad import PulseSequence, PulseSpec, TimeTrace, evolve
from .spectrum import SpectrumMap, angle_maps, comb_amplitudes, shift_scan
from .calib import RabiParams, fit_rabi, rabi_analytic

__version__ = "0.1.0"

__all__ = [
    "ComponentTable",
    "OperatorSum",
    "RotationAngles",
    "alternating_pattern",
    "component_table",
    "evaluate_component",
    "evolution_operator",
    "net_field",
    "reduced_operators",
    "PulseSequence",
    "PulseSpec",
    "TimeTrace",
    "evolve",
    "SpectrumMap",
    "angle_maps",
    "comb_amplitudes",
    "shift_scan",
    "RabiParams",
    "fit_rabi",
    "rabi_analytic",
]
