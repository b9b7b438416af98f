"""Expectation values of near-Clifford circuits by truncated Heisenberg back-propagation."""

from .circuit import Circuit, Gate, clifford, rotation
from .compile import InteractionPictureProgram, angle_transform, compile_program
from .pauli import PauliString, commutes, format_pauli, multiply, parse_pauli, vacuum_expectation
from .propagate import ObservableSum, OrderReport, apply_rotation, expectation, lightcone_filter, propagate

__all__ = [
    "Circuit",
    "Gate",
    "InteractionPictureProgram",
    "ObservableSum",
    "OrderReport",
    "PauliString",
    "angle_transform",
    "apply_rotation",
    "clifford",
    "commutes",
    "compile_program",
    "expectation",
    "format_pauli",
    "lightcone_filter",
    "multiply",
    "parse_pauli",
    "propagate",
    "rotation",
    "vacuum_expectation",
]
