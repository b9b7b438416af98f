"""Brute-force reference simulators.

Both work on tensors with one axis per qubit (qubit 0 first) and apply gates
matrix-free by contracting a 2x2 or 4x4 block against the relevant axes.
They exist to check the perturbative engine, not to be fast.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit, Gate
from .errors import DimensionError
from .noise import NoiseSpec, check_pauli_probabilities
from .pauli import PauliString

MAX_STATEVECTOR_QUBITS = 12
MAX_DENSITY_QUBITS = 6

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_S = np.diag([1, 1j])

_ONE_QUBIT = {"h": _H, "s": _S, "sdg": _S.conj(), "x": _X, "y": _Y, "z": _Z}
_TWO_QUBIT = {
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def _apply_1q(psi: np.ndarray, m: np.ndarray, q: int) -> np.ndarray:
    out = np.tensordot(m, psi, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def _apply_2q(psi: np.ndarray, m: np.ndarray, a: int, b: int) -> np.ndarray:
    out = np.tensordot(m.reshape(2, 2, 2, 2), psi, axes=([2, 3], [a, b]))
    return np.moveaxis(out, [0, 1], [a, b])


def _apply_pauli(psi: np.ndarray, p: PauliString) -> np.ndarray:
    mats = {"X": _X, "Y": _Y, "Z": _Z}
    for q in p.support:
        psi = _apply_1q(psi, mats[p.letter(q)], q)
    return psi


def _apply_gate(psi: np.ndarray, g: Gate) -> np.ndarray:
    if g.is_rotation:
        half = g.theta / 2
        return math.cos(half) * psi - 1j * math.sin(half) * _apply_pauli(psi, g.axis)
    if g.kind in _ONE_QUBIT:
        return _apply_1q(psi, _ONE_QUBIT[g.kind], g.qubits[0])
    return _apply_2q(psi, _TWO_QUBIT[g.kind], *g.qubits)


def _zero_state(n: int, batch: tuple[int, ...] = ()) -> np.ndarray:
    psi = np.zeros((2,) * n + batch, dtype=complex)
    psi[(0,) * n] = 1.0
    return psi


def statevector(circuit: Circuit) -> np.ndarray:
    if circuit.n > MAX_STATEVECTOR_QUBITS:
        raise DimensionError(f"statevector oracle limited to {MAX_STATEVECTOR_QUBITS} qubits")
    psi = _zero_state(circuit.n)
    for g in circuit.gates:
        psi = _apply_gate(psi, g)
    return psi


def statevector_expectation(circuit: Circuit, observable: PauliString) -> float:
    """``<0| U^dagger O U |0>`` by direct simulation."""
    if observable.n != circuit.n:
        raise DimensionError("observable and circuit sizes differ")
    psi = statevector(circuit)
    val = np.vdot(psi, _apply_pauli(psi, observable))
    if abs(val.imag) > 1e-12:
        raise AssertionError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)


def _kraus(spec: NoiseSpec) -> list[np.ndarray]:
    if spec.kind == "pauli":
        check_pauli_probabilities(spec.sx, spec.sy, spec.sz)
        base = max(0.0, 1.0 - spec.sx - spec.sy - spec.sz)
        return [
            math.sqrt(base) * _I2,
            math.sqrt(spec.sx) * _X,
            math.sqrt(spec.sy) * _Y,
            math.sqrt(spec.sz) * _Z,
        ]
    lam = spec.lam
    e0 = np.diag([1.0, math.sqrt(1.0 - lam)]).astype(complex)
    if spec.kind == "amplitude_damping":
        e1 = np.array([[0, math.sqrt(lam)], [0, 0]], dtype=complex)
    else:
        e1 = np.array([[0, 0], [0, math.sqrt(lam)]], dtype=complex)
    return [e0, e1]


def _conjugate_op(rho: np.ndarray, n: int, op) -> np.ndarray:
    """``A rho A^dagger`` where ``op`` applies ``A`` to the row axes."""
    left = op(rho)
    flipped = np.conj(np.moveaxis(left, range(n), range(n, 2 * n)))
    # flipped has A rho as columns -> apply A to rows again then take dagger
    right = op(flipped)
    return np.conj(np.moveaxis(right, range(n), range(n, 2 * n)))


def density_matrix_expectation(
    circuit: Circuit, noise: list[NoiseSpec], observable: PauliString
) -> float:
    """``Tr(rho O)`` with channels inserted into the state-ordered circuit.

    Here a spec's ``after`` is the number of circuit gates applied to the
    state before the channel acts.
    """
    n = circuit.n
    if n > MAX_DENSITY_QUBITS:
        raise DimensionError(f"density-matrix oracle limited to {MAX_DENSITY_QUBITS} qubits")
    if observable.n != n:
        raise DimensionError("observable and circuit sizes differ")
    for spec in noise:
        if not 0 <= spec.after <= len(circuit.gates) or spec.qubit >= n:
            raise DimensionError(f"noise spec {spec} does not fit the circuit")
    slots: dict[int, list[NoiseSpec]] = {}
    for spec in noise:
        slots.setdefault(spec.after, []).append(spec)

    # rho as a tensor with row axes 0..n-1 and column axes n..2n-1
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0

    def channel(r, spec):
        total = np.zeros_like(r)
        for k in _kraus(spec):
            total += _conjugate_op(r, n, lambda t, k=k: _apply_1q(t, k, spec.qubit))
        return total

    for i, g in enumerate(circuit.gates):
        for spec in slots.get(i, ()):
            rho = channel(rho, spec)
        rho = _conjugate_op(rho, n, lambda t, g=g: _apply_gate(t, g))
    for spec in slots.get(len(circuit.gates), ()):
        rho = channel(rho, spec)

    o_rho = _apply_pauli(rho, observable)
    dim = 2**n
    val = np.trace(o_rho.reshape(dim, dim))
    if abs(val.imag) > 1e-10:
        raise AssertionError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)
