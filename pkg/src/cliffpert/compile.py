"""Clifford interaction picture.

Every named Clifford and every Clifford part ``exp(-i k pi P / 4)`` of a
rotation is pulled onto the observable, leaving a list of rotations with
``|theta| <= pi/4`` whose axes have been conjugated by the Cliffords.

The sweep runs from the state end.  ``CliffordFrame`` holds the map
``P -> V^dagger P V`` for the product ``V`` of all Cliffords seen so far,
stored as images of the single-qubit generators.  A rotation met after ``V``
satisfies ``R(P) V = V R(V^dagger P V)``, so its axis is read through the
frame; at the end the observable is mapped the same way.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .circuit import Circuit, Gate, conjugate_masks, rotation_clifford_masks
from .errors import DimensionError
from .pauli import PauliString, format_pauli, parse_pauli, product_phase

HALF_PI = math.pi / 2
QUARTER_PI = math.pi / 4
CLIFFORD_TOL = 1e-12


def angle_transform(theta: float) -> tuple[float, int]:
    """Split ``theta = theta_tilde + k pi/2`` with ``|theta_tilde| <= pi/4``.

    Ties at ``|theta_tilde| = pi/4`` resolve to ``+pi/4``.  ``k`` is reduced
    mod 4 (a full turn only adds a global phase).  Near-Clifford residues below
    ``1e-12`` are snapped to exactly zero.
    """
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta}")
    k = math.ceil(theta / HALF_PI - 0.5)
    tilde = theta - k * HALF_PI
    if abs(tilde) <= CLIFFORD_TOL:
        tilde = 0.0
    return tilde, k % 4


class CliffordFrame:
    """Conjugation map ``P -> V^dagger P V`` for an accumulated Clifford ``V``."""

    def __init__(self, n: int):
        self.n = n
        # images of X_q and Z_q as (x, z, sign)
        self.ximg = [(1 << q, 0, 1) for q in range(n)]
        self.zimg = [(0, 1 << q, 1) for q in range(n)]

    def apply_masks(self, x: int, z: int) -> tuple[int, int, int]:
        """Image of the canonical string ``(x, z)``; returns ``(x', z', sign)``."""
        phase = (x & z).bit_count()  # canonical P = i^|x&z| X^x Z^z
        rx = rz = 0
        for imgs, mask in ((self.ximg, x), (self.zimg, z)):
            while mask:
                low = mask & -mask
                q = low.bit_length() - 1
                mask ^= low
                gx, gz, gs = imgs[q]
                phase += product_phase(rx, rz, gx, gz) + (2 if gs < 0 else 0)
                rx ^= gx
                rz ^= gz
        phase %= 4
        if phase % 2:
            raise AssertionError("Clifford image of a Hermitian Pauli picked up a factor of i")
        return rx, rz, 1 if phase == 0 else -1

    def apply(self, p: PauliString) -> tuple[PauliString, int]:
        x, z, s = self.apply_masks(p.x, p.z)
        return PauliString(self.n, x, z), s

    def _update(self, qubits, local_map) -> None:
        # V <- C V: new image of g is M(C^dagger g C)
        new_x, new_z = {}, {}
        for q in qubits:
            for store, gx, gz in ((new_x, 1 << q, 0), (new_z, 0, 1 << q)):
                cx, cz, cs = local_map(gx, gz)
                ix, iz, isg = self.apply_masks(cx, cz)
                store[q] = (ix, iz, cs * isg)
        for q in qubits:
            self.ximg[q] = new_x[q]
            self.zimg[q] = new_z[q]

    def push_named(self, gate: Gate) -> None:
        self._update(gate.qubits, lambda x, z: conjugate_masks(gate.kind, gate.qubits, x, z))

    def push_rotation_clifford(self, axis: PauliString, k: int) -> None:
        if k % 4 == 0:
            return
        self._update(
            axis.support, lambda x, z: rotation_clifford_masks(x, z, axis.x, axis.z, k)
        )


@dataclass(frozen=True)
class ProgramRotation:
    axis: PauliString
    theta: float
    source_index: int


@dataclass
class InteractionPictureProgram:
    """Rotations in the order they act on the observable, plus the mapped observable."""

    n: int
    rotations: list[ProgramRotation] = field(default_factory=list)
    observable: PauliString | None = None
    sign: int = 1

    def to_circuit(self) -> Circuit:
        """Re-wrap as a state-ordered circuit of rotations only."""
        return Circuit(
            self.n, [Gate("rot", (), r.axis, r.theta) for r in reversed(self.rotations)]
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gates": [
                {"kind": "rot", "axis": format_pauli(r.axis), "theta": r.theta, "source": r.source_index}
                for r in reversed(self.rotations)
            ],
            "observable": format_pauli(self.observable),
            "sign": self.sign,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> InteractionPictureProgram:
        n = data["n"]
        gates = data["gates"]
        rots = [
            ProgramRotation(parse_pauli(g["axis"]), float(g["theta"]), int(g.get("source", i)))
            for i, g in enumerate(gates)
        ]
        rots.reverse()
        return cls(n, rots, parse_pauli(data["observable"]), int(data.get("sign", 1)))


@dataclass
class CompiledCircuit:
    """Observable-independent part of a compilation; reusable across observables."""

    n: int
    rotations: list[ProgramRotation]
    frame: CliffordFrame

    def for_observable(self, observable: PauliString) -> InteractionPictureProgram:
        if observable.n != self.n:
            raise DimensionError(f"observable acts on {observable.n} qubits, circuit on {self.n}")
        obs, sign = self.frame.apply(observable)
        return InteractionPictureProgram(self.n, list(self.rotations), obs, sign)


def compile_circuit(circuit: Circuit, *, transform_angles: bool = True) -> CompiledCircuit:
    """Absorb all Cliffords; see :func:`compile_program`.

    With ``transform_angles=False`` rotations keep their raw angles (only named
    Cliffords are absorbed), which reproduces plain perturbation theory on the
    original gates.
    """
    frame = CliffordFrame(circuit.n)
    collected: list[ProgramRotation] = []
    for i, g in enumerate(circuit.gates):
        if not g.is_rotation:
            frame.push_named(g)
            continue
        if transform_angles:
            theta, k = angle_transform(g.theta)
        else:
            theta, k = g.theta, 0
        if theta != 0.0 or not transform_angles:
            x, z, s = frame.apply_masks(g.axis.x, g.axis.z)
            collected.append(ProgramRotation(PauliString(circuit.n, x, z), s * theta, i))
        frame.push_rotation_clifford(g.axis, k)
    collected.reverse()
    return CompiledCircuit(circuit.n, collected, frame)


def compile_program(
    circuit: Circuit, observable: PauliString, *, transform_angles: bool = True
) -> InteractionPictureProgram:
    """Compile ``circuit`` and ``observable`` into the Clifford interaction picture."""
    if observable.n != circuit.n:
        raise DimensionError(f"observable acts on {observable.n} qubits, circuit on {circuit.n}")
    return compile_circuit(circuit, transform_angles=transform_angles).for_observable(observable)
