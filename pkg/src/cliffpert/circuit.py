"""Circuit representation and exact Clifford conjugation of Pauli strings.

Gates are stored in the order they act on the state.  Every conjugation
here is the Heisenberg pull-back ``C^dagger p C``.  One-qubit example that
pins the sign convention::

    S = diag(1, i)
    S^dagger X S = [[0, i], [-i, 0]] = -Y

so ``conjugate_by_clifford(X, S) == (Y, -1)``, while ``Sdg`` maps X to +Y.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DimensionError, SchemaError
from .pauli import (
    PauliString,
    format_pauli,
    multiply,
    parse_pauli,
    product_phase,
    symplectic_product,
)

CLIFFORD_KINDS = {"h": 1, "s": 1, "sdg": 1, "x": 1, "y": 1, "z": 1, "cx": 2, "cz": 2, "swap": 2}


@dataclass(frozen=True)
class Gate:
    """A named Clifford (``kind`` in :data:`CLIFFORD_KINDS`) or a Pauli rotation.

    A rotation is ``exp(-i theta axis / 2)``.
    """

    kind: str
    qubits: tuple[int, ...] = ()
    axis: PauliString | None = None
    theta: float = 0.0

    def __post_init__(self):
        if self.kind == "rot":
            if self.axis is None or self.axis.is_identity():
                raise ValueError("rotation axis must be a non-identity Pauli string")
        elif self.kind in CLIFFORD_KINDS:
            if len(self.qubits) != CLIFFORD_KINDS[self.kind]:
                raise ValueError(f"{self.kind} acts on {CLIFFORD_KINDS[self.kind]} qubit(s)")
            if len(set(self.qubits)) != len(self.qubits):
                raise ValueError(f"{self.kind} qubits must be distinct")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @property
    def is_rotation(self) -> bool:
        return self.kind == "rot"

    def fits(self, n: int) -> bool:
        if self.is_rotation:
            return self.axis.n == n
        return all(0 <= q < n for q in self.qubits)


def clifford(kind: str, *qubits: int) -> Gate:
    return Gate(kind.lower(), tuple(qubits))


def rotation(axis: PauliString | str, theta: float) -> Gate:
    if isinstance(axis, str):
        axis = parse_pauli(axis)
    return Gate("rot", (), axis, float(theta))


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        for i, g in enumerate(self.gates):
            if not g.fits(self.n):
                raise DimensionError(f"gate {i} ({g.kind}) does not fit in {self.n} qubits")

    def append(self, gate: Gate) -> Circuit:
        if not gate.fits(self.n):
            raise DimensionError(f"gate {gate.kind} does not fit in {self.n} qubits")
        self.gates.append(gate)
        return self

    @property
    def rotation_count(self) -> int:
        return sum(g.is_rotation for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)


def _bit(v: int, q: int) -> int:
    return v >> q & 1


def _swap_bits(v: int, a: int, b: int) -> int:
    if _bit(v, a) != _bit(v, b):
        v ^= (1 << a) | (1 << b)
    return v


def conjugate_masks(kind: str, qubits: tuple[int, ...], x: int, z: int) -> tuple[int, int, int]:
    """``C^dagger P C`` on raw masks; returns ``(x, z, sign)``."""
    neg = 0
    if kind == "h":
        (q,) = qubits
        xq, zq = _bit(x, q), _bit(z, q)
        neg = xq & zq
        if xq != zq:
            x ^= 1 << q
            z ^= 1 << q
    elif kind == "s":
        (q,) = qubits
        xq, zq = _bit(x, q), _bit(z, q)
        neg = xq & (zq ^ 1)
        z ^= xq << q
    elif kind == "sdg":
        (q,) = qubits
        xq, zq = _bit(x, q), _bit(z, q)
        neg = xq & zq
        z ^= xq << q
    elif kind == "x":
        neg = _bit(z, qubits[0])
    elif kind == "z":
        neg = _bit(x, qubits[0])
    elif kind == "y":
        neg = _bit(x, qubits[0]) ^ _bit(z, qubits[0])
    elif kind == "cx":
        c, t = qubits
        xc, zc, xt, zt = _bit(x, c), _bit(z, c), _bit(x, t), _bit(z, t)
        neg = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    elif kind == "cz":
        a, b = qubits
        xa, za, xb, zb = _bit(x, a), _bit(z, a), _bit(x, b), _bit(z, b)
        neg = xa & xb & (za ^ zb)
        z ^= (xb << a) | (xa << b)
    elif kind == "swap":
        a, b = qubits
        x = _swap_bits(x, a, b)
        z = _swap_bits(z, a, b)
    else:
        raise ValueError(f"{kind!r} is not a named Clifford")
    return x, z, -1 if neg else 1


def conjugate_by_clifford(p: PauliString, gate: Gate) -> tuple[PauliString, int]:
    """Return ``(p', sign)`` with ``C^dagger p C = sign * p'``."""
    if gate.is_rotation:
        raise ValueError("conjugate_by_clifford expects a named Clifford gate")
    if not gate.fits(p.n):
        raise DimensionError(f"gate qubits {gate.qubits} out of range for n={p.n}")
    x, z, sign = conjugate_masks(gate.kind, gate.qubits, p.x, p.z)
    return PauliString(p.n, x, z), sign


def rotation_clifford_masks(x: int, z: int, ax: int, az: int, k: int) -> tuple[int, int, int]:
    """Masks version of :func:`conjugate_by_pauli_rotation_clifford`."""
    k %= 4
    if k == 0 or symplectic_product(x, z, ax, az) == 0:
        return x, z, 1
    if k == 2:
        return x, z, -1
    # i * sin(k pi / 2) * axis * p, with axis * p = i**e * q and e odd
    e = product_phase(ax, az, x, z)
    total = (1 + e + (2 if k == 3 else 0)) % 4
    return x ^ ax, z ^ az, 1 if total == 0 else -1


def conjugate_by_pauli_rotation_clifford(
    p: PauliString, axis: PauliString, k: int
) -> tuple[PauliString, int]:
    """Conjugate ``p`` by ``exp(-i k pi axis / 4)``, a Clifford for integer ``k``."""
    if axis.is_identity():
        raise ValueError("rotation axis must be non-identity")
    if axis.n != p.n:
        raise DimensionError(f"axis acts on {axis.n} qubits, string on {p.n}")
    x, z, sign = rotation_clifford_masks(p.x, p.z, axis.x, axis.z, k)
    return PauliString(p.n, x, z), sign


# --- JSON -----------------------------------------------------------------


def gate_to_dict(g: Gate) -> dict:
    if g.is_rotation:
        return {"kind": "rot", "axis": format_pauli(g.axis), "theta": g.theta}
    return {"kind": g.kind, "qubits": list(g.qubits)}


def circuit_to_dict(c: Circuit) -> dict:
    return {"n": c.n, "gates": [gate_to_dict(g) for g in c.gates]}


def circuit_from_dict(data: dict) -> Circuit:
    if not isinstance(data, dict):
        raise SchemaError("circuit JSON must be an object", field="<root>")
    if not isinstance(data.get("n"), int) or data["n"] < 1:
        raise SchemaError("'n' must be a positive integer", field="n")
    n = data["n"]
    raw = data.get("gates")
    if not isinstance(raw, list):
        raise SchemaError("'gates' must be a list", field="gates")
    gates = []
    for i, item in enumerate(raw):
        where = f"gates[{i}]"
        if not isinstance(item, dict) or "kind" not in item:
            raise SchemaError("gate must be an object with a 'kind'", field=where)
        kind = str(item["kind"]).lower()
        try:
            if kind == "rot":
                axis = parse_pauli(str(item["axis"]))
                theta = float(item["theta"])
                if not math.isfinite(theta):
                    raise ValueError("theta must be finite")
                if axis.n != n:
                    raise ValueError(f"axis length {axis.n} != n={n}")
                gates.append(Gate("rot", (), axis, theta))
            else:
                qubits = tuple(int(q) for q in item["qubits"])
                g = Gate(kind, qubits)
                if not g.fits(n):
                    raise ValueError(f"qubits {qubits} out of range for n={n}")
                gates.append(g)
        except KeyError as exc:
            raise SchemaError(f"missing field {exc.args[0]!r}", field=where) from None
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), field=where) from None
    return Circuit(n, gates)


def load_circuit(path: str | Path) -> Circuit:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}", field="<root>") from None
    return circuit_from_dict(data)


def apply_rotation_exact(p: PauliString, axis: PauliString, theta: float):
    """Two-branch image of ``p`` under ``R(theta)^dagger p R(theta)``.

    Returns a list of ``(string, coefficient)``; used by tests and small helpers,
    the vectorised engine lives in :mod:`cliffpert.propagate`.
    """
    if symplectic_product(p.x, p.z, axis.x, axis.z) == 0:
        return [(p, 1.0)]
    q, e = multiply(axis, p)
    sign = 1.0 if (1 + e) % 4 == 0 else -1.0
    return [(p, math.cos(theta)), (q, sign * math.sin(theta))]
