"""Benchmark circuit families: p=1 QAOA on Max-E3LIN2 and layered Clifford
rotation circuits with a coherent angle error."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Gate, clifford
from .compile import CompiledCircuit, compile_circuit
from .errors import GenerationError
from .pauli import PauliString
from .propagate import OrderReport, lightcone_filter, propagate

MAX_RESTARTS = 1000
NONZERO_TOL = 1e-14


@dataclass
class E3LIN2Instance:
    n: int
    D: int
    clauses: list[tuple[int, int, int, int]]
    seed: int | None = None

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v, w, _ in self.clauses:
            deg[u] += 1
            deg[v] += 1
            deg[w] += 1
        return deg

    def to_dict(self) -> dict:
        return {"n": self.n, "D": self.D, "seed": self.seed, "clauses": [list(c) for c in self.clauses]}

    @classmethod
    def from_dict(cls, d: dict) -> E3LIN2Instance:
        return cls(int(d["n"]), int(d["D"]), [tuple(int(v) for v in c) for c in d["clauses"]], d.get("seed"))


def generate_e3lin2(n: int, D: int, seed: int | None = None) -> E3LIN2Instance:
    """Random instance with ``floor(n D / 3)`` distinct clauses, each variable in at most ``D``.

    Variables are drawn with probability proportional to their remaining
    degree budget; dead ends restart the whole draw (bounded).
    """
    if n < 3 or D < 1:
        raise GenerationError(f"need n >= 3 and D >= 1, got n={n}, D={D}")
    target = n * D // 3
    if target > math.comb(n, 3):
        raise GenerationError(f"cannot place {target} distinct clauses on {n} variables")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESTARTS):
        remaining = np.full(n, D, dtype=np.int64)
        used: set[tuple[int, int, int]] = set()
        clauses = []
        while len(clauses) < target:
            avail = np.flatnonzero(remaining)
            if len(avail) < 3:
                break
            weights = remaining[avail] / remaining[avail].sum()
            for _retry in range(50):
                u, v, w = sorted(int(q) for q in rng.choice(avail, 3, replace=False, p=weights))
                if (u, v, w) not in used:
                    break
            else:
                break
            used.add((u, v, w))
            remaining[[u, v, w]] -= 1
            clauses.append((u, v, w, int(rng.choice((-1, 1)))))
        if len(clauses) == target:
            return E3LIN2Instance(n, D, clauses, seed)
    raise GenerationError(f"no degree-respecting instance for n={n}, D={D} after {MAX_RESTARTS} attempts")


def clause_observable(n: int, clause) -> PauliString:
    u, v, w = clause[:3]
    return PauliString(n, 0, (1 << u) | (1 << v) | (1 << w))


def build_qaoa_circuit(instance: E3LIN2Instance, gamma: float, beta: float):
    """p=1 QAOA state preparation and the cost terms ``(Z_u Z_v Z_w, d)``.

    Cost layer ``exp(-i gamma C)`` with ``C = 1/2 sum d ZZZ`` is a product of
    rotations of angle ``gamma d``; the mixer ``exp(-i beta X)`` is a rotation
    of angle ``2 beta`` on each qubit.
    """
    n = instance.n
    gates = [clifford("h", q) for q in range(n)]
    terms = []
    for clause in instance.clauses:
        obs = clause_observable(n, clause)
        gates.append(Gate("rot", (), obs, gamma * clause[3]))
        terms.append((obs, clause[3]))
    gates.extend(Gate("rot", (), PauliString.single(n, q, "X"), 2 * beta) for q in range(n))
    return Circuit(n, gates), terms


@dataclass
class QAOAResult:
    value: float
    reports: list[OrderReport] = field(default_factory=list)
    weights: list[int] = field(default_factory=list)

    def value_at(self, K: int) -> float:
        """Cost truncated at order ``K``, summed term by term in index order."""
        total = 0.0
        for d, rep in zip(self.weights, self.reports):
            total += 0.5 * d * rep.value_at(K)
        return total


def qaoa_cost(
    instance: E3LIN2Instance,
    gamma: float,
    beta: float = math.pi / 4,
    K: int | None = None,
    *,
    compiled: CompiledCircuit | None = None,
    transform_angles: bool = True,
    threads: int = 1,
) -> QAOAResult:
    """``<C>^(K)``: each ``Z_u Z_v Z_w`` term goes through compile, light cone, propagate."""
    if compiled is None:
        circuit, _ = build_qaoa_circuit(instance, gamma, beta)
        compiled = compile_circuit(circuit, transform_angles=transform_angles)
    total = 0.0
    reports, weights = [], []
    for clause in instance.clauses:
        prog = lightcone_filter(compiled.for_observable(clause_observable(instance.n, clause)))
        res = propagate(prog, K, threads=threads, check_angles=transform_angles)
        reports.append(res.report)
        weights.append(clause[3])
        total += 0.5 * clause[3] * res.value
    return QAOAResult(total, reports, weights)


def max_nonzero_order(report: OrderReport, tol: float = NONZERO_TOL) -> int:
    """Largest ``k`` with ``|E^(k)| > tol`` (0 if none)."""
    nz = [k for k, v in enumerate(report.per_order_value) if abs(v) > tol]
    return nz[-1] if nz else 0


def term_max_order(
    instance: E3LIN2Instance, clause, gamma: float, beta: float = math.pi / 4,
    compiled: CompiledCircuit | None = None,
) -> int:
    """Full-order propagation of one cost term on its light cone."""
    if compiled is None:
        compiled = compile_circuit(build_qaoa_circuit(instance, gamma, beta)[0])
    prog = lightcone_filter(compiled.for_observable(clause_observable(instance.n, clause)))
    return max_nonzero_order(propagate(prog).report)


def instance_max_order(instance: E3LIN2Instance, gamma: float, beta: float = math.pi / 4) -> int:
    compiled = compile_circuit(build_qaoa_circuit(instance, gamma, beta)[0])
    return max(term_max_order(instance, c, gamma, beta, compiled) for c in instance.clauses)


# --- layered Clifford circuits -------------------------------------------------

CLIFFORD_ANGLES = (math.pi / 2, -math.pi / 2, math.pi, -math.pi)


@dataclass
class LayeredCliffordSpec:
    n: int
    p: int
    seed: int | None = None
    delta_theta: float = 0.0

    def to_dict(self) -> dict:
        return {"n": self.n, "p": self.p, "seed": self.seed, "delta_theta": self.delta_theta}

    @classmethod
    def from_dict(cls, d: dict) -> LayeredCliffordSpec:
        return cls(int(d["n"]), int(d["p"]), d.get("seed"), float(d.get("delta_theta", 0.0)))


def generate_layered_clifford(spec: LayeredCliffordSpec) -> Circuit:
    """``p`` pairs of layers: n one-qubit rotations, then n/2 two-qubit rotations
    on a random perfect matching.  Base angles are Clifford; every angle is
    shifted by ``delta_theta``."""
    n = spec.n
    if n < 2 or n % 2:
        raise ValueError(f"layered circuits need an even qubit count, got {n}")
    if spec.p < 1:
        raise ValueError("need at least one layer pair")
    rng = np.random.default_rng(spec.seed)
    letters = "XYZ"
    gates = []

    def angle():
        return CLIFFORD_ANGLES[int(rng.integers(4))] + spec.delta_theta

    for _ in range(spec.p):
        for q in range(n):
            axis = PauliString.single(n, q, letters[int(rng.integers(3))])
            gates.append(Gate("rot", (), axis, angle()))
        perm = rng.permutation(n)
        for i in range(n // 2):
            a, b = int(perm[2 * i]), int(perm[2 * i + 1])
            la, lb = letters[int(rng.integers(3))], letters[int(rng.integers(3))]
            gates.append(Gate("rot", (), PauliString.from_sparse(n, {a: la, b: lb}), angle()))
    return Circuit(n, gates)


def default_layered_observable(n: int) -> str:
    """Default two-point observable: Z1Z26 at n=50, Z1Z50 at n=100."""
    if n == 100:
        return "Z1Z50"
    return f"Z1Z{n // 2 + 1}"


_LABEL = re.compile(r"([IXYZ])(\d+)")


def parse_sparse_label(label: str, n: int) -> PauliString:
    """Parse ``"Z1Z26"`` (1-based qubit indices) into a Pauli string."""
    label = label.strip().upper()
    pos = 0
    letters = {}
    for m in _LABEL.finditer(label):
        if m.start() != pos:
            break
        q = int(m.group(2)) - 1
        if q in letters:
            raise ValueError(f"qubit {q + 1} repeated in {label!r}")
        letters[q] = m.group(1)
        pos = m.end()
    if pos != len(label) or not letters:
        raise ValueError(f"cannot parse sparse Pauli label {label!r}")
    return PauliString.from_sparse(n, letters)


def save_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_dict(), fh, indent=2)
