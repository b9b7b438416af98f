import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from cliffpert.circuit import (
    CLIFFORD_KINDS,
    Circuit,
    circuit_from_dict,
    circuit_to_dict,
    clifford,
    conjugate_by_clifford,
    conjugate_by_pauli_rotation_clifford,
    load_circuit,
    rotation,
)
from cliffpert.errors import DimensionError, SchemaError
from cliffpert.oracle import _ONE_QUBIT, _TWO_QUBIT
from cliffpert.pauli import PauliString, commutes, parse_pauli, to_matrix

from conftest import random_pauli


def dense_gate(gate, n):
    """Full 2^n matrix of a named Clifford, qubit 0 most significant."""
    if CLIFFORD_KINDS[gate.kind] == 1:
        (q,) = gate.qubits
        mats = [np.eye(2)] * n
        mats[q] = _ONE_QUBIT[gate.kind]
        out = np.ones((1, 1))
        for m in mats:
            out = np.kron(out, m)
        return out
    a, b = gate.qubits
    m4 = _TWO_QUBIT[gate.kind].reshape(2, 2, 2, 2)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        for oa in range(2):
            for ob in range(2):
                amp = m4[oa, ob, bits[a], bits[b]]
                if amp:
                    nb = list(bits)
                    nb[a], nb[b] = oa, ob
                    row = sum(bit << (n - 1 - q) for q, bit in enumerate(nb))
                    out[row, col] += amp
    return out


def dense_conjugation(p, gate):
    u = dense_gate(gate, p.n)
    m = u.conj().T @ to_matrix(p) @ u
    for sign in (1, -1):
        for x in range(2**p.n):
            for z in range(2**p.n):
                cand = PauliString(p.n, x, z)
                if np.allclose(m, sign * to_matrix(cand)):
                    return cand, sign
    raise AssertionError("not a signed Pauli")


def test_hxh_is_z():
    assert conjugate_by_clifford(parse_pauli("X"), clifford("h", 0)) == (parse_pauli("Z"), 1)


def test_cx_control_z_unchanged():
    assert conjugate_by_clifford(parse_pauli("ZI"), clifford("cx", 0, 1)) == (parse_pauli("ZI"), 1)


def test_cx_spreads_x():
    g = clifford("cx", 0, 1)
    expected = dense_conjugation(parse_pauli("XI"), g)
    assert expected == (parse_pauli("XX"), 1)
    assert conjugate_by_clifford(parse_pauli("XI"), g) == expected


def test_s_sign_convention():
    # S^dagger X S = -Y, the worked example in the module docstring
    assert conjugate_by_clifford(parse_pauli("X"), clifford("s", 0)) == (parse_pauli("Y"), -1)
    assert conjugate_by_clifford(parse_pauli("X"), clifford("sdg", 0)) == (parse_pauli("Y"), 1)


@pytest.mark.parametrize("kind", sorted(CLIFFORD_KINDS))
def test_named_cliffords_match_dense(kind, rng):
    for _ in range(15):
        n = rng.randint(max(2, CLIFFORD_KINDS[kind]), 4)
        g = clifford(kind, *rng.sample(range(n), CLIFFORD_KINDS[kind]))
        p = random_pauli(rng, n, allow_identity=True)
        assert conjugate_by_clifford(p, g) == dense_conjugation(p, g)


@pytest.mark.parametrize("kind", sorted(CLIFFORD_KINDS))
def test_conjugation_preserves_structure(kind, rng):
    for _ in range(20):
        n = 4
        g = clifford(kind, *rng.sample(range(n), CLIFFORD_KINDS[kind]))
        a, b = random_pauli(rng, n), random_pauli(rng, n)
        ca, _ = conjugate_by_clifford(a, g)
        cb, _ = conjugate_by_clifford(b, g)
        assert commutes(a, b) == commutes(ca, cb)
        if CLIFFORD_KINDS[kind] == 1:
            assert ca.weight == a.weight


def test_clifford_out_of_range():
    g = clifford("cx", 0, 3)
    with pytest.raises(DimensionError):
        conjugate_by_clifford(parse_pauli("XX"), g)


def dense_rotation_conjugation(p, axis, k):
    u = expm(-1j * k * math.pi / 4 * to_matrix(axis))
    m = u.conj().T @ to_matrix(p) @ u
    for sign in (1, -1):
        for x in range(2**p.n):
            for z in range(2**p.n):
                cand = PauliString(p.n, x, z)
                if np.allclose(m, sign * to_matrix(cand)):
                    return cand, sign
    raise AssertionError


@pytest.mark.parametrize(
    "p,axis,k,expected",
    [("X", "Z", 2, ("X", -1)), ("X", "X", 1, ("X", 1)), ("X", "Z", 1, ("Y", -1))],
)
def test_rotation_clifford_examples(p, axis, k, expected):
    got = conjugate_by_pauli_rotation_clifford(parse_pauli(p), parse_pauli(axis), k)
    assert got == (parse_pauli(expected[0]), expected[1])
    assert got == dense_rotation_conjugation(parse_pauli(p), parse_pauli(axis), k)


def test_rotation_clifford_matches_dense(rng):
    for _ in range(60):
        n = rng.randint(1, 3)
        p, axis = random_pauli(rng, n, True), random_pauli(rng, n)
        k = rng.randint(-5, 5)
        got = conjugate_by_pauli_rotation_clifford(p, axis, k)
        assert got == dense_rotation_conjugation(p, axis, k)
        if k % 4 == 0:
            assert got == (p, 1)


def test_gate_validation():
    with pytest.raises(ValueError):
        rotation("III", 0.1)
    with pytest.raises(ValueError):
        clifford("cx", 1, 1)
    with pytest.raises(ValueError):
        clifford("t", 0)
    with pytest.raises(DimensionError):
        Circuit(2, [clifford("h", 2)])


def test_json_round_trip(tmp_path):
    c = Circuit(3, [clifford("h", 0), rotation("ZZI", 0.4), clifford("cx", 0, 2)])
    data = circuit_to_dict(c)
    assert data["gates"][1] == {"kind": "rot", "axis": "ZZI", "theta": 0.4}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    assert load_circuit(path) == c


@pytest.mark.parametrize(
    "data,field",
    [
        ({"gates": []}, "n"),
        ({"n": 2, "gates": {}}, "gates"),
        ({"n": 2, "gates": [{"kind": "h"}]}, "gates[0]"),
        ({"n": 2, "gates": [{"kind": "rot", "axis": "ZZZ", "theta": 1}]}, "gates[0]"),
        ({"n": 2, "gates": [{"kind": "h", "qubits": [0]}, {"kind": "cx", "qubits": [0, 5]}]}, "gates[1]"),
    ],
)
def test_schema_errors_name_field(data, field):
    with pytest.raises(SchemaError) as info:
        circuit_from_dict(data)
    assert info.value.field == field
