import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffpert.errors import DimensionError
from cliffpert.pauli import (
    PauliString,
    commutes,
    format_pauli,
    multiply,
    parse_pauli,
    to_matrix,
    vacuum_expectation,
)


def paulis(n):
    return st.builds(
        lambda x, z: PauliString(n, x, z),
        st.integers(0, 2**n - 1),
        st.integers(0, 2**n - 1),
    )


def dense_product(a, b):
    """Find (c, e) with a b = i^e c by brute force over dense matrices."""
    m = to_matrix(a) @ to_matrix(b)
    c = PauliString(a.n, a.x ^ b.x, a.z ^ b.z)
    mc = to_matrix(c)
    for e in range(4):
        if np.allclose(m, (1j**e) * mc):
            return c, e
    raise AssertionError("product is not a phased Pauli")


def test_xy_is_iz():
    c, e = multiply(parse_pauli("X"), parse_pauli("Y"))
    assert format_pauli(c) == "Z"
    assert e == 1


def test_identity_product():
    p = parse_pauli("XYZ")
    assert multiply(p, parse_pauli("III")) == (p, 0)


def test_zx_times_xx():
    # dense oracle: (Z x X)(X x X) = ZX x I = iY x I
    a, b = parse_pauli("ZX"), parse_pauli("XX")
    assert dense_product(a, b) == (parse_pauli("YI"), 1)
    assert multiply(a, b) == (parse_pauli("YI"), 1)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        multiply(parse_pauli("X"), parse_pauli("XX"))
    with pytest.raises(DimensionError):
        commutes(parse_pauli("X"), parse_pauli("XX"))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(paulis(n), paulis(n))))
def test_multiply_matches_dense(pair):
    a, b = pair
    assert multiply(a, b) == dense_product(a, b)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(paulis(n), paulis(n), paulis(n))))
def test_multiply_associative(triple):
    a, b, c = triple
    ab, e1 = multiply(a, b)
    abc, e2 = multiply(ab, c)
    bc, e3 = multiply(b, c)
    a_bc, e4 = multiply(a, bc)
    assert abc == a_bc
    assert (e1 + e2) % 4 == (e3 + e4) % 4
    dense = to_matrix(a) @ to_matrix(b) @ to_matrix(c)
    assert np.allclose(dense, 1j ** ((e1 + e2) % 4) * to_matrix(abc))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(paulis))
def test_square_is_identity(p):
    assert multiply(p, p) == (PauliString.identity(p.n), 0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(paulis(n), paulis(n))))
def test_commutes_matches_phase_difference(pair):
    a, b = pair
    (ab, e1), (ba, e2) = multiply(a, b), multiply(b, a)
    assert ab == ba
    assert commutes(a, b) == ((e1 - e2) % 4 == 0)
    if not commutes(a, b):
        assert (e1 - e2) % 4 == 2


@pytest.mark.parametrize(
    "a,b,expected",
    [("X", "X", True), ("X", "Z", False), ("ZZZ", "XXI", True), ("XYZ", "ZZX", False)],
)
def test_commutes_examples(a, b, expected):
    pa, pb = parse_pauli(a), parse_pauli(b)
    dense = to_matrix(pa) @ to_matrix(pb) - to_matrix(pb) @ to_matrix(pa)
    assert np.allclose(dense, 0) == expected
    assert commutes(pa, pb) == expected


@pytest.mark.parametrize("text,expected", [("ZIZ", 1), ("XZ", 0), ("YZZ", 0), ("III", 1)])
def test_vacuum_expectation(text, expected):
    p = parse_pauli(text)
    dense = to_matrix(p)[0, 0]
    assert dense == pytest.approx(expected)
    assert vacuum_expectation(p) == expected


def test_vacuum_fraction_matches_three_to_minus_w():
    rng = random.Random(5)
    n, w, samples = 12, 3, 10_000
    hits = 0
    for _ in range(samples):
        qubits = rng.sample(range(n), w)
        p = PauliString.from_sparse(n, {q: rng.choice("XYZ") for q in qubits})
        hits += vacuum_expectation(p)
    prob = 3.0**-w
    sigma = math.sqrt(samples * prob * (1 - prob))
    assert abs(hits - samples * prob) < 3 * sigma


def test_parse_encoding():
    p = parse_pauli("IZX")
    assert (p.x, p.z) == (0b100, 0b010)
    assert parse_pauli("III").is_identity()
    assert format_pauli(multiply(parse_pauli("X"), parse_pauli("Y"))[0]) == "Z"


@pytest.mark.parametrize("bad", ["", "XQ", "x1"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_pauli(bad)


@settings(max_examples=100)
@given(st.text(alphabet="IXYZ", min_size=1, max_size=130))
def test_round_trip(text):
    assert format_pauli(parse_pauli(text)) == text


def test_weight_and_words():
    p = PauliString.from_sparse(70, {0: "X", 64: "Y", 69: "Z"})
    assert p.weight == 3
    xw, zw = p.words()
    assert list(xw) == [1, 1]
    assert list(zw) == [0, (1 << 0) | (1 << 5)]


def test_mask_range_checked():
    with pytest.raises(ValueError):
        PauliString(2, 0b100, 0)
