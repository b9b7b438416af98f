import math
import random

import pytest

from cliffpert.circuit import CLIFFORD_KINDS, Circuit, clifford, rotation
from cliffpert.pauli import PauliString


def random_pauli(rng: random.Random, n: int, allow_identity: bool = False) -> PauliString:
    while True:
        p = PauliString(n, rng.getrandbits(n), rng.getrandbits(n))
        if allow_identity or not p.is_identity():
            return p


def random_circuit(
    rng: random.Random, n: int, n_gates: int, p_clifford: float = 0.5, angle_span: float = 2 * math.pi
) -> Circuit:
    c = Circuit(n)
    kinds = [k for k, arity in CLIFFORD_KINDS.items() if arity <= n]
    for _ in range(n_gates):
        if rng.random() < p_clifford:
            kind = rng.choice(kinds)
            c.append(clifford(kind, *rng.sample(range(n), CLIFFORD_KINDS[kind])))
        else:
            c.append(rotation(random_pauli(rng, n), rng.uniform(-angle_span, angle_span)))
    return c


@pytest.fixture
def rng():
    return random.Random(20240521)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
