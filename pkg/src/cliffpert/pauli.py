"""Exact Pauli-group algebra on packed bitmasks.

A Pauli string on ``n`` qubits is stored as two integers ``x`` and ``z``;
qubit ``q`` lives at bit ``q`` of each mask and carries I/X/Z/Y for
``(x_q, z_q) = (0,0)/(1,0)/(0,1)/(1,1)``.  Canonical strings are phase-free
(``Y`` means the Hermitian Y, i.e. ``i X Z``); phases returned by
:func:`multiply` are exponents of ``i`` modulo 4.

In text form qubit 0 is the leftmost character.  When masks are dumped as
machine words, qubit ``q`` sits in word ``q // 64`` at bit ``q % 64``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}

WORD_BITS = 64
_WORD_MASK = (1 << WORD_BITS) - 1


def n_words(n: int) -> int:
    """Number of 64-bit words needed to pack ``n`` qubits (at least one)."""
    return max(1, -(-n // WORD_BITS))


def int_to_words(value: int, words: int) -> np.ndarray:
    return np.array(
        [(value >> (WORD_BITS * w)) & _WORD_MASK for w in range(words)], dtype=np.uint64
    )


def words_to_int(row) -> int:
    out = 0
    for w, val in enumerate(row):
        out |= int(val) << (WORD_BITS * w)
    return out


@dataclass(frozen=True, slots=True)
class PauliString:
    """Phase-free n-qubit Pauli string."""

    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        full = (1 << self.n) - 1
        if self.x & ~full or self.z & ~full or self.x < 0 or self.z < 0:
            raise ValueError(f"mask bits set beyond qubit count {self.n}")

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> PauliString:
        bx, bz = _LETTER_BITS[letter]
        return cls(n, bx << qubit, bz << qubit)

    @classmethod
    def from_sparse(cls, n: int, letters: dict[int, str]) -> PauliString:
        """Build from ``{qubit: letter}``, e.g. ``{0: "Z", 25: "Z"}``."""
        x = z = 0
        for q, letter in letters.items():
            if not 0 <= q < n:
                raise DimensionError(f"qubit {q} out of range for n={n}")
            bx, bz = _LETTER_BITS[letter.upper()]
            x |= bx << q
            z |= bz << q
        return cls(n, x, z)

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> list[int]:
        m = self.x | self.z
        return [q for q in range(self.n) if m >> q & 1]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letter(self, q: int) -> str:
        return _BITS_LETTER[(self.x >> q & 1, self.z >> q & 1)]

    def words(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, z) as uint64 word arrays."""
        w = n_words(self.n)
        return int_to_words(self.x, w), int_to_words(self.z, w)

    def __str__(self) -> str:
        return format_pauli(self)


def _check_same_n(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"Pauli strings act on {a.n} and {b.n} qubits")


def product_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    """Exponent ``e`` with ``P1 P2 = i**e * P3`` for canonical strings.

    Writing a canonical string as ``i**|x&z| X^x Z^z`` and moving ``Z^z1``
    past ``X^x2`` gives the popcount formula below.
    """
    x3 = x1 ^ x2
    z3 = z1 ^ z2
    e = (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        + 2 * (z1 & x2).bit_count()
        - (x3 & z3).bit_count()
    )
    return e % 4


def multiply(a: PauliString, b: PauliString) -> tuple[PauliString, int]:
    """Return ``(c, e)`` such that ``a @ b == i**e * c``."""
    _check_same_n(a, b)
    e = product_phase(a.x, a.z, b.x, b.z)
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z), e


def symplectic_product(x1: int, z1: int, x2: int, z2: int) -> int:
    return ((x1 & z2) ^ (z1 & x2)).bit_count() & 1


def commutes(a: PauliString, b: PauliString) -> bool:
    _check_same_n(a, b)
    return symplectic_product(a.x, a.z, b.x, b.z) == 0


def vacuum_expectation(p: PauliString) -> int:
    """``<0...0| p |0...0>`` for a canonical string: 1 if only I/Z factors, else 0."""
    return 1 if p.x == 0 else 0


def parse_pauli(text: str) -> PauliString:
    """Parse ``"IZX"``-style text, qubit 0 leftmost."""
    if not text:
        raise ValueError("empty Pauli string")
    x = z = 0
    for q, ch in enumerate(text.upper()):
        try:
            bx, bz = _LETTER_BITS[ch]
        except KeyError:
            raise ValueError(f"invalid Pauli character {ch!r} at position {q}") from None
        x |= bx << q
        z |= bz << q
    return PauliString(len(text), x, z)


def format_pauli(p: PauliString) -> str:
    return "".join(p.letter(q) for q in range(p.n))


def to_matrix(p: PauliString) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix; qubit 0 is the most significant tensor factor."""
    single = {
        "I": np.eye(2, dtype=complex),
        "X": np.array([[0, 1], [1, 0]], dtype=complex),
        "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
        "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    }
    out = np.ones((1, 1), dtype=complex)
    for q in range(p.n):
        out = np.kron(out, single[p.letter(q)])
    return out
