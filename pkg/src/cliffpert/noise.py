"""Heisenberg-picture noise channels on an :class:`ObservableSum`.

Channels act through their adjoint on observables.  With the usual Kraus
form ``rho -> sum_k E_k rho E_k^dagger`` the adjoint is
``O -> sum_k E_k^dagger O E_k``, which for amplitude damping gives
``Z -> (1 - lam) Z + lam I`` and ``X, Y -> sqrt(1 - lam) X, Y``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NoiseParameterError, SchemaError
from .propagate import ObservableSum

KINDS = ("pauli", "amplitude_damping", "phase_damping")


@dataclass(frozen=True)
class NoiseSpec:
    """One single-qubit channel.

    ``after`` counts program rotations (operator order) applied to the
    observable before the channel acts.
    """

    kind: str
    qubit: int
    after: int = 0
    sx: float = 0.0
    sy: float = 0.0
    sz: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise NoiseParameterError(f"unknown channel kind {self.kind!r}")
        if self.qubit < 0:
            raise NoiseParameterError("qubit index must be non-negative")
        if self.kind == "pauli":
            check_pauli_probabilities(self.sx, self.sy, self.sz)
        elif not 0.0 <= self.lam <= 1.0:
            raise NoiseParameterError(f"damping strength {self.lam} outside [0, 1]")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "q": self.qubit, "after": self.after}
        if self.kind == "pauli":
            d.update(sx=self.sx, sy=self.sy, sz=self.sz)
        else:
            d["lambda"] = self.lam
        return d

    @classmethod
    def from_dict(cls, d: dict) -> NoiseSpec:
        kind = d["kind"]
        if kind == "pauli":
            return cls(kind, int(d["q"]), int(d.get("after", 0)),
                       float(d.get("sx", 0)), float(d.get("sy", 0)), float(d.get("sz", 0)))
        return cls(kind, int(d["q"]), int(d.get("after", 0)), lam=float(d["lambda"]))


def check_pauli_probabilities(sx: float, sy: float, sz: float) -> None:
    if min(sx, sy, sz) < 0 or sx + sy + sz > 1 + 1e-15:
        raise NoiseParameterError(f"invalid Pauli channel probabilities ({sx}, {sy}, {sz})")


def load_noise(path: str | Path) -> list[NoiseSpec]:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise SchemaError("noise JSON must be an array", field="<root>")
    out = []
    for i, item in enumerate(data):
        try:
            out.append(NoiseSpec.from_dict(item))
        except KeyError as exc:
            raise SchemaError(f"missing field {exc.args[0]!r}", field=f"[{i}]") from None
    return out


def pauli_scaling(letter: str, sx: float, sy: float, sz: float) -> float:
    """Factor picked up by a single-qubit Pauli under the channel."""
    if letter == "I":
        return 1.0
    base = 1.0 - sx - sy - sz
    return base + sum(s if letter == e else -s for e, s in (("X", sx), ("Y", sy), ("Z", sz)))


def _qubit_bits(obs: ObservableSum, qubit: int) -> tuple[np.ndarray, np.ndarray]:
    w, b = divmod(qubit, 64)
    bit = np.uint64(1 << b)
    return (obs.x[:, w] & bit) != 0, (obs.z[:, w] & bit) != 0


def apply_pauli_channel(obs: ObservableSum, qubit: int, sx: float, sy: float, sz: float) -> ObservableSum:
    check_pauli_probabilities(sx, sy, sz)
    if len(obs) == 0:
        return obs
    xb, zb = _qubit_bits(obs, qubit)
    factor = np.ones(len(obs))
    for letter, sel in (("X", xb & ~zb), ("Y", xb & zb), ("Z", ~xb & zb)):
        factor[sel] = pauli_scaling(letter, sx, sy, sz)
    obs.coeff *= factor
    obs._drop(obs.coeff == 0.0)
    return obs


def apply_phase_damping(obs: ObservableSum, qubit: int, lam: float) -> ObservableSum:
    if not 0.0 <= lam <= 1.0:
        raise NoiseParameterError(f"damping strength {lam} outside [0, 1]")
    if len(obs) == 0 or lam == 0.0:
        return obs
    xb, _ = _qubit_bits(obs, qubit)
    obs.coeff[xb] *= math.sqrt(1.0 - lam)
    obs._drop(obs.coeff == 0.0)
    return obs


def apply_amplitude_damping(
    obs: ObservableSum, qubit: int, lam: float, damping_order: int | None = None
) -> ObservableSum:
    """``X, Y`` scale by ``sqrt(1-lam)``; ``Z`` becomes ``(1-lam) Z`` plus a ``lam I`` branch.

    The identity branch raises the term's damping order by one and is dropped
    once that would exceed ``damping_order``.
    """
    if not 0.0 <= lam <= 1.0:
        raise NoiseParameterError(f"damping strength {lam} outside [0, 1]")
    if len(obs) == 0 or lam == 0.0:
        return obs
    xb, zb = _qubit_bits(obs, qubit)
    obs.coeff[xb] *= math.sqrt(1.0 - lam)
    zsel = np.flatnonzero(~xb & zb)
    grow = zsel if damping_order is None else zsel[obs.damp[zsel] < damping_order]
    w, b = divmod(qubit, 64)
    nx = obs.x[grow].copy()
    nz = obs.z[grow].copy()
    nz[:, w] &= ~np.uint64(1 << b)
    new_coeff = obs.coeff[grow] * lam
    new_order = obs.order[grow].copy()
    new_damp = obs.damp[grow] + 1
    obs.coeff[zsel] *= 1.0 - lam
    obs._merge(nx, nz, new_order, new_damp.astype(np.int32), new_coeff)
    obs._drop(obs.coeff == 0.0)
    return obs


def apply_noise(obs: ObservableSum, spec: NoiseSpec, damping_order: int | None = None) -> ObservableSum:
    if spec.kind == "pauli":
        return apply_pauli_channel(obs, spec.qubit, spec.sx, spec.sy, spec.sz)
    if spec.kind == "amplitude_damping":
        return apply_amplitude_damping(obs, spec.qubit, spec.lam, damping_order)
    return apply_phase_damping(obs, spec.qubit, spec.lam)
