"""Heisenberg back-propagation of a sparse Pauli sum with order truncation.

Terms are keyed by ``(string, order, damping_order)``.  ``order`` counts the
``sin(theta)`` branch factors a term has picked up; ``damping_order`` counts
``lambda`` branches from amplitude damping and is only non-zero when noise is
present.  Storage is columnar: packed uint64 masks of shape ``(T, W)`` plus
order / coefficient vectors.  Rows are kept sorted by a 64-bit key hash, so
merging new branches is a ``searchsorted`` + ``insert`` rather than a re-sort,
and iteration order is a deterministic function of the keys.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .compile import QUARTER_PI, InteractionPictureProgram, ProgramRotation
from .errors import AngleRangeError, DimensionError, PhaseAlgebraError, ResourceLimitError
from .pauli import PauliString, int_to_words, n_words, words_to_int

log = logging.getLogger(__name__)

DEFAULT_MAX_TERMS = 200_000_000
CHUNK_ROWS = 1 << 16
ANGLE_TOL = 1e-12

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix(v: np.ndarray) -> np.ndarray:
    v = v ^ (v >> np.uint64(30))
    v = v * _M1
    v = v ^ (v >> np.uint64(27))
    v = v * _M2
    return v ^ (v >> np.uint64(31))


def _key_hash(x: np.ndarray, z: np.ndarray, order: np.ndarray, damp: np.ndarray) -> np.ndarray:
    h = np.full(len(order), _GOLDEN, dtype=np.uint64)
    for col in range(x.shape[1]):
        h = _mix(h ^ x[:, col])
        h = _mix(h ^ z[:, col])
    tag = order.astype(np.uint64) | (damp.astype(np.uint64) << np.uint64(32))
    return _mix(h ^ tag)


def _popcount_rows(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).sum(axis=1, dtype=np.int64)


def default_max_terms() -> int:
    env = os.environ.get("CLIFFPERT_MAX_TERMS")
    return int(float(env)) if env else DEFAULT_MAX_TERMS


class ObservableSum:
    """Evolved observable as a sparse real-weighted sum of Pauli strings.

    Mutated in place by :func:`apply_rotation` and the noise channels; the
    functions also return the sum for chaining.
    """

    def __init__(self, n: int, order_cap: int | None = None):
        self.n = n
        self.words = n_words(n)
        self.order_cap = order_cap
        self.x = np.zeros((0, self.words), dtype=np.uint64)
        self.z = np.zeros((0, self.words), dtype=np.uint64)
        self.order = np.zeros(0, dtype=np.int32)
        self.damp = np.zeros(0, dtype=np.int32)
        self.coeff = np.zeros(0, dtype=np.float64)
        self.hash = np.zeros(0, dtype=np.uint64)
        self.generated = np.zeros(1, dtype=np.int64)  # distinct keys ever created, per order
        self._hash_dups = False

    # -- construction -----------------------------------------------------

    @classmethod
    def from_pauli(cls, p: PauliString, coeff: float = 1.0, order_cap: int | None = None):
        return cls.from_terms(p.n, {(p, 0): coeff}, order_cap=order_cap)

    @classmethod
    def from_terms(cls, n: int, terms: dict, order_cap: int | None = None) -> ObservableSum:
        """Build from ``{(PauliString, order): coeff}`` or ``{(PauliString, order, damp): coeff}``."""
        s = cls(n, order_cap)
        rows = [(k[0], k[1], k[2] if len(k) > 2 else 0, float(c)) for k, c in terms.items()]
        rows = [r for r in rows if r[3] != 0.0]
        if not rows:
            return s
        for p, *_ in rows:
            if p.n != n:
                raise DimensionError(f"term acts on {p.n} qubits, sum on {n}")
        x = np.stack([int_to_words(p.x, s.words) for p, *_ in rows])
        z = np.stack([int_to_words(p.z, s.words) for p, *_ in rows])
        order = np.array([r[1] for r in rows], dtype=np.int32)
        damp = np.array([r[2] for r in rows], dtype=np.int32)
        coeff = np.array([r[3] for r in rows], dtype=np.float64)
        s._merge(x, z, order, damp, coeff)
        return s

    def copy(self) -> ObservableSum:
        s = ObservableSum(self.n, self.order_cap)
        for name in ("x", "z", "order", "damp", "coeff", "hash", "generated"):
            setattr(s, name, getattr(self, name).copy())
        s._hash_dups = self._hash_dups
        return s

    # -- views --------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.coeff)

    def _string(self, i: int) -> PauliString:
        return PauliString(self.n, words_to_int(self.x[i]), words_to_int(self.z[i]))

    def terms(self, *, with_damping: bool = False) -> dict:
        """Canonically ordered dict ``{(PauliString, order): coeff}``.

        Damping orders are summed out unless ``with_damping`` is set, in which
        case keys are ``(PauliString, order, damp)``.
        """
        out: dict = {}
        for i in self._canonical_order():
            p = self._string(i)
            if with_damping:
                out[(p, int(self.order[i]), int(self.damp[i]))] = float(self.coeff[i])
            else:
                key = (p, int(self.order[i]))
                out[key] = out.get(key, 0.0) + float(self.coeff[i])
        return out

    def _canonical_order(self) -> np.ndarray:
        cols = [self.damp, self.order]
        for w in range(self.words):
            cols.append(self.z[:, w])
            cols.append(self.x[:, w])
        return np.lexsort(cols[::-1]) if len(self) else np.zeros(0, dtype=np.intp)

    def max_order(self) -> int:
        return int(self.order.max()) if len(self) else 0

    # -- mutation -----------------------------------------------------------

    def _count_generated(self, orders: np.ndarray) -> None:
        if len(orders) == 0:
            return
        counts = np.bincount(orders, minlength=len(self.generated))
        if len(counts) > len(self.generated):
            self.generated = np.pad(self.generated, (0, len(counts) - len(self.generated)))
        self.generated[: len(counts)] += counts

    def _merge(self, x, z, order, damp, coeff) -> int:
        """Accumulate new rows into the sum; returns the number of new keys."""
        if len(coeff) == 0:
            return 0
        h = _key_hash(x, z, order, damp)
        if self._hash_dups:
            return self._merge_exact(x, z, order, damp, coeff, h)

        idx = np.argsort(h, kind="stable")
        x, z, order, damp, coeff, h = x[idx], z[idx], order[idx], damp[idx], coeff[idx], h[idx]
        same_h = h[1:] == h[:-1]
        if same_h.any():
            same_key = (
                same_h
                & (x[1:] == x[:-1]).all(axis=1)
                & (z[1:] == z[:-1]).all(axis=1)
                & (order[1:] == order[:-1])
                & (damp[1:] == damp[:-1])
            )
            if (same_h & ~same_key).any():
                return self._merge_exact(x, z, order, damp, coeff, h)
            starts = np.flatnonzero(np.concatenate(([True], ~same_key)))
            coeff = np.add.reduceat(coeff, starts)
            x, z, order, damp, h = x[starts], z[starts], order[starts], damp[starts], h[starts]

        pos = np.searchsorted(self.hash, h, side="left")
        cand = pos < len(self.hash)
        hit = np.zeros(len(h), dtype=bool)
        hit[cand] = self.hash[pos[cand]] == h[cand]
        if hit.any():
            hp = pos[hit]
            exact = (
                (self.x[hp] == x[hit]).all(axis=1)
                & (self.z[hp] == z[hit]).all(axis=1)
                & (self.order[hp] == order[hit])
                & (self.damp[hp] == damp[hit])
            )
            if not exact.all():
                return self._merge_exact(x, z, order, damp, coeff, h)
            self.coeff[hp] += coeff[hit]
        miss = ~hit
        fresh = int(miss.sum())
        if fresh:
            ip = pos[miss]
            self.x = np.insert(self.x, ip, x[miss], axis=0)
            self.z = np.insert(self.z, ip, z[miss], axis=0)
            self.order = np.insert(self.order, ip, order[miss])
            self.damp = np.insert(self.damp, ip, damp[miss])
            self.coeff = np.insert(self.coeff, ip, coeff[miss])
            self.hash = np.insert(self.hash, ip, h[miss])
            self._count_generated(order[miss])
        self._drop(self.coeff == 0.0)
        return fresh

    def _merge_exact(self, x, z, order, damp, coeff, h) -> int:
        # 64-bit hash collision: fall back to a full lexicographic sort
        log.warning("key hash collision; using exact merge path")
        n_old = len(self)
        ax = np.concatenate([self.x, x])
        az = np.concatenate([self.z, z])
        ao = np.concatenate([self.order, order])
        ad = np.concatenate([self.damp, damp])
        ac = np.concatenate([self.coeff, coeff])
        ah = np.concatenate([self.hash, h])
        origin = np.concatenate([np.zeros(n_old, bool), np.ones(len(h), bool)])
        cols = [ad, ao]
        for w in range(self.words):
            cols += [az[:, w], ax[:, w]]
        cols.append(ah)
        idx = np.lexsort(cols)
        ax, az, ao, ad, ac, ah, origin = (a[idx] for a in (ax, az, ao, ad, ac, ah, origin))
        same = (
            (ah[1:] == ah[:-1])
            & (ax[1:] == ax[:-1]).all(axis=1)
            & (az[1:] == az[:-1]).all(axis=1)
            & (ao[1:] == ao[:-1])
            & (ad[1:] == ad[:-1])
        )
        starts = np.flatnonzero(np.concatenate(([True], ~same)))
        sums = np.add.reduceat(ac, starts)
        has_old = np.logical_or.reduceat(~origin, starts)
        self.x, self.z, self.order, self.damp = ax[starts], az[starts], ao[starts], ad[starts]
        self.coeff, self.hash = sums, ah[starts]
        self._hash_dups = bool((self.hash[1:] == self.hash[:-1]).any())
        self._count_generated(self.order[~has_old])
        self._drop(self.coeff == 0.0)
        return int((~has_old).sum())

    def _drop(self, mask: np.ndarray) -> None:
        if mask.any():
            keep = ~mask
            for name in ("x", "z", "order", "damp", "coeff", "hash"):
                setattr(self, name, getattr(self, name)[keep])

    def prune(self, threshold: float) -> int:
        """Drop terms with ``|c| < threshold``; returns how many were dropped."""
        if threshold <= 0:
            return 0
        mask = np.abs(self.coeff) < threshold
        self._drop(mask)
        return int(mask.sum())


def _branch_chunk(x, z, order, coeff, ax, az, axis_phase, K, sin_t):
    anti = (_popcount_rows((x & az) ^ (z & ax)) & 1).astype(bool)
    idx = np.flatnonzero(anti)
    grow = idx[order[idx] < K] if K is not None else idx
    bx = x[grow] ^ ax
    bz = z[grow] ^ az
    # axis * sigma = i**e * (bx, bz); the new branch carries i * i**e
    e = (
        axis_phase
        + _popcount_rows(x[grow] & z[grow])
        + 2 * _popcount_rows(az & x[grow])
        - _popcount_rows(bx & bz)
    ) % 4
    if (e % 2 == 0).any():
        raise PhaseAlgebraError("branch of an anticommuting pair produced an imaginary coefficient")
    sign = np.where((1 + e) % 4 == 0, 1.0, -1.0)
    return idx, grow, bx, bz, coeff[grow] * sin_t * sign


def apply_rotation(
    obs: ObservableSum,
    axis: PauliString,
    theta: float,
    K: int | None = None,
    *,
    check_angle: bool = True,
    threads: int = 1,
    max_terms: int | None = None,
    gate_index: int | None = None,
) -> ObservableSum:
    """Conjugate every term by ``exp(-i theta axis / 2)``, keeping orders ``<= K``.

    Commuting terms are untouched.  An anticommuting term ``(s, k, c)`` becomes
    ``(s, k, c cos theta)`` plus, if ``k < K``, ``(axis*s, k+1, +-c sin theta)``.
    """
    if axis.n != obs.n:
        raise DimensionError(f"axis acts on {axis.n} qubits, sum on {obs.n}")
    if axis.is_identity():
        raise ValueError("rotation axis must be non-identity")
    if check_angle and abs(theta) > QUARTER_PI + ANGLE_TOL:
        raise AngleRangeError(f"|theta|={abs(theta):.6g} exceeds pi/4; compile the circuit first")
    if len(obs) == 0:
        return obs
    ax, az = (w[None, :] for w in axis.words())
    axis_phase = (axis.x & axis.z).bit_count()
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    T = len(obs)
    bounds = [(s, min(s + CHUNK_ROWS, T)) for s in range(0, T, CHUNK_ROWS)]

    def work(b):
        s, e = b
        return _branch_chunk(
            obs.x[s:e], obs.z[s:e], obs.order[s:e], obs.coeff[s:e], ax, az, axis_phase, K, sin_t
        )

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]

    anti = np.concatenate([p[0] + s for p, (s, _) in zip(parts, bounds)])
    grow = np.concatenate([p[1] + s for p, (s, _) in zip(parts, bounds)])
    if len(anti) == 0:
        return obs
    bx = np.concatenate([p[2] for p in parts])
    bz = np.concatenate([p[3] for p in parts])
    bc = np.concatenate([p[4] for p in parts])
    border = obs.order[grow] + 1
    bdamp = obs.damp[grow]

    cap = max_terms if max_terms is not None else default_max_terms()
    if T + len(bc) > cap:
        where = f" at gate {gate_index}" if gate_index is not None else ""
        raise ResourceLimitError(
            f"term budget of {cap} keys exceeded{where} ({T} stored + {len(bc)} new)",
            gate_index=gate_index,
        )
    obs.coeff[anti] *= cos_t
    obs._merge(bx, bz, border.astype(np.int32), bdamp, bc)
    if len(bc) == 0:
        obs._drop(obs.coeff == 0.0)
    return obs


@dataclass
class OrderReport:
    per_order_value: list[float]
    per_order_term_count: list[int]
    cumulative_value: list[float]
    cumulative_term_count: list[int]
    total_terms_generated: int
    stored_terms: int = 0
    per_gate_term_count: list[int] = field(default_factory=list)

    @property
    def expval(self) -> float:
        return self.cumulative_value[-1]

    def value_at(self, K: int) -> float:
        """``<O>^(K)``; orders beyond the computed range add nothing."""
        return self.cumulative_value[min(K, len(self.cumulative_value) - 1)]

    def to_dict(self) -> dict:
        return {
            "expval": self.expval,
            "per_order": list(self.per_order_value),
            "cumulative": list(self.cumulative_value),
            "terms_per_order": list(self.per_order_term_count),
            "cumulative_terms": list(self.cumulative_term_count),
            "total_terms": self.total_terms_generated,
        }


def expectation(obs: ObservableSum) -> tuple[float, OrderReport]:
    """Vacuum expectation value with its per-order breakdown.

    ``per_order_term_count`` counts distinct keys generated at each order over
    the whole propagation, not just the survivors.
    """
    top = obs.order_cap if obs.order_cap is not None else max(obs.max_order(), len(obs.generated) - 1)
    length = top + 1
    if len(obs):
        vac = ~obs.x.any(axis=1)
        per = np.bincount(obs.order[vac], weights=obs.coeff[vac], minlength=length)
    else:
        per = np.zeros(length)
    per_order = [float(v) for v in per[:length]]
    cumulative, running = [], 0.0
    for v in per_order:
        running += v
        cumulative.append(running)
    gen = np.zeros(length, dtype=np.int64)
    gen[: min(length, len(obs.generated))] = obs.generated[:length]
    counts = [int(c) for c in gen]
    cum_counts = [int(c) for c in np.cumsum(gen)]
    report = OrderReport(
        per_order_value=per_order,
        per_order_term_count=counts,
        cumulative_value=cumulative,
        cumulative_term_count=cum_counts,
        total_terms_generated=int(obs.generated.sum()),
        stored_terms=len(obs),
    )
    return running, report


@dataclass
class PropagationResult:
    sum: ObservableSum
    report: OrderReport

    @property
    def value(self) -> float:
        return self.report.expval


def propagate(
    program: InteractionPictureProgram,
    K: int | None = None,
    *,
    noise=None,
    damping_order: int | None = None,
    coeff_threshold: float = 0.0,
    max_terms: int | None = None,
    threads: int = 1,
    check_angles: bool = True,
) -> PropagationResult:
    """Run the whole program on its observable.

    ``K=None`` means no truncation (full order).  ``noise`` is a list of
    :class:`cliffpert.noise.NoiseSpec`; a spec with ``after=j`` acts once the
    first ``j`` rotations (operator order) have been applied.  Specs sharing
    a slot act on the observable in list order, so on the state in reverse.
    """
    if K is not None and K < 0:
        raise ValueError("order K must be non-negative")
    if coeff_threshold > 0:
        warnings.warn(
            "coefficient pruning is on; per-order values are approximate", stacklevel=2
        )
    cap_k = K if K is not None else len(program.rotations)
    obs = ObservableSum.from_pauli(program.observable, float(program.sign), order_cap=cap_k)
    cap = max_terms if max_terms is not None else default_max_terms()

    by_slot: dict[int, list] = {}
    if noise:
        from .noise import apply_noise

        m = len(program.rotations)
        for spec in noise:
            if not 0 <= spec.after <= m:
                raise ValueError(f"noise location {spec.after} outside 0..{m}")
            if spec.qubit >= program.n:
                raise DimensionError(f"noise qubit {spec.qubit} out of range")
            by_slot.setdefault(spec.after, []).append(spec)

    per_gate = []
    for i, rot in enumerate(program.rotations):
        for spec in by_slot.get(i, ()):
            apply_noise(obs, spec, damping_order)
        apply_rotation(
            obs,
            rot.axis,
            rot.theta,
            K,
            check_angle=check_angles,
            threads=threads,
            max_terms=cap,
            gate_index=i,
        )
        if coeff_threshold > 0:
            obs.prune(coeff_threshold)
        per_gate.append(len(obs))
    for spec in by_slot.get(len(program.rotations), ()):
        apply_noise(obs, spec, damping_order)
    _, report = expectation(obs)
    report.per_gate_term_count = per_gate
    return PropagationResult(obs, report)


# --- light cone -------------------------------------------------------------

_LETTER_CODE = {(1, 0): 1, (1, 1): 2, (0, 1): 4}  # X, Y, Z as bit flags
_CODE_BITS = {1: (1, 0), 2: (1, 1), 4: (0, 1)}


def _letter_products(axis_letter: int, present: int) -> int:
    """Letters reachable as ``axis_letter * l`` for ``l`` in ``present`` or I."""
    ab = _CODE_BITS[axis_letter]
    out = axis_letter
    for code, bits in _CODE_BITS.items():
        if present & code:
            prod = (ab[0] ^ bits[0], ab[1] ^ bits[1])
            if prod != (0, 0):
                out |= _LETTER_CODE[prod]
    return out


def lightcone_filter(
    program: InteractionPictureProgram, observable: PauliString | None = None
) -> InteractionPictureProgram:
    """Drop rotations that commute with every term that can reach them.

    Sweeps in operator order keeping, per qubit, the set of single-qubit
    letters any evolved term may carry there.  A rotation whose axis commutes
    letter-wise with every possible letter on its support cannot act and is
    removed; otherwise its products are added to the sets.
    """
    obs = observable if observable is not None else program.observable
    letters = [0] * program.n
    for q in obs.support:
        letters[q] = _LETTER_CODE[(obs.x >> q & 1, obs.z >> q & 1)]
    kept: list[ProgramRotation] = []
    for rot in program.rotations:
        ax, az = rot.axis.x, rot.axis.z
        supp = rot.axis.support
        codes = [_LETTER_CODE[(ax >> q & 1, az >> q & 1)] for q in supp]
        if all(letters[q] & ~c == 0 for q, c in zip(supp, codes)):
            continue
        kept.append(rot)
        for q, c in zip(supp, codes):
            letters[q] = _letter_products(c, letters[q]) | letters[q]
    return InteractionPictureProgram(program.n, kept, program.observable, program.sign)
