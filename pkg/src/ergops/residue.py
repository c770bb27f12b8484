"""Sequences of blocks, the connectivity relation and first residues.

For a stable partition ``H`` an H-sequence is ``(X_0, ..., X_{k-1})`` with
``X_i`` a block of ``H^{i*}``.  Its action ``a -> a*X_0*...*X_{k-1}`` is a
Boolean matrix, and every such matrix is a product of one-block generators.
The first residue is read off the reflexive matrices among those whose length
is a multiple of the period, then checked against its characterising
properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import BinaryOperation, elements_of, is_uniformity_preserving, popcount, set_product
from .errors import (
    AlphabetTooLarge,
    EmptySet,
    InconclusiveWithinBound,
    NotErgodic,
    NotStable,
    NotStronglyErgodic,
    ResidueVerificationFailed,
    StateBudgetExceeded,
)
from .graph import is_ergodic
from .partitions import (
    Partition,
    SubsetFamily,
    enumerate_stable_partitions,
    enumerate_stable_partitions_exhaustive,
    is_finer,
    is_stable_partition,
    iterate,
    orbit,
    step,
)

MONOID_BUDGET = 1 << 20
ORACLE_MAX_Q = 4


def transfer_matrix(op: BinaryOperation, subset: int) -> np.ndarray:
    """Row masks of ``R_X``: row ``a`` is ``a*X``."""
    cols = np.array(elements_of(subset), dtype=np.int64)
    if cols.size == 0:
        raise EmptySet("transfer matrix of an empty set")
    return np.bitwise_or.reduce(np.int64(1) << op.table[:, cols], axis=1)


def rows_to_bool(rows: np.ndarray, q: int) -> np.ndarray:
    return ((np.asarray(rows, dtype=np.int64)[:, None] >> np.arange(q)) & 1).astype(bool)


def is_reflexive(rows: np.ndarray) -> bool:
    q = rows.shape[-1]
    return bool(((rows >> np.arange(q)) & 1).all())


def partition_iterates(op: BinaryOperation, H: Partition) -> list[Partition]:
    """``[H, H*, ..., H^{(p-1)*}]`` for a periodic partition of period ``p``."""
    orb = orbit(op, H)
    if orb.preperiod != 0:
        raise NotStable(f"{H.to_lists()} is not periodic")
    return [it.as_partition() for it in orb.iterates[: orb.cycle_length]]


def _require_stable(op: BinaryOperation, H: SubsetFamily) -> Partition:
    if not is_ergodic(op):
        raise NotErgodic("residues are defined for ergodic operations")
    if not H.is_partition or not is_stable_partition(op, H):
        raise NotStable(f"{H.to_lists()} is not a stable partition")
    return H if isinstance(H, Partition) else H.as_partition()


@dataclass(frozen=True)
class HSequence:
    """A sequence of blocks ``X_i`` of ``H^{i*}``."""

    op: BinaryOperation
    base: Partition
    blocks: tuple[int, ...]

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("an H-sequence has at least one block")
        its = partition_iterates(self.op, self.base)
        for i, x in enumerate(self.blocks):
            if x not in its[i % len(its)]:
                raise ValueError(f"block {elements_of(x)} at position {i} is not in H^({i}*)")
        object.__setattr__(self, "_period", len(its))

    def __len__(self):
        return len(self.blocks)

    @property
    def repeatable(self) -> bool:
        return len(self.blocks) % self._period == 0

    def power(self, n: int) -> "HSequence":
        if not self.repeatable:
            raise ValueError("only repeatable sequences can be repeated")
        return HSequence(self.op, self.base, self.blocks * n)

    def act(self, subset: int) -> int:
        """``subset * X_0 * ... * X_{k-1}``, left to right."""
        for x in self.blocks:
            subset = set_product(self.op, subset, x)
        return subset

    def matrix(self) -> np.ndarray:
        rows = transfer_matrix(self.op, self.blocks[0]).reshape(1, -1)
        for x in self.blocks[1:]:
            rows = kernels.compose(rows, transfer_matrix(self.op, x).reshape(1, -1))
        return rows[0]


def is_augmenting(op: BinaryOperation, H: Partition, seq: HSequence) -> bool:
    """Repeatable, and ``A`` is inside ``A*seq`` for every ``A``.

    Set products distribute over unions, so the second condition is the
    diagonal of the sequence matrix being full.
    """
    return seq.repeatable and is_reflexive(seq.matrix())


@dataclass
class PhasedMatrixMonoid:
    """Matrices of all H-sequences of length >= 1, grouped by length mod the period."""

    q: int
    period: int
    iterates: list[Partition]
    generators: list[np.ndarray]
    phases: list[np.ndarray] = field(default_factory=list)

    @property
    def size(self) -> int:
        return sum(len(p) for p in self.phases)

    def reflexive(self) -> np.ndarray:
        mats = self.phases[0]
        if len(mats) == 0:
            return mats
        diag = ((mats >> np.arange(self.q)) & 1).all(axis=1)
        return mats[diag]


def build_monoid(op: BinaryOperation, H: Partition, budget: int = MONOID_BUDGET) -> PhasedMatrixMonoid:
    """Breadth-first closure from the one-block sequences."""
    H = _require_stable(op, H)
    its = partition_iterates(op, H)
    p = len(its)
    gens = [np.array([transfer_matrix(op, x) for x in it.blocks], dtype=np.int64) for it in its]
    seen: list[set[bytes]] = [set() for _ in range(p)]
    store: list[list[np.ndarray]] = [[] for _ in range(p)]
    total = 0

    def admit(phase: int, mats: np.ndarray) -> np.ndarray:
        nonlocal total
        if len(mats) == 0:
            return mats
        mats = np.unique(mats, axis=0)
        keep = []
        bucket = seen[phase]
        for i, row in enumerate(mats):
            key = row.tobytes()
            if key not in bucket:
                bucket.add(key)
                keep.append(i)
        new = mats[keep]
        total += len(new)
        if total > budget:
            raise StateBudgetExceeded(f"monoid exceeded {budget} matrices")
        if len(new):
            store[phase].append(new)
        return new

    frontier: list[np.ndarray] = [np.zeros((0, op.q), dtype=np.int64) for _ in range(p)]
    frontier[1 % p] = admit(1 % p, gens[0])
    while any(len(f) for f in frontier):
        nxt = [np.zeros((0, op.q), dtype=np.int64) for _ in range(p)]
        for r in range(p):
            if len(frontier[r]):
                target = (r + 1) % p
                grown = admit(target, kernels.compose(frontier[r], gens[r]))
                if len(grown):
                    nxt[target] = np.concatenate([nxt[target], grown]) if len(nxt[target]) else grown
        frontier = nxt
    phases = [np.concatenate(s) if s else np.zeros((0, op.q), dtype=np.int64) for s in store]
    return PhasedMatrixMonoid(op.q, p, its, gens, phases)


def _transpose(mats: np.ndarray, q: int) -> np.ndarray:
    bits = (mats[:, :, None] >> np.arange(q)) & 1  # [m, a, b] = M[a][b]
    weights = np.int64(1) << np.arange(q, dtype=np.int64)
    return (bits.transpose(0, 2, 1) * weights).sum(axis=2)


def _residue_candidate(monoid: PhasedMatrixMonoid) -> tuple[np.ndarray, np.ndarray]:
    refl = monoid.reflexive()
    if len(refl) == 0:
        raise ResidueVerificationFailed("no reflexive matrix at phase 0")
    mutual = refl & _transpose(refl, monoid.q)
    return refl, np.bitwise_or.reduce(mutual, axis=0)


def first_residue(op: BinaryOperation, H: Partition, budget: int = MONOID_BUDGET) -> Partition:
    """The first residue ``K_H``: the finest sub-stable partition reachable
    exactly by augmenting sequences, verified after construction."""
    H = _require_stable(op, H)
    if H.norm == 1:
        # K_H is always finer than H, and singletons are the finest partition
        return H
    monoid = build_monoid(op, H, budget)
    refl, relation = _residue_candidate(monoid)
    q = op.q
    classes = {int(m) for m in relation}
    for x in range(q):
        row = int(relation[x])
        if not row >> x & 1 or any(int(relation[y]) != row for y in elements_of(row)):
            raise ResidueVerificationFailed(f"relation row of {x} is not an equivalence class")
    try:
        K = Partition(q, classes)
    except Exception as exc:
        raise ResidueVerificationFailed(f"candidate classes do not form a partition: {exc}") from None
    _verify_residue(op, H, K, monoid, refl)
    return K


def _verify_residue(op: BinaryOperation, H: Partition, K: Partition, monoid: PhasedMatrixMonoid,
                    refl: np.ndarray):
    q = op.q
    labels = K.labels()
    block = [K.blocks[labels[x]] for x in range(q)]
    for x in range(q):
        if not (refl[:, x] == block[x]).any():
            raise ResidueVerificationFailed(f"no augmenting sequence maps {x} exactly onto its class")
        if (refl[:, x] & ~np.int64(block[x])).any():
            raise ResidueVerificationFailed(f"an augmenting sequence leaves the class of {x}")
    if not is_finer(K, H) or not is_stable_partition(op, K):
        raise ResidueVerificationFailed(f"{K.to_lists()} is not a sub-stable partition of {H.to_lists()}")
    p = monoid.period
    k_its = [iterate(op, K, i) for i in range(p + 1)]
    for i in range(p):
        for k in k_its[i]:
            for x in monoid.iterates[i]:
                if set_product(op, k, x) not in k_its[i + 1]:
                    raise ResidueVerificationFailed("a residue block leaves the residue iterates")


@dataclass(frozen=True)
class ResidueChain:
    partitions: tuple[Partition, ...]  # R_0 = H, R_1 = K_H, ..., ending at the fixpoint

    @property
    def degree(self) -> int:
        return len(self.partitions) - 1

    @property
    def residue(self) -> Partition:
        return self.partitions[-1]

    def to_json(self) -> dict:
        return {
            "partition": self.partitions[0].to_lists(),
            "first_residue": self.partitions[min(1, self.degree)].to_lists(),
            "chain": [p.to_lists() for p in self.partitions],
            "degree": self.degree,
        }


def residue_chain(op: BinaryOperation, H: Partition, budget: int = MONOID_BUDGET) -> ResidueChain:
    """``R_0 = H``, ``R_{n+1} = K_{R_n}`` until a fixpoint; the degree is the
    number of strict refinements."""
    chain = [_require_stable(op, H)]
    while True:
        nxt = first_residue(op, chain[-1], budget)
        if nxt == chain[-1]:
            return ResidueChain(tuple(chain))
        chain.append(nxt)


def non_residual_witness(op: BinaryOperation, budget: int = MONOID_BUDGET,
                         max_q: int | None = None) -> Partition | None:
    """A stable partition with ``K_H != H``, or None when there is none.

    Non-ergodic operations return None; check ergodicity separately.
    """
    if not is_uniformity_preserving(op) or not is_ergodic(op):
        return None
    kwargs = {} if max_q is None else {"max_q": max_q}
    for H in enumerate_stable_partitions(op, **kwargs):
        if first_residue(op, H, budget) != H:
            return H
    return None


def is_strongly_ergodic(op: BinaryOperation, budget: int = MONOID_BUDGET) -> bool:
    """Ergodic, and every stable partition is its own first residue."""
    if not is_uniformity_preserving(op) or not is_ergodic(op):
        return False
    return non_residual_witness(op, budget) is None


# --- definitional oracle -----------------------------------------------------

@dataclass(frozen=True)
class WitnessProfile:
    """Which lengths ``n`` let ``x`` reach every block of ``H^{n*}`` exactly.

    The reachable families are eventually periodic in ``n``: ``good`` lists
    every good length below ``cycle_start + cycle_length``; from
    ``cycle_start`` on the pattern repeats with period ``cycle_length``.
    """

    x: int
    partition: Partition
    good: tuple[int, ...]
    cycle_start: int
    cycle_length: int

    @property
    def first(self) -> int | None:
        return self.good[0] if self.good else None

    @property
    def threshold(self) -> int | None:
        """Least ``d`` with every ``n >= d`` good, or None if there is none."""
        end = self.cycle_start + self.cycle_length
        tail = set(range(self.cycle_start, end))
        good = set(self.good)
        if not tail <= good:
            return None
        d = self.cycle_start
        while d > 1 and d - 1 in good:
            d -= 1
        return d


def _witness_profile(op: BinaryOperation, H: Partition, its: Sequence[Partition], x: int,
                     length_bound: int) -> WitnessProfile:
    p = len(its)
    reach = frozenset({1 << x})
    seen: dict[tuple[frozenset, int], int] = {}
    good = []
    for n in range(1, length_bound + 1):
        blocks = its[(n - 1) % p].blocks
        reach = frozenset(set_product(op, a, b) for a in reach for b in blocks)
        key = (reach, n % p)
        if key in seen:
            start = seen[key]
            return WitnessProfile(x, H, tuple(good), start, n - start)
        seen[key] = n
        if all(b in reach for b in its[n % p].blocks):
            good.append(n)
    raise InconclusiveWithinBound(f"reachable families from {x} under {H.to_lists()} did not repeat "
                                  f"within {length_bound} steps")


def witness_profiles(op: BinaryOperation, length_bound: int = 64,
                     max_q: int = ORACLE_MAX_Q) -> list[WitnessProfile]:
    """Brute-force profiles for every stable partition (found by filtering all
    set partitions) and every element."""
    if op.q > max_q:
        raise AlphabetTooLarge(f"the definitional oracle is capped at q={max_q}")
    if length_bound < 1:
        raise ValueError("length_bound must be at least 1")
    out = []
    for H in enumerate_stable_partitions_exhaustive(op, max_q=max_q):
        its = partition_iterates(op, H)
        for x in range(op.q):
            out.append(_witness_profile(op, H, its, x, length_bound))
    return out


def definitional_strong_ergodicity(op: BinaryOperation, length_bound: int = 64,
                                   max_q: int = ORACLE_MAX_Q) -> bool:
    """Strong ergodicity straight from its definition: for every stable ``H``
    and element ``x`` some length ``n`` reaches each block of ``H^{n*}``
    exactly.  A False answer is definitive (the reachable families cycled
    without a witness); an undecided run raises ``InconclusiveWithinBound``."""
    if not is_uniformity_preserving(op):
        return False
    return all(p.first is not None for p in witness_profiles(op, length_bound, max_q))


def strong_connectability(op: BinaryOperation, length_bound: int = 64, max_q: int = ORACLE_MAX_Q) -> int:
    """Least ``d`` such that every length ``s >= d`` works for every stable
    partition, element and target block."""
    if not is_uniformity_preserving(op):
        raise NotStronglyErgodic("not uniformity preserving")
    profiles = witness_profiles(op, length_bound, max_q)
    thresholds = [p.threshold for p in profiles]
    if any(t is None for t in thresholds):
        raise NotStronglyErgodic("some element never reaches the blocks of a stable partition")
    return max(thresholds)
