"""Partitions, covers and the dynamics ``F -> F* = {A*B : A, B in F}``."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import lcm
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import kernels
from .core import BinaryOperation, elements_of, is_uniformity_preserving, lowest, mask_of, popcount
from .errors import (
    AlphabetTooLarge,
    IterationBudgetExceeded,
    NotACover,
    NotErgodic,
    NotStronglyErgodic,
    NotUniformityPreserving,
    VerificationFailed,
)

ENUMERATION_MAX_Q = 10
ORBIT_BUDGET = 4096


def _canonical(masks: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted({int(m) for m in masks}, key=lambda m: (lowest(m) if m else -1, m)))


class SubsetFamily:
    """A finite set of subsets of ``{0..q-1}``, kept in canonical order
    (by least element, then by mask)."""

    __slots__ = ("q", "members")

    def __init__(self, q: int, members: Iterable[int]):
        self.q = int(q)
        self.members = _canonical(members)

    @classmethod
    def from_sets(cls, q: int, sets: Iterable[Iterable[int]]):
        return cls(q, (mask_of(s) for s in sets))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, mask: int) -> bool:
        return mask in self.members

    def __eq__(self, other):
        return isinstance(other, SubsetFamily) and (self.q, self.members) == (other.q, other.members)

    def __hash__(self):
        return hash((self.q, self.members))

    def __repr__(self):
        return f"{type(self).__name__}({self.to_lists()})"

    def to_lists(self) -> list[list[int]]:
        return [elements_of(m) for m in self.members]

    @property
    def union(self) -> int:
        acc = 0
        for m in self.members:
            acc |= m
        return acc

    @property
    def is_cover(self) -> bool:
        return 0 not in self.members and self.union == (1 << self.q) - 1

    @property
    def is_partition(self) -> bool:
        if not self.is_cover:
            return False
        seen = 0
        for m in self.members:
            if seen & m:
                return False
            seen |= m
        return True

    @property
    def min_size(self) -> int:
        return min(popcount(m) for m in self.members)

    @property
    def max_size(self) -> int:
        return max(popcount(m) for m in self.members)

    def as_partition(self) -> "Partition":
        return Partition(self.q, self.members)


class Partition(SubsetFamily):
    """A family of nonempty, pairwise disjoint blocks covering the alphabet."""

    __slots__ = ()

    def __init__(self, q: int, blocks: Iterable[int]):
        super().__init__(q, blocks)
        if not self.is_partition:
            raise NotACover(f"{self.to_lists()} is not a partition of {q} elements")

    @classmethod
    def trivial(cls, q: int) -> "Partition":
        return cls(q, [(1 << q) - 1])

    @classmethod
    def singletons(cls, q: int) -> "Partition":
        return cls(q, [1 << x for x in range(q)])

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        blocks: dict[int, int] = {}
        for x, lab in enumerate(labels):
            blocks[int(lab)] = blocks.get(int(lab), 0) | (1 << x)
        return cls(len(labels), blocks.values())

    @property
    def blocks(self) -> tuple[int, ...]:
        return self.members

    @property
    def is_balanced(self) -> bool:
        return self.min_size == self.max_size

    @property
    def norm(self) -> int:
        """Common block size of a balanced partition."""
        if not self.is_balanced:
            raise ValueError("block sizes differ")
        return self.max_size

    def block_of(self, x: int) -> int:
        for m in self.members:
            if m >> x & 1:
                return m
        raise KeyError(x)

    def labels(self) -> list[int]:
        out = [0] * self.q
        for i, m in enumerate(self.members):
            for x in elements_of(m):
                out[x] = i
        return out


@dataclass(frozen=True)
class PartitionOrbit:
    """``iterates[i]`` is ``base^{i*}``; ``iterates[preperiod + cycle_length]``
    repeats ``iterates[preperiod]``."""

    base: SubsetFamily
    iterates: tuple[SubsetFamily, ...]
    preperiod: int
    cycle_length: int

    def at(self, n: int) -> SubsetFamily:
        if n < self.preperiod + self.cycle_length:
            return self.iterates[n]
        return self.iterates[self.preperiod + (n - self.preperiod) % self.cycle_length]


def step(op: BinaryOperation, family: SubsetFamily) -> SubsetFamily:
    """``{A*B : A, B in family}`` with empty members dropped."""
    members = np.array([m for m in family.members if m], dtype=np.int64)
    if members.size == 0:
        return SubsetFamily(op.q, ())
    images = op.images
    if images is not None:
        return SubsetFamily(op.q, kernels.family_products(members, images).tolist())
    from .core import set_product

    return SubsetFamily(op.q, (set_product(op, int(a), int(b)) for a in members for b in members))


def iterate(op: BinaryOperation, family: SubsetFamily, n: int) -> SubsetFamily:
    for _ in range(n):
        family = step(op, family)
    return family


def orbit(op: BinaryOperation, family: SubsetFamily, max_iter: int = ORBIT_BUDGET) -> PartitionOrbit:
    """Iterate ``step`` until a family repeats."""
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    seen = {family: 0}
    iterates = [family]
    current = family
    for i in range(1, max_iter + 1):
        current = step(op, current)
        iterates.append(current)
        if current in seen:
            first = seen[current]
            return PartitionOrbit(family, tuple(iterates), first, i - first)
        seen[current] = i
    raise IterationBudgetExceeded(max_iter, "orbit")


def is_periodic_partition(op: BinaryOperation, partition: SubsetFamily,
                          max_iter: int = ORBIT_BUDGET) -> tuple[bool, int | None]:
    """Whether ``H^{n*} = H`` for some ``n > 0``, and the least such ``n``."""
    if not partition.is_partition:
        return False, None
    orb = orbit(op, partition, max_iter)
    if orb.preperiod != 0:
        return False, None
    if is_uniformity_preserving(op):
        for it in orb.iterates:
            if not it.is_partition or len(it) != len(partition):
                raise VerificationFailed(f"iterate {it.to_lists()} of periodic {partition.to_lists()} "
                                         "is not a partition of the same size")
    return True, orb.cycle_length


def is_stable_partition(op: BinaryOperation, partition: SubsetFamily) -> bool:
    """Balanced and periodic."""
    if not partition.is_partition:
        return False
    p = Partition(partition.q, partition.members)
    return p.is_balanced and is_periodic_partition(op, p)[0]


def partition_period(op: BinaryOperation, partition: SubsetFamily) -> int:
    ok, per = is_periodic_partition(op, partition)
    if not ok:
        raise ValueError(f"{partition.to_lists()} is not periodic")
    return per


def enumerate_set_partitions(q: int) -> Iterator[Partition]:
    """All set partitions of ``{0..q-1}`` via restricted growth strings."""
    if q < 1:
        return
    rgs = [0] * q
    maxes = [0] * q  # maxes[i] = max(rgs[:i+1])

    def emit():
        blocks = [0] * (maxes[-1] + 1)
        for x, b in enumerate(rgs):
            blocks[b] |= 1 << x
        return Partition(q, blocks)

    yield emit()
    while True:
        i = q - 1
        while i > 0 and rgs[i] > maxes[i - 1]:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxes[i] = max(maxes[i - 1], rgs[i])
        for j in range(i + 1, q):
            rgs[j] = 0
            maxes[j] = maxes[i]
        yield emit()


def _check_enumeration_cap(q: int, cap: int):
    if q > cap:
        raise AlphabetTooLarge(f"exhaustive enumeration over set partitions is capped at q={cap}, got {q}")


def _sort_key(p: Partition):
    return (p.max_size, p.members)


def enumerate_periodic_partitions(op: BinaryOperation, max_q: int = ENUMERATION_MAX_Q) -> list[Partition]:
    _check_enumeration_cap(op.q, max_q)
    return sorted((p for p in enumerate_set_partitions(op.q) if is_periodic_partition(op, p)[0]), key=_sort_key)


def enumerate_stable_partitions_exhaustive(op: BinaryOperation, max_q: int = ENUMERATION_MAX_Q) -> list[Partition]:
    """Filter every set partition: balanced first, then periodic."""
    _check_enumeration_cap(op.q, max_q)
    out = [p for p in enumerate_set_partitions(op.q) if p.is_balanced and is_periodic_partition(op, p)[0]]
    return sorted(out, key=_sort_key)


# --- closure route (ergodic operations) -------------------------------------
#
# For an ergodic operation every stable partition H satisfies H^{i*} = s^i(H)
# where s is the column map x -> x*0, so its period divides the order of s.
# The least system of equivalences E_0..E_{N-1} (N = order of s, indices mod N)
# with "x ~ y and b ~ c in E_i  =>  x*b ~ y*c in E_{i+1}" that merges a seed
# family in E_0 then has E_0 equal to the finest periodic partition coarser
# than the seeds.  Each stable partition is generated by its block containing 0.

def _column_order(op: BinaryOperation) -> int:
    perm = op.table[:, 0]
    seen = [False] * op.q
    order = 1
    for x in range(op.q):
        if seen[x]:
            continue
        length = 0
        y = x
        while not seen[y]:
            seen[y] = True
            y = int(perm[y])
            length += 1
        order = lcm(order, length)
    return order


def _seed_pairs(members: Iterable[int]) -> np.ndarray:
    pairs = []
    for m in members:
        if m:
            base = lowest(m)
            pairs.extend((base, x) for x in elements_of(m) if x != base)
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def _closure(op: BinaryOperation, members: Iterable[int], limit: int | None = None) -> Partition | None:
    labels = kernels.cyclic_closure(op.table, _column_order(op), _seed_pairs(members), limit or op.q)
    return None if labels is None else Partition.from_labels(labels)


def enumerate_stable_partitions_closure(op: BinaryOperation) -> list[Partition]:
    """Stable partitions of an ergodic operation, one closure per candidate block of 0."""
    from .graph import is_ergodic

    if not is_ergodic(op):
        raise NotErgodic("the closure enumeration needs an ergodic operation")
    q = op.q
    found: list[Partition] = []
    zero_blocks: set[int] = set()
    for size in (d for d in range(1, q + 1) if q % d == 0):
        for rest in combinations(range(1, q), size - 1):
            block = 1 | mask_of(rest)
            if block in zero_blocks:
                continue
            cand = _closure(op, [block], limit=size)
            if cand is None or cand.block_of(0) != block or not cand.is_balanced:
                continue
            if not is_stable_partition(op, cand):
                raise VerificationFailed(f"closure produced the non-stable {cand.to_lists()}")
            zero_blocks.add(block)
            found.append(cand)
    return sorted(found, key=_sort_key)


def enumerate_stable_partitions(op: BinaryOperation, max_q: int = ENUMERATION_MAX_Q,
                                method: str = "auto") -> list[Partition]:
    """All stable partitions, ordered by block size then blocks.

    ``method="auto"`` uses the closure route for ergodic operations (any q)
    and exhaustive filtering otherwise (q capped at ``max_q``).
    """
    from .graph import is_ergodic

    if method == "closure" or (method == "auto" and is_uniformity_preserving(op) and is_ergodic(op)):
        return enumerate_stable_partitions_closure(op)
    if method not in ("auto", "exhaustive"):
        raise ValueError(f"unknown method {method!r}")
    return enumerate_stable_partitions_exhaustive(op, max_q)


def wedge(first: Partition, second: Partition) -> Partition:
    """Common refinement: all nonempty pairwise block intersections."""
    if first.q != second.q:
        raise ValueError("partitions of different alphabets")
    return Partition(first.q, (a & b for a in first for b in second if a & b))


def is_finer(finer: SubsetFamily, coarser: SubsetFamily) -> bool:
    """Every member of ``finer`` lies inside some member of ``coarser``."""
    return all(any(a & ~b == 0 for b in coarser.members) for a in finer.members)


def generated_partition(op: BinaryOperation, family: SubsetFamily, max_q: int = ENUMERATION_MAX_Q,
                        method: str = "auto", stable: bool = False) -> Partition:
    """The finest periodic partition coarser than ``family``.

    ``method="wedge"`` intersects every periodic partition coarser than the
    family; ``method="closure"`` (ergodic only) runs the cyclic closure.
    ``stable=True`` asks for the generated stable partition, which is only
    well defined for ergodic operations.
    """
    from .graph import is_ergodic

    if not is_uniformity_preserving(op):
        raise NotUniformityPreserving("generated partitions need bijective columns")
    ergodic = is_ergodic(op)
    if stable and not ergodic:
        raise NotErgodic("generated stable partitions are only defined for ergodic operations")
    if method == "closure" or (method == "auto" and ergodic):
        if not ergodic:
            raise NotErgodic("the closure route needs an ergodic operation")
        result = _closure(op, family.members)
        if not is_periodic_partition(op, result)[0] or not is_finer(family, result):
            raise VerificationFailed(f"closure result {result.to_lists()} is not a periodic coarsening")
        return result
    if method not in ("auto", "wedge"):
        raise ValueError(f"unknown method {method!r}")
    _check_enumeration_cap(op.q, max_q)
    result = Partition.trivial(op.q)
    for p in enumerate_set_partitions(op.q):
        if is_finer(family, p) and is_periodic_partition(op, p)[0]:
            result = wedge(result, p)
    return result


def cover_components(family: SubsetFamily) -> Partition:
    """Blocks are unions of overlap-connected members."""
    if not family.is_cover:
        raise NotACover(f"{family.to_lists()} is not a cover")
    blocks: list[int] = []
    for m in family.members:
        merged = m
        keep = []
        for b in blocks:
            if b & merged:
                merged |= b
            else:
                keep.append(b)
        keep.append(merged)
        blocks = keep
    return Partition(family.q, blocks)


@dataclass(frozen=True)
class CoverOrbitReport:
    generated: Partition
    generated_period: int
    witness: int | None  # least n >= 1 with A^{n*} = <A> and per(<A>) | n
    preperiod: int
    cycle_length: int
    periodic_iterate_is_stable: bool
    components_commute: bool


def cover_orbit_analysis(op: BinaryOperation, family: SubsetFamily, max_iter: int = ORBIT_BUDGET,
                         require_strong: bool = True) -> CoverOrbitReport:
    """Iterate a cover until it lands on its generated partition.

    With ``require_strong`` the operation must be strongly ergodic.  Without
    it the orbit is still analysed, and ``witness`` is None when the orbit
    cycles without ever hitting the generated partition.
    """
    if not family.is_cover:
        raise NotACover(f"{family.to_lists()} is not a cover")
    if require_strong:
        from .residue import is_strongly_ergodic

        if not is_strongly_ergodic(op):
            raise NotStronglyErgodic("cover iteration theorem needs a strongly ergodic operation")
    target = generated_partition(op, family)
    per = partition_period(op, target)
    orb = orbit(op, family, max_iter)
    witness = None
    horizon = orb.preperiod + lcm(orb.cycle_length, per)
    for n in range(1, horizon + 1):
        if n % per == 0 and orb.at(n) == target:
            witness = n
            break
    # the periodic part of the orbit must consist of covers whose components commute with stepping
    start = cover_components(family)
    comp_orb = orbit(op, start, max_iter)
    commute = all(cover_components(orb.at(n)) == cover_components(comp_orb.at(n))
                  for n in range(horizon + 1))
    periodic_member = orb.at(orb.preperiod)
    stable = is_stable_partition(op, periodic_member)
    return CoverOrbitReport(target, per, witness, orb.preperiod, orb.cycle_length, stable, commute)
