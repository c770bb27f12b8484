"""Tensor products of operations and the structure of their stable partitions.

Elements of ``X_0 x ... x X_{m-1}`` are flat indices in mixed radix with
factor 0 most significant.  Coordinates are 0-based factor indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import lcm, prod
from typing import Sequence

import numpy as np

from .core import BinaryOperation, elements_of, is_uniformity_preserving, mask_of
from .errors import (
    DecompositionFailed,
    DimensionMismatch,
    NotErgodicFactors,
    NotStable,
    ProductTooLarge,
)
from .graph import is_ergodic
from .partitions import Partition, is_finer, is_stable_partition, partition_period

PRODUCT_MAX_Q = 16


@dataclass(frozen=True)
class ProductSpace:
    """Mixed-radix codec for a product of alphabets, optionally with factor operations."""

    sizes: tuple[int, ...]
    ops: tuple[BinaryOperation, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if any(s < 1 for s in self.sizes):
            raise DimensionMismatch("factor sizes must be positive")
        if self.ops is not None:
            object.__setattr__(self, "ops", tuple(self.ops))
            if tuple(op.q for op in self.ops) != self.sizes:
                raise DimensionMismatch("factor operations do not match factor sizes")

    @classmethod
    def of(cls, ops: Sequence[BinaryOperation]) -> "ProductSpace":
        return cls(tuple(op.q for op in ops), tuple(ops))

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def q(self) -> int:
        return prod(self.sizes)

    def flat(self, coords: Sequence[int]) -> int:
        if len(coords) != self.m:
            raise DimensionMismatch(f"expected {self.m} coordinates")
        idx = 0
        for c, s in zip(coords, self.sizes):
            if not 0 <= c < s:
                raise DimensionMismatch(f"coordinate {c} out of range for a factor of size {s}")
            idx = idx * s + int(c)
        return idx

    def unflat(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.q:
            raise DimensionMismatch(f"index {idx} out of range")
        out = []
        for s in reversed(self.sizes):
            idx, r = divmod(idx, s)
            out.append(r)
        return tuple(reversed(out))

    def sub(self, coords: Sequence[int]) -> "ProductSpace":
        coords = _check_coords(self, coords)
        ops = None if self.ops is None else tuple(self.ops[c] for c in coords)
        return ProductSpace(tuple(self.sizes[c] for c in coords), ops)

    def restrict(self, idx: int, coords: Sequence[int]) -> int:
        """Flat index of the ``coords`` part of ``idx`` in ``sub(coords)``."""
        full = self.unflat(idx)
        return self.sub(coords).flat([full[c] for c in coords])

    def split(self, coords: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        """For every element, the flat index of its ``coords`` part and of the rest."""
        coords = _check_coords(self, coords)
        rest = [c for c in range(self.m) if c not in coords]
        digits = np.array([self.unflat(i) for i in range(self.q)], dtype=np.int64).reshape(self.q, self.m)

        def encode(cs):
            idx = np.zeros(self.q, dtype=np.int64)
            for c in cs:
                idx = idx * self.sizes[c] + digits[:, c]
            return idx

        return encode(coords), encode(rest)


def _check_coords(space: ProductSpace, coords: Sequence[int]) -> list[int]:
    out = sorted({int(c) for c in coords})
    if not out or out[0] < 0 or out[-1] >= space.m:
        raise DimensionMismatch(f"coordinates {list(coords)} are not a nonempty subset of 0..{space.m - 1}")
    return out


def tensor_ops(ops: Sequence[BinaryOperation], max_q: int = PRODUCT_MAX_Q) -> BinaryOperation:
    """Componentwise product ``(x_i) * (y_i) = (x_i *_i y_i)``."""
    if len(ops) < 2:
        raise DimensionMismatch("a tensor product needs at least two factors")
    q = prod(op.q for op in ops)
    if q > max_q:
        raise ProductTooLarge(f"product has {q} elements, above the cap of {max_q}")
    table = ops[0].table
    for op in ops[1:]:
        qa, qb = table.shape[0], op.q
        # (a1, b1) * (a2, b2) = (a1 a2, b1 b2) with index a*qb + b
        table = (table[:, None, :, None] * qb + op.table[None, :, None, :]).reshape(qa * qb, qa * qb)
    return BinaryOperation(table)


def tensor_partitions(parts: Sequence[Partition], space: ProductSpace) -> Partition:
    """Rectangles ``A_0 x ... x A_{m-1}`` over all choices of factor blocks."""
    if tuple(p.q for p in parts) != space.sizes:
        raise DimensionMismatch("factor partitions do not match the product space")
    blocks = [[]]
    for p in parts:
        blocks = [acc + [elements_of(b)] for acc in blocks for b in p.blocks]
    out = []
    for rect in blocks:
        grid = np.stack(np.meshgrid(*rect, indexing="ij"), axis=-1).reshape(-1, space.m)
        out.append(mask_of(space.flat(row) for row in grid.tolist()))
    return Partition(space.q, out)


def _validate(H: Partition, space: ProductSpace):
    if H.q != space.q:
        raise DimensionMismatch(f"partition of {H.q} elements on a product of {space.q}")
    if space.ops is None:
        return
    if not all(is_uniformity_preserving(op) and is_ergodic(op) for op in space.ops):
        raise NotErgodicFactors("every factor operation must be ergodic")
    if not is_stable_partition(tensor_ops(space.ops, max_q=space.q), H):
        raise NotStable(f"{H.to_lists()} is not stable under the product operation")


def project_U(H: Partition, space: ProductSpace, coords: Sequence[int]) -> Partition:
    """Projections of the blocks onto ``coords``."""
    _validate(H, space)
    part, _ = space.split(coords)
    sub = space.sub(coords)
    return Partition(sub.q, (mask_of(part[elements_of(b)]) for b in H.blocks))


def project_L(H: Partition, space: ProductSpace, coords: Sequence[int]) -> Partition:
    """Slices of the blocks along ``coords`` with the other coordinates fixed."""
    _validate(H, space)
    coords = _check_coords(space, coords)
    if len(coords) == space.m:
        raise DimensionMismatch("slices need a proper subset of the coordinates")
    part, rest = space.split(coords)
    slices = set()
    for b in H.blocks:
        groups: dict[int, int] = {}
        for x in elements_of(b):
            groups[int(rest[x])] = groups.get(int(rest[x]), 0) | (1 << int(part[x]))
        slices.update(groups.values())
    return Partition(space.sub(coords).q, slices)


def correlation(H: Partition, space: ProductSpace, coords: Sequence[int]) -> int:
    U = project_U(H, space, coords)
    L = project_L(H, space, coords)
    n, r = divmod(U.norm, L.norm)
    if r:
        raise DecompositionFailed(f"block sizes {U.norm} and {L.norm} do not divide")
    return n


@dataclass(frozen=True)
class BlockPieces:
    block: int
    pieces: tuple[tuple[int, int], ...]  # (slice in the first part, set in the second part)


@dataclass(frozen=True)
class ProductDecomposition:
    first: tuple[int, ...]
    second: tuple[int, ...]
    L_first: Partition
    U_first: Partition
    L_second: Partition
    U_second: Partition
    correlation: int
    blocks: tuple[BlockPieces, ...]


def decompose(H: Partition, space: ProductSpace, first: Sequence[int]) -> ProductDecomposition:
    """Split coordinates into ``first`` and the rest and write every block as a
    disjoint union of ``n`` rectangles, ``n`` being the correlation."""
    _validate(H, space)
    first = _check_coords(space, first)
    second = [c for c in range(space.m) if c not in first]
    if not second:
        raise DimensionMismatch("the split must leave coordinates on both sides")
    bare = ProductSpace(space.sizes)
    La, Ua = project_L(H, bare, first), project_U(H, bare, first)
    Lb, Ub = project_L(H, bare, second), project_U(H, bare, second)
    na, ra = divmod(Ua.norm, La.norm)
    nb, rb = divmod(Ub.norm, Lb.norm)
    if ra or rb or na != nb:
        raise DecompositionFailed(f"inconsistent correlations {Ua.norm}/{La.norm} and {Ub.norm}/{Lb.norm}")
    n = na
    pa, pb = space.split(first)
    out = []
    for block in H.blocks:
        fibres: dict[int, int] = {}
        for x in elements_of(block):
            fibres[int(pb[x])] = fibres.get(int(pb[x]), 0) | (1 << int(pa[x]))
        grouped: dict[int, int] = {}
        for b_val, a_slice in fibres.items():
            grouped[a_slice] = grouped.get(a_slice, 0) | (1 << b_val)
        pieces = tuple(sorted(grouped.items()))
        _check_pieces(block, pieces, n, La, Ua, Lb, Ub, pa, pb)
        out.append(BlockPieces(block, pieces))
    if not (is_finer(tensor_partitions([La, Lb], _pair_space(space, first, second)), _reindex(H, space, first, second))
            and is_finer(_reindex(H, space, first, second), tensor_partitions([Ua, Ub], _pair_space(space, first, second)))):
        raise DecompositionFailed("partition is not sandwiched between the L and U tensors")
    if H.norm != n * La.norm * Lb.norm:
        raise DecompositionFailed(f"block size {H.norm} != {n} * {La.norm} * {Lb.norm}")
    return ProductDecomposition(tuple(first), tuple(second), La, Ua, Lb, Ub, n, tuple(out))


def _check_pieces(block, pieces, n, La, Ua, Lb, Ub, pa, pb):
    if len(pieces) != n:
        raise DecompositionFailed(f"block {elements_of(block)} has {len(pieces)} pieces, expected {n}")
    a_union = 0
    b_union = 0
    for a_part, b_part in pieces:
        if a_part not in La or b_part not in Lb or a_part & a_union or b_part & b_union:
            raise DecompositionFailed(f"block {elements_of(block)} does not split into disjoint slices")
        a_union |= a_part
        b_union |= b_part
    if a_union not in Ua or b_union not in Ub:
        raise DecompositionFailed(f"block {elements_of(block)} pieces do not assemble to projections")
    rebuilt = 0
    for x in range(len(pa)):
        for a_part, b_part in pieces:
            if a_part >> int(pa[x]) & 1 and b_part >> int(pb[x]) & 1:
                rebuilt |= 1 << x
    if rebuilt != block:
        raise DecompositionFailed(f"pieces of {elements_of(block)} do not rebuild the block")


def _pair_space(space: ProductSpace, first, second) -> ProductSpace:
    return ProductSpace((space.sub(first).q, space.sub(second).q))


def _reindex(H: Partition, space: ProductSpace, first, second) -> Partition:
    """``H`` carried to the two-factor space (first part, second part)."""
    pa, pb = space.split(first)
    qb = space.sub(second).q
    return Partition(space.q, (mask_of(int(pa[x]) * qb + int(pb[x]) for x in elements_of(b)) for b in H.blocks))


def canonical_factorization(H: Partition, space: ProductSpace) -> list[Partition]:
    """``H_{m-1} = U_{m-1}(H)`` and ``H_i = U_i(L_{0..i}(H))`` for ``i < m-1``."""
    _validate(H, space)
    if space.m < 2:
        raise DimensionMismatch("factorization needs at least two factors")
    bare = ProductSpace(space.sizes)
    out = []
    for i in range(space.m - 1):
        prefix = list(range(i + 1))
        sliced = project_L(H, bare, prefix)
        out.append(project_U(sliced, bare.sub(prefix), [i]))
    out.append(project_U(H, bare, [space.m - 1]))
    if prod(len(p) for p in out) != len(H):
        raise DecompositionFailed("factor block counts do not multiply to the block count")
    return out


def is_section(H: Partition, subset: int) -> bool:
    """``subset`` meets every block exactly once."""
    return all(bin(b & subset).count("1") == 1 for b in H.blocks) and subset & ~H.union == 0


def product_period(parts: Sequence[Partition], ops: Sequence[BinaryOperation]) -> int:
    return reduce(lcm, (partition_period(op, p) for p, op in zip(parts, ops)), 1)
