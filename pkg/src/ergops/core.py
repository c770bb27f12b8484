"""Finite binary operations and the set product they induce.

An operation on ``{0..q-1}`` is stored as a q x q table with
``table[a][b] = a*b``: rows are the left operand.  Subsets are int bitmasks.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    AlphabetTooLarge,
    EmptySet,
    EntryOutOfRange,
    NonSquare,
    NotQuasigroup,
    NotUniformityPreserving,
)

DEFAULT_MAX_Q = 16
IMAGE_TABLE_MAX_Q = 20


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for x in elements:
        m |= 1 << int(x)
    return m


def elements_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def lowest(mask: int) -> int:
    """Index of the least element of a nonempty mask."""
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True, eq=False)
class BinaryOperation:
    """An immutable operation table on ``{0..q-1}`` with optional display labels."""

    table: np.ndarray
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64, copy=True)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def q(self) -> int:
        return self.table.shape[0]

    def __call__(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def __eq__(self, other):
        return isinstance(other, BinaryOperation) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    def __repr__(self):
        return f"BinaryOperation(q={self.q}, rows={self.table.tolist()})"

    @property
    def full(self) -> int:
        return (1 << self.q) - 1

    @cached_property
    def images(self) -> np.ndarray | None:
        """``images[b, A]`` = mask of ``A*b``; None when q is too large to tabulate."""
        if self.q > IMAGE_TABLE_MAX_Q:
            return None
        return kernels.subset_images(self.table)

    @cached_property
    def digest(self) -> str:
        payload = json.dumps({"q": self.q, "table": self.table.tolist()}, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_json(self) -> dict:
        out: dict = {"q": self.q, "table": self.table.tolist()}
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels is not None else str(x)


def validate_table(rows: Sequence[Sequence[object]], labels: Sequence[object] | None = None,
                   max_q: int = DEFAULT_MAX_Q) -> BinaryOperation:
    """Check shape and entry range and build a ``BinaryOperation``.

    Entries are element indices, or label values when ``labels`` is given.
    """
    q = len(rows)
    if q == 0:
        raise NonSquare("table has no rows")
    for r, row in enumerate(rows):
        if len(row) != q:
            raise NonSquare(f"row {r} has length {len(row)}, expected {q}")
    if q > max_q:
        raise AlphabetTooLarge(f"q={q} exceeds the configured maximum {max_q}")
    index = None
    if labels is not None:
        if len(labels) != q or len(set(labels)) != q:
            raise NonSquare(f"expected {q} distinct labels, got {len(labels)}")
        index = {lab: i for i, lab in enumerate(labels)}
    table = np.empty((q, q), dtype=np.int64)
    for r, row in enumerate(rows):
        for c, v in enumerate(row):
            if index is not None and not isinstance(v, (int, np.integer)):
                if v not in index:
                    raise EntryOutOfRange(r, c, v)
                v = index[v]
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or not 0 <= v < q:
                raise EntryOutOfRange(r, c, v)
            table[r, c] = v
    return BinaryOperation(table, tuple(str(x) for x in labels) if labels is not None else None)


def parse_table(data: dict | str, max_q: int = DEFAULT_MAX_Q) -> BinaryOperation:
    """Build an operation from the JSON table format (a dict or its text)."""
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or "table" not in data:
        raise NonSquare("expected an object with a 'table' field")
    rows = data["table"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise NonSquare("'table' must be a list of rows")
    if "q" in data and data["q"] != len(rows):
        raise NonSquare(f"declared q={data['q']} but the table has {len(rows)} rows")
    return validate_table(rows, data.get("labels"), max_q=max_q)


def load_table(path: str, max_q: int = DEFAULT_MAX_Q) -> BinaryOperation:
    with open(path) as fh:
        return parse_table(json.load(fh), max_q=max_q)


def column_permutations(op: BinaryOperation) -> list[np.ndarray]:
    """The maps ``x -> x*b``, one per column ``b``."""
    return [op.table[:, b].copy() for b in range(op.q)]


def is_uniformity_preserving(op: BinaryOperation) -> bool:
    """True iff every column map ``x -> x*b`` is a bijection."""
    q = op.q
    cols = np.sort(op.table, axis=0)
    return bool((cols == np.arange(q)[:, None]).all())


def is_quasigroup(op: BinaryOperation) -> bool:
    """True iff the table is a Latin square."""
    q = op.q
    rows = np.sort(op.table, axis=1)
    return is_uniformity_preserving(op) and bool((rows == np.arange(q)[None, :]).all())


def inverse_op(op: BinaryOperation) -> BinaryOperation:
    """The right division ``a / b``: the unique ``c`` with ``c*b = a``."""
    if not is_uniformity_preserving(op):
        raise NotUniformityPreserving("right division needs bijective columns")
    q = op.q
    inv = np.empty((q, q), dtype=np.int64)
    for b in range(q):
        inv[op.table[:, b], b] = np.arange(q)
    return BinaryOperation(inv, op.labels)


def left_division(op: BinaryOperation) -> BinaryOperation:
    """``table[b][a]`` is the unique ``c`` with ``b*c = a``."""
    if not is_quasigroup(op):
        raise NotQuasigroup("left division needs a Latin square")
    q = op.q
    out = np.empty((q, q), dtype=np.int64)
    for b in range(q):
        out[b, op.table[b, :]] = np.arange(q)
    return BinaryOperation(out, op.labels)


def set_product(op: BinaryOperation, left: int, right: int) -> int:
    """Mask of ``{a*b : a in left, b in right}``; both masks must be nonempty."""
    if not left or not right:
        raise EmptySet("set product of an empty set")
    images = op.images
    acc = 0
    if images is not None:
        for b in elements_of(right):
            acc |= int(images[b, left])
        return acc
    for a in elements_of(left):
        for b in elements_of(right):
            acc |= 1 << int(op.table[a, b])
    return acc


def row_image(op: BinaryOperation, x: int, subset: int) -> int:
    """Mask of ``x*subset``."""
    cols = np.array(elements_of(subset), dtype=np.int64)
    if cols.size == 0:
        raise EmptySet("row image of an empty set")
    return int(np.bitwise_or.reduce(np.int64(1) << op.table[x, cols]))


# small named operations used across examples, tests and benchmarks

def cyclic_group(n: int) -> BinaryOperation:
    """Addition modulo ``n``."""
    i = np.arange(n)
    return BinaryOperation((i[:, None] + i[None, :]) % n)


def xor_op() -> BinaryOperation:
    return cyclic_group(2)


def shift_op() -> BinaryOperation:
    """``x*y = x+1 mod 2``: bijective columns, period two."""
    return BinaryOperation(np.array([[1, 1], [0, 0]]))


def skew_square_op(n: int) -> BinaryOperation:
    """On pairs ``(x, y)`` in ``Z_n x Z_n`` coded as ``x*n+y``:
    ``(x1,y1)*(x2,y2) = (x1+y1+x2+y2, y1+y2)``.  A quasigroup."""
    q = n * n
    t = np.empty((q, q), dtype=np.int64)
    for u in range(q):
        x1, y1 = divmod(u, n)
        for v in range(q):
            x2, y2 = divmod(v, n)
            t[u, v] = ((x1 + y1 + x2 + y2) % n) * n + (y1 + y2) % n
    return BinaryOperation(t)
