"""The one-step digraph ``a -> a*x`` and the notions read off it."""

from __future__ import annotations

from collections import deque
from math import gcd

import numpy as np

from . import kernels
from .core import BinaryOperation, elements_of, mask_of
from .errors import IterationBudgetExceeded, NotIrreducible


def step_rows(op: BinaryOperation) -> np.ndarray:
    """Row masks of the one-step matrix: row ``a`` is ``{a*x : x}``."""
    return np.bitwise_or.reduce(np.int64(1) << op.table, axis=1)


def one_step_matrix(op: BinaryOperation) -> np.ndarray:
    """Boolean ``q x q`` matrix with ``[a][b]`` true iff ``a*x = b`` for some ``x``."""
    q = op.q
    out = np.zeros((q, q), dtype=bool)
    out[np.repeat(np.arange(q), q), op.table.ravel()] = True
    return out


def _reach(rows: np.ndarray, start: int) -> int:
    seen = 1 << start
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            new = int(rows[a]) & ~seen
            seen |= new
            nxt.extend(elements_of(new))
        frontier = nxt
    return seen


def is_irreducible(op: BinaryOperation) -> bool:
    """True iff every element reaches every element (the digraph is strongly connected)."""
    rows = step_rows(op)
    full = op.full
    if _reach(rows, 0) != full:
        return False
    reverse = np.zeros(op.q, dtype=np.int64)
    for a in range(op.q):
        for b in elements_of(int(rows[a])):
            reverse[b] |= np.int64(1) << a
    return _reach(reverse, 0) == full


def _levels(rows: np.ndarray, q: int) -> list[int]:
    level = [-1] * q
    level[0] = 0
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for b in elements_of(int(rows[a])):
            if level[b] < 0:
                level[b] = level[a] + 1
                queue.append(b)
    return level


def period(op: BinaryOperation) -> int:
    """gcd of all cycle lengths, computed from BFS levels."""
    if not is_irreducible(op):
        raise NotIrreducible("period is defined for irreducible operations")
    rows = step_rows(op)
    level = _levels(rows, op.q)
    g = 0
    for a in range(op.q):
        for b in elements_of(int(rows[a])):
            g = gcd(g, level[a] + 1 - level[b])
    return abs(g)


def ergodic_classes(op: BinaryOperation) -> list[int]:
    """Cyclic classes ``H_0..H_{n-1}`` with ``H_i * X = H_{i+1 mod n}``.

    ``H_0`` is the class of element 0.
    """
    n = period(op)
    level = _levels(step_rows(op), op.q)
    classes = [0] * n
    for x, lv in enumerate(level):
        classes[lv % n] |= 1 << x
    return classes


def is_ergodic(op: BinaryOperation) -> bool:
    return is_irreducible(op) and period(op) == 1


def connectability(op: BinaryOperation) -> int:
    """Least ``d`` such that each element of ``H_i`` reaches every element of
    ``H_{i+d mod n}`` in exactly ``d`` steps; for ergodic operations this is the
    least power of the one-step matrix that is all ones."""
    classes = ergodic_classes(op)
    n = len(classes)
    q = op.q
    class_of = [0] * q
    for i, c in enumerate(classes):
        for x in elements_of(c):
            class_of[x] = i
    rows = step_rows(op)
    power = rows.reshape(1, q)
    cap = q * (1 << q)
    for d in range(1, cap + 1):
        target = np.array([classes[(class_of[a] + d) % n] for a in range(q)], dtype=np.int64)
        if np.array_equal(power[0], target):
            return d
        power = kernels.compose(power, rows.reshape(1, q))
    raise IterationBudgetExceeded(cap, "connectability search")


def reachable_in(op: BinaryOperation, start: int, steps: int) -> int:
    """Mask of elements reachable from ``start`` in exactly ``steps`` steps."""
    rows = step_rows(op)
    cur = 1 << start
    for _ in range(steps):
        nxt = 0
        for a in elements_of(cur):
            nxt |= int(rows[a])
        cur = nxt
    return cur


__all__ = [
    "step_rows",
    "one_step_matrix",
    "is_irreducible",
    "period",
    "ergodic_classes",
    "is_ergodic",
    "connectability",
    "reachable_in",
    "mask_of",
]
