"""Named reference operations with known classification."""

from __future__ import annotations

from .core import BinaryOperation, cyclic_group, shift_op, skew_square_op, xor_op

# irreducible, period 2; {{0,1},{2},{3}} is periodic but not balanced
UNBALANCED_PERIODIC_4 = BinaryOperation([
    [2, 3, 2, 2],
    [3, 2, 3, 3],
    [0, 0, 0, 1],
    [1, 1, 1, 0],
])

# irreducible, not ergodic; two stable partitions whose wedge is unbalanced
UNSTABLE_WEDGE_8 = BinaryOperation([
    [4, 5, 6, 7, 4, 4, 4, 4],
    [5, 4, 7, 6, 5, 5, 5, 5],
    [6, 7, 4, 5, 6, 6, 6, 6],
    [7, 6, 5, 4, 7, 7, 7, 7],
    [0, 0, 0, 0, 0, 1, 2, 3],
    [1, 1, 1, 1, 1, 0, 3, 2],
    [2, 2, 2, 2, 2, 3, 0, 1],
    [3, 3, 3, 3, 3, 2, 1, 0],
])

# irreducible, not ergodic; {{0,2},{1,3},{4,5},{6,7}} is stable with period 2
PERIOD_TWO_STABLE_8 = BinaryOperation([
    [4, 5, 4, 5, 4, 4, 4, 4],
    [5, 4, 5, 4, 5, 5, 5, 5],
    [6, 7, 6, 7, 6, 6, 6, 6],
    [7, 6, 7, 6, 7, 7, 7, 7],
    [2, 2, 2, 2, 2, 3, 2, 3],
    [3, 3, 3, 3, 3, 2, 3, 2],
    [0, 0, 0, 0, 0, 1, 0, 1],
    [1, 1, 1, 1, 1, 0, 1, 0],
])

# ergodic, not strongly ergodic; the residue of {{0,1},{2,3}} is all singletons
ERGODIC_NOT_STRONG_4 = BinaryOperation([
    [2, 2, 0, 0],
    [3, 3, 1, 1],
    [1, 1, 3, 3],
    [0, 0, 2, 2],
])

# strongly ergodic without being a quasigroup
STRONG_NOT_QUASIGROUP_4 = BinaryOperation([
    [3, 3, 3, 3],
    [0, 1, 0, 0],
    [1, 0, 1, 1],
    [2, 2, 2, 2],
])

# ergodic, not strongly ergodic; PERIODIC_COVER_6 is a periodic cover that is not a partition
PERIODIC_COVER_OP_6 = BinaryOperation([
    [3, 3, 3, 0, 0, 0],
    [4, 4, 4, 1, 1, 1],
    [5, 5, 5, 2, 2, 2],
    [1, 1, 1, 5, 5, 5],
    [2, 2, 2, 3, 3, 3],
    [0, 0, 0, 4, 4, 4],
])
PERIODIC_COVER_6 = ([0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5])

# ergodic; {{0..3},{4..7}} has residue chain of degree 2 (halves, then pairs, then points)
RESIDUAL_DEGREE_TWO_8 = BinaryOperation([
    [5, 5, 4, 4, 0, 0, 0, 0],
    [4, 4, 5, 5, 1, 1, 1, 1],
    [7, 7, 7, 7, 3, 3, 2, 2],
    [6, 6, 6, 6, 2, 2, 3, 3],
    [2, 2, 2, 2, 6, 6, 7, 7],
    [3, 3, 3, 3, 7, 7, 6, 6],
    [0, 0, 1, 1, 5, 5, 4, 4],
    [1, 1, 0, 0, 4, 4, 5, 5],
])

XOR = xor_op()
SHIFT = shift_op()
ADD_MOD_3 = cyclic_group(3)
SKEW_SQUARE_2 = skew_square_op(2)

NAMED = {
    "unbalanced-periodic-4": UNBALANCED_PERIODIC_4,
    "unstable-wedge-8": UNSTABLE_WEDGE_8,
    "period-two-stable-8": PERIOD_TWO_STABLE_8,
    "ergodic-not-strong-4": ERGODIC_NOT_STRONG_4,
    "strong-not-quasigroup-4": STRONG_NOT_QUASIGROUP_4,
    "periodic-cover-6": PERIODIC_COVER_OP_6,
    "residual-degree-two-8": RESIDUAL_DEGREE_TWO_8,
    "xor": XOR,
    "shift": SHIFT,
    "add-mod-3": ADD_MOD_3,
    "skew-square-2": SKEW_SQUARE_2,
}


def line_partition(n: int, slope: int) -> list[list[int]]:
    """Blocks ``{(j + slope*k, k) : k}`` of ``Z_n x Z_n``, coded as ``x*n+y``."""
    return [sorted(((j + slope * k) % n) * n + k for k in range(n)) for j in range(n)]
