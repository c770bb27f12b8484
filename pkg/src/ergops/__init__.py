"""Uniformity-preserving binary operations on finite alphabets.

Classification (irreducibility, ergodicity, strong ergodicity), stable
partitions and their residues, and tensor products of operations.
"""

from .core import (
    BinaryOperation,
    cyclic_group,
    inverse_op,
    is_quasigroup,
    is_uniformity_preserving,
    left_division,
    load_table,
    parse_table,
    set_product,
    shift_op,
    skew_square_op,
    xor_op,
)
from .errors import CapExceeded, ErgopsError, InputError, VerificationFailed
from .graph import connectability, ergodic_classes, is_ergodic, is_irreducible, period
from .partitions import (
    Partition,
    SubsetFamily,
    cover_orbit_analysis,
    enumerate_stable_partitions,
    generated_partition,
    is_periodic_partition,
    is_stable_partition,
    partition_period,
    wedge,
)
from .product import ProductSpace, canonical_factorization, correlation, decompose, tensor_ops
from .report import Limits, classify
from .residue import (
    definitional_strong_ergodicity,
    first_residue,
    is_strongly_ergodic,
    residue_chain,
    strong_connectability,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryOperation", "CapExceeded", "ErgopsError", "InputError", "Limits", "Partition",
    "ProductSpace", "SubsetFamily", "VerificationFailed", "canonical_factorization",
    "classify", "connectability", "correlation", "cover_orbit_analysis", "cyclic_group",
    "decompose", "definitional_strong_ergodicity", "enumerate_stable_partitions",
    "ergodic_classes", "first_residue", "generated_partition", "inverse_op", "is_ergodic",
    "is_irreducible", "is_periodic_partition", "is_quasigroup", "is_stable_partition",
    "is_strongly_ergodic", "is_uniformity_preserving", "left_division", "load_table",
    "parse_table", "partition_period", "period", "residue_chain", "set_product", "shift_op",
    "skew_square_op", "strong_connectability", "tensor_ops", "wedge", "xor_op",
]
