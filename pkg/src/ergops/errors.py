"""Exception types.

Three families map onto CLI exit codes: ``InputError`` (2), ``CapExceeded``
(3) and ``VerificationFailed`` (4).
"""

from __future__ import annotations


class ErgopsError(Exception):
    """Base class for every error raised by this package."""


class InputError(ErgopsError, ValueError):
    """The input violates a precondition."""


class CapExceeded(ErgopsError):
    """A configured size, iteration or state budget was hit."""


class VerificationFailed(ErgopsError):
    """An internal consistency check failed; this indicates a bug."""


class NonSquare(InputError):
    pass


class EntryOutOfRange(InputError):
    def __init__(self, row: int, col: int, value: object):
        super().__init__(f"entry [{row}][{col}] = {value!r} is not a valid element")
        self.row = row
        self.col = col
        self.value = value


class NotUniformityPreserving(InputError):
    pass


class NotQuasigroup(InputError):
    pass


class NotIrreducible(InputError):
    pass


class NotErgodic(InputError):
    pass


class NotStronglyErgodic(InputError):
    pass


class NotStable(InputError):
    pass


class NotACover(InputError):
    pass


class EmptySet(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotErgodicFactors(InputError):
    pass


class AlphabetTooLarge(CapExceeded):
    pass


class IterationBudgetExceeded(CapExceeded):
    def __init__(self, max_iter: int, what: str = "iteration"):
        super().__init__(f"{what} did not finish within {max_iter} steps")
        self.max_iter = max_iter


class StateBudgetExceeded(CapExceeded):
    pass


class ProductTooLarge(CapExceeded):
    pass


class InconclusiveWithinBound(CapExceeded):
    pass


class ResidueVerificationFailed(VerificationFailed):
    pass


class DecompositionFailed(VerificationFailed):
    pass
