"""Exception hierarchy.

Three top-level families map onto the CLI exit codes: ``UsageError`` -> 1,
``DataError`` -> 2, ``NumericalError`` -> 3.
"""


class EvadexError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(EvadexError):
    """Bad configuration or invalid arguments."""


class InvalidConfig(UsageError):
    pass


class InvalidFractions(InvalidConfig):
    """Split fractions must be positive and sum to at most 1."""


class InvalidTarget(UsageError):
    """Targeted metrics require a target class different from the true one."""


class DataError(EvadexError):
    """Problems with input files or dataset contents."""


class MissingFile(DataError):
    pass


class RaggedRows(DataError):
    def __init__(self, row, expected, got):
        super().__init__(f"row {row}: expected {expected} cells, got {got}")
        self.row = row


class NonNumericCell(DataError):
    def __init__(self, row, col, value):
        super().__init__(f"row {row}, column {col!r}: not a finite number: {value!r}")
        self.row = row
        self.col = col
        self.value = value


class UnknownLabelColumn(DataError):
    def __init__(self, name, available):
        super().__init__(f"label column {name!r} not in header {available}")


class InvalidLabel(DataError):
    pass


class CorruptModelFile(DataError):
    pass


class VersionMismatch(CorruptModelFile):
    pass


class ShapeMismatch(DataError):
    pass


class EmptyDataset(DataError):
    pass


class DegenerateLabels(DataError):
    """Training data contains fewer than two distinct classes."""


class NumericalError(EvadexError):
    pass


class SingularSystem(NumericalError):
    """Weighted least-squares system is singular and unregularized."""


class ZeroPerturbations(NumericalError):
    """Per-sample metrics are undefined when no feature was perturbed."""


class NoBackgroundFeatures(EvadexError):
    """Noise attack found no feature at or below the background threshold."""


class EmptyCandidateSet(EvadexError):
    """Guided attack selection left no feature to perturb."""
