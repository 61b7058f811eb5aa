"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration problems (1),
bad or inconsistent data (2), and numerical failures (3).
"""


class FisError(Exception):
    """Base class for every error raised by fisgen."""


class ConfigError(FisError, ValueError):
    pass


class DataError(FisError, ValueError):
    pass


class NumericalError(FisError, ArithmeticError):
    pass


class InvalidConfig(ConfigError):
    pass


class InvalidSizes(ConfigError):
    pass


class InvalidK(ConfigError):
    pass


class InvalidSpec(ConfigError):
    pass


class EmptyInput(DataError):
    pass


class TooFewPoints(DataError):
    pass


class NonFiniteInput(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyRuleSet(DataError):
    pass


class EmptyTestSet(DataError):
    pass


class TooFewObservations(DataError):
    pass


class NoPredictionsMade(DataError):
    pass


class EmptyRecords(DataError):
    pass


class MisalignedRecords(DataError):
    pass


class EmptyFile(DataError):
    pass


class RaggedRow(DataError):
    pass


class MissingColumn(DataError):
    def __init__(self, column: str, available=()):
        self.column = column
        hint = f" (available: {', '.join(available)})" if available else ""
        super().__init__(f"missing column {column!r}{hint}")


class NonNumericCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column!r}")


class DegenerateCluster(NumericalError):
    pass


class DuplicateCenters(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass


class InsufficientDistinctRules(UserWarning):
    """Fewer distinct rules exist than the requested Top-N size."""
