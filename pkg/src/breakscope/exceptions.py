"""Exception hierarchy.

Every error raised by the package derives from :class:`BreakscopeError`.
The CLI maps :class:`DataError` to exit code 3 and :class:`NumericalError`
to exit code 4.
"""


class BreakscopeError(Exception):
    pass


class DataError(BreakscopeError, ValueError):
    """Input data is malformed or violates a precondition."""


class NumericalError(BreakscopeError, ArithmeticError):
    """A numerical routine failed."""


class ZeroVarianceColumn(DataError):
    def __init__(self, column, name=None):
        self.column = column
        self.name = name
        label = f"{column} ({name!r})" if name is not None else f"{column}"
        super().__init__(f"column {label} has zero variance")


class RankRequestTooLarge(DataError):
    pass


class EigenFailure(NumericalError):
    pass


class EmptySegment(DataError):
    pass


class SegmentTooShort(DataError):
    pass


class InfeasibleSpacing(DataError):
    pass


class TooFewObservations(DataError):
    pass


class RegimeTooShort(DataError):
    pass


class SchemeArityMismatch(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row, col, value=None):
        self.row = row
        self.col = col
        super().__init__(f"cannot parse {value!r} at row {row}, column {col}")


class MissingData(DataError):
    def __init__(self, count, cells=()):
        self.count = count
        self.cells = list(cells)
        super().__init__(f"{count} missing cell(s) in panel")


class RaggedRows(DataError):
    pass
