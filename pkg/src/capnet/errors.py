"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 2, EstimationError -> 3.
"""


class CapnetError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CapnetError):
    """Malformed or inconsistent input data (bad CSV row, unknown id, ...).

    ``row`` is the 1-based data-file line number when the error comes from a
    specific record, so messages can name the offending row.
    """

    def __init__(self, message: str, *, row: int | None = None, source: str | None = None):
        self.row = row
        self.source = source
        parts = []
        if source:
            parts.append(source)
        if row is not None:
            parts.append(f"row {row}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class EstimationError(CapnetError):
    """A statistical procedure could not produce a reliable result."""


class GraphNotConnectedError(InputError):
    """Path statistics need a connected graph; extract the GCC first."""

    def __init__(self, message: str = "graph is not connected; apply extract_gcc first"):
        super().__init__(message)
