"""Exception types shared across the package."""


class GranrecError(Exception):
    """Base class for all granrec errors."""


class SchemaMismatchError(GranrecError):
    """An attribute/value reference does not fit the schema it is used against."""


class NoGranulesError(GranrecError):
    """No granule on one side clears its coverage threshold."""

    def __init__(self, side: str, threshold: float):
        self.side = side
        self.threshold = threshold
        super().__init__(
            f"no {side} granules reach coverage threshold {threshold}"
        )


class DataFormatError(GranrecError):
    """A data file cannot be parsed; carries file and line context."""

    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:"
            if line is not None:
                prefix += f"{line}:"
            prefix += " "
        super().__init__(prefix + message)


class StoreFormatError(GranrecError):
    """A serialized rule store is malformed or has an unsupported version."""
