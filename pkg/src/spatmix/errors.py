"""Error types shared across the package."""


class ParseError(ValueError):
    """A data file is syntactically malformed or has the wrong shape."""


class NumericError(RuntimeError):
    """A computation produced non-finite values it cannot recover from."""
