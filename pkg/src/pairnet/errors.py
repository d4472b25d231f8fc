"""Exception types.

Every error carries a short ``code`` so the command line can print a
machine-parseable reason prefix.
"""


class PairNetError(Exception):
    code = "error"


class DimensionError(PairNetError, ValueError):
    code = "dimension"


class DegenerateSampleError(PairNetError, ValueError):
    code = "degenerate-sample"


class ConfigurationError(PairNetError, ValueError):
    code = "configuration"


class InsufficientDataError(PairNetError, ValueError):
    code = "insufficient-data"


class NotTrainableError(PairNetError, TypeError):
    code = "not-trainable"


class WiringError(PairNetError, ValueError):
    code = "wiring"


class GrowthError(PairNetError, ValueError):
    code = "growth"


class ParseError(PairNetError, ValueError):
    """Malformed input file; ``offset`` is a byte offset or ``line`` a 1-based line."""

    code = "parse"

    def __init__(self, message, *, offset=None, line=None):
        where = []
        if offset is not None:
            where.append(f"offset {offset}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.offset = offset
        self.line = line


class ModelFormatError(PairNetError, ValueError):
    code = "model-format"
