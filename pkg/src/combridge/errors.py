"""Exception taxonomy shared across the package."""


class CombridgeError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidCombinationError(CombridgeError):
    """Sequence is not a strictly increasing selection of indices in 1..n."""


class InvalidSizeError(CombridgeError):
    """Group size k is zero or exceeds the universe size."""


class RankOutOfRangeError(CombridgeError):
    """Rank h lies outside [1, C(n, k)]."""


class SchemaError(CombridgeError):
    """Unknown, missing, or conflicting attribute names."""


class TypeMismatchError(CombridgeError):
    """Values of different tags met where a single tag is required."""


class DuplicateKeyError(CombridgeError):
    """Primary-key or item-key uniqueness violated."""


class EmptyUniverseError(CombridgeError):
    """An item universe cannot be built from zero items."""


class EmptyBridgeError(CombridgeError):
    """A bridge with no rows cannot be compressed."""


class UnknownItemError(CombridgeError):
    """Item key does not resolve in the ambient universe."""


class InvalidGroupKeyError(CombridgeError):
    """h or k outside the legal range for a group key."""


class GroupKeyParseError(CombridgeError):
    """Text does not match the canonical h:k grammar."""


class CorruptGroupKeyError(CombridgeError):
    """A stored (h, k) pair is impossible for the ambient universe."""


class StaleUniverseError(CombridgeError):
    """Compressed rows were minted against a different universe."""


class ReferentialViolationError(CombridgeError):
    """Bridge row references a group or item row that does not exist."""


class FormatError(CombridgeError):
    """Malformed input file; message carries path and line context."""

    def __init__(self, message: str, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}:"
            prefix += " "
        super().__init__(prefix + message)
