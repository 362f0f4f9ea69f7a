"""Exception types raised across the package."""


class CviOptError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(CviOptError, ValueError):
    """Structurally malformed input (ragged rows, negative labels, ...)."""


class DataParseError(CviOptError, ValueError):
    """A token could not be parsed as a finite number."""


class EmptyInputError(CviOptError, ValueError):
    """An input file or collection was empty where content is required."""


class LengthMismatchError(CviOptError, ValueError):
    """Two sequences that must have equal length do not."""


class DegenerateDataError(CviOptError, ValueError):
    """Dataset has no informative columns left."""


class NotSurjectiveError(CviOptError, ValueError):
    """A label vector does not use every cluster id at least once."""


class LabelRangeError(CviOptError, ValueError):
    """A label value lies outside the declared range."""


class ParameterError(CviOptError, ValueError):
    """A numeric parameter is out of its admissible range."""


class ContractViolationError(CviOptError, ValueError):
    """A caller broke a documented precondition."""


class InvalidMoveError(ContractViolationError):
    """A relocation move is not applicable to the current partition."""


class EmptyAggregationError(CviOptError, ValueError):
    """An OWA operator other than Const was applied to an empty multiset."""


class UndefinedScoreError(CviOptError, ValueError):
    """A similarity score is undefined (fewer than two points to compare)."""


class MissingOverlapError(CviOptError, ValueError):
    """Two methods share no dataset on which they can be compared."""


class GenerationError(CviOptError, RuntimeError):
    """A randomized generator failed to produce a valid partition."""


class ConfigError(CviOptError, ValueError):
    """A run configuration is unusable (bad paths, empty candidate pool, ...)."""
