"""Exception hierarchy shared across the package."""


class RandigError(Exception):
    """Base class for all randig errors."""


class ValidationError(RandigError, ValueError):
    """Malformed input: bad parameters, permutations, probability vectors."""


class DegenerateModelError(ValidationError):
    """Parameter values that collapse the model to a single digraph."""


class UnsupportedExactError(RandigError):
    """Exact computation requested outside the supported regime."""


class NoClosedFormError(RandigError):
    """The requested closed-form object does not exist for this family."""
