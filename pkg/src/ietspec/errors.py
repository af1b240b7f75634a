"""Exception hierarchy.

Every error carries a short kebab-case ``code`` so the command line front-end
can report failures by name.
"""


class IetError(Exception):
    code = "iet-error"


class FieldMismatchError(IetError, TypeError):
    code = "field-mismatch"


class DomainError(IetError, ValueError):
    code = "domain"


class ParseError(IetError, ValueError):
    code = "parse"


class InvalidLengthsError(IetError, ValueError):
    code = "invalid-lengths"


class InvalidPermutationError(IetError, ValueError):
    code = "invalid-permutation"


class OutOfDomainError(IetError, ValueError):
    code = "out-of-domain"


class NonReturnError(IetError, RuntimeError):
    code = "non-return"


class UndefinedStepError(IetError, ArithmeticError):
    code = "undefined-step"


class TowerAbortedError(IetError, RuntimeError):
    """A Rauzy step was undefined before the requested levels were built."""

    code = "tower-aborted"

    def __init__(self, message, tower=None):
        super().__init__(message)
        self.tower = tower


class NotFoundError(IetError, RuntimeError):
    """Proximity to the periodic exchange was not reached within the cap."""

    code = "not-found"

    def __init__(self, message, tower=None):
        super().__init__(message)
        self.tower = tower


class NoCandidateError(IetError, RuntimeError):
    code = "no-candidate"

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class InsufficientWindowError(IetError, ValueError):
    code = "insufficient-window"


class ModeError(IetError, TypeError):
    code = "mode"


class ParameterError(IetError, ValueError):
    code = "parameter"


class DegeneracyError(IetError, ArithmeticError):
    code = "degeneracy"
