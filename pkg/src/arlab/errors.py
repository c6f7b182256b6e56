"""Exception types shared across the package."""


class ArlabError(Exception):
    """Base class for all package errors."""


class DomainError(ArlabError, ValueError):
    """A parameter value lies outside the curve's (or offspring's) domain."""


class ArgumentError(ArlabError, ValueError):
    """An argument violates a documented precondition."""


class ConstraintError(ArlabError, ValueError):
    """An exponent or matrix constraint does not hold exactly.

    ``constraint`` names the violated relation and ``index`` (if any) the
    offending coordinate.
    """

    def __init__(self, constraint, message, index=None):
        self.constraint = constraint
        self.index = index
        where = f" (index {index})" if index is not None else ""
        super().__init__(f"{constraint}{where}: {message}")


class PreconditionError(ArgumentError):
    """Input data fails a mathematical precondition (e.g. a root inside an interval)."""


class DegenerateFrameError(ArlabError, ValueError):
    """Torsion vanishes at the base point; the Taylor frame does not span."""


class ResolutionError(ArlabError, ValueError):
    """Quadrature is too coarse for the oscillation at the requested point."""

    def __init__(self, message, required_quad_n):
        self.required_quad_n = required_quad_n
        super().__init__(f"{message}; need quad_n >= {required_quad_n}")
