"""Exception hierarchy shared across the package.

The CLI maps these onto machine-readable exit codes; see ``herzkit.cli``.
"""


class HerzkitError(Exception):
    """Base class for all package errors."""


class InputDomainError(HerzkitError, ValueError):
    """An input violates a mathematical domain requirement.

    Examples: non-finite coordinates, nonpositive weights, a fractional
    order outside [0, n), a negative function handed to the iteration
    algorithm.
    """


class ShapeError(HerzkitError, ValueError):
    """Operands live on incompatible grids or have mismatched dimensions."""


class CapabilityError(HerzkitError, NotImplementedError):
    """The request is valid mathematics but outside the implemented range.

    Examples: quadrature in dimension n > 3, finite-difference derivative
    order beyond the supported stencils.
    """


class PreconditionError(HerzkitError, ValueError):
    """A documented operation precondition does not hold.

    Examples: decomposition index range violated, an unvalidated singular
    kernel passed to the integral-operator driver.
    """


class WindowRangeError(PreconditionError):
    """A dyadic index falls outside the configured window."""


class ParseError(HerzkitError, ValueError):
    """Malformed file or command-line input."""


class TruncationBreach(HerzkitError, RuntimeError):
    """Strict mode: the dyadic-window truncation loss exceeds the threshold."""


class TruncationWarning(UserWarning):
    """The dyadic window misses a non-negligible fraction of the input mass."""
