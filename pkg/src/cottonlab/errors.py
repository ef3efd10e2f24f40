"""Exception hierarchy.

Every failure mode surfaces as a named subclass of :class:`CottonlabError`;
the CLI reports the class name and message and maps the family to its exit
code (usage 2, verification failure 1, numeric/domain failure 3).
"""


class CottonlabError(Exception):
    """Base class for all package errors."""


class ExprSyntaxError(CottonlabError):
    """Malformed expression text; ``offset`` is the byte offset of the fault."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class UnknownSymbolError(CottonlabError):
    """Identifier that is neither a coordinate nor a known function."""

    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown symbol '{name}' (at offset {offset})")


class DomainError(CottonlabError):
    """Evaluation outside an expression's domain (log/sqrt/division)."""


class DegreeError(CottonlabError):
    """Form degree outside 0..3."""


class NotPositiveDefiniteError(CottonlabError):
    """Metric failed the positive-definiteness check at a point."""


class DegenerateSeedError(CottonlabError):
    """Gram-Schmidt seed vectors are linearly dependent."""


class FrameNotOrthonormalError(CottonlabError):
    """Supplied frame is not orthonormal for the metric at the point."""


class NotSpecialOrthogonalError(CottonlabError):
    """Gauge map value is not in SO(3) at an evaluated point."""


class JacobiViolationError(CottonlabError):
    """Structure constants fail the Jacobi identity."""


class NonFiniteSampleError(CottonlabError):
    """Quadrature integrand returned a non-finite value; carries the node."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class CottonNotZeroError(CottonlabError):
    """Flattening was requested for a metric whose Cotton tensor is nonzero."""


class StepTooLargeError(CottonlabError):
    """RK4 step-halving error estimate exceeded the budget."""


class BlowUpError(CottonlabError):
    """The Riccati-type system exceeded the configured magnitude bound."""


class NotClosedError(CottonlabError):
    """1-form field failed the closedness test; carries the worst node."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class SchemaError(CottonlabError):
    """Spec file is missing or mistypes a required key."""

    def __init__(self, key, message=None):
        self.key = key
        super().__init__(message or f"spec file problem at key '{key}'")


class IoError(CottonlabError):
    """Spec file could not be read."""
