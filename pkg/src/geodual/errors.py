"""Exception hierarchy.

Numerical failures map to CLI exit code 2, configuration problems to 1.
"""


class GeoDualError(Exception):
    """Base class for every error raised by this package."""


class NumericalFailure(GeoDualError):
    """A computation could not be completed or violated an invariant."""


class ConfigError(GeoDualError):
    """Invalid scenario configuration; message carries the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SingularMetric(NumericalFailure):
    pass


class DualSingularity(NumericalFailure):
    """Conformal factor undefined: the scalar field reached the shell value k."""


class DegenerateK(NumericalFailure):
    """The projected vector k = U (U.b) + b vanished (b parallel to U)."""


class NotTimelike(NumericalFailure):
    pass


class NormViolation(NumericalFailure):
    pass


class ComplexRoot(NumericalFailure):
    pass


class DivergentBranch(NumericalFailure):
    pass


class StepFailure(NumericalFailure):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TooFewSamples(NumericalFailure):
    pass


class WrongKind(GeoDualError):
    pass


class BoundarySite(NumericalFailure):
    pass


class RealnessViolation(NumericalFailure):
    """A quantity that must be real carried an imaginary residue above tolerance."""
