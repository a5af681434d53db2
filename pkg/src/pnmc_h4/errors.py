"""Exception hierarchy shared by every stage of the pipeline."""


class PNMCError(Exception):
    """Base class for all errors raised by :mod:`pnmc_h4`."""


class InvalidParameters(PNMCError, ValueError):
    """Moduli or resolution parameters violate a precondition."""


class InvalidResolution(InvalidParameters):
    pass


class NonPositiveF(PNMCError, ValueError):
    pass


class Inadmissible(PNMCError, ValueError):
    """The radicand Q is not positive where it must be."""


class TruncatedSpan(Inadmissible):
    """The monotone branch of f ends before the requested span is covered."""


class NegativeRadicand(PNMCError, ValueError):
    pass


class StepFailure(PNMCError, RuntimeError):
    """The adaptive integrator could not meet the requested tolerance."""


class DriftExceeded(PNMCError, RuntimeError):
    """The integrated frame lost Minkowski orthonormality."""


class ZeroVector(PNMCError, ValueError):
    pass


class OutOfSpan(PNMCError, ValueError):
    pass


class TooFewSamples(PNMCError, ValueError):
    pass


class StencilOutOfDomain(PNMCError, ValueError):
    pass


class DegenerateMetric(PNMCError, ArithmeticError):
    pass


class NegativeNormSquared(PNMCError, ArithmeticError):
    pass


class ZeroMeanCurvature(PNMCError, ArithmeticError):
    pass


class NotOnHyperboloid(PNMCError, ValueError):
    pass
