"""Exception types shared across the package."""


class KHarmonicError(Exception):
    """Base class for all package errors."""


class ValidationError(KHarmonicError):
    """Malformed input: bad file schema, out-of-range option, wrong argument."""


class ZeroVector(KHarmonicError):
    """A sphere block received a vector too close to the origin to project."""


class FieldCurveMismatch(KHarmonicError):
    """A tangent field was used with a curve snapshot it does not belong to."""


class OpenCurveUnsupported(KHarmonicError):
    """Operation requires a closed curve."""


class DegenerateCurve(KHarmonicError):
    """Total curve length is too small to work with."""


class StencilTooCoarse(KHarmonicError):
    """Sample count is below the headroom rule for the requested order."""


class NotASpaceForm(KHarmonicError):
    """Scalar-curvature closed form requested on a target without constant K."""


class NotASphere(KHarmonicError):
    """Circle construction requires a round sphere target."""


class NotUnitSphere(KHarmonicError):
    """The extrinsic sixth-order residual is derived for the unit sphere only."""


class WrongDimension(KHarmonicError):
    """Operation requires a different target dimension."""


class NotParallelCurvature(KHarmonicError):
    """Second-variation assembly requires a parallel-curvature target."""


class NotHarmonic(KHarmonicError):
    """Operation requires a (numerically) harmonic curve."""


class DomainMismatch(KHarmonicError):
    """Product factors must share the same discrete domain (N, h, closed)."""


class LengthMismatch(KHarmonicError):
    """Graph domain circle circumference must match the parameter length."""


class StepUnderflow(KHarmonicError):
    """Flow step size fell below the representable floor."""


class NotCriticalWarning(UserWarning):
    """Hessian requested away from a critical curve; values are diagnostic only."""
