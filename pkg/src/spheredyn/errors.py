"""Exception hierarchy shared by all spheredyn modules."""


class SphereDynError(Exception):
    """Base class for all toolkit errors."""


class SingularMatrix(SphereDynError):
    """Matrix determinant below the singularity tolerance."""


class ConvergenceFailure(SphereDynError):
    """An iterative kernel did not reach its tolerance within its cap."""


class NearUnitModulusAmbiguity(SphereDynError):
    """An eigenvalue modulus is too close to 1 to classify reliably."""


class HomeoConditionViolated(SphereDynError):
    """||T^-1 a|| >= 1 - tol, so the sphere map cannot be certified."""


class DegenerateImage(SphereDynError):
    """a + T(x) is numerically zero; the sphere map is undefined at x."""


class NotInvertible(SphereDynError):
    """Inverse dynamics requested on an uncertified system."""


class InvalidAlpha(SphereDynError):
    """Offset norm outside the open interval (0, 1)."""


class NoFixedPoints(SphereDynError):
    """Closed-form classification requested where no fixed points exist."""


class InternalInconsistency(SphereDynError):
    """Two independent routes to the same verdict disagree (tolerance bug)."""


class NormalizationRequired(SphereDynError):
    """Operation requires T(a) = a; divide T by its eigenvalue first."""


class SearchExhausted(SphereDynError):
    """Every search candidate failed; should be unreachable per theory."""


class WitnessNotFound(SphereDynError):
    """No witness pair passed at the minimum allowed separation."""


class DimensionMismatch(SphereDynError):
    """Input vectors do not match the system's factor dimensions."""


class EmptyProduct(SphereDynError):
    """Product system needs at least one factor."""


class MalformedWitness(SphereDynError):
    """Witness payload is missing fields or has the wrong shape."""
