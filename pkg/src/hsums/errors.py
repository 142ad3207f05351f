"""Exception types shared across the library."""


class HsumsError(Exception):
    """Base class for all library errors."""


class PoleProximityError(HsumsError):
    """Requested evaluation point is within the guard distance of a pole."""

    def __init__(self, z, distance, guard):
        self.z = z
        self.distance = distance
        self.guard = guard
        super().__init__(
            f"argument {z} is within {distance} of a pole (guard {guard})"
        )


class PrecisionExhaustedError(HsumsError):
    """Internal error bound could not be met at the requested precision."""


class ReconstructionFailedError(HsumsError):
    """A solved coefficient is not close to any bounded-denominator rational."""


class VerificationFailedError(HsumsError):
    """Fresh-point residual of a derived identity exceeds the tolerance."""


class IllConditionedError(HsumsError):
    """The sampled linear system is too ill-conditioned for the precision budget."""


class MissingBilinearError(HsumsError):
    """A composition step needs a bilinear identity absent from the corpus."""


class CorpusSyntaxError(HsumsError):
    """Compact-notation text does not conform to the identity grammar."""

    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class UnknownSymbolError(CorpusSyntaxError):
    """Identity text uses a symbol outside the constant/sum alphabet."""


class CorpusValidationError(HsumsError):
    """A corpus file violates a structural invariant."""
