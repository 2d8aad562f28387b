"""Exception types shared across the library.

Every failure mode that callers are expected to branch on gets its own
class; generic misuse raises :class:`InvalidInputError`.
"""


class FracweylError(Exception):
    """Base class for all library errors."""


class InvalidInputError(FracweylError):
    """Malformed or out-of-contract input."""


class NotContractiveError(FracweylError):
    """An operation requiring contractivity received maps with ratio >= 1."""


class ResourceLimitError(FracweylError):
    """A configured cap (point count, iteration budget) was exceeded."""


class LabellingInconsistentError(FracweylError):
    """A partition scheme admits no vertex labelling."""


class DegenerateInterpolationError(FracweylError):
    """Interpolation data does not determine the affine pieces."""


class OutOfDomainError(FracweylError):
    """Evaluation point lies outside the function's domain."""


class NonGenericVectorError(FracweylError):
    """The chamber-selecting vector is orthogonal to some root."""


class NotCrystallographicError(FracweylError):
    """A Cartan pairing is not an integer within tolerance."""


class FoldDivergedError(FracweylError):
    """Folding into the fundamental alcove did not terminate."""


class NotClosedWithinCapError(FracweylError):
    """Group closure exceeded the element cap without closing."""


class InvalidGeometryError(FracweylError):
    """A polygon or interval description is malformed."""


class RankDeficientError(FracweylError):
    """A Gram matrix is numerically singular."""


class ConstructionStalledError(FracweylError):
    """An exchange construction hit its round cap before reaching tolerance."""

    def __init__(self, message, last_defect=None):
        super().__init__(message)
        self.last_defect = last_defect
