"""Exception types raised across the package, one per failure contract."""


class MonodromyError(Exception):
    """Base class for all package errors."""


# -- construction / kernel ---------------------------------------------------

class DimensionMismatch(MonodromyError):
    pass


class PartitionInconsistent(MonodromyError):
    pass


class NotDiagonalizable(MonodromyError):
    pass


# -- rays, fans, sectors -----------------------------------------------------

class CoalescentPair(MonodromyError):
    """A requested eigenvalue pair coincides at this t: no Stokes ray exists."""


class NotAdmissible(MonodromyError):
    """The direction hits a Stokes ray of Lambda(0)."""


class OnCrossingLocus(MonodromyError):
    """t lies on X(tau~): a Stokes ray sits on the admissible direction."""


class OnStokesRay(MonodromyError):
    """Re((u_a - u_b) e^{i theta}) vanishes: no dominance relation."""


# -- cells ---------------------------------------------------------------------

class OnWall(MonodromyError):
    """t lies on a cell wall (a linear form vanished or a pair coalesced)."""

    def __init__(self, message, pair=None, kind=None):
        super().__init__(message)
        self.pair = pair
        self.kind = kind


class MultiWall(OnWall):
    """t lies on two or more walls at once (non-simple point): no signature."""


class EndpointOnWall(MonodromyError):
    pass


class ResolutionTooCoarse(MonodromyError):
    pass


# -- formal solutions ----------------------------------------------------------

class AtCoalescence(MonodromyError):
    """t lies on Delta; the generic recursion divides by u_a - u_b."""


class NotOnDelta(MonodromyError):
    pass


class VanishingConditionsFail(MonodromyError):
    pass


# -- Levelt forms ----------------------------------------------------------------

class IllConditionedResonance(MonodromyError):
    pass


class InvalidGaugePattern(MonodromyError):
    pass


# -- numerics at infinity --------------------------------------------------------

class RadiusTooSmall(MonodromyError):
    pass


class StepFailure(MonodromyError):
    pass


class PathThroughOrigin(MonodromyError):
    pass


class MatchingIllConditioned(MonodromyError):
    pass


# -- deformation flow --------------------------------------------------------------

class SingularAtDelta(MonodromyError):
    """An entry of A1/(u_a - u_b) fails to stay bounded at the coalescence."""


class BlowUp(MonodromyError):
    """Step size collapsed (movable pole of the deformation equations)."""

    def __init__(self, message, last_good_t=None):
        super().__init__(message)
        self.last_good_t = last_good_t


class DeltaHit(MonodromyError):
    pass


class SamplesSpanCells(MonodromyError):
    pass


class VanishingFail(MonodromyError):
    pass


# -- Painleve / special functions ----------------------------------------------------

class OutOfRadius(MonodromyError):
    pass


class SingularConfiguration(MonodromyError):
    pass


class GridSingular(MonodromyError):
    pass


class BranchUnspecified(MonodromyError):
    pass


# -- CLI -------------------------------------------------------------------------------

class ConfigInvalid(MonodromyError):
    pass


class KindMismatch(MonodromyError):
    pass
