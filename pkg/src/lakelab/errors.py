"""Exception hierarchy shared by all lakelab modules."""


class LakeError(Exception):
    """Base class for all lakelab errors."""


class InvalidDepth(LakeError):
    """Depth law is non-positive inside the claimed wet region, or violates a shore constraint."""


class InvalidSequence(LakeError):
    """An epsilon sequence is malformed (non-monotone, island touching the outer shore, ...)."""


class DegenerateWeight(LakeError):
    """A 1/b weight was requested on cells where the depth vanishes."""


class DegenerateCoefficient(LakeError):
    """An interior face carries zero depth, so the elliptic coefficient blows up."""


class IterationLimit(LakeError):
    """The iterative solver did not converge; the partial report is attached."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NoIsland(LakeError):
    """A harmonic basis was requested on a simply connected lake."""


class BadCutoff(LakeError):
    """Cutoff transition band leaves the wet region or the domain."""


class TimeStepTooLarge(LakeError):
    """Requested time step violates the stability bound of the upwind scheme."""


class EmptyBand(LakeError):
    """A shore band contains no grid cells."""


class BadTestFunction(LakeError):
    """Test function violates its support or divergence-free requirement."""


class ConfigError(LakeError):
    """Run configuration is malformed or fails validation."""
