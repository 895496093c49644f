"""Exceptions raised by the synchronization protocols."""


class DegenerateLinkError(Exception):
    """A link or beamformer carries (numerically) no signal."""


class UnresolvableTrialError(DegenerateLinkError):
    """Test statistic too small for its phase to mean anything."""

    def __init__(self, magnitude: float):
        self.magnitude = magnitude
        super().__init__(f"test statistic magnitude {magnitude:.3e} below resolvable floor")
