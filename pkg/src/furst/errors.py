"""Exception types shared across the package.

The CLI maps these onto process exit codes: user/parameter problems exit 1,
cardinality caps exit 2, and a failed internal soundness check exits 3.
"""


class FurstError(Exception):
    """Base class for package errors."""


class InvalidParameter(FurstError, ValueError):
    """A parameter is outside its documented range or domain."""


class InvalidScale(InvalidParameter):
    """A scale is outside its usable range."""


class StaleResolution(InvalidScale):
    """Requested scale is finer than the data's resolution floor.

    Counts at such scales would reflect the finite truncation, not the
    idealized set the truncation stands for.
    """


class UnsupportedScale(InvalidParameter):
    """Scaling factor is not a power of the construction base."""


class InsufficientData(InvalidParameter):
    """Too few scales for a meaningful fit."""


class DegenerateStep(InvalidParameter):
    """A refinement step cannot run with the given scales."""


class NotInFamily(InvalidParameter):
    """Probe line is too far from every constructed line."""


class InvalidWitness(InvalidParameter):
    """A designated witness pair violates its separation hypothesis."""


class ResourceCap(FurstError):
    """A configured cardinality cap would be exceeded."""


class InconsistentInput(FurstError):
    """Input data violates a stated hypothesis (e.g. a line meets no point)."""


class SoundnessViolation(FurstError):
    """An emitted certificate failed its own exact check; indicates a bug."""
