"""Exception hierarchy."""


class F2MixError(Exception):
    """Base class for all library errors."""


class LengthMismatch(F2MixError, ValueError):
    """Vectors, matrices or subspaces with incompatible dimensions."""


class InvalidParams(F2MixError, ValueError):
    pass


class Unidentifiable(F2MixError):
    """Mixture weights cannot be recovered because both components coincide."""


class EmptyHypothesisList(F2MixError, ValueError):
    pass


class ProjectionStalled(F2MixError):
    """A projector level exhausted its retry budget without finding an
    incomparability-preserving map."""


class BaseCaseFailed(F2MixError):
    pass


class DimensionMismatch(F2MixError):
    """Large-gap recovery returned subspaces whose dimensions differ from the
    hypothesized pair."""


class InsufficientSamples(F2MixError):
    """The oracle's sample budget cannot cover the requested draws."""


class InfeasibleSpec(F2MixError, ValueError):
    pass


class ConfigError(F2MixError, ValueError):
    """Malformed experiment configuration; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
