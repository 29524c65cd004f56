"""Exception types raised by the solvers."""


class PcfError(Exception):
    """Base class for library errors."""


class GeometryError(PcfError, ValueError):
    pass


class MaterialError(PcfError, ValueError):
    pass


class CriticalDispersionError(PcfError, ArithmeticError):
    """a = omega^2 eps mu - k^2 vanishes (or nearly so) in some phase."""


class NonSolvableError(PcfError, ValueError):
    """Periodic Laplace problem with a source of nonzero mean."""


class RankCollapseError(PcfError):
    """Too few independent fields survive Gram filtering."""


class IndefiniteMassError(PcfError, ArithmeticError):
    """Mass matrix lost positive definiteness."""


class SpectrumError(PcfError):
    """Dense eigensolver failure."""


class ParameterRangeError(PcfError, ValueError):
    """Input outside the range where the model is valid."""


class ExtrapolationError(PcfError, ArithmeticError):
    """Extrapolated value did not meet its tolerance."""


class ConfigError(PcfError, ValueError):
    """Invalid configuration; ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
