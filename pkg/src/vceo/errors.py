"""Semantic exception types shared across the package."""


class VceoError(Exception):
    """Base error for this package."""


class InvalidParamsError(VceoError, ValueError):
    """Inputs violate a type contract (sign, finiteness, PSD, ordering)."""


class InfeasibleTargetsError(VceoError):
    """Distortion targets cannot be met by any scheme.

    ``constraint`` names the violated constraint for diagnostics.
    """

    def __init__(self, message: str, constraint: str = ""):
        super().__init__(message)
        self.constraint = constraint


class DegenerateConditioningError(VceoError):
    """Conditioning block is not PSD within tolerance; conditioning undefined."""


class InfiniteMutualInformationError(VceoError):
    """A deterministic dependence makes the requested mutual information infinite."""


class DomainError(VceoError, ValueError):
    """Argument lies outside the mathematical domain of the operation."""


class InternalContradictionError(VceoError):
    """A state the theory rules out was reached; indicates a bug upstream."""


class DegenerateRegressionError(VceoError):
    """Collinear conditioning columns make the least-squares fit ill-posed."""


class InstanceParseError(VceoError, ValueError):
    """Instance file is malformed; message carries the line/field diagnostic."""
