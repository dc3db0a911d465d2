"""Exception hierarchy for the chemowave solvers.

All errors carry a single human-readable message so that callers can
re-raise them with extra context (e.g. the offending wave speed) without
losing the class.
"""

from __future__ import annotations


class ChemowaveError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# model validation
# ---------------------------------------------------------------------------

class ModelError(ChemowaveError, ValueError):
    """Invalid velocity model or parameter input."""


class AsymmetricSet(ModelError):
    """Velocity/weight lists are not symmetric about the origin."""


class WeightSumNotOne(ModelError):
    """Weights do not sum to one within tolerance."""


class NegativeWeight(ModelError):
    """A weight is negative."""


class SensitivityOutOfRange(ModelError):
    """chi_s or chi_n outside the accepted range, or chi_n > chi_s."""


class ZeroSignArgument(ModelError):
    """A sign argument was zero where a strict sign is required."""


class NoConfinementWindow(ModelError):
    """No confinement speed window exists (degenerate sensitivities)."""


class SpeedOnVelocityNode(ModelError):
    """Wave speed coincides with a discrete velocity node."""


class SpeedNotAdmissible(ModelError):
    """Wave speed lies outside the confinement window."""


# ---------------------------------------------------------------------------
# numerical failures
# ---------------------------------------------------------------------------

class NumericalError(ChemowaveError):
    """A solver could not produce a verified result."""


class SingularLambda(NumericalError):
    """Dispersion residual requested at a singular value."""


class BracketFailure(NumericalError):
    """Root bracket degenerate (numerically coincident singular values)."""


class NullSpaceDimensionError(NumericalError):
    """Matching matrix does not have a one-dimensional null space."""


class NonPositiveProfile(NumericalError):
    """Solved kinetic density has mixed signs on the verification grid."""


class ResonantMode(NumericalError):
    """A source mode coincides with a homogeneous exponent of the S ODE."""


class NonDecayingInput(NumericalError):
    """Piecewise-exponential input has a non-decaying term."""


class NonMonotoneN(NumericalError):
    """Nutrient profile failed monotonicity after mesh refinement."""


class NonPositiveSpeed(NumericalError):
    """Operation requires a strictly positive wave speed."""


class LostBracket(NumericalError):
    """A bracketed sign change could not be refined to a root."""


class CFLViolation(NumericalError):
    """Time step violates the CFL or tumbling stability bound."""


class NegativeDensity(NumericalError):
    """Simulation produced a negative density."""


class InsufficientSamples(NumericalError):
    """Not enough samples in the requested fitting window."""


# ---------------------------------------------------------------------------
# configuration / CLI
# ---------------------------------------------------------------------------

class ConfigError(ChemowaveError, ValueError):
    """Invalid run configuration."""


class ParseError(ConfigError):
    """Malformed configuration text."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class UnknownKey(ConfigError):
    """Configuration contains a key that is not part of the schema."""


class MissingKey(ConfigError):
    """Configuration is missing a required key."""
