"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for malformed
inputs (bad mode indices, non-symmetric matrices, schema violations) and
:class:`NumericError` for inputs that are well-formed but numerically
unusable (non-normalizable states, singular blocks, cutoffs too small).
The CLI maps the former to exit code 2 and the latter to exit code 3.
"""


class BellforgeError(Exception):
    """Base class for all package errors."""


class ValidationError(BellforgeError):
    """Input rejected before any numerics ran."""


class NumericError(BellforgeError):
    """Numerically infeasible operation on otherwise valid input."""


# --- validation ---------------------------------------------------------


class NonFiniteEntry(ValidationError):
    """Matrix or vector contains NaN/Inf."""


class NonSymmetricInput(ValidationError):
    """Matrix asymmetry exceeds tolerance."""


class InvalidModeIndex(ValidationError):
    """Element or pattern references a mode outside the circuit."""


class ParameterOutOfRange(ValidationError):
    """Element or operation parameter outside its admissible range."""


class PatternModeClash(ValidationError):
    """Detection pattern sets overlap or fail to cover all modes."""


class WrongDetectionCount(ValidationError):
    """Operation requires a specific number of detected modes."""


class TooManyDetections(ValidationError):
    """Detected-mode count exceeds the configured enumeration limit."""


class LabelingMismatch(ValidationError):
    """Conditional state's output modes do not match the target labeling."""


class NotNormalized(ValidationError):
    """State norm deviates from 1 beyond tolerance."""


class BudgetZero(ValidationError):
    """Search invoked with no evaluation budget."""


class InfeasibleConfig(ValidationError):
    """Search configuration violates its own invariants."""


class SchemaViolation(ValidationError):
    """JSON document does not match the expected file schema."""


# --- numerics -----------------------------------------------------------


class NotSymplectic(NumericError):
    """Bogoliubov constraint residual exceeds tolerance."""


class SingularPassivePart(NumericError):
    """Passive block of a transform is numerically singular."""


class NotNormalizable(NumericError):
    """Gaussian state has a pair-coupling singular value >= 1."""


class CutoffTooSmall(NumericError):
    """Requested truncation cannot represent the state faithfully."""


class DimensionExplosion(NumericError):
    """Truncated Fock space exceeds the configured memory bound."""
