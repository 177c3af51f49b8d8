"""Exception hierarchy shared across the package.

Three broad families map onto the CLI exit codes: configuration problems
(exit 2), numerical failures (exit 3), and I/O problems (exit 4, plain
OSError).
"""


class TransmonChaosError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(TransmonChaosError):
    """Invalid configuration value, file, or combination of options."""


class NumericalError(TransmonChaosError):
    """A numerical routine failed or produced an unusable result."""


# --- configuration-flavoured ------------------------------------------------

class InvalidParams(ConfigError):
    """Pulse or analysis parameters outside their valid domain."""


class ParseError(ConfigError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NonMonotonicTime(ParseError):
    """Sample times in a pulse file are not strictly increasing."""


# --- numerical --------------------------------------------------------------

class EigenFailure(NumericalError):
    """LAPACK eigendecomposition did not converge."""


class UnitarityLost(NumericalError):
    """A propagated unitary drifted beyond the unitarity tolerance."""


class NotUnitary(NumericalError):
    """Matrix handed to an eigenphase routine is not unitary enough."""


class NotHermitian(NumericalError):
    """Operator expected to be Hermitian is not, beyond tolerance."""


class AssignmentConflict(NumericalError):
    """Two Fock labels claim the same eigenvector (truncation too small)."""


class DegenerateOverlap(NumericalError):
    """Dressed-state assignment is ambiguous: top two overlaps nearly tie."""


class UnknownCheckpoint(TransmonChaosError):
    """Requested time is not a stored checkpoint."""


class TooFewPhases(TransmonChaosError):
    """Ratio statistics need at least three eigenphases."""


class SupportMismatch(TransmonChaosError):
    """Binned distributions have incompatible bins or support."""


class EmptyWindow(TransmonChaosError):
    """A KL window contains no checkpoints (or no ratio samples)."""


class AmbiguousMatch(NumericalError):
    """Eigenvector overlap matching fell below the tracking threshold."""


class TooShort(TransmonChaosError):
    """Trajectory too short for finite-difference derivatives."""


class DegenerateSegment(NumericalError):
    """Curvature rescaling hit a segment with zero velocity variance."""


class InsufficientTail(TransmonChaosError):
    """Not enough populated histogram bins above the tail-fit cutoff."""


class SingularProjection(NumericalError):
    """Computational-subspace projection of a unitary is (near) singular."""
