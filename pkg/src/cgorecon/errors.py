"""Named failures. Precondition errors are ValueErrors, numerical ones RuntimeErrors."""


class CGOReconError(Exception):
    """Base class for every error raised by the package."""


# --- PRECONDITIONS ---


class OddGridError(CGOReconError, ValueError):
    pass


class FrameError(CGOReconError, ValueError):
    pass


class GridMismatchError(CGOReconError, ValueError):
    pass


class UnknownDescriptorError(CGOReconError, ValueError):
    pass


class RealZError(CGOReconError, ValueError):
    pass


class StepTooLargeError(CGOReconError, ValueError):
    pass


class EmptySweepError(CGOReconError, ValueError):
    pass


class QuadratureOrderError(CGOReconError, ValueError):
    pass


class SubcriticalTError(CGOReconError, ValueError):
    pass


class ShellBoundError(CGOReconError, ValueError):
    pass


class ScheduleOverflowError(CGOReconError, ValueError):
    pass


class RegularizationError(CGOReconError, ValueError):
    pass


class ScenarioError(CGOReconError, ValueError):
    pass


# --- FIELD FILES ---


class BadMagicError(CGOReconError, ValueError):
    pass


class VersionError(CGOReconError, ValueError):
    pass


class TruncatedError(CGOReconError, ValueError):
    pass


# --- NUMERICAL FAILURES ---


class NonConvergenceError(CGOReconError, RuntimeError):
    """Krylov iteration exhausted. Near the exceptional set this is expected."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan"), t: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.t = t


class OverflowGuardError(CGOReconError, RuntimeError):
    pass
