"""Exception hierarchy and warning categories used across the package."""


class RegimixError(Exception):
    """Base class for all errors raised by this package."""


class DataError(RegimixError):
    """A dataset, label file, or configuration violates its contract."""


class NumericalError(RegimixError):
    """A fitting procedure failed in a way that restarts cannot hide."""


class NonMonotonicGrid(DataError):
    """Time grid is not strictly increasing."""


class RaggedSeries(DataError):
    """A series length does not match the time grid length."""


class NonFiniteValue(DataError):
    """A NaN or infinity appeared where a finite value is required."""


class LabelOutOfRange(DataError):
    """A cluster label lies outside 1..K."""


class DimensionMismatch(DataError):
    """Array shapes are inconsistent with each other."""


class MissingLabels(DataError):
    """An evaluation was requested but the dataset carries no reference labels."""


class InvalidSpec(DataError):
    """A generative specification or run configuration is malformed."""


class DegreeTooLargeForGrid(DataError):
    """Polynomial degree requires more grid points than are available."""


class InsufficientSegmentLength(DataError):
    """Initialization segments are too short for the requested degree."""


class EmptyComponent(NumericalError):
    """A mixture component lost essentially all posterior mass."""


class AllRestartsFailed(NumericalError):
    """Every random restart of an EM run failed."""


class NonFiniteObjective(NumericalError):
    """An optimizer objective became NaN or infinite."""


class ContiguityViolation(NumericalError):
    """A regime's winning time set is not a contiguous index run."""


class NoFeasibleCell(NumericalError):
    """No cell of a model-selection grid satisfies the fit preconditions."""


class NumericalWarning(UserWarning):
    """A numerical safeguard (ridge jitter, damping) was engaged."""


class DegenerateVarianceWarning(UserWarning):
    """A variance hit the degeneracy floor and was clamped."""
