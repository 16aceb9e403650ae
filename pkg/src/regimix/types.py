"""Core data model: time grids, datasets, model parameters, and fit reports.

All types are immutable after construction and safe to share between worker
processes. Cluster and regime indices are 1-based everywhere a user sees them
(files, labels, function arguments); internal array axes are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .design import TimeTransform
from .errors import (
    DimensionMismatch,
    LabelOutOfRange,
    NonFiniteValue,
    NonMonotonicGrid,
    RaggedSeries,
)

VARIANCE_MODES = ("free", "common_per_cluster", "common_global")
GATING_MODES = ("per_cluster", "shared")


def _float_array(x, copy=True) -> np.ndarray:
    arr = np.array(x, dtype=float, copy=copy)
    return arr


@dataclass(frozen=True)
class TimeGrid:
    """A shared, strictly increasing grid of m >= 2 time stamps."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _float_array(self.values).ravel())

    @property
    def m(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class TimeSeriesDataset:
    """n series observed on one grid, with optional reference labels.

    `true_labels` (1-based cluster indices) are evaluation metadata only; no
    fitting code reads them.
    """

    grid: TimeGrid
    series: tuple
    true_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(
            self, "series", tuple(_float_array(s).ravel() for s in self.series)
        )
        if self.true_labels is not None:
            labels = np.asarray(self.true_labels, dtype=int).ravel()
            object.__setattr__(self, "true_labels", labels)

    @property
    def n(self) -> int:
        return len(self.series)

    @property
    def m(self) -> int:
        return self.grid.m

    def matrix(self) -> np.ndarray:
        """Stack the series into an (n, m) array; requires equal lengths."""
        return np.vstack(self.series)

    @classmethod
    def from_matrix(cls, grid_values, x, true_labels=None) -> "TimeSeriesDataset":
        x = np.atleast_2d(_float_array(x))
        return cls(TimeGrid(grid_values), tuple(x), true_labels)


def validate_dataset(data: TimeSeriesDataset) -> TimeSeriesDataset:
    """Check dataset invariants, reporting the first violation with its index.

    Raises:
        NonMonotonicGrid: grid not strictly increasing (or fewer than 2 points).
        RaggedSeries: a series length differs from the grid length.
        NonFiniteValue: a NaN/inf in the grid or a series.
        DimensionMismatch: no series, or label count != series count.
        LabelOutOfRange: a reference label < 1.
    """
    t = data.grid.values
    if t.size < 2:
        raise NonMonotonicGrid(f"grid needs at least 2 points, got {t.size}")
    if not np.all(np.isfinite(t)):
        pos = int(np.argmin(np.isfinite(t))) + 1
        raise NonFiniteValue(f"grid value at position {pos} is not finite")
    steps = np.diff(t)
    if np.any(steps <= 0):
        pos = int(np.argmax(steps <= 0)) + 2
        raise NonMonotonicGrid(f"grid is not strictly increasing at position {pos}")
    if data.n < 1:
        raise DimensionMismatch("dataset must contain at least one series")
    m = t.size
    for i, s in enumerate(data.series):
        if s.size != m:
            raise RaggedSeries(f"series {i + 1} has length {s.size}, expected {m}")
        if not np.all(np.isfinite(s)):
            pos = int(np.argmin(np.isfinite(s))) + 1
            raise NonFiniteValue(f"series {i + 1} has a non-finite value at position {pos}")
    if data.true_labels is not None:
        if data.true_labels.size != data.n:
            raise DimensionMismatch(
                f"{data.true_labels.size} labels for {data.n} series"
            )
        if np.any(data.true_labels < 1):
            bad = int(np.argmax(data.true_labels < 1)) + 1
            raise LabelOutOfRange(f"label of series {bad} is < 1")
    return data


@dataclass(frozen=True)
class ModelStructure:
    """Structural choices: K clusters, L regimes, degree p, and constraint modes."""

    n_clusters: int
    n_regimes: int
    degree: int
    variance_mode: str = "free"
    gating_mode: str = "per_cluster"

    def __post_init__(self):
        if self.n_clusters < 1:
            raise DimensionMismatch(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.n_regimes < 1:
            raise DimensionMismatch(f"n_regimes must be >= 1, got {self.n_regimes}")
        if self.degree < 0:
            raise DimensionMismatch(f"degree must be >= 0, got {self.degree}")
        if self.variance_mode not in VARIANCE_MODES:
            raise DimensionMismatch(
                f"variance_mode must be one of {VARIANCE_MODES}, got {self.variance_mode!r}"
            )
        if self.gating_mode not in GATING_MODES:
            raise DimensionMismatch(
                f"gating_mode must be one of {GATING_MODES}, got {self.gating_mode!r}"
            )


def _check_proportions(proportions: np.ndarray) -> None:
    if np.any(proportions <= 0.0) or np.any(proportions > 1.0):
        raise DimensionMismatch("mixing proportions must lie in (0, 1]")
    if abs(float(proportions.sum()) - 1.0) > 1e-8:
        raise DimensionMismatch(
            f"mixing proportions must sum to 1, got {proportions.sum()!r}"
        )


@dataclass(frozen=True)
class RegimeMixtureModel:
    """Mixture of regime-switching polynomial regressions.

    Per cluster k: time-indexed softmax gates with per-regime (intercept, slope)
    rows `gating[k]` (the last regime is pinned to (0, 0) for identifiability),
    per-regime polynomial coefficients `coefficients[k]`, and per-regime noise
    variances `variances[k]`. Constrained variance/gating modes still store the
    expanded arrays; the tied entries are identical.
    """

    structure: ModelStructure
    proportions: np.ndarray  # (K,)
    gating: np.ndarray  # (K, L, 2)
    coefficients: np.ndarray  # (K, L, p+1)
    variances: np.ndarray  # (K, L)
    time_transform: TimeTransform = field(default_factory=TimeTransform.identity)

    def __post_init__(self):
        K, L, p = self.structure.n_clusters, self.structure.n_regimes, self.structure.degree
        object.__setattr__(self, "proportions", _float_array(self.proportions).ravel())
        object.__setattr__(self, "gating", _float_array(self.gating).reshape(K, L, 2))
        object.__setattr__(
            self, "coefficients", _float_array(self.coefficients).reshape(K, L, p + 1)
        )
        object.__setattr__(self, "variances", _float_array(self.variances).reshape(K, L))
        if self.proportions.size != K:
            raise DimensionMismatch(
                f"expected {K} proportions, got {self.proportions.size}"
            )
        _check_proportions(self.proportions)
        for name in ("gating", "coefficients", "variances"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise NonFiniteValue(f"model field {name!r} has non-finite entries")
        if np.any(self.variances <= 0.0):
            raise DimensionMismatch("all variances must be positive")
        if np.any(self.gating[:, L - 1, :] != 0.0):
            raise DimensionMismatch(
                "the reference regime's gating parameters must be pinned to (0, 0)"
            )
        if self.structure.gating_mode == "shared" and K > 1:
            if np.any(self.gating != self.gating[:1]):
                raise DimensionMismatch(
                    "shared gating mode requires identical gating across clusters"
                )
        if self.structure.variance_mode == "common_per_cluster":
            if np.any(self.variances != self.variances[:, :1]):
                raise DimensionMismatch(
                    "common_per_cluster mode requires equal variances within a cluster"
                )
        elif self.structure.variance_mode == "common_global":
            if np.any(self.variances != self.variances.flat[0]):
                raise DimensionMismatch(
                    "common_global mode requires one shared variance"
                )

    def free_parameters(self) -> int:
        """Count optimized scalars literally from the stored arrays and modes."""
        K, L = self.structure.n_clusters, self.structure.n_regimes
        count = self.proportions.size - 1
        free_gate_rows = self.gating[:, : L - 1, :]
        if self.structure.gating_mode == "shared":
            count += free_gate_rows[0].size
        else:
            count += free_gate_rows.size
        count += self.coefficients.size
        if self.structure.variance_mode == "free":
            count += self.variances.size
        elif self.structure.variance_mode == "common_per_cluster":
            count += K
        else:
            count += 1
        return count


@dataclass(frozen=True)
class RegressionMixtureModel:
    """Baseline mixture of single-polynomial regressions with isotropic noise."""

    proportions: np.ndarray  # (K,)
    coefficients: np.ndarray  # (K, p+1)
    variances: np.ndarray  # (K,)
    time_transform: TimeTransform = field(default_factory=TimeTransform.identity)

    def __post_init__(self):
        object.__setattr__(self, "proportions", _float_array(self.proportions).ravel())
        object.__setattr__(
            self, "coefficients", np.atleast_2d(_float_array(self.coefficients))
        )
        object.__setattr__(self, "variances", _float_array(self.variances).ravel())
        K = self.proportions.size
        if self.coefficients.shape[0] != K or self.variances.size != K:
            raise DimensionMismatch(
                "proportions, coefficients and variances disagree on the cluster count"
            )
        _check_proportions(self.proportions)
        if not (
            np.all(np.isfinite(self.coefficients)) and np.all(np.isfinite(self.variances))
        ):
            raise NonFiniteValue("model parameters must be finite")
        if np.any(self.variances <= 0.0):
            raise DimensionMismatch("all variances must be positive")

    @property
    def n_clusters(self) -> int:
        return self.proportions.size

    @property
    def degree(self) -> int:
        return self.coefficients.shape[1] - 1

    def free_parameters(self) -> int:
        return (self.proportions.size - 1) + self.coefficients.size + self.variances.size


@dataclass(frozen=True)
class EmFitReport:
    """Diagnostics from one EM fit (best restart of possibly many).

    `loglik_trace` is non-decreasing up to floating error. Rows of
    `posteriors_r` sum to 1; for the regime mixture, `posteriors_lambda`
    has shape (n, m, K, L), sums to 1 over (K, L) per point, and satisfies
    sum_over_regimes(lambda[i, j, k, :]) == posteriors_r[i, k].
    """

    final_log_likelihood: float
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    posteriors_r: np.ndarray
    posteriors_lambda: Optional[np.ndarray]
    restart_index: int
    restart_seeds: tuple
    restart_logliks: tuple
    failed_restarts: tuple
