"""Polynomial design matrices, time rescaling, and stable normal-equation solves.

Regression is always expressed against the monomial basis 1, t, ..., t^p of the
time grid. Raw integer grids combined with large degrees produce severely
ill-conditioned Vandermonde matrices, so fitting code normally maps the grid
affinely onto [0, 1] first; the map is kept with the model so that curves can
be evaluated against the original grid afterwards.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegreeTooLargeForGrid, DimensionMismatch, NumericalWarning


@dataclass(frozen=True)
class TimeTransform:
    """Affine map u = (t - offset) * scale applied to time before taking powers."""

    offset: float = 0.0
    scale: float = 1.0

    def apply(self, t):
        return (np.asarray(t, dtype=float) - self.offset) * self.scale

    @property
    def is_identity(self) -> bool:
        return self.offset == 0.0 and self.scale == 1.0

    @classmethod
    def identity(cls) -> "TimeTransform":
        return cls(0.0, 1.0)

    @classmethod
    def to_unit_interval(cls, grid_values) -> "TimeTransform":
        """Map [t_1, t_m] onto [0, 1]."""
        t = np.asarray(grid_values, dtype=float)
        span = float(t[-1] - t[0])
        if span <= 0.0:
            raise DimensionMismatch("grid span must be positive to normalize time")
        return cls(offset=float(t[0]), scale=1.0 / span)


def build_design(grid_values, degree: int) -> np.ndarray:
    """Return the m x (degree+1) matrix whose row j is (1, t_j, ..., t_j^degree).

    Raises:
        DegreeTooLargeForGrid: if degree + 1 exceeds the number of grid points,
            which would make the normal equations rank deficient.
    """
    t = np.asarray(grid_values, dtype=float).ravel()
    if degree < 0:
        raise DimensionMismatch(f"polynomial degree must be >= 0, got {degree}")
    if degree + 1 > t.size:
        raise DegreeTooLargeForGrid(
            f"degree {degree} needs {degree + 1} points but the grid has {t.size}"
        )
    return np.vander(t, N=degree + 1, increasing=True)


def predict_polynomial(design: np.ndarray, coefficients) -> np.ndarray:
    """Evaluate the polynomial encoded by `coefficients` on a design matrix."""
    beta = np.asarray(coefficients, dtype=float).ravel()
    if beta.size != design.shape[1]:
        raise DimensionMismatch(
            f"expected {design.shape[1]} coefficients, got {beta.size}"
        )
    return design @ beta


def solve_normal_equations(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve the symmetric positive (semi)definite system `gram @ x = rhs`.

    Uses a Cholesky factorization; on numerical singularity a ridge jitter of
    1e-10 times the trace scale is added and escalated tenfold until the
    factorization succeeds, with a NumericalWarning so callers can see that
    the solution was regularized.
    """
    gram = np.asarray(gram, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    d = gram.shape[0]
    trace_scale = float(np.trace(gram)) / max(d, 1)
    if not np.isfinite(trace_scale) or trace_scale <= 0.0:
        trace_scale = 1.0
    eye = np.eye(d)
    jitter = 0.0
    for _ in range(20):
        try:
            lower = np.linalg.cholesky(gram + jitter * eye)
        except np.linalg.LinAlgError:
            jitter = 1e-10 * trace_scale if jitter == 0.0 else jitter * 10.0
            continue
        if jitter > 0.0:
            warnings.warn(
                f"normal equations were singular; ridge jitter {jitter:g} applied",
                NumericalWarning,
                stacklevel=2,
            )
        x = np.linalg.solve(lower, rhs)
        return np.linalg.solve(lower.T, x)
    # Pathological input: fall back to a minimum-norm least-squares solution.
    warnings.warn(
        "normal equations remained singular after jitter escalation; "
        "using pseudo-inverse solution",
        NumericalWarning,
        stacklevel=2,
    )
    return np.linalg.lstsq(gram, rhs, rcond=None)[0]


def fit_polynomial_ols(grid_values, targets, degree: int) -> tuple[np.ndarray, float]:
    """Ordinary least-squares polynomial fit; returns (coefficients, mean sq residual)."""
    design = build_design(grid_values, degree)
    y = np.asarray(targets, dtype=float).ravel()
    if y.size != design.shape[0]:
        raise DimensionMismatch(
            f"{design.shape[0]} grid points but {y.size} target values"
        )
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return coef, float(np.mean(resid**2))
