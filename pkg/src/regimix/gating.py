"""Time-indexed softmax gates and the weighted multinomial-logistic solver.

Each cluster's regime proportions at time t are a softmax over L affine scores
(intercept + slope * t). The last regime's score is pinned to zero so the
parameterization is identifiable; only the remaining L-1 (intercept, slope)
pairs are optimized. The solver is a safeguarded Newton ascent (iteratively
reweighted least squares) on the posterior-weighted log-gate objective

    Q(alpha) = sum_j sum_l w[j, l] * log gate_l(t_j; alpha),

the quantity each M-step must increase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteObjective, NonFiniteValue


@dataclass(frozen=True)
class IrlsProblem:
    """One weighted logistic-regression problem on a shared time grid.

    `weights` may be given per series as (n, m, L) or already collapsed to
    (m, L); the objective only depends on the per-point totals, so the n axis
    is summed away on construction.
    """

    grid_values: np.ndarray
    weights: np.ndarray
    max_iters: int = 100
    tol: float = 1e-6
    param_cap: float = 1e6

    def __post_init__(self):
        t = np.asarray(self.grid_values, dtype=float).ravel()
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 3:
            w = w.sum(axis=0)
        if w.ndim != 2:
            raise DimensionMismatch(
                f"weights must have shape (m, L) or (n, m, L), got {w.shape}"
            )
        if w.shape[0] != t.size:
            raise DimensionMismatch(
                f"weights have {w.shape[0]} rows but the grid has {t.size} points"
            )
        if not np.all(np.isfinite(w)):
            raise NonFiniteValue("IRLS weights must be finite")
        if np.any(w < 0):
            raise DimensionMismatch("IRLS weights must be nonnegative")
        object.__setattr__(self, "grid_values", t)
        object.__setattr__(self, "weights", w)

    @property
    def n_regimes(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class IrlsReport:
    iterations: int
    objective: float
    gradient_max: float
    converged: bool
    damped: bool = False  # Hessian was numerically singular; damping engaged
    capped: bool = False  # parameters hit the divergence cap (hard transition)


def _check_alpha(alpha, n_regimes=None) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if a.ndim != 2 or a.shape[1] != 2:
        raise DimensionMismatch(f"gating parameters must have shape (L, 2), got {a.shape}")
    if n_regimes is not None and a.shape[0] != n_regimes:
        raise DimensionMismatch(
            f"expected {n_regimes} gating rows, got {a.shape[0]}"
        )
    return a


def log_gate_probabilities(alpha, t_values) -> np.ndarray:
    """Log softmax gate probabilities, shape (m, L); stable for huge scores."""
    a = _check_alpha(alpha)
    t = np.asarray(t_values, dtype=float).ravel()
    scores = a[:, 0][None, :] + np.outer(t, a[:, 1])  # (m, L)
    scores -= scores.max(axis=1, keepdims=True)
    return scores - np.log(np.exp(scores).sum(axis=1, keepdims=True))


def logistic_proportions(alpha, t):
    """Gate probabilities at time(s) t: (L,) for a scalar t, else (m, L).

    Components are positive and sum to 1; overflow of the exponentials is
    avoided by max-subtraction.
    """
    scalar = np.isscalar(t) or np.ndim(t) == 0
    probs = np.exp(log_gate_probabilities(alpha, np.atleast_1d(t)))
    return probs[0] if scalar else probs


def gating_objective(alpha, problem: IrlsProblem) -> float:
    """Weighted log-gate objective; finite whenever the parameters are."""
    a = _check_alpha(alpha, problem.n_regimes)
    logp = log_gate_probabilities(a, problem.grid_values)
    value = float((problem.weights * logp).sum())
    if not np.isfinite(value):
        raise NonFiniteObjective(f"gating objective is {value!r}")
    return value


def gating_gradient(alpha, problem: IrlsProblem) -> np.ndarray:
    """Gradient of the objective w.r.t. the L-1 free (intercept, slope) rows."""
    a = _check_alpha(alpha, problem.n_regimes)
    L = problem.n_regimes
    probs = np.exp(log_gate_probabilities(a, problem.grid_values))  # (m, L)
    totals = problem.weights.sum(axis=1)  # (m,)
    resid = problem.weights[:, : L - 1] - totals[:, None] * probs[:, : L - 1]
    basis = np.column_stack([np.ones_like(problem.grid_values), problem.grid_values])
    return resid.T @ basis  # (L-1, 2)


def _hessian(probs, totals, basis, L):
    """Negative-semidefinite Hessian over the free block, shape (d, d)."""
    P = probs[:, : L - 1]  # (m, L-1)
    SP = totals[:, None] * P
    # diagonal blocks: -sum_j s_j P_jl X_j X_j^T ; cross blocks add s_j P_jl P_jh
    diag = -np.einsum("ml,ma,mb->lab", SP, basis, basis)
    cross = np.einsum("ml,mh,m,ma,mb->lhab", P, P, totals, basis, basis)
    H = cross.transpose(0, 2, 1, 3).copy()  # (l, a, h, b)
    for l in range(L - 1):
        H[l, :, l, :] += diag[l]
    d = 2 * (L - 1)
    return H.reshape(d, d)


def irls_fit(problem: IrlsProblem, init_alpha) -> tuple[np.ndarray, IrlsReport]:
    """Maximize the weighted log-gate objective by safeguarded Newton ascent.

    Starts from `init_alpha` (shape (L, 2), last row pinned at zero) and
    guarantees the returned objective is no worse than the initial one. The
    Newton step falls back to Levenberg damping when the Hessian is
    numerically singular and to step halving (up to 30 times) when a full
    step would decrease the objective. Optimized entries are clamped at
    `problem.param_cap` in absolute value; hitting the cap means the weights
    are separable and the transition is effectively a step function.

    Returns:
        (alpha, report) with alpha of shape (L, 2), last row zero.
    """
    a0 = _check_alpha(init_alpha, problem.n_regimes)
    L = problem.n_regimes
    if np.any(a0[L - 1] != 0.0):
        raise DimensionMismatch("the reference regime's gating row must be (0, 0)")
    t = problem.grid_values
    basis = np.column_stack([np.ones_like(t), t])
    w = problem.weights
    totals = w.sum(axis=1)

    theta = a0[: L - 1].copy()  # free block (L-1, 2)
    if L == 1 or totals.sum() == 0.0:
        obj = gating_objective(a0, problem)
        return a0.copy(), IrlsReport(0, obj, 0.0, True)

    def full_alpha(th):
        return np.vstack([th, np.zeros((1, 2))])

    def objective(th):
        logp = log_gate_probabilities(full_alpha(th), t)
        return float((w * logp).sum())

    obj = objective(theta)
    if not np.isfinite(obj):
        raise NonFiniteObjective("gating objective is not finite at the initial point")

    damped_any = False
    capped = False
    converged = False
    grad_max = np.inf
    iterations = 0
    for iterations in range(1, problem.max_iters + 1):
        logp = log_gate_probabilities(full_alpha(theta), t)
        probs = np.exp(logp)
        resid = w[:, : L - 1] - totals[:, None] * probs[:, : L - 1]
        grad = (resid.T @ basis).ravel()
        grad_max = float(np.max(np.abs(grad))) if grad.size else 0.0
        if grad_max < problem.tol:
            converged = True
            iterations -= 1
            break

        H = _hessian(probs, totals, basis, L)
        tau = 0.0
        step = None
        for _ in range(12):
            try:
                step = np.linalg.solve(H - tau * np.eye(H.shape[0]), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                break
            damped_any = True
            scale = abs(float(np.trace(H))) / H.shape[0]
            tau = 1e-6 * scale if tau == 0.0 else tau * 10.0
            if tau == 0.0:
                tau = 1e-6
        if step is None or not np.all(np.isfinite(step)):
            break

        # Step halving keeps the ascent monotone even far from the optimum.
        eta = 1.0
        accepted = False
        improved = False
        for _ in range(31):
            cand = theta + eta * step.reshape(L - 1, 2)
            cand_obj = objective(cand)
            if np.isfinite(cand_obj) and cand_obj >= obj - 1e-9:
                accepted = True
                improved = cand_obj > obj
                theta, obj = cand, cand_obj
                break
            eta *= 0.5
        if not accepted or not improved:
            break  # objective is flat to within tolerance; stay here

        if np.any(np.abs(theta) > problem.param_cap):
            theta = np.clip(theta, -problem.param_cap, problem.param_cap)
            obj = objective(theta)
            capped = True
            break

    alpha = full_alpha(theta)
    return alpha, IrlsReport(
        iterations=iterations,
        objective=obj,
        gradient_max=grad_max,
        converged=converged,
        damped=damped_any,
        capped=capped,
    )
