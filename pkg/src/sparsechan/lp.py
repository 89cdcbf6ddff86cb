"""Self-contained dense linear-program solver.

Solves   minimize c.x   subject to   A x <= b,  x >= 0

with a primal-dual path-following interior-point method (Mehrotra
predictor-corrector) on the homogeneous self-dual embedding. The embedding
gives clean certificates when the problem is infeasible or unbounded
instead of relying on divergence heuristics. Inequalities are converted
internally to equality form with slack variables; the normal equations get
a small diagonal regularization so redundant or degenerate constraints do
not need presolving.

No external optimization library is used; linear algebra is numpy/scipy
factorizations only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 200

# Added to the diagonal of the normal equations each iteration; large enough
# to survive duplicated/degenerate rows, small enough not to perturb optima
# at the 1e-8 tolerance scale.
NORMAL_EQ_REGULARIZATION = 1e-10

# Fraction of the distance to the positivity boundary taken per step.
STEP_SCALE = 0.99995

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class LinearProgram:
    """Standard-form LP: minimize c.x subject to A x <= b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=np.float64))
        A = np.asarray(self.A, dtype=np.float64)
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        if A.size == 0:
            A = A.reshape(len(b), len(c))
        if A.ndim != 2:
            raise ValueError(f"constraint matrix must be 2-d, got shape {A.shape}")
        if c.ndim != 1 or c.size == 0:
            raise ValueError("objective must be a non-empty 1-d vector")
        if A.shape != (b.shape[0], c.shape[0]):
            raise ValueError(
                f"shape mismatch: A is {A.shape}, expected ({b.shape[0]}, {c.shape[0]})"
            )
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or Inf entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def num_variables(self) -> int:
        return self.c.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class KktReport:
    """Scaled residuals of the returned point.

    For an optimal solution all three are at most the solver tolerance.
    For an infeasible or unbounded status they hold the certificate
    residuals of the homogeneous iterate instead: `primal_infeasibility`
    is the unbounded-ray residual ||A x - b tau|| and `dual_infeasibility`
    the Farkas residual ||c tau - A'y - z||, both scaled;
    `complementarity_gap` is the final barrier parameter.
    """

    primal_infeasibility: float
    dual_infeasibility: float
    complementarity_gap: float

    def max_residual(self) -> float:
        return max(self.primal_infeasibility, self.dual_infeasibility, self.complementarity_gap)


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray
    objective_value: float
    status: str
    kkt_report: KktReport
    iterations: int
    # Inequality multipliers (>= 0, one per row of A); meaningful when optimal.
    dual_values: np.ndarray | None = None


def solve_lp(
    lp: LinearProgram,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> LpSolution:
    """Solve an inequality-form LP to the requested tolerance.

    `status == "optimal"` guarantees primal feasibility (A x <= b and
    x >= 0 up to tolerance), dual feasibility, and a relative duality gap
    at most `tolerance`. `iteration_limit` is a non-error outcome: the last
    iterate is returned and the caller decides what to do with it.
    """
    if not (0.0 < tolerance <= 1e-4):
        raise ValueError(f"tolerance must be in (0, 1e-4], got {tolerance}")
    if max_iterations < 1:
        raise ValueError(f"max_iterations must be >= 1, got {max_iterations}")

    n = lp.num_variables
    m = lp.num_constraints
    if m == 0:
        return _solve_unconstrained(lp)

    # Equality form: [A I] [x; s] = b with x, s >= 0.
    A = np.hstack([lp.A, np.eye(m)])
    b = lp.b
    c = np.concatenate([lp.c, np.zeros(m)])
    nt = n + m

    x = np.ones(nt)
    y = np.zeros(m)
    z = np.ones(nt)
    tau = 1.0
    kappa = 1.0

    norm_rp0 = max(1.0, np.linalg.norm(b * tau - A @ x))
    norm_rd0 = max(1.0, np.linalg.norm(c * tau - A.T @ y - z))
    norm_rg0 = max(1.0, abs(c @ x - b @ y + kappa))
    mu0 = (x @ z + tau * kappa) / (nt + 1)

    status = STATUS_ITERATION_LIMIT
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        r_p = b * tau - A @ x
        r_d = c * tau - A.T @ y - z
        r_g = c @ x - b @ y + kappa
        mu = (x @ z + tau * kappa) / (nt + 1)

        d_x, d_y, d_z, d_tau, d_kappa = _search_direction(
            A, b, c, x, y, z, tau, kappa, r_p, r_d, r_g, mu
        )
        alpha = _step_to_boundary(x, d_x, z, d_z, tau, d_tau, kappa, d_kappa, STEP_SCALE)
        x = x + alpha * d_x
        y = y + alpha * d_y
        z = z + alpha * d_z
        tau = tau + alpha * d_tau
        kappa = kappa + alpha * d_kappa

        if not (
            np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.isfinite(tau) and tau > 0
        ):
            break

        r_p = b * tau - A @ x
        r_d = c * tau - A.T @ y - z
        r_g = c @ x - b @ y + kappa
        mu = (x @ z + tau * kappa) / (nt + 1)
        rho_p = np.linalg.norm(r_p) / norm_rp0
        rho_d = np.linalg.norm(r_d) / norm_rd0
        rho_g = abs(r_g) / norm_rg0
        rho_mu = mu / mu0

        report = _scaled_residuals(lp, x, y, z, tau)
        if report.max_residual() <= tolerance:
            status = STATUS_OPTIMAL
            break

        small_homogeneous = rho_p < tolerance and rho_d < tolerance and rho_g < tolerance
        tau_collapsed = tau < tolerance * max(1.0, kappa)
        tau_collapsed_strict = rho_mu < tolerance and tau < tolerance * min(1.0, kappa)
        if (small_homogeneous and tau_collapsed) or tau_collapsed_strict:
            status = STATUS_INFEASIBLE if b @ y > tolerance else STATUS_UNBOUNDED
            break

    if status in (STATUS_OPTIMAL, STATUS_ITERATION_LIMIT):
        tau_safe = max(tau, np.finfo(float).tiny)
        x_out = x[:n] / tau_safe
        duals = np.maximum(-y / tau_safe, 0.0)
        report = _scaled_residuals(lp, x, y, z, tau_safe)
    else:
        # Certificate residuals of the homogeneous iterate.
        x_out = np.full(n, np.nan)
        duals = None
        report = KktReport(
            primal_infeasibility=float(
                np.linalg.norm(A @ x - b * tau, np.inf) / (1.0 + np.linalg.norm(b, np.inf))
            ),
            dual_infeasibility=float(
                np.linalg.norm(c * tau - A.T @ y - z, np.inf)
                / (1.0 + np.linalg.norm(lp.c, np.inf))
            ),
            complementarity_gap=float(mu),
        )

    objective = float(lp.c @ x_out) if np.all(np.isfinite(x_out)) else np.nan
    return LpSolution(
        x=x_out,
        objective_value=objective,
        status=status,
        kkt_report=report,
        iterations=iterations,
        dual_values=duals,
    )


def _solve_unconstrained(lp: LinearProgram) -> LpSolution:
    # No rows: minimize c.x over x >= 0 directly.
    if np.all(lp.c >= 0.0):
        x = np.zeros(lp.num_variables)
        report = KktReport(0.0, 0.0, 0.0)
        return LpSolution(x, 0.0, STATUS_OPTIMAL, report, 0, np.zeros(0))
    report = KktReport(0.0, float(-lp.c.min()), 0.0)
    return LpSolution(np.full(lp.num_variables, np.nan), np.nan, STATUS_UNBOUNDED, report, 0)


def _scaled_residuals(lp: LinearProgram, x, y, z, tau) -> KktReport:
    """KKT residuals of the de-homogenized point for the inequality form."""
    n = lp.num_variables
    x_hat = x[:n] / tau
    y_hat = y / tau  # equality-form duals; y_hat <= 0 at feasibility
    z_hat = z / tau

    primal = lp.A @ x_hat - lp.b
    primal_inf = max(
        float(np.max(primal, initial=0.0)), float(np.max(-x_hat, initial=0.0))
    ) / (1.0 + np.linalg.norm(lp.b, np.inf))

    # Stationarity of the full equality form covers both reduced costs and
    # the sign condition on the inequality multipliers.
    A_eq_t_y = np.concatenate([lp.A.T @ y_hat, y_hat])
    c_eq = np.concatenate([lp.c, np.zeros(lp.num_constraints)])
    dual_inf = float(np.linalg.norm(c_eq - A_eq_t_y - z_hat, np.inf)) / (
        1.0 + np.linalg.norm(lp.c, np.inf)
    )

    obj = lp.c @ x_hat
    gap = abs(obj - lp.b @ y_hat) / (1.0 + abs(obj))
    return KktReport(
        primal_infeasibility=float(primal_inf),
        dual_infeasibility=float(dual_inf),
        complementarity_gap=float(gap),
    )


def _search_direction(A, b, c, x, y, z, tau, kappa, r_p, r_d, r_g, mu):
    """Mehrotra predictor-corrector direction for the homogeneous system."""
    nt = x.shape[0]
    d_inv = x / z
    M = (A * d_inv) @ A.T
    M[np.diag_indices_from(M)] += NORMAL_EQ_REGULARIZATION
    try:
        cho = scipy.linalg.cho_factor(M, check_finite=False)

        def solve(r):
            return scipy.linalg.cho_solve(cho, r, check_finite=False)

    except scipy.linalg.LinAlgError:

        def solve(r):
            return np.linalg.lstsq(M, r, rcond=None)[0]

    def sym_solve(r1, r2):
        v = solve(r2 + A @ (d_inv * r1))
        u = d_inv * (A.T @ v - r1)
        return u, v

    p, q = sym_solve(c, b)
    denom_tau = kappa / tau + (-c @ p + b @ q)

    gamma = 0.0
    d_x = d_z = np.zeros(nt)
    d_tau = d_kappa = 0.0
    for stage in range(2):
        eta = 1.0 - gamma
        rhat_p = eta * r_p
        rhat_d = eta * r_d
        rhat_g = eta * r_g
        rhat_xz = gamma * mu - x * z
        rhat_tk = gamma * mu - tau * kappa
        if stage == 1:
            rhat_xz = rhat_xz - d_x * d_z
            rhat_tk = rhat_tk - d_tau * d_kappa

        u, v = sym_solve(rhat_d - rhat_xz / x, rhat_p)
        d_tau = (rhat_g + rhat_tk / tau - (-c @ u + b @ v)) / denom_tau
        d_x = u + p * d_tau
        d_y = v + q * d_tau
        d_z = (rhat_xz - z * d_x) / x
        d_kappa = (rhat_tk - kappa * d_tau) / tau

        if stage == 0:
            alpha = _step_to_boundary(x, d_x, z, d_z, tau, d_tau, kappa, d_kappa, 1.0)
            gamma = (1.0 - alpha) ** 2 * min(0.1, 1.0 - alpha)

    return d_x, d_y, d_z, d_tau, d_kappa


def _step_to_boundary(x, d_x, z, d_z, tau, d_tau, kappa, d_kappa, scale):
    """Largest step in [0, 1] keeping (x, z, tau, kappa) positive."""
    alpha = 1.0
    neg = d_x < 0
    if np.any(neg):
        alpha = min(alpha, scale * float(np.min(x[neg] / -d_x[neg])))
    neg = d_z < 0
    if np.any(neg):
        alpha = min(alpha, scale * float(np.min(z[neg] / -d_z[neg])))
    if d_tau < 0:
        alpha = min(alpha, scale * tau / -d_tau)
    if d_kappa < 0:
        alpha = min(alpha, scale * kappa / -d_kappa)
    return alpha
