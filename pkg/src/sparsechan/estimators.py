"""Channel estimators behind a uniform interface.

Implements least squares (works in both the overdetermined and the
minimum-norm underdetermined regime), orthogonal matching pursuit, Lasso by
cyclic coordinate descent with complex soft-thresholding, the Dantzig
selector realized as a linear program, its residual-reweighted "sensing"
variant, and the genie-aided oracle (least squares on the true support).

Complex data is handled in a real-composite convention for the Dantzig
selector: each complex coefficient contributes |Re| + |Im| to the L1
objective and the residual-correlation bound is enforced on real and
imaginary parts separately. That keeps the program an exact LP. For a
real-valued training matrix the composite program decouples into two
independent real programs (one for each part of the data), which is how it
is solved. Lasso uses the modulus-based L1 (shrink modulus, keep phase).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .lp import (
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_UNBOUNDED,
    LinearProgram,
    solve_lp,
)
from .model import Observation, ToeplitzTraining
from .numerics import SingularMatrixError, hermitian, least_squares_solve

METHOD_LS = "ls"
METHOD_OMP = "omp"
METHOD_LASSO = "lasso"
METHOD_DS = "ds"
METHOD_SDS = "sds"
METHOD_ORACLE = "oracle"
ALL_METHODS = (METHOD_LS, METHOD_OMP, METHOD_LASSO, METHOD_DS, METHOD_SDS, METHOD_ORACLE)

# Entries count as part of the reported support when their modulus exceeds
# this fraction of the largest one (with an absolute floor under it).
SUPPORT_RELATIVE_THRESHOLD = 1e-4
SUPPORT_ABSOLUTE_FLOOR = 1e-8

LASSO_CONVERGENCE_TOL = 1e-9
LASSO_MAX_SWEEPS = 10_000

RIDGE_REGULARIZATION = 1e-10

# Auto-level calibration for the selector's componentwise program: each of
# the 2L real correlation coordinates carries noise std sigma/sqrt(2), and
# the bound shrinks real and imaginary parts independently, so the level is
# half the modulus-based rule to keep its shrinkage comparable.
COMPOSITE_LAMBDA_CALIBRATION = 0.5


@dataclass(frozen=True)
class EstimatorConfig:
    """Shared estimator settings; "auto" entries resolve deterministically
    from the instance (noise level, training matrix) before any solve."""

    lambda_ds: float | str = "auto"
    lambda_lasso: float | str = "auto"
    omp_max_atoms: int | str = "auto"
    omp_residual_tol: float | str = "auto"
    lp_tolerance: float = 1e-8
    lp_max_iterations: int = 200
    complex_mode: str = "real_composite"

    def __post_init__(self):
        for name in ("lambda_ds", "lambda_lasso"):
            value = getattr(self, name)
            if value != "auto" and (not np.isreal(value) or value < 0):
                raise ValueError(f"{name} must be 'auto' or a non-negative real, got {value!r}")
        if self.omp_max_atoms != "auto" and int(self.omp_max_atoms) < 1:
            raise ValueError("omp_max_atoms must be 'auto' or a positive integer")
        if self.complex_mode != "real_composite":
            raise ValueError(f"unsupported complex_mode {self.complex_mode!r}")


@dataclass(frozen=True)
class Estimate:
    h_hat: np.ndarray
    method: str
    support_hat: tuple[int, ...]
    diagnostics: dict = field(repr=False)


@dataclass(frozen=True)
class SdsWeighting:
    """Residual-correlation weighting used by the reweighted selector."""

    weights: np.ndarray  # diagonal entries of W, non-negative
    R: np.ndarray  # X W^2 X^H, Hermitian PSD
    X_alt: np.ndarray  # column-normalized R^{-1} X
    regularized: bool


def dominant_support(h_hat: np.ndarray) -> tuple[int, ...]:
    """Indices whose modulus clears the relative reporting threshold."""
    mags = np.abs(h_hat)
    peak = float(mags.max()) if mags.size else 0.0
    threshold = max(SUPPORT_RELATIVE_THRESHOLD * peak, SUPPORT_ABSOLUTE_FLOOR)
    return tuple(int(i) for i in np.flatnonzero(mags > threshold))


def resolve_lambda(sigma: float, X: ToeplitzTraining, rule) -> float:
    """Constraint level: sigma * sqrt(2 ln L) * max column norm for "auto",
    otherwise the given non-negative value."""
    if rule == "auto":
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        max_col = float(np.linalg.norm(X.matrix, axis=0).max())
        return sigma * math.sqrt(2.0 * math.log(X.L)) * max_col
    value = float(rule)
    if value < 0:
        raise ValueError(f"fixed lambda must be >= 0, got {value}")
    return value


def ls_estimate(X: ToeplitzTraining, obs: Observation) -> Estimate:
    """Plain least squares; minimum-L2-norm solution when N < L."""
    Xm, y = X.matrix, obs.y
    N, L = Xm.shape
    diagnostics = {"regularized": False}
    if N >= L:
        try:
            h = least_squares_solve(Xm, y)
        except SingularMatrixError:
            gram = hermitian(Xm) @ Xm
            gram[np.diag_indices_from(gram)] += RIDGE_REGULARIZATION
            h = np.linalg.solve(gram, hermitian(Xm) @ y)
            diagnostics["regularized"] = True
    else:
        gram = Xm @ hermitian(Xm)
        try:
            cho = scipy.linalg.cho_factor(gram)
            w = scipy.linalg.cho_solve(cho, y)
        except scipy.linalg.LinAlgError:
            gram[np.diag_indices_from(gram)] += RIDGE_REGULARIZATION
            w = np.linalg.solve(gram, y)
            diagnostics["regularized"] = True
        h = hermitian(Xm) @ w
    return Estimate(h, METHOD_LS, dominant_support(h), diagnostics)


def omp_estimate(X: ToeplitzTraining, obs: Observation, cfg: EstimatorConfig) -> Estimate:
    """Orthogonal matching pursuit: greedy atom selection with a full
    least-squares refit of the selected set each round."""
    Xm, y = X.matrix, obs.y
    N, L = Xm.shape
    limit = min(N, L)
    if cfg.omp_max_atoms == "auto":
        max_atoms = limit
    else:
        max_atoms = int(cfg.omp_max_atoms)
        if max_atoms > limit:
            raise ValueError(f"omp_max_atoms={max_atoms} exceeds min(N, L)={limit}")
    if cfg.omp_residual_tol == "auto":
        residual_tol = math.sqrt(N * obs.noise_variance)
    else:
        residual_tol = float(cfg.omp_residual_tol)

    residual = y.copy()
    selected: list[int] = []
    coeffs = np.zeros(0, dtype=np.complex128)
    degenerate = False
    while len(selected) < max_atoms:
        if np.linalg.norm(residual) <= residual_tol:
            break
        corr = np.abs(hermitian(Xm) @ residual)
        best = int(np.argmax(corr))
        if corr[best] <= 1e-14 * max(1.0, float(np.linalg.norm(residual))):
            break
        if best in selected:
            degenerate = True
            break
        selected.append(best)
        coeffs = least_squares_solve(Xm[:, selected], y)
        residual = y - Xm[:, selected] @ coeffs

    h = np.zeros(L, dtype=np.complex128)
    if selected:
        h[selected] = coeffs
    diagnostics = {
        "atoms": list(selected),
        "residual_norm": float(np.linalg.norm(residual)),
        "residual_tol": residual_tol,
        "degenerate_reselection": degenerate,
    }
    return Estimate(h, METHOD_OMP, dominant_support(h), diagnostics)


def _soft_threshold(rho: complex, lam: float) -> complex:
    mag = abs(rho)
    if mag <= lam:
        return 0.0 + 0.0j
    return (1.0 - lam / mag) * rho


def lasso_estimate(X: ToeplitzTraining, obs: Observation, cfg: EstimatorConfig) -> Estimate:
    """L1-penalized least squares, (1/2)||y - Xh||^2 + lambda * sum |h_i|,
    by cyclic coordinate descent; the threshold shrinks the modulus and
    keeps the phase."""
    Xm, y = X.matrix, obs.y
    L = Xm.shape[1]
    sigma = math.sqrt(obs.noise_variance)
    lam = resolve_lambda(sigma, X, cfg.lambda_lasso)

    col_sq = np.real(np.einsum("ij,ij->j", np.conj(Xm), Xm))
    h = np.zeros(L, dtype=np.complex128)
    residual = y.astype(np.complex128).copy()
    converged = False
    sweeps = 0
    for sweeps in range(1, LASSO_MAX_SWEEPS + 1):
        max_change = 0.0
        for j in range(L):
            if col_sq[j] <= 0.0:
                continue
            rho = np.vdot(Xm[:, j], residual) + col_sq[j] * h[j]
            new = _soft_threshold(rho, lam) / col_sq[j]
            change = new - h[j]
            if change != 0:
                residual -= Xm[:, j] * change
                h[j] = new
                max_change = max(max_change, abs(change))
        if max_change < LASSO_CONVERGENCE_TOL:
            converged = True
            break

    diagnostics = {"lambda": lam, "sweeps": sweeps, "converged": converged,
                   "l1_convention": "complex_modulus"}
    return Estimate(h, METHOD_LASSO, dominant_support(h), diagnostics)


def _min_l1_with_correlation_bound(B: np.ndarray, d: np.ndarray, lam: float,
                                   cfg: EstimatorConfig):
    """Minimize ||g||_1 subject to ||d - B g||_inf <= lam, via the LP over
    the positive/negative parts of g. Returns (g, lp_solution)."""
    n = B.shape[0]
    A_lp = np.block([[B, -B], [-B, B]])
    b_lp = np.concatenate([lam + d, lam - d])
    lp = LinearProgram(c=np.ones(2 * n), A=A_lp, b=b_lp)
    sol = solve_lp(lp, tolerance=cfg.lp_tolerance, max_iterations=cfg.lp_max_iterations)
    if sol.status in (STATUS_INFEASIBLE, STATUS_UNBOUNDED):
        # The constraint set always contains a point with zero correlation
        # residual and the objective is bounded below, so either report
        # indicates a solver malfunction.
        raise RuntimeError(f"selector LP reported {sol.status}; this indicates a solver bug")
    return sol.x[:n] - sol.x[n:], sol


def _stack_real_matrix(M: np.ndarray) -> np.ndarray:
    return np.block([[M.real, -M.imag], [M.imag, M.real]])


def _stack_real_vector(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v.real, v.imag])


def _is_effectively_real(M: np.ndarray) -> bool:
    return not np.iscomplexobj(M) or not M.imag.any()


def _solve_composite_selector(sense_matrix, Xm, y, lam, cfg):
    """Solve the selector program with correlation operator
    sense_matrix^H (y - Xm g) over the real-composite coordinates.

    `sense_matrix` is Xm itself for the plain selector and the reweighted
    matrix for the sensing variant. Real inputs decouple into independent
    programs for the real and imaginary parts of y.
    """
    if _is_effectively_real(sense_matrix) and _is_effectively_real(Xm):
        S = sense_matrix.real if np.iscomplexobj(sense_matrix) else sense_matrix
        A = Xm.real if np.iscomplexobj(Xm) else Xm
        B = S.T @ A
        g_re, sol_re = _min_l1_with_correlation_bound(B, S.T @ y.real, lam, cfg)
        g_im, sol_im = _min_l1_with_correlation_bound(B, S.T @ y.imag, lam, cfg)
        h = g_re + 1j * g_im
        lp_info = {
            "lp_iterations": sol_re.iterations + sol_im.iterations,
            "lp_statuses": [sol_re.status, sol_im.status],
            "decoupled": True,
        }
    else:
        S2 = _stack_real_matrix(np.asarray(sense_matrix, dtype=np.complex128))
        A2 = _stack_real_matrix(np.asarray(Xm, dtype=np.complex128))
        B = S2.T @ A2
        g, sol = _min_l1_with_correlation_bound(B, S2.T @ _stack_real_vector(y), lam, cfg)
        L = Xm.shape[1]
        h = g[:L] + 1j * g[L:]
        lp_info = {
            "lp_iterations": sol.iterations,
            "lp_statuses": [sol.status],
            "decoupled": False,
        }
    lp_info["converged"] = STATUS_ITERATION_LIMIT not in lp_info["lp_statuses"]
    return h, lp_info


def ds_estimate(X: ToeplitzTraining, obs: Observation, cfg: EstimatorConfig) -> Estimate:
    """Dantzig selector: minimize the (real-composite) L1 norm subject to a
    componentwise bound on the residual correlations X^H (y - X h)."""
    sigma = math.sqrt(obs.noise_variance)
    if cfg.lambda_ds == "auto":
        lam = COMPOSITE_LAMBDA_CALIBRATION * resolve_lambda(sigma, X, "auto")
    else:
        lam = resolve_lambda(sigma, X, cfg.lambda_ds)
    h, lp_info = _solve_composite_selector(X.matrix, X.matrix, obs.y, lam, cfg)
    diagnostics = {"lambda": lam, "l1_convention": "real_composite", **lp_info}
    return Estimate(h, METHOD_DS, dominant_support(h), diagnostics)


def sds_weighting(Xm: np.ndarray, weights: np.ndarray) -> SdsWeighting:
    """Build the reweighted sensing matrix from per-column weights.

    R = X W^2 X^H; columns of the reweighted matrix are R^{-1} x_i scaled
    by 1 / (x_i^H R^{-1} x_i). A singular R gets a small diagonal ridge and
    the result is flagged."""
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    R = (Xm * (weights**2)[None, :]) @ hermitian(Xm)
    regularized = False
    try:
        cho = scipy.linalg.cho_factor(R)
        Z = scipy.linalg.cho_solve(cho, Xm)
    except scipy.linalg.LinAlgError:
        R_reg = R.copy()
        R_reg[np.diag_indices_from(R_reg)] += RIDGE_REGULARIZATION
        Z = np.linalg.solve(R_reg, Xm)
        regularized = True
    col_scale = np.real(np.einsum("ij,ij->j", np.conj(Xm), Z))
    X_alt = Z / col_scale[None, :]
    return SdsWeighting(weights=weights, R=R, X_alt=X_alt, regularized=regularized)


def sds_estimate(X: ToeplitzTraining, obs: Observation, cfg: EstimatorConfig) -> Estimate:
    """Reweighted ("sensing") selector: run the plain selector, weight each
    column by the magnitude of its residual correlation, rebuild the sensing
    matrix through R = X W^2 X^H, and re-solve with the new constraint."""
    base = ds_estimate(X, obs, cfg)
    Xm, y = X.matrix, obs.y
    residual = y - Xm @ base.h_hat
    w = np.abs(hermitian(Xm) @ residual)
    if w.max(initial=0.0) <= 1e-12 * max(1.0, float(np.linalg.norm(y))):
        diagnostics = {**base.diagnostics, "degenerate_weighting": True}
        return Estimate(base.h_hat, METHOD_SDS, base.support_hat, diagnostics)

    weighting = sds_weighting(Xm, w)
    lam = base.diagnostics["lambda"]
    h, lp_info = _solve_composite_selector(weighting.X_alt, Xm, y, lam, cfg)
    diagnostics = {
        "lambda": lam,
        "l1_convention": "real_composite",
        "degenerate_weighting": False,
        "weighting_regularized": weighting.regularized,
        "weights": w,
        "normalization": "columnwise x_alt_i = R^-1 x_i / (x_i^H R^-1 x_i)",
        "base_lp_iterations": base.diagnostics["lp_iterations"],
        **lp_info,
    }
    return Estimate(h, METHOD_SDS, dominant_support(h), diagnostics)


def oracle_estimate(X: ToeplitzTraining, obs: Observation, true_support) -> Estimate:
    """Least squares restricted to the true support columns, zero elsewhere."""
    support = sorted(int(i) for i in set(true_support))
    Xm, y = X.matrix, obs.y
    N, L = Xm.shape
    if len(support) > N:
        raise ValueError(f"support size {len(support)} exceeds N={N}")
    if support and (support[0] < 0 or support[-1] >= L):
        raise ValueError("support indices out of range")
    h = np.zeros(L, dtype=np.complex128)
    if support:
        h[support] = least_squares_solve(Xm[:, support], y)
    return Estimate(h, METHOD_ORACLE, dominant_support(h), {"support": support})


def run_estimator(
    method: str,
    X: ToeplitzTraining,
    obs: Observation,
    cfg: EstimatorConfig,
    true_support=None,
    true_sparsity: int | None = None,
) -> Estimate:
    """Dispatch a named estimator on one instance.

    The oracle requires `true_support`. OMP with "auto" atom budget uses the
    true sparsity when the caller supplies it (genie-aided stopping for
    comparison runs), otherwise the residual-tolerance rule.
    """
    if method == METHOD_LS:
        return ls_estimate(X, obs)
    if method == METHOD_OMP:
        if cfg.omp_max_atoms == "auto" and true_sparsity is not None:
            cfg = replace(cfg, omp_max_atoms=true_sparsity)
        return omp_estimate(X, obs, cfg)
    if method == METHOD_LASSO:
        return lasso_estimate(X, obs, cfg)
    if method == METHOD_DS:
        return ds_estimate(X, obs, cfg)
    if method == METHOD_SDS:
        return sds_estimate(X, obs, cfg)
    if method == METHOD_ORACLE:
        if true_support is None:
            raise ValueError("oracle estimator needs the true support")
        return oracle_estimate(X, obs, true_support)
    raise ValueError(f"unknown estimator {method!r}; choose from {ALL_METHODS}")
