"""Surrogate losses and Euclidean-norm-ball-constrained empirical minimizers.

Two solvers are provided for the constrained problem min R_hat(beta) subject
to ||beta||_2 <= r:

* :func:`fit_constrained_least_squares` — exact, via the stationarity
  relation (Sigma_hat + lambda I) beta = X^T y / n and a bisection on the
  Lagrange multiplier lambda (the constrained norm is strictly decreasing
  in lambda).
* :func:`fit_projected_gradient` — projected gradient descent with step
  1/L, for any supported convex loss.

Models are through the origin; no intercept is fitted.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDesign, NoConvergence
from .validation import as_samples, as_vector

LOSS_KINDS = ("square", "logistic")

# Curvature constants c_phi with Hessian(R_hat) <= c_phi * Sigma_hat.
LOSS_CURVATURE = {"square": 2.0, "logistic": 0.25}

# Eigenvalues below this times sigma_max are treated as zero in pseudoinverses.
RANK_RTOL = 1e-12


def _check_loss(loss):
    if loss not in LOSS_KINDS:
        raise ValueError(f"unknown loss {loss!r}")


def loss_values(loss, y, f):
    """Pointwise phi(y_i, f_i) for labels y in {-1, +1}."""
    _check_loss(loss)
    y = np.asarray(y, dtype=float)
    f = np.asarray(f, dtype=float)
    if loss == "square":
        return (y - f) ** 2
    return np.logaddexp(0.0, -y * f)


def empirical_phi_risk(beta, x, y, loss):
    """(1/n) sum phi(y_i, <beta, x_i>)."""
    x = as_samples(x)
    beta = as_vector(beta, "beta")
    return float(np.mean(loss_values(loss, y, x @ beta)))


def empirical_risk_gradient(beta, x, y, loss):
    """Gradient of the empirical phi-risk at beta."""
    _check_loss(loss)
    x = as_samples(x)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    f = x @ beta
    if loss == "square":
        return (2.0 / n) * (x.T @ (f - y))
    # d/df log(1 + exp(-y f)) = -y * sigmoid(-y f)
    s = 0.5 * (1.0 + np.tanh(-0.5 * y * f))
    return (1.0 / n) * (x.T @ (-y * s))


@dataclass
class FitResult:
    """Constrained minimizer with multiplier and convergence diagnostics."""

    beta_tilde: np.ndarray
    lagrange_multiplier: float | None
    active: bool
    iterations: int
    final_gradient_norm: float
    objective_value: float
    converged: bool = True
    objective_trace: list | None = field(default=None, repr=False)


def _eig_design(x, y):
    x = as_samples(x)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ValueError("X and y have different lengths")
    n = x.shape[0]
    sigma = x.T @ x / n
    b = x.T @ y / n
    w, q = np.linalg.eigh(sigma)
    s_max = float(w[-1])
    if s_max <= 0.0:
        raise DegenerateDesign("empirical covariance is zero")
    return x, y, sigma, b, w, q, s_max


def _norm_at(lam, w, c):
    return float(np.sqrt(np.sum((c / (w + lam)) ** 2)))


def fit_constrained_least_squares(x, y, radius=np.inf):
    """Exact minimizer of mean squared error over the ball ||beta|| <= radius.

    The unconstrained solution is the minimum-norm least-squares solution
    (pseudoinverse); when it exceeds the radius, the multiplier solving
    ||(Sigma_hat + lambda I)^{-1} X^T y / n|| = radius is found by bisection.
    """
    if not (radius > 0):
        raise ValueError("radius must be positive")
    x, y, sigma, b, w, q, s_max = _eig_design(x, y)
    c = q.T @ b
    keep = w > RANK_RTOL * s_max
    beta_unc = q @ np.where(keep, c / np.where(keep, w, 1.0), 0.0)
    norm_unc = float(np.linalg.norm(beta_unc))

    def result(beta, lam, active, iters):
        grad = 2.0 * (sigma @ beta - b)
        return FitResult(beta_tilde=beta, lagrange_multiplier=lam, active=active,
                         iterations=iters, final_gradient_norm=float(np.linalg.norm(grad)),
                         objective_value=empirical_phi_risk(beta, x, y, "square"))

    if not np.isfinite(radius) or norm_unc <= radius * (1.0 + 1e-12):
        return result(beta_unc, 0.0, False, 0)

    lo, hi = 0.0, s_max
    for _ in range(200):
        if _norm_at(hi, w, c) < radius:
            break
        hi *= 2.0
    else:
        raise NoConvergence("failed to bracket the Lagrange multiplier")
    iters = 0
    while True:
        mid = 0.5 * (lo + hi)
        nm = _norm_at(mid, w, c)
        if nm > radius:
            lo = mid
        else:
            hi = mid
        iters += 1
        tight_norm = abs(nm - radius) <= 1e-10 * radius
        if ((hi - lo) < 1e-12 * (1.0 + mid) and tight_norm) or iters >= 500:
            break
    lam = mid
    beta = q @ (c / (w + lam))
    # Rescale onto the sphere to absorb the last bisection residual.
    beta *= radius / float(np.linalg.norm(beta))
    return result(beta, lam, True, iters)


def project_onto_ball(beta, radius):
    norm = float(np.linalg.norm(beta))
    if norm > radius:
        return beta * (radius / norm)
    return beta


def fit_projected_gradient(x, y, loss, radius=np.inf, max_iters=20000, tol=1e-9,
                           record_objective=False):
    """Projected gradient descent from beta_0 = 0 with step 1/L.

    L = sigma_max(Sigma_hat) * c_phi.  Stops when the iterate moves by less
    than tol * max(1, ||beta||).  A run that exhausts max_iters is returned
    with converged=False rather than raising.
    """
    _check_loss(loss)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not (radius > 0):
        raise ValueError("radius must be positive")
    x, y, sigma, b, w, q, s_max = _eig_design(x, y)
    step = 1.0 / (s_max * LOSS_CURVATURE[loss])
    beta = np.zeros(x.shape[1])
    trace = [empirical_phi_risk(beta, x, y, loss)] if record_objective else None
    converged = False
    iterations = 0
    for k in range(max_iters):
        grad = empirical_risk_gradient(beta, x, y, loss)
        beta_next = project_onto_ball(beta - step * grad, radius)
        if record_objective:
            trace.append(empirical_phi_risk(beta_next, x, y, loss))
        iterations = k + 1
        moved = float(np.linalg.norm(beta_next - beta))
        beta = beta_next
        if moved <= tol * max(1.0, float(np.linalg.norm(beta))):
            converged = True
            break
    grad = empirical_risk_gradient(beta, x, y, loss)
    norm_beta = float(np.linalg.norm(beta))
    return FitResult(
        beta_tilde=beta,
        lagrange_multiplier=None,
        active=np.isfinite(radius) and norm_beta >= radius * (1.0 - 1e-9),
        iterations=iterations,
        final_gradient_norm=float(np.linalg.norm(grad)),
        objective_value=empirical_phi_risk(beta, x, y, loss),
        converged=converged,
        objective_trace=trace,
    )


def fit_logistic_newton(x, y, max_iters=100, tol=1e-12):
    """Unconstrained logistic fit by damped Newton; internal utility for
    population-scale baselines where no constraint is involved."""
    x = as_samples(x)
    y = np.asarray(y, dtype=float)
    n, d = x.shape
    beta = np.zeros(d)
    for _ in range(max_iters):
        f = x @ beta
        s = 0.5 * (1.0 + np.tanh(-0.5 * y * f))  # sigmoid(-y f)
        grad = (1.0 / n) * (x.T @ (-y * s))
        wdiag = s * (1.0 - s)
        hess = (x.T * wdiag) @ x / n
        hess += 1e-12 * np.eye(d)
        step = np.linalg.solve(hess, grad)
        beta = beta - step
        if float(np.linalg.norm(step)) <= tol * max(1.0, float(np.linalg.norm(beta))):
            break
    return beta
