"""scikit-learn compatible estimator facade over the constrained solvers."""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .surrogate import (LOSS_KINDS, empirical_phi_risk, fit_constrained_least_squares,
                        fit_projected_gradient)


class NormBallClassifier(BaseEstimator, ClassifierMixin):
    """Linear classifier minimizing a convex surrogate over a Euclidean ball.

    Parameters
    ----------
    loss : {"square", "logistic"}
        Surrogate loss to minimize.
    radius : float
        Radius of the Euclidean norm ball constraining the coefficients;
        ``numpy.inf`` disables the constraint.
    solver : {"auto", "closed_form", "projected_gradient"}
        "auto" uses the exact closed form for square loss and projected
        gradient descent otherwise.
    max_iter, tol : int, float
        Projected gradient stopping controls (ignored by the closed form).

    The model is through the origin: no intercept is fitted, and the decision
    rule is sign(<coef_, x>) with sign(0) = +1.
    """

    def __init__(self, loss="square", radius=np.inf, solver="auto",
                 max_iter=20000, tol=1e-9):
        self.loss = loss
        self.radius = radius
        self.solver = solver
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.loss!r}")
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=float)
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        solver = self.solver
        if solver == "auto":
            solver = "closed_form" if self.loss == "square" else "projected_gradient"
        if solver == "closed_form":
            if self.loss != "square":
                raise ValueError("closed_form solver supports square loss only")
            result = fit_constrained_least_squares(X, y, self.radius)
        elif solver == "projected_gradient":
            result = fit_projected_gradient(X, y, self.loss, self.radius,
                                            max_iters=self.max_iter, tol=self.tol)
        else:
            raise ValueError(f"unknown solver {self.solver!r}")
        self.coef_ = result.beta_tilde
        self.lagrange_multiplier_ = result.lagrange_multiplier
        self.active_constraint_ = result.active
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.objective_value_ = result.objective_value
        self.fit_result_ = result
        self.classes_ = np.array([-1.0, 1.0])
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        f = self.decision_function(X)
        return np.where(f >= 0.0, 1.0, -1.0)

    def surrogate_risk(self, X, y):
        """Empirical phi-risk of the fitted coefficients on (X, y)."""
        check_is_fitted(self, "coef_")
        return empirical_phi_risk(self.coef_, X, y, self.loss)
