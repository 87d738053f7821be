"""Scale-invariant angles, empirical covariances, and spectral quantities.

Angles are reported via :class:`AngleReport`, which carries the angle in
radians together with its sine, cosine, and the sign of the inner product.
All functions here are pure; nothing is mutated.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ZeroMatrix
from .validation import as_samples, as_vector, check_symmetric, nonzero_norm, same_length

# Inner products with |<u,v>| below this times ||u||*||v|| count as orthogonal.
ORTHOGONAL_RTOL = 1e-14


@dataclass(frozen=True)
class AngleReport:
    """Angle between two directions, with its trigonometric companions."""

    angle_rad: float
    sine: float
    cosine: float
    inner_product_sign: str  # "positive", "negative", or "zero"

    @property
    def min_rescaling_distance(self):
        """inf over nonnegative rescalings t of ||t*u - v/||v|| ||.

        Equals sin(angle) on the acute branch and 1 (attained as t -> 0)
        when the inner product is nonpositive.
        """
        if self.inner_product_sign == "positive":
            return self.sine
        return 1.0


def _angle_from_inner(inner, norm_u, norm_v):
    denom = norm_u * norm_v
    if abs(inner) <= ORTHOGONAL_RTOL * denom:
        return AngleReport(angle_rad=np.pi / 2, sine=1.0, cosine=0.0,
                           inner_product_sign="zero")
    cosine = float(np.clip(inner / denom, -1.0, 1.0))
    angle = float(np.arccos(cosine))
    return AngleReport(angle_rad=angle, sine=float(np.sin(angle)), cosine=cosine,
                       inner_product_sign="positive" if inner > 0 else "negative")


def angle_euclidean(u, v):
    """Angle between two vectors under the Euclidean inner product.

    Satisfies angle(-u, v) = pi - angle(u, v) and is invariant to positive
    rescaling of either argument.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    same_length(u, v)
    norm_u = nonzero_norm(u, "u")
    norm_v = nonzero_norm(v, "v")
    return _angle_from_inner(float(u @ v), norm_u, norm_v)


def angle_l2p(u_values, v_values):
    """Angle between two functions under the empirical L2 inner product.

    Inputs are pointwise evaluations on the same n sample points; the inner
    product is (1/n) * sum(u_i v_i).  The 1/n weight cancels in the cosine,
    so this shares the Euclidean core.
    """
    u = as_vector(u_values, "u_values")
    v = as_vector(v_values, "v_values")
    same_length(u, v)
    norm_u = nonzero_norm(u, "u_values")
    norm_v = nonzero_norm(v, "v_values")
    return _angle_from_inner(float(u @ v), norm_u, norm_v)


def empirical_l2_norm(values):
    """sqrt((1/n) sum v_i^2), the empirical L2(P) norm of sampled values."""
    v = as_vector(values, "values")
    return float(np.sqrt(np.mean(v * v)))


def estimate_covariance(samples):
    """Second-moment matrix (1/n) sum x_i x_i^T, without mean subtraction."""
    x = as_samples(samples)
    return x.T @ x / x.shape[0]


def eigenvalues_symmetric(m):
    """All eigenvalues of a symmetric matrix, in descending order."""
    sym = check_symmetric(m)
    return np.linalg.eigvalsh(sym)[::-1].copy()


def calibration_bound(sigma):
    """inf over a >= 0 of the operator norm of (a*Sigma - I).

    For PSD Sigma with eigenvalues s_max >= ... >= s_min >= 0 the infimum is
    attained at a = 2/(s_max + s_min) and equals
    (s_max - s_min)/(s_max + s_min), always in [0, 1].
    """
    eig = eigenvalues_symmetric(sigma)
    s_max = float(eig[0])
    if s_max <= 0.0:
        raise ZeroMatrix("covariance has no positive eigenvalue")
    s_min = max(float(eig[-1]), 0.0)
    return (s_max - s_min) / (s_max + s_min)


def operator_norm_scaled_identity_gap(sigma, a):
    """Operator norm of (a*Sigma - I); brute-force target of calibration_bound."""
    eig = eigenvalues_symmetric(sigma)
    return float(np.max(np.abs(a * eig - 1.0)))
