"""Scale-invariant angle bounds on excess classification risk.

Linear classification depends only on the direction of its coefficient
vector.  This package computes the angle between a fitted predictor and the
optimal one (in Euclidean space and empirical L2), evaluates the excess-risk
bounds that follow from that angle, provides exact and projected-gradient
solvers for norm-ball-constrained surrogate minimization, and ships a
deterministic Monte Carlo harness reproducing the accompanying simulation
study.
"""

__version__ = "0.1.0"

from .estimators import NormBallClassifier
from .exceptions import (AngleBoundError, DegenerateDesign, DimensionMismatch, DomainError,
                         InvalidBetaStar, LinkDomain, NoConvergence, NotSymmetric, ZeroMatrix,
                         ZeroVector)
from .geometry import (AngleReport, angle_euclidean, angle_l2p, calibration_bound,
                       eigenvalues_symmetric, empirical_l2_norm, estimate_covariance)
from .risk import (MarginParams, RiskReport, bound_bartlett, bound_margin, bound_sin,
                   disagreement_probability_mc, estimate_margin_mass, evaluate_risks,
                   excess_01_exact_rotinv, excess_01_mc)
from .surrogate import (FitResult, empirical_phi_risk, fit_constrained_least_squares,
                        fit_projected_gradient)
from .synth import (Dataset, FeatureLaw, LinkFunction, apply_link, dataset_from_csv,
                    dataset_to_csv, generate, sample_features, split_seed)
from .experiment import (ExperimentConfig, SweepResult, figure_configs, reproduce_figure,
                         run_cell, run_sweep, tight_radius)

__all__ = [
    "AngleBoundError", "AngleReport", "Dataset", "DegenerateDesign", "DimensionMismatch",
    "DomainError", "ExperimentConfig", "FeatureLaw", "FitResult", "InvalidBetaStar",
    "LinkDomain", "LinkFunction", "MarginParams", "NoConvergence", "NormBallClassifier",
    "NotSymmetric", "RiskReport", "SweepResult", "ZeroMatrix", "ZeroVector",
    "angle_euclidean", "angle_l2p", "apply_link", "bound_bartlett", "bound_margin",
    "bound_sin", "calibration_bound", "dataset_from_csv", "dataset_to_csv",
    "disagreement_probability_mc", "eigenvalues_symmetric", "empirical_l2_norm",
    "empirical_phi_risk", "estimate_covariance", "estimate_margin_mass",
    "evaluate_risks", "excess_01_exact_rotinv", "excess_01_mc", "figure_configs",
    "fit_constrained_least_squares", "fit_projected_gradient", "generate",
    "reproduce_figure", "run_cell", "run_sweep", "sample_features", "split_seed",
    "tight_radius",
]
