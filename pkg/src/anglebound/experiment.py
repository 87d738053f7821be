"""Simulation study orchestration: cells, sweeps, and figure grids.

A *cell* is one (train_size, replicate) fit + evaluation.  A *sweep* runs the
full train-size-by-replicate grid for one configuration and aggregates the
excess risks per train size.  Figure grids bundle the sweeps that reproduce
the convergence-curve figures of the simulation study.

Everything is deterministic given the configuration: per-cell seeds are
derived from the base seed with the documented golden-ratio splitting rule,
and aggregation is an ordered fold, so results never depend on execution
order or worker count.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import AngleBoundError
from .risk import MarginParams, RiskReport, evaluate_risks
from .surrogate import (FitResult, empirical_phi_risk, fit_constrained_least_squares,
                        fit_logistic_newton, fit_projected_gradient)
from .synth import FeatureLaw, LinkFunction, generate, split_seed

DEFAULT_TRAIN_SIZES = (100, 316, 1000, 3162, 10000, 31623, 100000)
DEFAULT_REPLICATES = 50
DEFAULT_EVAL_SIZE = 100000
DEFAULT_BASE_SEED = 20260826

# Sample size and fixed seed for population-scale estimates (unconstrained
# surrogate minimizers used for tight radii and phi-risk baselines).
POPULATION_SIZE = 1000000
POPULATION_SEED = 0x5EEDBA5E0FDA7A5


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation cell family: distribution, link, target, loss, sizes."""

    law: FeatureLaw
    link: LinkFunction
    beta_star: tuple
    loss: str
    radius: float
    train_sizes: tuple = DEFAULT_TRAIN_SIZES
    replicates: int = DEFAULT_REPLICATES
    eval_size: int = DEFAULT_EVAL_SIZE
    base_seed: int = DEFAULT_BASE_SEED
    margin_params: MarginParams | None = None
    cell_id: str = ""
    figure: str = ""

    def __post_init__(self):
        if not self.train_sizes or list(self.train_sizes) != sorted(self.train_sizes):
            raise ValueError("train_sizes must be nonempty and ascending")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.eval_size < 1000:
            raise ValueError("eval_size must be >= 1000")
        if not (self.radius > 0):
            raise ValueError("radius must be positive")


@dataclass
class CellResult:
    train_size: int
    replicate: int
    fit: FitResult | None
    report: RiskReport | None
    error_code: str = ""


@dataclass
class SweepResult:
    config: ExperimentConfig
    cells: list
    aggregates: list  # one dict per train size, in ascending order
    calibration_verdict: str  # "calibrated", "not_calibrated", "inconclusive"


@lru_cache(maxsize=128)
def population_minimizer(law, link, beta_star, loss):
    """Unconstrained population surrogate minimizer, estimated once at
    POPULATION_SIZE samples with a fixed seed and cached."""
    data = generate(law, link, np.asarray(beta_star), POPULATION_SIZE, POPULATION_SEED)
    if loss == "square":
        return fit_constrained_least_squares(data.features, data.labels).beta_tilde
    return fit_logistic_newton(data.features, data.labels)


def tight_radius(law, link, beta_star, loss, multiplier=0.5):
    """Binding radius: multiplier times the population minimizer's norm."""
    beta_eff = population_minimizer(law, link, tuple(beta_star), loss)
    return multiplier * float(np.linalg.norm(beta_eff))


def _fit(config, data):
    if config.loss == "square":
        return fit_constrained_least_squares(data.features, data.labels, config.radius)
    return fit_projected_gradient(data.features, data.labels, config.loss,
                                  config.radius, max_iters=20000, tol=1e-8)


def cell_seeds(config, train_size, replicate_index):
    """(train_seed, eval_seed) for one cell, from the documented split rule."""
    size_index = config.train_sizes.index(train_size)
    k = size_index * config.replicates + replicate_index
    return (split_seed(config.base_seed, 2 * k),
            split_seed(config.base_seed, 2 * k + 1))


def run_cell(config, train_size, replicate_index):
    """Fit one replicate and evaluate it on a fresh sample.

    Solver and link failures are recorded in error_code instead of raised, so
    a sweep never aborts on a single bad cell.
    """
    train_seed, eval_seed = cell_seeds(config, train_size, replicate_index)
    beta_star = np.asarray(config.beta_star, dtype=float)
    try:
        train = generate(config.law, config.link, beta_star, train_size, train_seed)
        fit = _fit(config, train)
        eval_data = generate(config.law, config.link, beta_star, config.eval_size, eval_seed)
        beta_base = population_minimizer(config.law, config.link, tuple(config.beta_star),
                                         config.loss)
        baseline_risk = empirical_phi_risk(beta_base, eval_data.features,
                                           eval_data.labels, config.loss)
        report = evaluate_risks(fit.beta_tilde, eval_data, config.loss, baseline_risk,
                                config.margin_params)
        return CellResult(train_size, replicate_index, fit, report)
    except AngleBoundError as exc:
        return CellResult(train_size, replicate_index, None, None,
                          error_code=type(exc).__name__)


def _run_cell_job(args):
    return run_cell(*args)


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, se


def aggregate_cells(config, cells):
    """Per-train-size means and standard errors over successful replicates."""
    aggregates = []
    for size in config.train_sizes:
        ok = [c for c in cells if c.train_size == size and not c.error_code]
        n_err = sum(1 for c in cells if c.train_size == size and c.error_code)
        row = {"train_size": size, "n_ok": len(ok), "n_err": n_err}
        if ok:
            for key in ("excess_01", "excess_phi", "sine_theta", "bound_sin",
                        "bound_bartlett"):
                mean, se = _mean_se([getattr(c.report, key) for c in ok])
                row[f"mean_{key}"] = mean
                row[f"se_{key}"] = se
        aggregates.append(row)
    return aggregates


# Absolute floor of the calibration verdict threshold.  Sits an order of
# magnitude above the fitting-noise excess at the default largest train size
# (~5e-6 for the calibrated regimes) and an order of magnitude below the
# smallest misspecification plateau in the study grid (~3e-4 for the
# uniform, nonlinear-link, norm-constrained regime).
VERDICT_FLOOR = 5e-5


def calibration_verdict(aggregates):
    """Verdict from the largest train size with successful replicates.

    calibrated if the mean excess 0-1 risk is below max(VERDICT_FLOOR,
    3 * SE); not_calibrated if it exceeds three times that threshold;
    inconclusive otherwise (or when no cell succeeded).
    """
    for row in reversed(aggregates):
        if row["n_ok"] > 0:
            threshold = max(VERDICT_FLOOR, 3.0 * row["se_excess_01"])
            mean = row["mean_excess_01"]
            if mean < threshold:
                return "calibrated"
            if mean > 3.0 * threshold:
                return "not_calibrated"
            return "inconclusive"
    return "inconclusive"


def worker_count():
    """Worker cap from the DR_THREADS environment variable (default 1)."""
    try:
        return max(1, int(os.environ.get("DR_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config, workers=None):
    """Run every (train_size, replicate) cell and aggregate.

    Cells are independent jobs; with workers > 1 they run in a process pool,
    and the ordered fold keeps the output identical to a sequential run.
    """
    if workers is None:
        workers = worker_count()
    jobs = [(config, size, rep)
            for size in config.train_sizes
            for rep in range(config.replicates)]
    if workers > 1 and len(jobs) > 1:
        # Warm the population cache in the parent so the digest-order fold
        # below is the only serialized stage.
        population_minimizer(config.law, config.link, tuple(config.beta_star), config.loss)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell_job, jobs, chunksize=8))
    else:
        cells = [run_cell(*job) for job in jobs]
    aggregates = aggregate_cells(config, cells)
    return SweepResult(config=config, cells=cells, aggregates=aggregates,
                       calibration_verdict=calibration_verdict(aggregates))


# ---------------------------------------------------------------------------
# Figure grids
# ---------------------------------------------------------------------------

FIGURE_IDS = ("fig4", "fig5", "fig6")

# Radius regimes as multipliers of the population minimizer norm.
RADIUS_REGIMES = (("rinf", None), ("rtight", 0.5), ("rtighter", 0.25))

# Symmetric / non-symmetric target directions for the nonlinear-link study.
BETA_SYMMETRIC = (1.0, 1.0)
BETA_NONSYMMETRIC = (1.0, -3.0)


def figure_configs(figure_id, base_seed=None, train_sizes=None, replicates=None,
                   eval_size=None):
    """The fixed config grid for one figure; overrides trim desk-scale runs."""
    if figure_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure {figure_id!r}; expected one of {FIGURE_IDS}")
    common = dict(
        train_sizes=tuple(train_sizes) if train_sizes else DEFAULT_TRAIN_SIZES,
        replicates=replicates or DEFAULT_REPLICATES,
        eval_size=eval_size or DEFAULT_EVAL_SIZE,
        base_seed=DEFAULT_BASE_SEED if base_seed is None else int(base_seed),
        figure=figure_id,
    )
    configs = []
    if figure_id in ("fig4", "fig5"):
        loss = "square" if figure_id == "fig4" else "logistic"
        link = LinkFunction("linear")
        beta_star = BETA_NONSYMMETRIC
        laws = [("uncorr", FeatureLaw("uniform_iid", dim=2, scale=0.125)),
                ("corr", FeatureLaw("correlated_uniform", dim=2, scale=0.125,
                                    correlation=0.8))]
        for law_tag, law in laws:
            for radius_tag, multiplier in RADIUS_REGIMES:
                radius = (math.inf if multiplier is None
                          else tight_radius(law, link, beta_star, loss, multiplier))
                configs.append(ExperimentConfig(
                    law=law, link=link, beta_star=beta_star, loss=loss, radius=radius,
                    cell_id=f"{law_tag}_{radius_tag}", **common))
    else:
        link = LinkFunction("logistic")
        cases = [("gauss_symm", FeatureLaw("gaussian_iid", dim=2, scale=1.0), BETA_SYMMETRIC),
                 ("gauss_nonsymm", FeatureLaw("gaussian_iid", dim=2, scale=1.0),
                  BETA_NONSYMMETRIC),
                 ("unif_nonsymm", FeatureLaw("uniform_iid", dim=2, scale=1.0),
                  BETA_NONSYMMETRIC)]
        # Multiplier 0.25 keeps the constraint firmly binding so the
        # misspecification plateau of the non-rotation-invariant regime is
        # fully expressed.
        for loss in ("square", "logistic"):
            for case_tag, law, beta_star in cases:
                radius = tight_radius(law, link, beta_star, loss, 0.25)
                configs.append(ExperimentConfig(
                    law=law, link=link, beta_star=beta_star, loss=loss, radius=radius,
                    cell_id=f"{loss}_{case_tag}", **common))
    return configs


def reproduce_figure(figure_id, base_seed=None, workers=None, **overrides):
    """Run all sweeps of one figure's documented grid."""
    return [run_sweep(cfg, workers=workers)
            for cfg in figure_configs(figure_id, base_seed=base_seed, **overrides)]


# ---------------------------------------------------------------------------
# CSV serialization (shortest round-trip decimals for byte determinism)
# ---------------------------------------------------------------------------

CELLS_HEADER = ("figure,cell_id,law,link,loss,radius,corr,beta_star,train_size,"
                "replicate,excess_01,excess_phi,sine_theta,bound_sin,bound_bartlett,"
                "std_error_01,error_code")
AGG_HEADER = ("figure,cell_id,law,link,loss,radius,corr,beta_star,train_size,n_ok,n_err,"
              "mean_excess_01,se_excess_01,mean_excess_phi,se_excess_phi,"
              "mean_sine_theta,mean_bound_sin,mean_bound_bartlett,calibration_verdict")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def _config_prefix(config):
    corr = config.law.correlation if config.law.is_correlated else 0.0
    beta = ";".join(repr(float(b)) for b in config.beta_star)
    return [config.figure or "", config.cell_id, config.law.kind, config.link.kind,
            config.loss, _fmt(float(config.radius)), _fmt(float(corr)), beta]


def sweep_cells_rows(sweep):
    rows = []
    for c in sweep.cells:
        prefix = _config_prefix(sweep.config)
        if c.error_code:
            fields = [""] * 6 + [c.error_code]
        else:
            r = c.report
            fields = [_fmt(r.excess_01), _fmt(r.excess_phi), _fmt(r.sine_theta),
                      _fmt(r.bound_sin), _fmt(r.bound_bartlett), _fmt(r.std_error_01), ""]
        rows.append(",".join(prefix + [str(c.train_size), str(c.replicate)] + fields))
    return rows


def sweep_agg_rows(sweep):
    rows = []
    for a in sweep.aggregates:
        prefix = _config_prefix(sweep.config)
        stats = []
        for key in ("mean_excess_01", "se_excess_01", "mean_excess_phi", "se_excess_phi",
                    "mean_sine_theta", "mean_bound_sin", "mean_bound_bartlett"):
            stats.append(_fmt(a.get(key)))
        rows.append(",".join(prefix + [str(a["train_size"]), str(a["n_ok"]),
                                       str(a["n_err"])] + stats +
                             [sweep.calibration_verdict]))
    return rows


def write_cells_csv(sweeps, path):
    lines = [CELLS_HEADER]
    for sweep in sweeps:
        lines.extend(sweep_cells_rows(sweep))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_agg_csv(sweeps, path):
    lines = [AGG_HEADER]
    for sweep in sweeps:
        lines.extend(sweep_agg_rows(sweep))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
