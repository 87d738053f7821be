"""Synthetic data generation: feature laws, link functions, labeled datasets.

All randomness flows through numpy's PCG64 generator seeded explicitly, so a
given (law, link, beta_star, n, seed) tuple produces bit-identical output on
every platform.  Concurrent replicates must derive their seeds with
:func:`split_seed`.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, InvalidBetaStar, LinkDomain
from .validation import as_vector

# Golden-ratio increment for deriving independent streams from a base seed.
SEED_SPLIT_INCREMENT = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

FEATURE_KINDS = ("uniform_iid", "gaussian_iid", "correlated_uniform", "correlated_gaussian")
LINK_KINDS = ("linear", "logistic")

# Slack allowed on the linear link's |z| <= 1/2 domain check.
LINEAR_DOMAIN_SLACK = 1e-12


def split_seed(base_seed, index):
    """index-th derived seed: (base + index * golden increment) mod 2^64."""
    return (int(base_seed) + int(index) * SEED_SPLIT_INCREMENT) & _MASK64


@dataclass(frozen=True)
class FeatureLaw:
    """Law of the feature vector X.

    ``scale`` is the half-width for uniform kinds and the standard deviation
    for gaussian kinds.  ``correlation`` is the equicorrelation coefficient,
    used only by the correlated kinds (applied by Cholesky mixing, which
    preserves marginal variances).
    """

    kind: str
    dim: int
    scale: float = 1.0
    correlation: float = 0.8

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature law kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.is_correlated and not (-1.0 < self.correlation < 1.0):
            raise ValueError("correlation must lie in (-1, 1)")

    @property
    def is_correlated(self):
        return self.kind.startswith("correlated")

    @property
    def is_uniform(self):
        return "uniform" in self.kind

    def mixing_matrix(self):
        """Lower-triangular Cholesky factor of the equicorrelation matrix."""
        if not self.is_correlated:
            return np.eye(self.dim)
        corr = np.full((self.dim, self.dim), self.correlation)
        np.fill_diagonal(corr, 1.0)
        return np.linalg.cholesky(corr)

    def max_abs_index(self, beta):
        """Worst-case |<beta, X>| over the support (inf for gaussian kinds)."""
        beta = as_vector(beta, "beta")
        if beta.size != self.dim:
            raise DimensionMismatch(f"beta has dim {beta.size}, law has dim {self.dim}")
        if not self.is_uniform:
            return float("inf") if np.any(beta != 0.0) else 0.0
        mixed = self.mixing_matrix().T @ beta
        return self.scale * float(np.sum(np.abs(mixed)))


@dataclass(frozen=True)
class LinkFunction:
    """Maps the linear index z = <beta*, x> to P(Y = +1 | X = x).

    linear:   p = 1/2 + z, defined only for z in [-1/2, 1/2].
    logistic: p = 1 / (1 + exp(-z)).
    """

    kind: str

    def __post_init__(self):
        if self.kind not in LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}")


def sample_features(law, n, seed):
    """Draw an n-by-d feature matrix; deterministic given the seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(int(seed) & _MASK64)
    if law.is_uniform:
        z = rng.uniform(-law.scale, law.scale, size=(n, law.dim))
    else:
        z = rng.normal(0.0, law.scale, size=(n, law.dim))
    if law.is_correlated:
        z = z @ law.mixing_matrix().T
    return z


def apply_link(link, z):
    """Evaluate the link on a scalar or array of linear indices."""
    z = np.asarray(z, dtype=float)
    if link.kind == "linear":
        if np.any(np.abs(z) > 0.5 + LINEAR_DOMAIN_SLACK):
            bad = float(np.max(np.abs(z)))
            raise LinkDomain(f"linear link needs |z| <= 1/2, got max |z| = {bad:g}")
        p = np.clip(0.5 + z, 0.0, 1.0)
    else:
        # Numerically stable logistic CDF.
        p = 0.5 * (1.0 + np.tanh(0.5 * z))
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class Dataset:
    """Features, +/-1 labels, true probabilities, and generation metadata."""

    features: np.ndarray
    labels: np.ndarray
    true_probabilities: np.ndarray
    generator_seed: int
    law: FeatureLaw
    link: LinkFunction
    beta_star: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]


def generate(law, link, beta_star, n, seed):
    """Generate a labeled dataset with P(Y_i = +1) = link(<beta*, x_i>).

    Labels use an independent stream derived from the feature seed, so the
    feature matrix matches :func:`sample_features` with the same seed.
    """
    beta_star = as_vector(beta_star, "beta_star")
    if beta_star.size != law.dim:
        raise DimensionMismatch(f"beta_star has dim {beta_star.size}, law has dim {law.dim}")
    if link.kind == "linear":
        worst = law.max_abs_index(beta_star)
        if worst > 0.5 + LINEAR_DOMAIN_SLACK:
            raise InvalidBetaStar(
                f"linear link needs sup |<beta*, x>| <= 1/2 over the support, got {worst:g}")
    x = sample_features(law, n, seed)
    p = np.asarray(apply_link(link, x @ beta_star), dtype=float).reshape(-1)
    u = np.random.default_rng(split_seed(seed, 1)).random(n)
    y = np.where(u < p, 1.0, -1.0)
    return Dataset(features=x, labels=y, true_probabilities=p,
                   generator_seed=int(seed) & _MASK64, law=law, link=link,
                   beta_star=beta_star)


def _format_float(v):
    # repr gives the shortest decimal that round-trips, for byte-stable CSVs.
    return repr(float(v))


def dataset_to_csv(dataset, path_or_file):
    """Write `x1,...,xd,y,pstar` rows; labels as -1/+1 integers."""
    d = dataset.dim
    header = ",".join([f"x{j + 1}" for j in range(d)] + ["y", "pstar"])
    lines = [header]
    for i in range(dataset.n):
        cells = [_format_float(v) for v in dataset.features[i]]
        cells.append(str(int(dataset.labels[i])))
        cells.append(_format_float(dataset.true_probabilities[i]))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        path_or_file.write(text)


def dataset_from_csv(path_or_file):
    """Read a CSV in the export schema; `pstar` may be absent.

    Returns (features, labels, pstar_or_None).  Raises ValueError with the
    offending line number on malformed input.
    """
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, "r", encoding="utf-8") as fh:
            return dataset_from_csv(fh)
    assert isinstance(path_or_file, io.TextIOBase) or hasattr(path_or_file, "readline")
    header = path_or_file.readline().strip()
    cols = header.split(",") if header else []
    if not cols or cols[-1] not in ("y", "pstar"):
        raise ValueError("line 1: header must end with 'y' or 'y,pstar'")
    has_pstar = cols[-1] == "pstar"
    d = len(cols) - (2 if has_pstar else 1)
    if d < 1 or cols[:d] != [f"x{j + 1}" for j in range(d)]:
        raise ValueError("line 1: feature columns must be x1,...,xd")
    rows, labels, pstars = [], [], []
    for lineno, line in enumerate(path_or_file, start=2):
        line = line.strip()
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(cols):
            raise ValueError(f"line {lineno}: expected {len(cols)} fields, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field") from None
        y = vals[d]
        if y not in (-1.0, 1.0):
            raise ValueError(f"line {lineno}: labels must be -1 or +1")
        rows.append(vals[:d])
        labels.append(y)
        if has_pstar:
            if not 0.0 <= vals[d + 1] <= 1.0:
                raise ValueError(f"line {lineno}: pstar must lie in [0, 1]")
            pstars.append(vals[d + 1])
    if not rows:
        raise ValueError("line 2: no data rows")
    features = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    p = np.asarray(pstars, dtype=float) if has_pstar else None
    return features, y, p
