"""Monte Carlo harness: instance generators, replicated runs, rate checks.

A cell is one ``(sample size, dictionary size)`` point of a benchmark
grid.  ``run_cell`` builds the instance for the cell, draws ``R``
independent training samples from per-replicate seeded streams, runs the
configured algorithms, and reports the mean excess risk of each against
both oracles, together with the theoretical bound value for the
algorithm's primary oracle:

* linearized algorithm, selection oracle: ``beta * log(M) / (n + 1)``;
* gradient algorithm, convex oracle: ``2 * sqrt(Qstar * log(M) / n)``.

Replicate streams are keyed by ``(master seed, n, M, r)``, and replicates
are reduced in index order, so results are identical however cells or
replicates are scheduled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .losses import (
    LabeledSample,
    LossSpec,
    PHI_EXPONENTIAL,
    PHI_HINGE,
    PHI_KINDS,
    PHI_LOGIT2,
    SQUARED,
    _grad_coef,
    _loss_values,
    gradient_second_moment_bound,
)
from .oracles import FiniteDistribution, _atom_design, c_oracle, ms_oracle
from .simplex import TabularDictionary

__all__ = [
    "FAMILIES",
    "GeneratorSpec",
    "ExperimentConfig",
    "ResultRow",
    "RateFit",
    "BoundCheck",
    "generate_instance",
    "default_lma_betas",
    "run_cell",
    "fit_rate_slope",
    "verify_bound",
]

FAMILIES = ("bounded_regression", "phi_classification", "margin_classification", "near_tie")

_FAMILY_CODES = {family: code for code, family in enumerate(FAMILIES, start=1)}

_RECIPES = {
    "bounded_regression": "anchor_plus_perturbations",
    "phi_classification": "random_classifiers",
    "margin_classification": "threshold_plus_random",
    "near_tie": "constant_ladder",
}

# Per-arm perturbation amplitudes for the regression recipe are log-spread
# over this interval so the dictionary's risk gaps straddle the crossover
# scales of the benchmark n grid.
_PERTURBATION_AMPLITUDES = (0.35, 0.7)

_ALGORITHMS = ("MA", "LMA", "ERM")

_CHUNK = 256


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a family of benchmark instances.

    ``noise_level`` is the response noise half-width (regression and
    near-tie families), ``margin_exponent`` the margin parameter of the
    classification family (must be at least 1; 1 means the regression
    function stays bounded away from 1/2), and ``tie_gap`` the risk
    spacing of the near-tie ladder.
    """

    family: str
    grid_size: int = 16
    noise_level: float = 0.0
    margin_exponent: float = 1.0
    tie_gap: float = 0.01
    recipe: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}; expected one of {FAMILIES}")
        if self.grid_size < 1:
            raise ValueError(f"grid_size must be at least 1, got {self.grid_size}")
        if not math.isfinite(self.noise_level) or self.noise_level < 0.0:
            raise ValueError(f"noise_level must be a nonnegative finite number, got {self.noise_level!r}")
        if not math.isfinite(self.margin_exponent) or self.margin_exponent < 1.0:
            raise ValueError(
                f"margin_exponent (kappa) must be >= 1, got {self.margin_exponent!r}"
            )
        if not math.isfinite(self.tie_gap) or self.tie_gap < 0.0:
            raise ValueError(f"tie_gap must be a nonnegative finite number, got {self.tie_gap!r}")
        if self.recipe and self.recipe != _RECIPES[self.family]:
            raise ValueError(
                f"unknown recipe {self.recipe!r} for family {self.family!r}; "
                f"supported: {_RECIPES[self.family]!r}"
            )

    @property
    def resolved_recipe(self) -> str:
        return self.recipe or _RECIPES[self.family]


def _regression_atoms(x_values, means, sigma):
    atoms = []
    k = len(means)
    if sigma == 0.0:
        for x, mu in zip(x_values, means):
            atoms.append((LabeledSample(x, float(np.clip(mu, -1.0, 1.0))), 1.0 / k))
    else:
        for x, mu in zip(x_values, means):
            atoms.append((LabeledSample(x, float(np.clip(mu + sigma, -1.0, 1.0))), 0.5 / k))
            atoms.append((LabeledSample(x, float(np.clip(mu - sigma, -1.0, 1.0))), 0.5 / k))
    return FiniteDistribution(tuple(atoms))


def _classification_atoms(eta):
    k = len(eta)
    atoms = []
    for x, p in enumerate(eta):
        atoms.append((LabeledSample(x, 1.0), float(p) / k))
        atoms.append((LabeledSample(x, -1.0), float(1.0 - p) / k))
    return FiniteDistribution(tuple(atoms))


def generate_instance(genspec: GeneratorSpec, m: int, seed: int):
    """Build the ``(distribution, dictionary)`` pair for one cell.

    Deterministic in ``(genspec, m, seed)``: the stream is keyed by the
    seed, the family, and the dictionary size, so instances are shared
    across sample sizes and reproducible across processes.
    """
    if m < 2:
        raise ValueError(f"dictionary size must be at least 2, got {m}")
    rng = np.random.default_rng([seed, _FAMILY_CODES[genspec.family], m])
    k = genspec.grid_size
    family = genspec.family

    if family == "bounded_regression":
        # Arm 0 is the conditional mean, so both oracle risks equal the
        # noise floor and every excess is nonnegative pointwise.  The
        # other arms share one sign pattern at log-spread amplitudes,
        # which keeps their risk gaps well separated without letting
        # mixtures cancel the perturbations.
        anchor = rng.uniform(-0.5, 0.5, k)
        lo, hi = _PERTURBATION_AMPLITUDES
        amplitudes = np.exp(rng.uniform(math.log(lo), math.log(hi), m - 1))
        pattern = rng.choice([-1.0, 1.0], size=k)
        offsets = amplitudes[:, None] * pattern[None, :]
        values = np.vstack([anchor, np.clip(anchor + offsets, -1.0, 1.0)])
        dist = _regression_atoms(range(k), anchor, genspec.noise_level)
        return dist, TabularDictionary(values, range_bound=1.0)

    if family == "phi_classification":
        eta = rng.uniform(0.1, 0.9, k)
        values = rng.uniform(-1.0, 1.0, (m, k))
        return _classification_atoms(eta), TabularDictionary(values, range_bound=1.0)

    if family == "margin_classification":
        t = (np.arange(k) + 0.5) / k - 0.5
        kappa = genspec.margin_exponent
        if kappa == 1.0:
            eta = 0.5 + 0.25 * np.sign(t)
        else:
            dev = 0.45 * np.sign(t) * np.minimum(1.0, np.abs(2.0 * t) ** (1.0 / (kappa - 1.0)))
            eta = np.clip(0.5 + dev, 0.05, 0.95)
        values = np.vstack([np.sign(t), rng.uniform(-1.0, 1.0, (m - 1, k))])
        return _classification_atoms(eta), TabularDictionary(values, range_bound=1.0)

    # near_tie: constant predictors with risks spaced exactly tie_gap apart
    delta = genspec.tie_gap
    if (m - 1) * delta > 1.0:
        raise ValueError(
            f"infeasible near-tie ladder: sqrt((M-1)*tie_gap) must stay within the range "
            f"bound 1, got (M-1)*tie_gap = {(m - 1) * delta!r}"
        )
    constants = np.sqrt(delta * np.arange(m))
    values = np.repeat(constants[:, None], k, axis=1)
    dist = _regression_atoms(range(k), np.zeros(k), genspec.noise_level)
    return dist, TabularDictionary(values, range_bound=1.0)


def default_lma_betas(spec: LossSpec, range_bound: float) -> tuple[float, ...]:
    """Documented default temperatures for the linearized algorithm.

    Squared loss: ``4 * (y_bound + B)^2``, twice the concavity threshold of
    the exponential-map criterion.  Exponential: ``e``.  Base-2 logistic:
    both quoted constants (``e * ln 2`` and ``e / ln 2``), producing one
    result row each.  Hinge has no documented constant and requires an
    explicit temperature.
    """
    if spec.kind == SQUARED:
        return (4.0 * (spec.y_bound + range_bound) ** 2,)
    if spec.kind == PHI_EXPONENTIAL:
        return (math.e,)
    if spec.kind == PHI_LOGIT2:
        return (math.e * math.log(2.0), math.e / math.log(2.0))
    raise ValueError(f"no default temperature for {spec.kind!r}; set lma_beta explicitly")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark run depends on.

    ``lma_betas`` empty means the documented defaults for the loss;
    ``ma_beta0`` None means ``sqrt(Qstar / log M)`` per cell.
    """

    generator: GeneratorSpec
    n_grid: tuple
    m_grid: tuple
    replications: int
    algorithms: tuple
    loss: LossSpec
    master_seed: int
    lma_betas: tuple = ()
    ma_beta0: float | None = None
    ma_schedule: str = "sqrt_growth"

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "lma_betas", tuple(float(b) for b in self.lma_betas))
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ValueError(f"n_grid must be nonempty with sample sizes >= 1, got {self.n_grid}")
        if not self.m_grid or any(m < 2 for m in self.m_grid):
            raise ValueError(f"m_grid must be nonempty with dictionary sizes >= 2, got {self.m_grid}")
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications}")
        if not self.algorithms:
            raise ValueError("algorithms must be nonempty")
        unknown = [a for a in self.algorithms if a not in _ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; expected a subset of {_ALGORITHMS}")
        if "MA" in self.algorithms and not self.loss.differentiable:
            raise ValueError("the gradient algorithm requires a differentiable loss; drop MA or change loss")
        if "LMA" in self.algorithms and self.loss.kind == PHI_HINGE and not self.lma_betas:
            raise ValueError("no default temperature for phi_hinge; set lma_beta explicitly")
        if any(not math.isfinite(b) or b <= 0.0 for b in self.lma_betas):
            raise ValueError(f"lma_betas must be positive, got {self.lma_betas}")
        if self.ma_beta0 is not None and (not math.isfinite(self.ma_beta0) or self.ma_beta0 <= 0.0):
            raise ValueError(f"ma_beta0 must be positive, got {self.ma_beta0!r}")
        if self.ma_schedule not in ("sqrt_growth", "constant"):
            raise ValueError(f"ma_schedule must be 'sqrt_growth' or 'constant', got {self.ma_schedule!r}")
        if not isinstance(self.master_seed, int) or self.master_seed < 0:
            raise ValueError(f"master_seed must be a nonnegative integer, got {self.master_seed!r}")


@dataclass(frozen=True)
class ResultRow:
    """Aggregated outcome of one cell for one algorithm and oracle."""

    n: int
    m: int
    algorithm: str
    loss_kind: str
    oracle_kind: str
    mean_excess: float
    stderr: float
    oracle_value: float
    bound_value: float | None
    bound_pass: bool | None
    seed: int


class RateFit(NamedTuple):
    slope: float
    stderr: float
    intercept: float


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of checking one bound over a set of result rows."""

    checked: int
    fraction_passed: float
    failures: tuple


def _softmin_rows(z: np.ndarray) -> np.ndarray:
    w = np.exp(-(z - z.min(axis=1, keepdims=True)))
    return w / w.sum(axis=1, keepdims=True)


def _draw_sample_indices(dist, master_seed, n, m, replications):
    idx = np.empty((replications, n), dtype=np.int64)
    for r in range(replications):
        rng = np.random.default_rng([master_seed, n, m, r])
        idx[r] = dist.sample_indices(rng, n)
    return idx


def _batch_linearized(idx, design, ys, kind, beta):
    """Averaged weights of the linearized algorithm, one row per replicate."""
    reps, n = idx.shape
    m = design.shape[1]
    out = np.empty((reps, m))
    for lo in range(0, reps, _CHUNK):
        block = idx[lo : lo + _CHUNK]
        rows = block.shape[0]
        scores = np.zeros((rows, m))
        mirrored = np.full((rows, m), 1.0 / m)
        total = np.zeros((rows, m))
        for t in range(n):
            a = block[:, t]
            total += mirrored
            scores += _loss_values(kind, ys[a][:, None], design[a])
            mirrored = _softmin_rows(scores / beta)
        out[lo : lo + _CHUNK] = total / n
    return out


def _batch_gradient(idx, design, ys, kind, betas, gammas):
    """Averaged weights of the gradient algorithm, one row per replicate."""
    reps, n = idx.shape
    m = design.shape[1]
    out = np.empty((reps, m))
    for lo in range(0, reps, _CHUNK):
        block = idx[lo : lo + _CHUNK]
        rows = block.shape[0]
        scores = np.zeros((rows, m))
        mirrored = np.full((rows, m), 1.0 / m)
        total = np.zeros((rows, m))
        gamma_total = 0.0
        for t in range(n):
            a = block[:, t]
            f = design[a]
            y = ys[a][:, None]
            mix = (mirrored * f).sum(axis=1, keepdims=True)
            coef = _grad_coef(kind, y, mix)
            total += gammas[t] * mirrored
            gamma_total += gammas[t]
            scores += gammas[t] * (coef * f)
            mirrored = _softmin_rows(scores / betas[t])
        out[lo : lo + _CHUNK] = total / gamma_total
    return out


def _batch_erm(idx, design, ys, kind):
    """Selected vertex index per replicate (ties to the lowest index)."""
    reps, n = idx.shape
    m = design.shape[1]
    out = np.empty(reps, dtype=np.int64)
    for lo in range(0, reps, _CHUNK):
        block = idx[lo : lo + _CHUNK]
        totals = np.zeros((block.shape[0], m))
        for t in range(n):
            a = block[:, t]
            totals += _loss_values(kind, ys[a][:, None], design[a])
        out[lo : lo + _CHUNK] = np.argmin(totals, axis=1)
    return out


def run_cell(config: ExperimentConfig, n: int, m: int) -> list:
    """Run every configured algorithm on one grid cell.

    Returns one row per algorithm, in configuration order.  Each row
    measures excess against the algorithm's natural oracle: selection
    oracle for the linearized algorithm and the selector, convex oracle
    for the gradient algorithm.  The theoretical bound is attached where
    one applies (both aggregation algorithms, not the selector).
    """
    loss = config.loss
    dist, dictionary = generate_instance(config.generator, m, config.master_seed)
    dist.validate_for(loss)
    ms = ms_oracle(dictionary, loss, dist)
    convex = c_oracle(dictionary, loss, dist)
    oracle_values = {"MS": ms.risk_value, "C": convex.risk_value}

    design = _atom_design(dictionary, dist)
    ys = dist.ys
    ps = dist.ps
    kind = loss.kind
    reps = config.replications
    idx = _draw_sample_indices(dist, config.master_seed, n, m, reps)

    def mixture_risk(theta):
        # same arithmetic as exact_risk on a mixture: design @ theta, then fsum
        return math.fsum((ps * _loss_values(kind, ys, design @ theta)).tolist())

    log_m = math.log(m)
    rows: list = []

    def emit(label, achieved, okind, bound):
        achieved = np.asarray(achieved, dtype=float)
        mean_risk = float(achieved.mean())
        stderr = float(achieved.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
        mean_excess = mean_risk - oracle_values[okind]
        rows.append(
            ResultRow(
                n=n,
                m=m,
                algorithm=label,
                loss_kind=kind,
                oracle_kind=okind,
                mean_excess=mean_excess,
                stderr=stderr,
                oracle_value=oracle_values[okind],
                bound_value=bound,
                bound_pass=None if bound is None else bool(mean_excess - 2.0 * stderr <= bound),
                seed=config.master_seed,
            )
        )

    for algorithm in config.algorithms:
        if algorithm == "LMA":
            betas = config.lma_betas or default_lma_betas(loss, dictionary.range_bound)
            for beta in betas:
                thetas = _batch_linearized(idx, design, ys, kind, beta)
                achieved = [mixture_risk(theta) for theta in thetas]
                label = "LMA" if len(betas) == 1 else f"LMA@{beta:.6g}"
                emit(label, achieved, "MS", beta * log_m / (n + 1))
        elif algorithm == "MA":
            qstar = gradient_second_moment_bound(loss, dictionary.range_bound)
            beta0 = config.ma_beta0 if config.ma_beta0 is not None else math.sqrt(qstar / log_m)
            steps = np.arange(1, n + 1, dtype=float)
            if config.ma_schedule == "sqrt_growth":
                betas_t = beta0 * np.sqrt(steps)
            else:
                betas_t = np.full(n, beta0)
            gammas_t = np.ones(n)
            thetas = _batch_gradient(idx, design, ys, kind, betas_t, gammas_t)
            achieved = [mixture_risk(theta) for theta in thetas]
            emit("MA", achieved, "C", 2.0 * math.sqrt(qstar * log_m / n))
        else:
            vertex_risks = np.array(
                [math.fsum((ps * _loss_values(kind, ys, design[:, j])).tolist()) for j in range(m)]
            )
            selected = _batch_erm(idx, design, ys, kind)
            emit("ERM", vertex_risks[selected], "MS", None)

    return rows


def fit_rate_slope(rows: Sequence[ResultRow]) -> RateFit:
    """OLS slope of log mean excess against log sample size.

    Rows with nonpositive mean excess carry no information on a log scale;
    they are excluded with a warning.  At least four distinct usable
    sample sizes are required.
    """
    usable = [(row.n, row.mean_excess) for row in rows if row.mean_excess > 0.0]
    dropped = sorted(row.n for row in rows if row.mean_excess <= 0.0)
    if dropped:
        warnings.warn(f"excluded nonpositive mean-excess rows at n={dropped}", stacklevel=2)
    ns = [n for n, _ in usable]
    if len(set(ns)) != len(ns):
        raise ValueError(f"duplicate sample sizes in rows: {sorted(ns)}")
    if len(ns) < 4:
        raise ValueError(f"need at least 4 distinct usable sample sizes, got {len(ns)}")
    x = np.log([n for n, _ in usable])
    y = np.log([e for _, e in usable])
    x_centered = x - x.mean()
    slope = float((x_centered @ (y - y.mean())) / (x_centered @ x_centered))
    intercept = float(y.mean() - slope * x.mean())
    residuals = y - (intercept + slope * x)
    dof = len(ns) - 2
    stderr = float(math.sqrt((residuals @ residuals) / dof / (x_centered @ x_centered)))
    return RateFit(slope=slope, stderr=stderr, intercept=intercept)


def verify_bound(rows: Sequence[ResultRow], bound: str) -> BoundCheck:
    """Check one oracle-inequality bound over result rows.

    ``bound="lma"`` selects linearized-algorithm rows against the selection
    oracle; ``bound="ma"`` selects gradient-algorithm rows against the
    convex oracle.  A row passes when its mean excess minus two standard
    errors is at most the bound value.
    """
    if bound == "lma":
        picked = [
            row
            for row in rows
            if row.algorithm.startswith("LMA") and row.oracle_kind == "MS" and row.bound_value is not None
        ]
    elif bound == "ma":
        picked = [
            row
            for row in rows
            if row.algorithm == "MA" and row.oracle_kind == "C" and row.bound_value is not None
        ]
    else:
        raise ValueError(f"unknown bound {bound!r}; expected 'lma' or 'ma'")
    if not picked:
        raise ValueError(f"no rows carry the {bound!r} bound")
    failures = tuple(
        row for row in picked if not (row.mean_excess - 2.0 * row.stderr <= row.bound_value)
    )
    return BoundCheck(
        checked=len(picked),
        fraction_passed=1.0 - len(failures) / len(picked),
        failures=failures,
    )
