"""Exact risk computation and aggregation oracles on finite distributions.

Everything here is deterministic: distributions are finite lists of atoms,
risks are exact expectations (compensated summation over atoms), and the
two oracle values the rate experiments compare against are

* the selection oracle ``min_j R(f_j)`` over the dictionary, and
* the convex oracle ``inf R(f_theta)`` over the whole simplex.

The convex oracle is found by a first-order minimizer and certified by the
vertex gap ``theta . g - min_j g_j`` with ``g`` the exact risk gradient,
which upper-bounds the suboptimality of a convex objective over the
simplex.  The reference rate curves for both aggregation problems are also
provided here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .losses import (
    LabeledSample,
    LossSpec,
    PHI_HINGE,
    PHI_KINDS,
    _grad_coef,
    _loss_values,
)
from .simplex import Dictionary, uniform_weights, validate_weights

__all__ = [
    "FiniteDistribution",
    "RiskReport",
    "ConvergenceError",
    "exact_risk",
    "ms_oracle",
    "c_oracle",
    "optimal_rate",
    "excess_risk",
]

PROB_ATOL = 1e-12


@dataclass(frozen=True)
class FiniteDistribution:
    """Distribution of ``(X, Y)`` supported on finitely many atoms.

    ``atoms`` is a tuple of ``(LabeledSample, probability)`` pairs with
    positive probabilities summing to one.
    """

    atoms: tuple

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValueError("distribution needs at least one atom")
        total = math.fsum(p for _, p in atoms)
        for z, p in atoms:
            if not isinstance(z, LabeledSample):
                raise ValueError(f"atom {z!r} is not a LabeledSample")
            if not math.isfinite(p) or p <= 0.0:
                raise ValueError(f"atom probabilities must be positive, got {p!r}")
            if not math.isfinite(z.y):
                raise ValueError(f"atom label must be finite, got {z.y!r}")
        if abs(total - 1.0) > PROB_ATOL:
            raise ValueError(f"atom probabilities must sum to 1 within {PROB_ATOL}, got {total!r}")
        object.__setattr__(self, "atoms", atoms)

    @cached_property
    def xs(self) -> np.ndarray:
        return np.asarray([z.x for z, _ in self.atoms])

    @cached_property
    def ys(self) -> np.ndarray:
        return np.asarray([z.y for z, _ in self.atoms], dtype=float)

    @cached_property
    def ps(self) -> np.ndarray:
        return np.asarray([p for _, p in self.atoms], dtype=float)

    def validate_for(self, spec: LossSpec) -> None:
        """Check every atom is legal under ``spec`` (labels, bounds)."""
        if spec.kind in PHI_KINDS:
            bad = [float(y) for y in self.ys if y not in (-1.0, 1.0)]
            if bad:
                raise ValueError(f"margin losses require labels in {{-1, +1}}, got {bad[:3]}")
        elif np.max(np.abs(self.ys)) > spec.y_bound:
            raise ValueError(
                f"labels exceed declared y_bound {spec.y_bound!r}: max |y| = {np.max(np.abs(self.ys))!r}"
            )

    def sample_indices(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` i.i.d. atom indices."""
        return rng.choice(len(self.atoms), size=size, p=self.ps)

    def sample(self, rng: np.random.Generator, size: int) -> list:
        """Draw ``size`` i.i.d. observations as LabeledSamples."""
        idx = self.sample_indices(rng, size)
        return [self.atoms[i][0] for i in idx]


@dataclass(frozen=True)
class RiskReport:
    """An oracle value with its minimizer and optimality certificate.

    ``oracle_kind`` is ``"MS"`` (selection over the dictionary, minimizer
    is an index, certificate 0 by enumeration) or ``"C"`` (convex hull,
    minimizer is a weight vector, certificate is the vertex gap at it).
    """

    risk_value: float
    oracle_kind: str
    minimizer: object
    gap_certificate: float


class ConvergenceError(RuntimeError):
    """Raised when the convex oracle cannot certify the requested gap."""

    def __init__(self, message: str, best_weights: np.ndarray, best_risk: float, gap: float):
        super().__init__(message)
        self.best_weights = best_weights
        self.best_risk = best_risk
        self.gap = gap


def _atom_design(dictionary: Dictionary, dist: FiniteDistribution) -> np.ndarray:
    """Matrix ``F[a, j] = f_j(x_a)`` over the atoms of ``dist``."""
    return np.stack([np.asarray(dictionary.values_at(z.x), dtype=float) for z, _ in dist.atoms])


def exact_risk(theta_or_index, dictionary: Dictionary, spec: LossSpec, dist: FiniteDistribution) -> float:
    """Exact population risk of a vertex or mixture under ``dist``.

    An integer selects the single function ``f_j``; a weight vector selects
    the mixture.  The expectation over atoms uses compensated summation,
    so the result is exact up to one floating rounding.
    """
    dist.validate_for(spec)
    if isinstance(theta_or_index, (int, np.integer)):
        j = int(theta_or_index)
        if not 0 <= j < dictionary.size:
            raise ValueError(f"function index {j} outside dictionary of size {dictionary.size}")
        values = np.asarray([dictionary.evaluate(j, z.x) for z, _ in dist.atoms], dtype=float)
    else:
        theta = validate_weights(theta_or_index, size=dictionary.size)
        design = _atom_design(dictionary, dist)
        values = design @ theta
    losses = _loss_values(spec.kind, dist.ys, values)
    return math.fsum((dist.ps * losses).tolist())


def ms_oracle(dictionary: Dictionary, spec: LossSpec, dist: FiniteDistribution) -> RiskReport:
    """Best single dictionary function, by exhaustive enumeration.

    Ties break to the lowest index.
    """
    risks = [exact_risk(j, dictionary, spec, dist) for j in range(dictionary.size)]
    j = int(np.argmin(risks))
    return RiskReport(risk_value=risks[j], oracle_kind="MS", minimizer=j, gap_certificate=0.0)


def _risk_closures(dictionary, spec, dist):
    """Fast exact risk/gradient closures over the atom design matrix."""
    design = _atom_design(dictionary, dist)
    ys = dist.ys
    ps = dist.ps
    kind = spec.kind

    def risk(theta):
        return float(ps @ _loss_values(kind, ys, design @ theta))

    if kind == PHI_HINGE:

        def grad(theta):
            margins = 1.0 - ys * (design @ theta)
            active = (margins > 0.0).astype(float)
            return design.T @ (ps * active * (-ys))

    else:

        def grad(theta):
            mix = design @ theta
            return design.T @ (ps * _grad_coef(kind, ys, mix))

    return risk, grad


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.shape[0] + 1)
    rho = np.nonzero(u * idx > (css - 1.0))[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _vertex_gap(theta: np.ndarray, g: np.ndarray) -> float:
    """Certified suboptimality bound ``theta . g - min_j g_j`` of a convex risk."""
    return float(theta @ g - g.min())


def _minimize_smooth(risk, grad, m, tol, max_iter):
    """Accelerated projected gradient with backtracking and restarts.

    Acceleration is dropped after an initial phase: the momentum steps
    make early progress but oscillate near the optimum, while plain
    backtracked projected-gradient steps are monotone and let the vertex
    gap settle below the certification tolerance.
    """
    accel_phase = min(2000, max_iter)
    theta = uniform_weights(m)
    momentum = theta.copy()
    t_acc = 1.0
    lips = 1.0
    f_theta = risk(theta)
    best_theta, best_f, best_gap = theta, f_theta, math.inf
    for it in range(max_iter):
        accelerated = it < accel_phase
        point = momentum if accelerated else theta
        g_y = grad(point)
        f_y = risk(point)
        while True:
            cand = _project_simplex(point - g_y / lips)
            diff = cand - point
            quad = f_y + float(g_y @ diff) + 0.5 * lips * float(diff @ diff)
            f_cand = risk(cand)
            if f_cand <= quad + 1e-15 or lips > 1e18:
                break
            lips *= 2.0
        if accelerated:
            if f_cand > f_theta:
                momentum = theta.copy()
                t_acc = 1.0
            else:
                t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
                momentum = _project_simplex(cand + ((t_acc - 1.0) / t_next) * (cand - theta))
                t_acc = t_next
                theta, f_theta = cand, f_cand
        elif f_cand <= f_theta:
            theta, f_theta = cand, f_cand
        g_theta = grad(theta)
        gap = _vertex_gap(theta, g_theta)
        if f_theta < best_f or gap < best_gap:
            best_theta, best_f, best_gap = theta, f_theta, min(gap, best_gap)
        if gap <= tol:
            return theta, gap
        if it % 50 == 49:
            # let oversized curvature estimates relax between backtracks
            lips = max(lips * 0.5, 1e-12)
    return None, (best_theta, best_f, best_gap)


def _minimize_hinge(risk, grad, m, tol, max_iter):
    """Multiplicative-weights subgradient descent with escalating steps.

    On [-1, 1]-valued dictionaries the hinge risk is affine over the
    simplex, so the subgradient is constant and escalating steps drive the
    weights onto the minimizing vertex set geometrically.
    """
    theta = uniform_weights(m)
    best_theta, best_f, best_gap = theta, risk(theta), math.inf
    step = 1.0
    for _ in range(max_iter):
        g = grad(theta)
        gap = _vertex_gap(theta, g)
        f = risk(theta)
        if f < best_f:
            best_theta, best_f, best_gap = theta, f, gap
        if gap <= tol:
            return theta, gap
        shifted = (g - g.min()) * step
        with np.errstate(under="ignore"):
            w = theta * np.exp(-shifted)
        total = w.sum()
        if total <= 0.0:
            w = np.where(shifted == shifted.min(), 1.0, 0.0)
            total = w.sum()
        theta = w / total
        step *= 2.0
        if step > 1e300:
            step = 1e300
    return None, (best_theta, best_f, best_gap)


def c_oracle(
    dictionary: Dictionary,
    spec: LossSpec,
    dist: FiniteDistribution,
    tol: float = 1e-8,
    max_iter: int = 1_000_000,
) -> RiskReport:
    """Infimum of the exact risk over all dictionary mixtures.

    Minimizes ``theta -> R(f_theta)`` over the simplex and certifies the
    result with the vertex gap at the exact risk gradient; on success the
    certificate is at most ``tol``.  Failure to certify within the
    iteration cap raises ``ConvergenceError`` carrying the best iterate.
    """
    if not math.isfinite(tol) or tol <= 0.0:
        raise ValueError(f"tol must be positive and finite, got {tol!r}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    dist.validate_for(spec)
    risk, grad = _risk_closures(dictionary, spec, dist)
    m = dictionary.size
    if spec.kind == PHI_HINGE:
        theta, result = _minimize_hinge(risk, grad, m, tol, max_iter)
    else:
        theta, result = _minimize_smooth(risk, grad, m, tol, max_iter)
    if theta is None:
        best_theta, best_f, best_gap = result
        raise ConvergenceError(
            f"convex oracle failed to certify gap <= {tol:g} within {max_iter} iterations "
            f"(best certified gap {best_gap:g})",
            best_weights=best_theta,
            best_risk=best_f,
            gap=best_gap,
        )
    gap = result
    return RiskReport(
        risk_value=exact_risk(theta, dictionary, spec, dist),
        oracle_kind="C",
        minimizer=theta,
        gap_certificate=float(gap),
    )


def optimal_rate(n: int, m: int, kind: str) -> float:
    """Reference rate for a sample size and dictionary size.

    Convex-hull aggregation (``kind="C"``) switches branch at ``m = sqrt(n)``
    (boundary inclusive in the first branch): ``m / n`` for small
    dictionaries, ``sqrt(log(m / sqrt(n) + 1) / n)`` for large ones.
    Selection aggregation (``kind="MS"``) is ``log(m) / n``.  Logs are
    natural.
    """
    if n < 1:
        raise ValueError(f"sample size must be at least 1, got {n}")
    if m < 2:
        raise ValueError(f"dictionary size must be at least 2, got {m}")
    if kind == "C":
        if m * m <= n:
            return m / n
        return math.sqrt(math.log(m / math.sqrt(n) + 1.0) / n)
    if kind == "MS":
        return math.log(m) / n
    raise ValueError(f"unknown oracle kind {kind!r}; expected 'MS' or 'C'")


def excess_risk(achieved: float, oracle) -> float:
    """Achieved risk minus the oracle value.

    ``oracle`` may be a plain risk value or a ``RiskReport``.
    """
    oracle_value = getattr(oracle, "risk_value", oracle)
    return float(achieved) - float(oracle_value)
