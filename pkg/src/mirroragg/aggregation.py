"""Mirror-averaging aggregation over a finite dictionary.

Two algorithms share one recursion shape.  Both maintain a score vector
``zeta`` in the dual space, mirror it into the simplex with the Gibbs map,
and output the step-weighted average of the mirrored weights:

* ``ma_run`` (gradient form): step ``i`` adds ``gamma_i`` times the
  simplex gradient of the loss at the previous mirrored point, then
  mirrors at temperature ``beta_i``.
* ``lma_run`` (linearized form): step ``i`` adds the vector of
  per-function losses, with unit steps and a constant temperature.  This
  equals the gradient form applied to the linear surrogate risk
  ``theta -> theta . u(z)``.

The averaged output uses the mirrored weights from *before* each update:
step ``i`` contributes ``theta_bar_{i-1}``.  Getting this off by one
changes nothing per-step but silently degrades the aggregation rate, so
the hand-traced tests pin it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .losses import LabeledSample, LossSpec, linearized_loss_vector, loss_gradient_theta
from .simplex import Dictionary, gibbs_map, mixture_value, renormalize, uniform_weights

__all__ = [
    "Schedule",
    "AggregatorState",
    "MixturePredictor",
    "ma_init",
    "ma_step",
    "ma_run",
    "lma_run",
    "erm_select",
    "averaged_weights",
]


@dataclass(frozen=True)
class Schedule:
    """Step sizes ``gamma_i`` and temperatures ``beta_i`` for ``i >= 1``.

    Both callables must return positive finite values for every step.
    """

    beta_at: Callable[[int], float]
    gamma_at: Callable[[int], float]
    descriptor: str = "custom"

    @staticmethod
    def constant(beta: float, gamma: float = 1.0) -> "Schedule":
        """Constant temperature and step size."""
        _require_positive("beta", beta)
        _require_positive("gamma", gamma)
        return Schedule(lambda i: beta, lambda i: gamma, f"constant(beta={beta:g}, gamma={gamma:g})")

    @staticmethod
    def sqrt_growth(beta0: float, gamma: float = 1.0) -> "Schedule":
        """Unit-type steps with ``beta_i = beta0 * sqrt(i)``.

        The default choice for the gradient algorithm: with
        ``beta0 = sqrt(Qstar / log M)`` it balances the entropy and
        gradient-noise terms of the excess-risk envelope.
        """
        _require_positive("beta0", beta0)
        _require_positive("gamma", gamma)
        return Schedule(
            lambda i: beta0 * math.sqrt(i),
            lambda i: gamma,
            f"sqrt_growth(beta0={beta0:g}, gamma={gamma:g})",
        )


def _require_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass
class AggregatorState:
    """State of one aggregation run after ``step`` observations.

    ``weighted_sum`` accumulates ``gamma_i * theta_bar_{i-1}`` and sums to
    ``gamma_total``, so the averaged output is ``weighted_sum / gamma_total``.
    """

    step: int
    scores: np.ndarray
    mirrored: np.ndarray
    weighted_sum: np.ndarray
    gamma_total: float


@dataclass(frozen=True)
class MixturePredictor:
    """Convex mixture of dictionary functions, callable at design points."""

    dictionary: Dictionary
    weights: np.ndarray

    def __call__(self, x) -> float:
        return mixture_value(self.weights, self.dictionary, x)


def ma_init(m: int) -> AggregatorState:
    """Fresh state: zero scores, uniform mirrored weights, empty average."""
    if m < 2:
        raise ValueError(f"aggregation needs at least two dictionary functions, got m={m}")
    return AggregatorState(
        step=0,
        scores=np.zeros(m),
        mirrored=uniform_weights(m),
        weighted_sum=np.zeros(m),
        gamma_total=0.0,
    )


def ma_step(
    state: AggregatorState,
    z: LabeledSample,
    spec: LossSpec,
    dictionary: Dictionary,
    sched: Schedule,
) -> AggregatorState:
    """One observation of the gradient-form recursion; returns a new state."""
    i = state.step + 1
    gamma = float(sched.gamma_at(i))
    beta = float(sched.beta_at(i))
    _require_positive(f"gamma_at({i})", gamma)
    _require_positive(f"beta_at({i})", beta)
    grad = loss_gradient_theta(spec, dictionary, z, state.mirrored)
    scores = state.scores + gamma * grad
    return AggregatorState(
        step=i,
        scores=scores,
        mirrored=gibbs_map(scores, beta),
        weighted_sum=state.weighted_sum + gamma * state.mirrored,
        gamma_total=state.gamma_total + gamma,
    )


def averaged_weights(state: AggregatorState) -> np.ndarray:
    """Averaged output ``weighted_sum / gamma_total``; undefined before step 1."""
    if state.step < 1 or state.gamma_total <= 0.0:
        raise ValueError("averaged output is undefined before the first step")
    return renormalize(state.weighted_sum)


def ma_run(
    data: Sequence[LabeledSample],
    spec: LossSpec,
    dictionary: Dictionary,
    sched: Schedule,
) -> tuple[np.ndarray, MixturePredictor]:
    """Run the gradient-form algorithm over ``data``.

    Returns the averaged weights and the induced mixture predictor.
    Requires a differentiable loss and at least one observation.
    """
    if len(data) == 0:
        raise ValueError("need at least one observation")
    state = ma_init(dictionary.size)
    for z in data:
        state = ma_step(state, z, spec, dictionary, sched)
    theta = averaged_weights(state)
    return theta, MixturePredictor(dictionary, theta)


def lma_run(
    data: Sequence[LabeledSample],
    spec: LossSpec,
    dictionary: Dictionary,
    beta: float,
) -> tuple[np.ndarray, MixturePredictor]:
    """Run the linearized algorithm over ``data`` at constant temperature.

    Scores accumulate the per-function loss vectors; any loss kind is
    accepted, hinge included, because no derivative is taken.
    """
    if len(data) == 0:
        raise ValueError("need at least one observation")
    _require_positive("beta", beta)
    m = dictionary.size
    if m < 2:
        raise ValueError(f"aggregation needs at least two dictionary functions, got m={m}")
    scores = np.zeros(m)
    mirrored = uniform_weights(m)
    weighted_sum = np.zeros(m)
    for z in data:
        weighted_sum = weighted_sum + mirrored
        scores = scores + linearized_loss_vector(spec, dictionary, z)
        mirrored = gibbs_map(scores, beta)
    theta = renormalize(weighted_sum)
    return theta, MixturePredictor(dictionary, theta)


def erm_select(
    data: Sequence[LabeledSample],
    spec: LossSpec,
    dictionary: Dictionary,
) -> tuple[int, float]:
    """Index and empirical risk of the empirical risk minimizer.

    Ties break to the lowest index (the first minimum found).
    """
    if len(data) == 0:
        raise ValueError("need at least one observation")
    totals = np.zeros(dictionary.size)
    for z in data:
        totals += linearized_loss_vector(spec, dictionary, z)
    emp = totals / len(data)
    j = int(np.argmin(emp))
    return j, float(emp[j])
