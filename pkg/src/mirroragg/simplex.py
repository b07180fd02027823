"""Simplex weights, the Gibbs mirror map, and dictionary mixtures.

Shared numeric substrate for the aggregation routines: probability
vectors over a finite dictionary, the softmin-style Gibbs map that sends
accumulated score vectors into the simplex, and evaluation of convex
mixtures of dictionary functions.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "uniform_weights",
    "validate_weights",
    "renormalize",
    "gibbs_map",
    "mixture_value",
    "Dictionary",
    "TabularDictionary",
    "CallableDictionary",
]

SIMPLEX_ATOL = 1e-12


def uniform_weights(m: int) -> np.ndarray:
    """Uniform probability vector of length ``m``."""
    if m < 1:
        raise ValueError(f"weight vector needs at least one component, got m={m}")
    return np.full(m, 1.0 / m)


def validate_weights(theta, size: int | None = None, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Check that ``theta`` is a probability vector and return it as an array.

    Parameters
    ----------
    theta : array_like
        Candidate weight vector.
    size : int, optional
        Required length; mismatch is an error.
    atol : float
        Absolute tolerance on the sum-to-one constraint.
    """
    arr = np.asarray(theta, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"weights must be a 1-d vector, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ValueError(f"expected {size} weights, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("weights must be finite")
    if np.any(arr < 0.0):
        raise ValueError("weights must be nonnegative")
    total = float(arr.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"weights must sum to 1 within {atol}, got sum {total!r}")
    return arr


def renormalize(raw) -> np.ndarray:
    """Scale a nonnegative vector to sum to one.

    Components that are exactly zero stay exactly zero; no flooring is
    applied, so weights may be arbitrarily small.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector must be finite")
    if np.any(arr < 0.0):
        raise ValueError("vector must be nonnegative")
    total = float(arr.sum())
    if total <= 0.0:
        raise ValueError("cannot renormalize a vector with nonpositive sum")
    return arr / total


def gibbs_map(scores, beta: float) -> np.ndarray:
    """Map a score vector to simplex weights by softmin at temperature ``beta``.

    Component ``j`` of the result is proportional to ``exp(-scores[j] / beta)``,
    so lower scores receive larger weights.  The largest exponent is shifted
    to zero before exponentiating, which rules out overflow for any finite
    input.

    Parameters
    ----------
    scores : array_like
        Finite score vector (accumulated gradients or losses).
    beta : float
        Positive temperature.  Large ``beta`` flattens the output toward
        uniform; small ``beta`` concentrates it on the componentwise minimum.

    Returns
    -------
    numpy.ndarray
        Probability vector of the same length as ``scores``.
    """
    if not np.isfinite(beta) or beta <= 0.0:
        raise ValueError(f"temperature beta must be a positive finite number, got {beta!r}")
    arr = np.asarray(scores, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError(f"scores must be a nonempty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores must be finite")
    z = arr / beta
    w = np.exp(-(z - z.min()))
    return w / w.sum()


def mixture_value(theta, dictionary: "Dictionary", x) -> float:
    """Value at ``x`` of the convex mixture of dictionary functions under ``theta``."""
    arr = validate_weights(theta, size=dictionary.size)
    vals = dictionary.values_at(x)
    return float((arr * vals).sum())


class Dictionary:
    """Finite dictionary of real-valued functions with a declared range bound.

    Subclasses provide ``evaluate``; ``values_at`` has a generic fallback.
    Evaluations must be deterministic and bounded by ``range_bound`` in
    absolute value.
    """

    size: int
    range_bound: float

    def evaluate(self, j: int, x) -> float:
        raise NotImplementedError

    def values_at(self, x) -> np.ndarray:
        """Vector ``(f_1(x), ..., f_M(x))``."""
        return np.array([self.evaluate(j, x) for j in range(self.size)], dtype=float)


class TabularDictionary(Dictionary):
    """Dictionary stored as an ``(M, K)`` table over integer design points."""

    def __init__(self, values, range_bound: float = 1.0):
        table = np.asarray(values, dtype=float)
        if table.ndim != 2 or table.shape[0] < 1 or table.shape[1] < 1:
            raise ValueError(f"values must be a nonempty (M, K) table, got shape {table.shape}")
        if not np.all(np.isfinite(table)):
            raise ValueError("dictionary values must be finite")
        if not np.isfinite(range_bound) or range_bound < 0.0:
            raise ValueError(f"range_bound must be a finite nonnegative number, got {range_bound!r}")
        if table.size and np.max(np.abs(table)) > range_bound:
            raise ValueError(
                f"dictionary values exceed declared range bound {range_bound!r}"
            )
        self.values = table
        self.size = table.shape[0]
        self.grid_size = table.shape[1]
        self.range_bound = float(range_bound)

    def evaluate(self, j: int, x) -> float:
        return float(self.values[j, int(x)])

    def values_at(self, x) -> np.ndarray:
        return self.values[:, int(x)]


class CallableDictionary(Dictionary):
    """Dictionary of closed-form functions given as callables.

    With ``check=True`` every evaluation is verified against the declared
    range bound; the check is meant for tests and debugging, not hot loops.
    """

    def __init__(self, funcs, range_bound: float, check: bool = False):
        funcs = list(funcs)
        if not funcs:
            raise ValueError("dictionary needs at least one function")
        if not np.isfinite(range_bound) or range_bound < 0.0:
            raise ValueError(f"range_bound must be a finite nonnegative number, got {range_bound!r}")
        self._funcs = funcs
        self.size = len(funcs)
        self.range_bound = float(range_bound)
        self._check = bool(check)

    def evaluate(self, j: int, x) -> float:
        v = float(self._funcs[j](x))
        if self._check and abs(v) > self.range_bound + 1e-12:
            raise ValueError(
                f"f_{j}({x!r}) = {v!r} exceeds declared range bound {self.range_bound!r}"
            )
        return v
