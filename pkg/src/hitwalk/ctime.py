"""Continuous-time walk engine via uniformization.

Transitions fire at unit Poisson rate, so by time t the walk has made n
discrete steps with probability e^{-t} t^n / n! and

    P(tau_c <= t) = sum_n pois(n; t) * P(hit within n steps),
    pdf(t)        = sum_n pois(n; t) * Q^n P1.

Series are truncated once the Poisson tail mass drops below the
requested tolerance; weights are computed in log space so large t does
not underflow.  Other transition rates are a pure time rescale left to
callers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .hitting import AbsorbingSystem
from .linalg import DEFAULT_TOLERANCES, Tolerances, matpow_apply, solve

__all__ = ["CTimeEvaluation", "ct_cdf", "ct_pdf", "ct_moments", "ct_evaluate"]


def _poisson_weight(n: int, t: float) -> float:
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(t) - t - math.lgamma(n + 1))


def _truncation_index(t: float, tol: float) -> int:
    """Smallest N with Poisson(<= N; t) >= 1 - tol."""
    if t == 0.0:
        return 0
    total = 0.0
    n = 0
    # the mass between 0 and t + 12*sqrt(t) + 60 covers any tol >= 1e-16
    limit = int(t + 12.0 * math.sqrt(t) + 60.0)
    while n <= limit:
        total += _poisson_weight(n, t)
        if total >= 1.0 - tol:
            return n
        n += 1
    return limit


def ct_cdf(system: AbsorbingSystem, t: float, tol: float = 1e-9) -> np.ndarray:
    """P(tau_c <= t) per start, by Poisson-weighted partial sums."""
    return ct_evaluate(system, [t], tol).cdf[0]


def ct_pdf(system: AbsorbingSystem, t: float, tol: float = 1e-9) -> np.ndarray:
    """Density of the absorption time per start: sum_n pois(n; t) Q^n P1."""
    return ct_evaluate(system, [t], tol).pdf[0]


@dataclass(frozen=True)
class CTimeEvaluation:
    """CDF and PDF values on a time grid, one column per start state."""

    times: np.ndarray
    cdf: np.ndarray  # (len(times), V-1)
    pdf: np.ndarray
    truncation: int
    states: tuple[int, ...]

    def __post_init__(self) -> None:
        for arr in (self.times, self.cdf, self.pdf):
            arr.setflags(write=False)
        if np.any(self.cdf < -1e-12) or np.any(self.cdf > 1.0 + 1e-9):
            raise InvalidParameterError("CDF values must lie in [0, 1]")
        if np.any(self.pdf < -1e-12):
            raise InvalidParameterError("PDF values must be nonnegative")


def ct_evaluate(
    system: AbsorbingSystem,
    times,
    tol: float = 1e-9,
) -> CTimeEvaluation:
    """Evaluate CDF and PDF on a grid, sharing the Q-power sequence.

    The discrete vectors Q^n P1 and their partial sums are computed once
    up to the truncation index of the largest time; each grid point then
    only recombines them with its own Poisson weights.
    """
    times = np.array([float(t) for t in times])
    if times.size == 0:
        raise InvalidParameterError("need at least one time point")
    if np.any(times < 0.0):
        raise InvalidParameterError("times must be nonnegative")
    if not 0.0 < tol < 1.0:
        raise InvalidParameterError("tol must be in (0, 1)")
    n_max = _truncation_index(float(times.max()), tol)
    vectors = np.empty((n_max + 1, system.size))
    vectors[0] = system.first_step
    for n in range(1, n_max + 1):
        vectors[n] = matpow_apply(system.q_matrix, vectors[n - 1], 1)
    # partial[n] = sum_{k=1..n} Q^{k-1} P1 = P(hit within n steps)
    partial = np.vstack([np.zeros(system.size), np.cumsum(vectors, axis=0)[:-1]])
    cdf_rows = np.empty((times.size, system.size))
    pdf_rows = np.empty((times.size, system.size))
    for row, t in enumerate(times):
        weights = np.array([_poisson_weight(n, t) for n in range(n_max + 1)])
        cdf_rows[row] = weights @ partial
        pdf_rows[row] = weights @ vectors
    cdf_rows = np.clip(cdf_rows, 0.0, None)
    pdf_rows = np.clip(pdf_rows, 0.0, None)
    return CTimeEvaluation(
        times=times,
        cdf=cdf_rows,
        pdf=pdf_rows,
        truncation=n_max,
        states=system.index_map,
    )


def ct_moments(
    system: AbsorbingSystem,
    order: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Exact continuous-time moments per start.

    order 1: (I-Q)^{-2} P1, which collapses to the discrete mean because
    P1 = (I-Q) 1.  order 2: 2 (I-Q)^{-3} P1, which equals the discrete
    second moment plus the mean (the two clocks share their first moment
    only; the exponential holding times add exactly one mean at second
    order).
    """
    if order not in (1, 2):
        raise InvalidParameterError("order must be 1 or 2")
    eye = np.eye(system.size)
    a = eye - system.q_matrix
    x = solve(a, system.first_step, tolerances)
    x = solve(a, x, tolerances)
    if order == 1:
        return x
    return 2.0 * solve(a, x, tolerances)
