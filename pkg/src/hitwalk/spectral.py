"""Trace-recursion engine for vertex-transitive graphs.

On a d-regular vertex-transitive graph every node carries the same share
of closed walks, Trace(A^k)/V, and the first-passage matrices
M_n[i][j] = P(tau_{i,j} = n) satisfy

    M_0 = I,
    M_n = (A/d)^n - sum_{k=1..n} t_k M_{n-k},   t_k = Trace(A^k)/(V d^k).

Summing the recursion gives the Cauchy-product identity
sum_{k=0..n} t_k M_{n-k} = (A/d)^n, and generating functions
sum_n (M_n)_{ij} t^n are rational with numerator V * adj(I - (t/d)A)_{ij}
and denominator det(I - (t/d)A) * V * sum_k t_k t^k (a polynomial of
degree V-1).  No eigenvalues are ever computed individually: everything
flows through traces and interpolated characteristic polynomials.

Vertex-transitivity is not verified algorithmically; it holds by
construction for the Cayley presets and is otherwise asserted by the
caller.  A cheap necessary condition (all rows of M_n share one sorted
multiset) emits a warning when it fails.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import HypothesisError, InvalidParameterError
from .graphs import Graph
from .linalg import (
    DEFAULT_TOLERANCES,
    Tolerances,
    chebyshev_abscissae,
    interpolate_poly,
    solve,
)

__all__ = [
    "TracePowerTable",
    "MnSequence",
    "RationalGF",
    "VertexTransitivityWarning",
    "trace_powers",
    "mn_sequence",
    "gf_series",
    "rational_gf",
]

_COEFF_TRIM = 1e-10


class VertexTransitivityWarning(UserWarning):
    """Necessary condition for vertex-transitivity failed on some M_n."""


def _regular_degree(graph: Graph) -> int:
    d = graph.regular_degree()
    if d is None:
        raise HypothesisError("graph is not regular; trace recursion does not apply")
    if d == 0:
        raise HypothesisError("graph has no edges")
    return d


@dataclass(frozen=True)
class TracePowerTable:
    """Normalized closed-walk counts t_k = Trace(A^k)/(V d^k), k = 0..N."""

    values: np.ndarray
    node_count: int
    degree: int

    def __post_init__(self) -> None:
        self.values.setflags(write=False)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MnSequence:
    """First-passage matrices M_0..M_N for the simple walk."""

    matrices: np.ndarray  # (N+1, V, V)
    node_count: int
    degree: int

    def __post_init__(self) -> None:
        self.matrices.setflags(write=False)

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def entry(self, i: int, j: int) -> np.ndarray:
        """Series (M_n)_{i,j} for n = 0..N."""
        return self.matrices[:, i, j]


def trace_powers(graph: Graph, n: int) -> TracePowerTable:
    """Iterated-product trace table for a regular graph."""
    if n < 0:
        raise InvalidParameterError("need n >= 0")
    d = _regular_degree(graph)
    v = graph.node_count
    b = graph.adjacency_matrix() / d
    values = np.empty(n + 1)
    values[0] = 1.0
    power = np.eye(v)
    for k in range(1, n + 1):
        power = power @ b
        values[k] = np.trace(power) / v
    if np.any(np.abs(values) > 1.0 + 1e-9):
        raise InvalidParameterError("normalized trace exceeded 1; inputs inconsistent")
    return TracePowerTable(values=values, node_count=v, degree=d)


def _rows_share_multiset(m: np.ndarray, tol: float = 1e-9) -> bool:
    sorted_rows = np.sort(m, axis=1)
    return bool(np.max(np.abs(sorted_rows - sorted_rows[0])) <= tol)


def mn_sequence(graph: Graph, n: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> MnSequence:
    """M_0..M_n by the trace recursion, with cached powers of A/d."""
    if n < 0:
        raise InvalidParameterError("need n >= 0")
    d = _regular_degree(graph)
    v = graph.node_count
    b = graph.adjacency_matrix() / d
    traces = trace_powers(graph, n).values
    mats = np.empty((n + 1, v, v))
    mats[0] = np.eye(v)
    power = np.eye(v)
    warned = False
    for step in range(1, n + 1):
        power = power @ b
        acc = power.copy()
        for k in range(1, step + 1):
            acc -= traces[k] * mats[step - k]
        mats[step] = acc
        if not warned and not _rows_share_multiset(acc):
            warnings.warn(
                f"rows of M_{step} have different entry multisets; "
                "the graph is likely not vertex-transitive and these values "
                "are not first-passage probabilities",
                VertexTransitivityWarning,
                stacklevel=2,
            )
            warned = True
    return MnSequence(matrices=mats, node_count=v, degree=d)


def gf_series(
    graph: Graph, i: int, j: int, n: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Taylor coefficients of sum_n P(tau_{i,j} = n) t^n for n = 0..N."""
    v = graph.node_count
    if not (0 <= i < v and 0 <= j < v):
        raise InvalidParameterError("node indices out of range")
    return mn_sequence(graph, n, tolerances).entry(i, j).copy()


@dataclass(frozen=True)
class RationalGF:
    """Rational generating function for one (start, target) pair.

    Coefficient vectors are in ascending powers of t; denominator(0)
    equals the node count.  ``series(n)`` re-expands the Taylor series
    by long division for cross-checks against the trace recursion.
    """

    numerator: np.ndarray
    denominator: np.ndarray
    start: int
    target: int

    def __post_init__(self) -> None:
        self.numerator.setflags(write=False)
        self.denominator.setflags(write=False)

    def series(self, n: int) -> np.ndarray:
        if abs(self.denominator[0]) < 1e-14:
            raise InvalidParameterError("denominator vanishes at t = 0")
        num = self.numerator
        den = self.denominator
        out = np.zeros(n + 1)
        for m in range(n + 1):
            acc = num[m] if m < len(num) else 0.0
            for k in range(1, min(m, len(den) - 1) + 1):
                acc -= den[k] * out[m - k]
            out[m] = acc / den[0]
        return out


def _trim(coeffs: np.ndarray) -> np.ndarray:
    out = np.where(np.abs(coeffs) < _COEFF_TRIM, 0.0, coeffs)
    last = np.nonzero(out)[0]
    if len(last) == 0:
        return out[:1]
    return out[: last[-1] + 1]


def rational_gf(
    graph: Graph, i: int, j: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> RationalGF:
    """Numerator/denominator polynomials of the hitting generating function.

    Both are recovered by sampling: the numerator as the adjugate entry
    V * det(I - (t/d)A) * (I - (t/d)A)^{-1}_{ij} at V+1 abscissae, the
    denominator as the interpolated characteristic polynomial times the
    truncated power-sum series V * sum_k t_k t^k.  Coefficients below
    1e-10 are trimmed.
    """
    v = graph.node_count
    if not (0 <= i < v and 0 <= j < v):
        raise InvalidParameterError("node indices out of range")
    d = _regular_degree(graph)
    a = graph.adjacency_matrix()
    ts = chebyshev_abscissae(v + 1)
    unit_j = np.zeros(v)
    unit_j[j] = 1.0
    num_samples = []
    char_samples = []
    for t in ts:
        m = np.eye(v) - (t / d) * a
        det = float(np.linalg.det(m))
        x = solve(m, unit_j, tolerances)
        num_samples.append((t, v * det * x[i]))
        char_samples.append((t, det))
    num_fit = interpolate_poly(num_samples, v - 1, tolerances)
    char_fit = interpolate_poly(char_samples, v, tolerances)
    power_sums = v * trace_powers(graph, v - 1).values  # sum (lambda/d)^k
    den_full = np.convolve(char_fit.coefficients, power_sums)[:v]
    return RationalGF(
        numerator=_trim(num_fit.coefficients),
        denominator=_trim(den_full),
        start=i,
        target=j,
    )
