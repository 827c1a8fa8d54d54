"""Small dense linear-algebra kernel used by every engine.

Only three primitives are needed: pivoted linear solves, repeated
matrix-vector products, and Vandermonde polynomial fits.  There is
deliberately no eigensolver; spectral quantities elsewhere are reached
through trace power sums and interpolated characteristic polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, InvalidParameterError, SingularMatrixError

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "solve",
    "matpow_apply",
    "PolyFit",
    "interpolate_poly",
    "chebyshev_abscissae",
]

# Vandermonde condition numbers beyond this are treated as meaningless.
_MAX_VANDERMONDE_COND = 1e13


@dataclass(frozen=True)
class Tolerances:
    """Numeric tolerances threaded through the engines.

    solve_residual : max-norm residual allowed per solved system
    series_tail    : leftover mass at which series iterations may stop
    imaginary_discard : largest imaginary part accepted on real outputs
    """

    solve_residual: float = 1e-10
    series_tail: float = 1e-12
    imaginary_discard: float = 1e-9

    def __post_init__(self) -> None:
        for name in ("solve_residual", "series_tail", "imaginary_discard"):
            if not getattr(self, name) > 0.0:
                raise InvalidParameterError(f"{name} must be strictly positive")


DEFAULT_TOLERANCES = Tolerances()


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{what} contains non-finite entries")


def solve(a, b, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Solve ``a @ x = b`` with partial pivoting and a residual guarantee.

    Accepts real or complex data; ``b`` may be a vector or a matrix of
    right-hand sides.  Raises :class:`SingularMatrixError` when the system
    is singular to tolerance or the residual bound
    ``max|a@x - b| <= solve_residual * (1 + max|b|)`` cannot be met.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameterError("coefficient matrix must be square")
    if b.shape[0] != a.shape[0]:
        raise InvalidParameterError("right-hand side has mismatched length")
    _require_finite(a, "coefficient matrix")
    _require_finite(b, "right-hand side")
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    residual = np.max(np.abs(a @ x - b))
    bound = tolerances.solve_residual * (1.0 + np.max(np.abs(b)))
    if not residual <= bound:
        raise SingularMatrixError(
            f"solve residual {residual:.3e} exceeds bound {bound:.3e}"
        )
    return x


def matpow_apply(m, v, n: int) -> np.ndarray:
    """Return ``m^n @ v`` using n successive matrix-vector products.

    Never forms an explicit matrix power.  ``n = 0`` returns a copy of
    ``v`` unchanged.
    """
    m = np.asarray(m)
    v = np.asarray(v)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidParameterError("matrix must be square")
    if v.shape[0] != m.shape[1]:
        raise InvalidParameterError("vector length does not match matrix")
    if n < 0:
        raise InvalidParameterError("power must be nonnegative")
    out = v.copy()
    for _ in range(n):
        out = m @ out
    _require_finite(out, "matrix power product")
    return out


@dataclass(frozen=True)
class PolyFit:
    """Least-squares polynomial fit with its achieved residual."""

    coefficients: np.ndarray  # ascending powers, length degree+1
    max_abs_residual: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coefficients)


def interpolate_poly(points, degree: int, tolerances: Tolerances = DEFAULT_TOLERANCES) -> PolyFit:
    """Fit ``value = p(t)`` of the given degree through sample points.

    ``points`` is a sequence of ``(t, value)`` pairs with at least
    ``degree + 1`` distinct abscissae.  The fit is a Vandermonde least
    squares solve; on exactly polynomial data the residual is bounded by
    the solve tolerance.  Raises :class:`ConditioningError` when the
    Vandermonde system is too ill-conditioned to trust.
    """
    pts = list(points)
    if degree < 0:
        raise InvalidParameterError("degree must be nonnegative")
    ts = np.array([p[0] for p in pts], dtype=float)
    values = np.array([p[1] for p in pts], dtype=float)
    if len(set(ts.tolist())) < degree + 1:
        raise InvalidParameterError(
            f"need at least {degree + 1} distinct abscissae, got {len(set(ts.tolist()))}"
        )
    vander = np.vander(ts, degree + 1, increasing=True)
    cond = np.linalg.cond(vander) if degree > 0 else 1.0
    if not cond < _MAX_VANDERMONDE_COND:
        raise ConditioningError(
            f"Vandermonde condition number {cond:.3e} beyond tolerance"
        )
    coeffs, *_ = np.linalg.lstsq(vander, values, rcond=None)
    residual = float(np.max(np.abs(vander @ coeffs - values)))
    _require_finite(coeffs, "polynomial coefficients")
    return PolyFit(coefficients=coeffs, max_abs_residual=residual)


def chebyshev_abscissae(count: int, upper: float = 1.0 / 1.05) -> np.ndarray:
    """Chebyshev-spaced sample points inside the open interval (0, upper).

    Used for generating-function interpolation: points stay inside the
    disk of convergence of the walk series and keep the Vandermonde
    system well conditioned.
    """
    if count < 1:
        raise InvalidParameterError("need at least one abscissa")
    if not 0.0 < upper:
        raise InvalidParameterError("upper must be positive")
    k = np.arange(count)
    nodes = np.cos((2 * k + 1) * np.pi / (2 * count))  # in (-1, 1)
    return (nodes + 1.0) * 0.5 * upper
