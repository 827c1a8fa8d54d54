"""Character-based engine for symmetric walks on finite abelian groups.

A finite abelian group G = Z_{n_1} x ... x Z_{n_m} has exactly |G|
one-dimensional characters

    rho_a(g) = exp(2 pi i sum_l a_l g_l / n_l),

enumerated here lexicographically with the trivial character first.
With the transform  f^(rho) = sum_g f(g) rho(g)  and a symmetric step
law p (p(g) = p(-g), p(e) = 0), hitting quantities to the identity
become character sums:

* expected hitting time   h(g) = sum_{a != 0} (1 - rho_a(g)) / (1 - p^(rho_a))
* second moment           q(g) = (1/|G|) sum_{a != 0}
      [ 2|G| p^(rho_a) / (1 - p^(rho_a))^2 + q* / (1 - p^(rho_a)) ]
      * (1 - rho_a(g^{-1}))
  with q* = E[(tau^+)^2] the return second moment, and the
  variance q(g) - h(g)^2
* the step-distribution recurrence in the transform domain,
      v_n = diag(p^) v_{n-1} - (1/|G|) (sum_a p^_a v_{n-1,a}) * 1,
  whose inverse transform is m_n(g) = P(tau_{g,e} = n).

Complex arithmetic is kept all the way through; realness of outputs is
asserted at the end, never assumed mid-computation.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError, NotErgodicError
from .graphs import Graph, TransitionKernel, simple_walk_kernel
from .hitting import PmfTable, closed_cycle, make_absorbing, pmf, return_second_moment
from .linalg import DEFAULT_TOLERANCES, Tolerances

__all__ = [
    "FiniteAbelianGroup",
    "StepLaw",
    "CharacterBasis",
    "character_basis",
    "fourier",
    "inverse_fourier",
    "law_transform",
    "expected_hitting_abelian",
    "variance_abelian",
    "fourier_pmf",
    "group_walk_graph",
    "group_walk_kernel",
    "diag_torus_map",
    "diag_torus_convolution_report",
    "ConvolutionReport",
    "parse_group_spec",
    "cycle_step_law",
    "complete_step_law",
    "hypercube_step_law",
    "torus_standard_step_law",
    "torus_diagonal_step_law",
]

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Direct product of cyclic groups Z_{n_1} x ... x Z_{n_m}.

    Elements are tuples in lexicographic order (last coordinate fastest),
    so the identity has index 0.
    """

    factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(n) for n in self.factors)
        if not factors:
            raise InvalidParameterError("group needs at least one factor")
        if any(n < 2 for n in factors):
            raise InvalidParameterError("every modulus must be >= 2")
        object.__setattr__(self, "factors", factors)

    @property
    def order(self) -> int:
        out = 1
        for n in self.factors:
            out *= n
        return out

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * len(self.factors)

    def elements(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(n) for n in self.factors)))

    def index(self, g) -> int:
        g = self.canonical(g)
        idx = 0
        for x, n in zip(g, self.factors):
            idx = idx * n + x
        return idx

    def element(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.order:
            raise InvalidParameterError("element index out of range")
        out = []
        for n in reversed(self.factors):
            out.append(idx % n)
            idx //= n
        return tuple(reversed(out))

    def canonical(self, g) -> tuple[int, ...]:
        g = tuple(int(x) for x in g)
        if len(g) != len(self.factors):
            raise InvalidParameterError("element arity does not match factors")
        return tuple(x % n for x, n in zip(g, self.factors))

    def add(self, g, h) -> tuple[int, ...]:
        g, h = self.canonical(g), self.canonical(h)
        return tuple((x + y) % n for x, y, n in zip(g, h, self.factors))

    def neg(self, g) -> tuple[int, ...]:
        g = self.canonical(g)
        return tuple((-x) % n for x, n in zip(g, self.factors))

    def sub(self, g, h) -> tuple[int, ...]:
        return self.add(g, self.neg(h))


@dataclass(frozen=True)
class StepLaw:
    """Increment distribution p(g) = P(tau_{x, x+g} = 1) of the walk.

    Must be a probability vector with no mass at the identity and the
    inversion symmetry p(g) = p(-g) required by the transform-domain
    derivations.
    """

    group: FiniteAbelianGroup
    table: np.ndarray  # indexed by element index

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=float)
        if table.shape != (self.group.order,):
            raise InvalidParameterError("step law length must equal group order")
        if np.any(table < 0.0) or not np.all(np.isfinite(table)):
            raise InvalidParameterError("step probabilities must be finite and >= 0")
        if abs(table.sum() - 1.0) > _SUM_TOL:
            raise InvalidParameterError("step law must sum to 1 within 1e-12")
        if table[0] != 0.0:
            raise InvalidParameterError("no self-loops: p(identity) must be 0")
        for idx in range(self.group.order):
            neg = self.group.index(self.group.neg(self.group.element(idx)))
            if abs(table[idx] - table[neg]) > _SUM_TOL:
                raise InvalidParameterError("step law must be symmetric: p(g) = p(-g)")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_pairs(cls, group: FiniteAbelianGroup, pairs) -> "StepLaw":
        table = np.zeros(group.order)
        for g, prob in pairs:
            idx = group.index(g)
            if table[idx] != 0.0:
                raise InvalidParameterError(f"duplicate step-law entry for {tuple(g)}")
            table[idx] = float(prob)
        return cls(group, table)

    def support(self) -> list[tuple[int, ...]]:
        return [self.group.element(i) for i in np.nonzero(self.table)[0]]


class CharacterBasis:
    """Full character table of a finite abelian group.

    ``matrix[a, g] = rho_a(g)``, characters indexed lexicographically by
    their index tuples with the trivial character in row 0.
    """

    def __init__(self, group: FiniteAbelianGroup):
        self.group = group
        elements = np.array(group.elements())  # (|G|, m)
        phases = np.zeros((group.order, group.order))
        for l, n in enumerate(group.factors):
            phases += np.outer(elements[:, l], elements[:, l]) / n
        self.matrix = np.exp(2j * np.pi * phases)
        self.matrix.setflags(write=False)

    def value(self, a, g) -> complex:
        return self.matrix[self.group.index(a), self.group.index(g)]


@lru_cache(maxsize=64)
def _cached_basis(factors: tuple[int, ...]) -> CharacterBasis:
    return CharacterBasis(FiniteAbelianGroup(factors))


def character_basis(group: FiniteAbelianGroup) -> CharacterBasis:
    return _cached_basis(group.factors)


def fourier(group: FiniteAbelianGroup, values) -> np.ndarray:
    """Transform f^(rho_a) = sum_g f(g) rho_a(g), indexed by character."""
    values = np.asarray(values)
    if values.shape != (group.order,):
        raise InvalidParameterError("function length must equal group order")
    return character_basis(group).matrix @ values.astype(complex)


def inverse_fourier(group: FiniteAbelianGroup, transform) -> np.ndarray:
    """Inverse transform f(g) = (1/|G|) sum_a rho_a(g^{-1}) f^(rho_a)."""
    transform = np.asarray(transform, dtype=complex)
    if transform.shape != (group.order,):
        raise InvalidParameterError("transform length must equal group order")
    basis = character_basis(group).matrix
    return basis.conj().T @ transform / group.order


def law_transform(
    group: FiniteAbelianGroup, law: StepLaw, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """Transform of the step law, with its contract checked.

    Stochasticity pins the trivial coefficient at 1, probabilities bound
    every magnitude by 1, and symmetry of the law makes every value real
    (asserted within ``imaginary_discard``, then kept as complex for the
    engines).
    """
    p_hat = fourier(group, law.table)
    if abs(p_hat[0] - 1.0) > 1e-9:
        raise InvalidParameterError("trivial transform coefficient must be 1")
    if np.max(np.abs(p_hat)) > 1.0 + 1e-9:
        raise InvalidParameterError("transform magnitude exceeded 1")
    if np.max(np.abs(p_hat.imag)) > tolerances.imaginary_discard:
        raise InvalidParameterError("symmetric law must have a real transform")
    return p_hat


def _require_ergodic(p_hat: np.ndarray) -> None:
    gaps = np.abs(1.0 - p_hat[1:])
    if gaps.size and gaps.min() < 1e-12:
        raise NotErgodicError(
            "a nontrivial transform coefficient equals 1; the step law does not generate the group"
        )


def expected_hitting_abelian(
    group: FiniteAbelianGroup,
    law: StepLaw,
    g,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """h(g) = E[tau] between any pair at displacement g.

    Character sum over the nontrivial characters; walks with some
    transform coefficient at -1 (bipartite-like) are fine, only a
    coefficient at +1 (non-generating support) is rejected.
    """
    g = group.canonical(g)
    p_hat = law_transform(group, law, tolerances)
    _require_ergodic(p_hat)
    basis = character_basis(group).matrix
    chi = basis[1:, group.index(g)]
    total = np.sum((1.0 - chi) / (1.0 - p_hat[1:]))
    if abs(total.imag) > tolerances.imaginary_discard:
        raise InvalidParameterError(f"imaginary part {total.imag:.3e} beyond tolerance")
    return float(total.real)


def variance_abelian(
    group: FiniteAbelianGroup,
    law: StepLaw,
    g,
    qstar: float | None = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[float, float]:
    """Second moment q(g) and variance of the hitting time at displacement g.

    q* defaults to the first-step return second moment computed on the
    walk's own Cayley graph; the cited fundamental-matrix expression for
    q* has the wrong scale (triangle truth is 11) and is exposed
    separately for diagnostics.  Note the ``+ q*/(1 - p^)`` sign: the
    printed ``-`` variant fails the two-node sanity check (it yields -3
    where the truth is E[tau^2] = 1) while this form matches the
    general-graph engine on every cross-checked family.
    """
    g = group.canonical(g)
    p_hat = law_transform(group, law, tolerances)
    _require_ergodic(p_hat)
    if qstar is None:
        kernel = group_walk_kernel(group, law)
        qstar = return_second_moment(kernel, 0)
    basis = character_basis(group).matrix
    chi_inv = basis[1:, group.index(g)].conj()  # rho_a(g^{-1})
    nontrivial = p_hat[1:]
    bracket = 2.0 * group.order * nontrivial / (1.0 - nontrivial) ** 2 + qstar / (
        1.0 - nontrivial
    )
    q_val = np.sum(bracket * (1.0 - chi_inv)) / group.order
    if abs(q_val.imag) > tolerances.imaginary_discard:
        raise InvalidParameterError(f"imaginary part {q_val.imag:.3e} beyond tolerance")
    h_val = expected_hitting_abelian(group, law, g, tolerances)
    variance = q_val.real - h_val**2
    if variance < -1e-8:
        raise InvalidParameterError("negative variance beyond tolerance")
    return float(q_val.real), float(variance)


def fourier_pmf(
    group: FiniteAbelianGroup,
    law: StepLaw,
    horizon: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PmfTable:
    """Hitting distribution to the identity for every start, by the
    transform-domain recurrence.

    Column g of the table is P(tau_{g,e} = n) for n = 1..horizon.  The
    identity's own column must vanish for n >= 1 (asserted within
    1e-10), as must all imaginary parts.
    """
    if horizon < 1:
        raise InvalidParameterError("horizon must be >= 1")
    p_hat = law_transform(group, law, tolerances)
    order = group.order
    rows = []
    v = p_hat.copy()  # transform of m_1 = p
    for n in range(horizon):
        m_n = inverse_fourier(group, v)
        if np.max(np.abs(m_n.imag)) > tolerances.imaginary_discard:
            raise InvalidParameterError("step distribution developed an imaginary part")
        real = m_n.real
        if abs(real[0]) > 1e-10:
            raise InvalidParameterError(f"m_{n + 1}(e) = {real[0]:.3e}, expected 0")
        if real.min() < -1e-10:
            raise InvalidParameterError("negative probability beyond tolerance")
        rows.append(np.clip(real, 0.0, None))
        correction = np.sum(p_hat * v) / order
        v = p_hat * v - correction
    probs = np.array(rows)
    residual = 1.0 - probs.sum(axis=0)
    residual[0] = 1.0  # the identity never "hits" in n >= 1 steps
    return PmfTable(
        probs=probs,
        states=tuple(range(order)),
        target=0,
        residual=residual,
        requested_horizon=horizon,
    )


# ---------------------------------------------------------------------------
# the walk's own Cayley graph (used for q* and for cross-engine checks)
# ---------------------------------------------------------------------------

def group_walk_graph(group: FiniteAbelianGroup, law: StepLaw) -> Graph:
    """Cayley graph of (G, support(p)) with edge weights p(s).

    Because p is symmetric, both traversal directions of an edge carry
    the same weight and the weighted simple walk on this graph moves
    from x to x+s with probability exactly p(s).
    """
    elements = group.elements()
    edges = {}
    for xi, x in enumerate(elements):
        for s in law.support():
            yi = group.index(group.add(x, s))
            key = (min(xi, yi), max(xi, yi))
            edges.setdefault(key, float(law.table[group.index(s)]))
    labels = tuple(str(e) for e in elements)
    triples = tuple((u, v, w) for (u, v), w in sorted(edges.items()))
    return Graph(group.order, triples, labels=labels)


def group_walk_kernel(group: FiniteAbelianGroup, law: StepLaw) -> TransitionKernel:
    return simple_walk_kernel(group_walk_graph(group, law))


# ---------------------------------------------------------------------------
# diagonal torus: coordinate change and the convolution claim
# ---------------------------------------------------------------------------

def diag_torus_map(p: int, displacement) -> tuple[int, int]:
    """Displacement in the diagonal-generator basis of Z_p^2 (odd p).

    The change of basis phi(a, b) = ((a+b)/2, (a-b)/2) is invertible
    exactly when 2 is invertible mod p; its inverse is
    (x, y) -> (x + y, x - y) mod p, which is what the diagonal-step
    convolution formula consumes.
    """
    if p < 3 or p % 2 == 0:
        raise InvalidParameterError("diagonal basis needs odd p >= 3")
    x, y = (int(t) % p for t in displacement)
    return ((x + y) % p, (x - y) % p)


@dataclass(frozen=True)
class ConvolutionReport:
    """Side-by-side of the 1D-convolution claim and the direct engine.

    The claim composes the two cycle-coordinate first-passage laws by
    convolution; the direct series iterates the absorbing system of the
    actual diagonal torus.  Their agreement is *reported*, never
    asserted: first passage of the pair requires both coordinates to sit
    on target simultaneously, which is not the event the convolution
    describes.
    """

    p: int
    start: tuple[int, int]
    target: tuple[int, int]
    diagonal_displacement: tuple[int, int]
    convolution: np.ndarray
    direct: np.ndarray | None
    max_abs_discrepancy: float | None
    notes: tuple[str, ...]


def _cycle_coordinate_pmf(p: int, displacement: int, horizon: int) -> np.ndarray:
    """c_n(i) for n = 0..horizon with c_0(0) = 1 and c_n(0) = 0, n >= 1."""
    out = np.zeros(horizon + 1)
    if displacement % p == 0:
        out[0] = 1.0
        return out
    for n in range(1, horizon + 1):
        out[n] = closed_cycle(p, displacement % p, n)
    return out


def diag_torus_convolution_report(
    p: int,
    start,
    target,
    horizon: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> ConvolutionReport:
    """Evaluate the diagonal-torus convolution claim against the direct engine."""
    if horizon < 1:
        raise InvalidParameterError("horizon must be >= 1")
    if p < 3 or p % 2 == 0:
        raise InvalidParameterError("diagonal torus needs odd p >= 3")
    start = tuple(int(t) % p for t in start)
    target = tuple(int(t) % p for t in target)
    a_p, b_p = diag_torus_map(p, (start[0] - target[0], start[1] - target[1]))
    ca = _cycle_coordinate_pmf(p, a_p, horizon)
    cb = _cycle_coordinate_pmf(p, b_p, horizon)
    convolution = np.convolve(ca, cb)[1 : horizon + 1]
    notes = []
    if a_p == 0 or b_p == 0:
        notes.append(
            "degenerate coordinate displacement: the convolution collapses to a"
            " single 1D series (c_0(0) = 1 convention)"
        )
    if start == target:
        notes.append(
            "start equals target: the convolution places all mass at step 0,"
            " which the direct engine excludes by definition"
        )
        return ConvolutionReport(
            p=p,
            start=start,
            target=target,
            diagonal_displacement=(a_p, b_p),
            convolution=convolution,
            direct=None,
            max_abs_discrepancy=None,
            notes=tuple(notes),
        )
    from .graphs import build_torus_diagonal  # local import avoids a cycle at import time

    graph = build_torus_diagonal(p)
    kernel = simple_walk_kernel(graph)
    system = make_absorbing(kernel, target[0] * p + target[1])
    table = pmf(system, horizon, tolerances, stop_early=False)
    direct = table.column(start[0] * p + start[1])
    discrepancy = float(np.max(np.abs(direct - convolution)))
    return ConvolutionReport(
        p=p,
        start=start,
        target=target,
        diagonal_displacement=(a_p, b_p),
        convolution=convolution,
        direct=direct,
        max_abs_discrepancy=discrepancy,
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# step laws of the preset walks and the group-spec file format
# ---------------------------------------------------------------------------

def cycle_step_law(k: int) -> tuple[FiniteAbelianGroup, StepLaw]:
    group = FiniteAbelianGroup((k,))
    return group, StepLaw.from_pairs(group, [((1,), 0.5), ((-1,), 0.5)])


def complete_step_law(k: int) -> tuple[FiniteAbelianGroup, StepLaw]:
    if k < 2:
        raise InvalidParameterError("complete graph needs k >= 2")
    group = FiniteAbelianGroup((k,))
    pairs = [((g,), 1.0 / (k - 1)) for g in range(1, k)]
    return group, StepLaw.from_pairs(group, pairs)


def hypercube_step_law(dim: int) -> tuple[FiniteAbelianGroup, StepLaw]:
    group = FiniteAbelianGroup((2,) * dim)
    pairs = []
    for l in range(dim):
        e = [0] * dim
        e[l] = 1
        pairs.append((tuple(e), 1.0 / dim))
    return group, StepLaw.from_pairs(group, pairs)


def torus_standard_step_law(p: int) -> tuple[FiniteAbelianGroup, StepLaw]:
    group = FiniteAbelianGroup((p, p))
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    return group, StepLaw.from_pairs(group, [(s, 0.25) for s in steps])


def torus_diagonal_step_law(p: int) -> tuple[FiniteAbelianGroup, StepLaw]:
    if p % 2 == 0:
        raise InvalidParameterError("diagonal torus needs odd p")
    group = FiniteAbelianGroup((p, p))
    steps = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    return group, StepLaw.from_pairs(group, [(s, 0.25) for s in steps])


def parse_group_spec(spec: dict) -> tuple[FiniteAbelianGroup, StepLaw]:
    """Group and step law from a spec mapping.

    Shape: ``{"factors": [n1, n2, ...], "step_law": [[[g1, g2, ...], prob], ...]}``.
    Symmetry and normalization of the law are validated; unknown keys
    are rejected.
    """
    if not isinstance(spec, dict):
        raise InvalidParameterError("group spec must be a JSON object")
    extra = set(spec) - {"factors", "step_law"}
    if extra:
        raise InvalidParameterError(f"unknown group-spec keys: {sorted(extra)}")
    if "factors" not in spec or "step_law" not in spec:
        raise InvalidParameterError("group spec needs 'factors' and 'step_law'")
    group = FiniteAbelianGroup(tuple(spec["factors"]))
    pairs = []
    for entry in spec["step_law"]:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise InvalidParameterError(f"bad step-law entry {entry!r}")
        g, prob = entry
        pairs.append((tuple(g), float(prob)))
    return group, StepLaw.from_pairs(group, pairs)


def load_group_file(path: str) -> tuple[FiniteAbelianGroup, StepLaw]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"invalid JSON in {path}: {exc}") from exc
    return parse_group_spec(spec)
