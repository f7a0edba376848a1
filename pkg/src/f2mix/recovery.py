"""Recovering the two subspaces from samples.

* ``find_good_projector`` shrinks the ambient space one dimension at a time
  with random maps that keep the pair incomparable.
* ``recover_base_case`` solves the small projected instance exactly.
* ``incomparable_subspace_recovery`` lifts the small solution back with
  fresh samples.
* ``large_diff_recovery`` handles nested pairs with a big dimension gap by
  finding linear dependencies among monomial-lifted samples.
* ``recover_driver`` ties everything together.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .comparability import ComparabilityParams, test_comparability
from .errors import BaseCaseFailed, DimensionMismatch, InfeasibleSpec, ProjectionStalled, Unidentifiable
from .gf2 import (
    GF2Matrix,
    GF2Vector,
    Subspace,
    from_packed,
    is_subset,
    random_matrix,
    span_packed,
    to_packed,
    words_for,
)
from .hypothesis import DEFAULT_SAMPLE_CONSTANT, HypothesisList, choose_right_hypothesis
from .oracle import derived_rng, estimate_weights, project
from .poly import binom_upto, lift_packed

BASE_DIM = 10


class Regime(str, enum.Enum):
    INCOMPARABLE = "Incomparable"
    LARGE_GAP = "LargeGap"
    LPN_HARD = "Degenerate-LPN-Hard"
    IDENTICAL = "Identical"


@dataclass
class RecoveryResult:
    """Recovered pair, larger subspace first.  Weights are ``None`` when the
    regime leaves them unidentifiable."""

    a0_hat: Subspace
    a1_hat: Subspace
    w0_hat: float | None
    w1_hat: float | None
    regime: Regime
    samples: int = 0
    notes: list[str] = field(default_factory=list)


# --------------------------------------------------------------------------
# projector search


def find_good_projector(o, n: int, wmin: float, rng=None, base_dim: int = BASE_DIM,
                        retries: int | None = None) -> GF2Matrix:
    """A ``base_dim x n`` map keeping the hidden pair incomparable.

    At each level a random ``(i-1) x i`` map is accepted once the
    comparability test on the projected oracle says "incomparable".
    """
    if base_dim < 2:
        raise ValueError("base_dim must be at least 2")
    if n <= base_dim:
        return GF2Matrix.identity(n)
    rng = derived_rng(o) if rng is None else rng
    budget = math.ceil(200 * math.log(n + 2)) if retries is None else retries
    delta = 1 / n**2
    m = GF2Matrix.identity(n)
    for i in range(n, base_dim, -1):
        for _ in range(budget):
            cand = random_matrix(i - 1, i, rng) @ m
            if not test_comparability(project(o, cand), ComparabilityParams(i - 1, wmin, delta)):
                m = cand
                break
        else:
            raise ProjectionStalled(f"no incomparable projection found from dimension {i} after {budget} tries")
    return m


# --------------------------------------------------------------------------
# small instances


def base_case_sample_count(v: int, wmin: float, delta: float) -> int:
    return math.ceil(2 ** (v + 1) / wmin * (v * math.log(2) + math.log(4 / delta)))


def _translate_closures(support: np.ndarray, inside: np.ndarray) -> list[np.ndarray]:
    """Distinct sets ``{y in S : x + y in S}`` over ``x in S``, as sorted arrays."""
    seen = {}
    for x in support:
        t = support[inside[support ^ x]]
        seen.setdefault(t.tobytes(), t)
    return list(seen.values())


def base_case_candidates(points: np.ndarray, v: int) -> list[tuple[Subspace, Subspace]]:
    """Pairs of maximal subspaces inside the point set whose union is the
    whole set.  ``points`` holds distinct integers below ``2**v``."""
    support = np.unique(points.astype(np.int64))
    inside = np.zeros(1 << v, dtype=bool)
    inside[support] = True
    subspaces = []
    for t in _translate_closures(support, inside):
        s = span_packed(t.astype(np.uint64)[:, None], v)
        if s.size == len(t):
            subspaces.append((s, frozenset(t.tolist())))
    maximal = [
        (s, pts) for s, pts in subspaces
        if not any(len(p2) > len(pts) and pts < p2 for _, p2 in subspaces)
    ]
    maximal.sort(key=lambda sp: (sp[0].dim, sp[0].rows))
    total = len(support)
    pairs = []
    for i in range(len(maximal)):
        for j in range(i + 1, len(maximal)):
            (s, p), (t, q) = maximal[i], maximal[j]
            if len(p | q) == total:
                pairs.append((s, t))
    return pairs


def recover_base_case(o, wmin: float, delta: float,
                      constant: float = DEFAULT_SAMPLE_CONSTANT) -> tuple[Subspace, Subspace]:
    v = o.n
    if v > 16:
        raise ValueError(f"base case runs in dimension at most 16, got {v}")
    xs = o.draw_batch(base_case_sample_count(v, wmin, delta))
    cands = base_case_candidates(xs[:, 0], v)
    if not cands:
        raise BaseCaseFailed("no pair of subspaces covers the observed support")
    idx = choose_right_hypothesis(o, HypothesisList(cands, wmin), delta / 2, constant)
    return cands[idx]


def incomparable_subspace_recovery(o, n: int, wmin: float, delta: float, rng=None,
                                   base_dim: int = BASE_DIM,
                                   constant: float = DEFAULT_SAMPLE_CONSTANT) -> tuple[Subspace, Subspace]:
    m = find_good_projector(o, n, wmin, rng=rng, base_dim=base_dim)
    u, v = recover_base_case(project(o, m), wmin, delta, constant)
    xs = o.draw_batch(math.ceil(100 * n / wmin))
    mx = m.apply_packed(xs)
    first = span_packed(xs[~v.contains_packed(mx)], n)
    second = span_packed(xs[~u.contains_packed(mx)], n)
    return first, second


# --------------------------------------------------------------------------
# large dimension gap


def dependent_index_set(vectors, ncols: int | None = None) -> set[int]:
    """``{i : v_i in span(v_j : j != i)}`` (0-based), via one elimination."""
    if isinstance(vectors, np.ndarray):
        rows = np.ascontiguousarray(vectors)
        ncols = ncols if ncols is not None else 64 * rows.shape[1]
    else:
        vectors = list(vectors)
        if not vectors:
            return set()
        ncols = vectors[0].length
        rows = to_packed([v.bits for v in vectors], ncols)
    if rows.shape[0] == 0:
        return set()
    return set(np.flatnonzero(_kernels.dependent_support(rows, ncols)).tolist())


def _formula_degree(d1: int, d0: int, wmin: float) -> int:
    alpha = d1 / d0
    return math.ceil(2 * math.log2(100 / wmin) / (1 - alpha))


@dataclass(frozen=True)
class LargeDiffParams:
    """Hypothesized dimensions and lift settings.  ``m`` samples are lifted
    with the degree-``ell`` monomial map."""

    d0: int
    d1: int
    wmin: float
    ell: int
    m: int

    def __post_init__(self):
        if not 0 <= self.d1 < self.d0:
            raise ValueError(f"need 0 <= d1 < d0, got d1={self.d1}, d0={self.d0}")
        if self.ell < 1:
            raise ValueError("lift degree must be at least 1")

    @property
    def alpha(self) -> float:
        return self.d1 / self.d0

    @classmethod
    def from_formula(cls, d0: int, d1: int, wmin: float) -> LargeDiffParams:
        """Degree ``ceil(2 log2(100 / wmin) / (1 - alpha))``, capped at ``d0``
        (beyond that the lift already contains every monomial)."""
        ell = min(_formula_degree(d1, d0, wmin), d0)
        return cls(d0, d1, wmin, ell, binom_upto(d0, ell))

    @classmethod
    def desk(cls, d0: int, d1: int, wmin: float) -> LargeDiffParams:
        """Smallest degree whose monomial count gives the small subspace's
        lifted span room to fill up (``4 C(d1, <=ell) <= wmin C(d0, <=ell)``)
        and leaves enough large-subspace draws to span it (``wmin m >= d0 + 8``,
        failure odds about 2^-8), provided ``m`` draws from the large subspace
        are collision-free with probability at least 1/2 (``m (m - 1) <= 2^d0``)."""
        for ell in range(1, d0):
            m = binom_upto(d0, ell)
            if m * (m - 1) > 2**d0:
                break
            if 4 * binom_upto(d1, ell) <= wmin * m and wmin * m >= d0 + 8:
                return cls(d0, d1, wmin, ell, m)
        raise InfeasibleSpec(f"no workable lift degree for d0={d0}, d1={d1}, wmin={wmin}")

    @staticmethod
    def admissible_d1(d0: int, wmin: float) -> list[int]:
        out = []
        for d1 in range(d0):
            try:
                LargeDiffParams.desk(d0, d1, wmin)
            except InfeasibleSpec:
                continue
            out.append(d1)
        return out


@dataclass
class LargeDiffRun:
    small: Subspace
    large: Subspace
    samples: np.ndarray
    dependent: np.ndarray
    labels: np.ndarray | None = None


def large_diff_run(o, params: LargeDiffParams, labels: bool = False) -> LargeDiffRun:
    """One pass of the lift-and-dependence procedure, without dimension checks."""
    n = o.n
    res = o.draw_batch(params.m, labels=labels)
    xs, lab = res if labels else (res, None)
    ell = min(params.ell, n)
    lifted = lift_packed(xs, n, ell)
    dep = _kernels.dependent_support(lifted, binom_upto(n, ell))
    small = span_packed(xs[dep], n)
    large = span_packed(xs[~small.contains_packed(xs)], n)
    return LargeDiffRun(small, large, xs, dep, lab)


def large_diff_recovery(o, params: LargeDiffParams) -> tuple[Subspace, Subspace]:
    """``(A1, A0)``: the smaller subspace first."""
    run = large_diff_run(o, params)
    if run.small.dim != params.d1 or run.large.dim != params.d0:
        raise DimensionMismatch(
            f"recovered dimensions ({run.small.dim}, {run.large.dim}), hypothesized ({params.d1}, {params.d0})"
        )
    return run.small, run.large


# --------------------------------------------------------------------------
# driver


def _collision_uniform(o, d: int, wmin: float, cap: int) -> bool | None:
    """Is the sample uniform on the whole space?  Compares the number of
    colliding pairs with the midpoint between the uniform expectation and
    the smallest expectation a nested mixture can have.  None if the
    required sample count exceeds ``cap``."""
    excess = wmin**2
    lam = 64 * (1 + excess) / excess**2
    s = math.ceil(math.sqrt(2 * lam * 2**d)) + 1
    if s > cap:
        return None
    xs = o.draw_batch(s)
    _, counts = np.unique(xs, axis=0, return_counts=True)
    collisions = int((counts * (counts - 1) // 2).sum())
    pairs = s * (s - 1) / 2
    return collisions < pairs * (1 + excess / 2) / 2**d


def _order(a: Subspace, b: Subspace, wa, wb):
    if (a.dim, a.rows) < (b.dim, b.rows):
        return b, a, wb, wa
    return a, b, wa, wb


def _weight_sample_count(delta: float, eps: float = 0.02) -> int:
    return math.ceil(2 * math.log(2 / delta) / eps**2)


def recover_driver(o, n: int, wmin: float, delta: float, rng=None, base_dim: int = BASE_DIM,
                   constant: float = DEFAULT_SAMPLE_CONSTANT, large_diff_attempts: int = 3,
                   collision_cap: int = 1 << 22) -> RecoveryResult:
    if wmin < 0.01:
        warnings.warn("wmin below 1/100 is outside the large-gap guarantee", stacklevel=2)
    rng = derived_rng(o) if rng is None else rng
    start = o.drawn
    notes: list[str] = []

    xs = o.draw_batch(math.ceil(8 * n / wmin) + math.ceil(16 * n / wmin**2))
    w = span_packed(xs, n)
    d = w.dim

    def unmap(s: Subspace) -> Subspace:
        return Subspace.from_ints((w.from_coordinates(r) for r in s.rows), n)

    def done(a0, a1, w0, w1, regime):
        a0, a1, w0, w1 = _order(a0, a1, w0, w1)
        return RecoveryResult(a0, a1, w0, w1, regime, o.drawn - start, notes)

    if d == 0:
        return done(w, w, None, None, Regime.IDENTICAL)

    sel = GF2Matrix(n, tuple(1 << p for p in w.pivots))
    reduced = project(o, sel)

    if not test_comparability(reduced, ComparabilityParams(d, wmin, delta)):
        a, b = incomparable_subspace_recovery(reduced, d, wmin, delta, rng=rng, base_dim=base_dim, constant=constant)
        a, b = unmap(a), unmap(b)
        w0, w1 = estimate_weights(o.draw_batch(_weight_sample_count(delta)), a, b)
        return done(a, b, w0, w1, Regime.INCOMPARABLE)

    full = Subspace.full(d)
    cands: list[tuple[Subspace, Subspace]] = [(full, full)]
    for d1 in sorted(LargeDiffParams.admissible_d1(d, wmin), reverse=True):
        params = LargeDiffParams.desk(d, d1, wmin)
        for _ in range(large_diff_attempts):
            try:
                small, large = large_diff_recovery(reduced, params)
            except DimensionMismatch:
                continue
            if (small, full) not in cands:
                cands.append((small, full))
            break
    if len(cands) == 1:
        uniform = _collision_uniform(reduced, d, wmin, collision_cap)
        if uniform:
            return done(w, w, None, None, Regime.IDENTICAL)
        notes.append("no admissible lift recovered the smaller subspace")
        return done(w, Subspace.zero(n), None, None, Regime.LPN_HARD)

    idx = choose_right_hypothesis(reduced, HypothesisList(cands, wmin), delta, constant)
    if idx == 0:
        return done(w, w, None, None, Regime.IDENTICAL)
    a1 = unmap(cands[idx][0])
    try:
        w0, w1 = estimate_weights(o.draw_batch(_weight_sample_count(delta)), w, a1)
    except Unidentifiable:
        return done(w, w, None, None, Regime.IDENTICAL)
    return done(w, a1, w0, w1, Regime.LARGE_GAP)
