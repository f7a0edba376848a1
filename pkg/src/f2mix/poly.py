"""Low-degree polynomials over GF(2)^n, the monomial lift, and exact
densities of two-subspace mixtures.

Monomial order (shared by quadratic coefficients and the lift): the
constant ``1`` first, then degree 1 as ``x_0, x_1, ...``, then each higher
degree in lexicographic order of variable index tuples, i.e. the order of
``itertools.combinations(range(n), k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import LengthMismatch
from .gf2 import GF2Vector, Subspace, intersect, rank_packed, to_packed, words_for


def binom_upto(n: int, ell: int) -> int:
    """``C(n, <= ell)``: number of multilinear monomials of degree at most ``ell``."""
    return sum(comb(n, k) for k in range(0, min(n, ell) + 1))


def monomials(n: int, ell: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []
    for k in range(0, min(n, ell) + 1):
        out.extend(combinations(range(n), k))
    return out


@lru_cache(maxsize=64)
def monomial_masks(n: int, ell: int) -> np.ndarray:
    """Packed variable masks of the monomials; the constant has mask 0."""
    masks = [sum(1 << i for i in mono) for mono in monomials(n, ell)]
    arr = to_packed(masks, n)
    arr.setflags(write=False)
    return arr


def lift_packed(xs: np.ndarray, n: int, ell: int) -> np.ndarray:
    """Apply the degree-``ell`` lift to every row of a packed batch."""
    if ell > n:
        raise ValueError(f"lift degree {ell} exceeds dimension {n}")
    if ell == 2 and xs.shape[1] == 1 and n >= 2:
        return _kernels.lift2_single(np.ascontiguousarray(xs[:, 0]), n, words_for(binom_upto(n, 2)))
    masks = monomial_masks(n, ell)
    return _kernels.lift_rows(np.ascontiguousarray(xs), masks, words_for(masks.shape[0]))


def lift(x: GF2Vector, ell: int) -> GF2Vector:
    if ell > x.length:
        raise ValueError(f"lift degree {ell} exceeds dimension {x.length}")
    bits = 0
    for j, mono in enumerate(monomials(x.length, ell)):
        if all((x.bits >> i) & 1 for i in mono):
            bits |= 1 << j
    return GF2Vector(binom_upto(x.length, ell), bits)


@dataclass(frozen=True)
class MonomialLift:
    n: int
    ell: int

    def __post_init__(self):
        if not 0 <= self.ell <= self.n:
            raise ValueError(f"lift degree {self.ell} outside [0, {self.n}]")

    @property
    def dim(self) -> int:
        return binom_upto(self.n, self.ell)

    def index(self, mono: Sequence[int]) -> int:
        return monomials(self.n, self.ell).index(tuple(sorted(mono)))

    def __call__(self, x: GF2Vector) -> GF2Vector:
        if x.length != self.n:
            raise LengthMismatch(f"vector of length {x.length}, lift expects {self.n}")
        return lift(x, self.ell)

    def packed(self, xs: np.ndarray) -> np.ndarray:
        return lift_packed(xs, self.n, self.ell)


# --------------------------------------------------------------------------
# quadratics


@dataclass(frozen=True)
class QuadraticPoly:
    """Polynomial of degree <= 2; bit ``j`` of ``coeffs`` is the coefficient
    of the ``j``-th monomial in the shared order."""

    n: int
    coeffs: int = 0

    def __post_init__(self):
        if self.coeffs < 0 or self.coeffs >> binom_upto(self.n, 2):
            raise ValueError("coefficient vector too long")

    @classmethod
    def from_monomials(cls, n: int, terms: Sequence[Sequence[int]]) -> QuadraticPoly:
        order = {m: j for j, m in enumerate(monomials(n, 2))}
        c = 0
        for t in terms:
            c ^= 1 << order[tuple(sorted(t))]
        return cls(n, c)

    def __add__(self, other: QuadraticPoly) -> QuadraticPoly:
        if self.n != other.n:
            raise LengthMismatch(f"{self.n} and {other.n} variables")
        return QuadraticPoly(self.n, self.coeffs ^ other.coeffs)

    def __call__(self, x: GF2Vector) -> int:
        return eval_quadratic(self, x)

    def is_zero(self) -> bool:
        return self.coeffs == 0


def eval_quadratic(p: QuadraticPoly, x: GF2Vector) -> int:
    if x.length != p.n:
        raise LengthMismatch(f"point of length {x.length}, polynomial in {p.n} variables")
    return bin(lift(x, min(2, p.n)).bits & p.coeffs).count("1") & 1


def count_vanishing_quadratics(points, n: int) -> int:
    """log2 of the number of quadratics vanishing on every point.

    ``points`` is a sequence of ``GF2Vector`` or a packed batch.  Duplicate
    points are dropped before the rank computation.
    """
    total = binom_upto(n, 2)
    if isinstance(points, np.ndarray):
        xs = points
    else:
        bits = []
        for p in points:
            if p.length != n:
                raise LengthMismatch(f"point of length {p.length} in dimension {n}")
            bits.append(p.bits)
        xs = to_packed(bits, n)
    if xs.shape[0] == 0:
        return total
    xs = np.unique(xs[:, 0])[:, None] if xs.shape[1] == 1 else np.unique(xs, axis=0)
    lifted = lift_packed(xs, n, min(2, n))
    return total - rank_packed(lifted, total, stop_at=total)


# --------------------------------------------------------------------------
# exact mixture densities


@dataclass(frozen=True)
class SubspaceMixtureDistribution:
    """Mixture putting weight ``wa`` uniformly on ``a`` and ``1 - wa`` on ``b``."""

    a: Subspace
    b: Subspace
    wa: Fraction

    def __post_init__(self):
        if self.a.ambient != self.b.ambient:
            raise LengthMismatch(f"ambient dimensions {self.a.ambient} and {self.b.ambient}")
        wa = Fraction(self.wa) if not isinstance(self.wa, float) else Fraction(self.wa).limit_denominator(10**9)
        if not 0 <= wa <= 1:
            raise ValueError(f"weight {wa} outside [0, 1]")
        object.__setattr__(self, "wa", wa)

    @property
    def wb(self) -> Fraction:
        return 1 - self.wa

    @property
    def ambient(self) -> int:
        return self.a.ambient

    def mass_in(self, in_a: bool, in_b: bool) -> Fraction:
        """Point mass of any point with the given memberships."""
        p = Fraction(0)
        if in_a:
            p += self.wa / (1 << self.a.dim)
        if in_b:
            p += self.wb / (1 << self.b.dim)
        return p

    def density(self, x: GF2Vector) -> Fraction:
        if x.length != self.ambient:
            raise LengthMismatch(f"point of length {x.length} in ambient {self.ambient}")
        return self.mass_in(self.a.contains_int(x.bits), self.b.contains_int(x.bits))


def exact_density(d: SubspaceMixtureDistribution, x: GF2Vector) -> Fraction:
    return d.density(x)


def atom_sizes(subspaces: Sequence[Subspace]) -> dict[int, int]:
    """Sizes of the membership atoms of up to a handful of subspaces.

    Key ``P`` is a bitmask: bit ``i`` set means "inside ``subspaces[i]``",
    clear means "outside".  Sizes come from inclusion-exclusion over the
    dimensions of all intersections; zero-size atoms are omitted.
    """
    k = len(subspaces)
    if k == 0:
        return {}
    n = subspaces[0].ambient
    for s in subspaces:
        if s.ambient != n:
            raise LengthMismatch(f"ambient dimensions {n} and {s.ambient}")
    inter: dict[int, int] = {0: 1 << n}
    spaces: dict[int, Subspace] = {}
    for q in range(1, 1 << k):
        low = (q & -q).bit_length() - 1
        rest = q & (q - 1)
        s = subspaces[low] if rest == 0 else intersect(spaces[rest], subspaces[low])
        spaces[q] = s
        inter[q] = 1 << s.dim
    full = (1 << k) - 1
    out = {}
    for p in range(1 << k):
        outside = full & ~p
        size = 0
        sub = outside
        while True:
            sign = -1 if bin(sub).count("1") & 1 else 1
            size += sign * inter[p | sub]
            if sub == 0:
                break
            sub = (sub - 1) & outside
        if size:
            out[p] = size
    return out


def exact_tv(d1: SubspaceMixtureDistribution, d2: SubspaceMixtureDistribution) -> Fraction:
    """Total variation distance, summed over membership atoms of the four
    component subspaces rather than over the whole space."""
    if d1.ambient != d2.ambient:
        raise LengthMismatch(f"ambient dimensions {d1.ambient} and {d2.ambient}")
    total = Fraction(0)
    for p, size in atom_sizes([d1.a, d1.b, d2.a, d2.b]).items():
        m1 = d1.mass_in(bool(p & 1), bool(p & 2))
        m2 = d2.mass_in(bool(p & 4), bool(p & 8))
        total += size * abs(m1 - m2)
    return total / 2
