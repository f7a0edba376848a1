"""Pick the subspace pair that best explains a sample, by a Scheffé
tournament over every candidate pair at every weight of a fixed grid.

All candidate densities are constant on the membership atoms of the
subspaces involved, so each contest needs only per-atom sizes and per-atom
sample counts.  Scheffé-set membership is decided on integer-scaled
densities so that exact ties are recognised as ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numba import njit

from .errors import EmptyHypothesisList, LengthMismatch
from .gf2 import Subspace
from .poly import SubspaceMixtureDistribution, atom_sizes

# Constant in front of 1/eps^2 in the tournament sample count.  Small on
# purpose: see ``HypothesisList.sample_count``.
DEFAULT_SAMPLE_CONSTANT = 0.01


def _rational(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(1000)
    return Fraction(x)


@dataclass(frozen=True)
class HypothesisList:
    """Candidate pairs plus the weight grid they are expanded over.

    The grid is ``w0_lower + k * gamma`` for ``k = 0..M`` with
    ``eps = w0_lower / 100``, ``M = ceil(1 / eps)`` and
    ``gamma = (1 - w0_lower) / M``.
    """

    items: tuple[tuple[Subspace, Subspace], ...]
    w0_lower: Fraction

    def __init__(self, items: Sequence[tuple[Subspace, Subspace]], w0_lower):
        w = _rational(w0_lower)
        if not 0 < w <= Fraction(1, 2):
            raise ValueError(f"w0_lower = {w} outside (0, 1/2]")
        items = tuple((a, b) for a, b in items)
        for a, b in items:
            if a.ambient != b.ambient or a.ambient != items[0][0].ambient:
                raise LengthMismatch("hypotheses live in different ambient spaces")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "w0_lower", w)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def eps(self) -> Fraction:
        return self.w0_lower / 100

    @property
    def M(self) -> int:
        return math.ceil(1 / self.eps)

    @property
    def gamma(self) -> Fraction:
        return (1 - self.w0_lower) / self.M

    def weights(self) -> list[Fraction]:
        return [self.w0_lower + k * self.gamma for k in range(self.M + 1)]

    def distributions(self) -> list[SubspaceMixtureDistribution]:
        """Flat list; entry ``i * (M + 1) + k`` is pair ``i`` at grid weight ``k``."""
        ws = self.weights()
        return [SubspaceMixtureDistribution(a, b, w) for a, b in self.items for w in ws]

    def sample_count(self, delta: float, constant: float = DEFAULT_SAMPLE_CONSTANT) -> int:
        """``ceil(constant / eps^2 * (ln(N (M + 1)) + ln(1 / delta)))``."""
        eps = float(self.eps)
        total = len(self.items) * (self.M + 1)
        return math.ceil(constant / eps**2 * (math.log(total) + math.log(1 / delta)))


def scheffe_mass(d: SubspaceMixtureDistribution, di: SubspaceMixtureDistribution, dj: SubspaceMixtureDistribution) -> Fraction:
    """Exact mass under ``d`` of ``{x : di(x) > dj(x)}``."""
    if not d.ambient == di.ambient == dj.ambient:
        raise LengthMismatch("distributions live in different ambient spaces")
    total = Fraction(0)
    for p, size in atom_sizes([di.a, di.b, dj.a, dj.b, d.a, d.b]).items():
        if di.mass_in(bool(p & 1), bool(p & 2)) > dj.mass_in(bool(p & 4), bool(p & 8)):
            total += size * d.mass_in(bool(p & 16), bool(p & 32))
    return total


@njit(cache=True)
def _contest(dens_a, dens_b, sizes, counts, m, scale, i, k, j, l):
    """+1 if (i, k) wins on its Scheffé set against (j, l), -1 if it
    loses, 0 on a tie."""
    mass_u = 0.0
    mass_v = 0.0
    emp = 0
    for p in range(16):
        if sizes[i, j, p] == 0:
            continue
        x = 0
        if p & 1:
            x += dens_a[i, k]
        if p & 2:
            x += dens_b[i, k]
        y = 0
        if p & 4:
            y += dens_a[j, l]
        if p & 8:
            y += dens_b[j, l]
        if x > y:
            mass_u += sizes[i, j, p] * float(x)
            mass_v += sizes[i, j, p] * float(y)
            emp += counts[i, j, p]
    e = emp / m
    du = abs(mass_u / scale - e)
    dv = abs(mass_v / scale - e)
    if du < dv:
        return 1
    if dv < du:
        return -1
    return 0


@njit(cache=True)
def _tournament(dens_a, dens_b, sizes, counts, m, scale, order):
    """Round-robin Scheffé contests.

    ``dens_a[i, k]`` / ``dens_b[i, k]``: scaled point mass contributed by
    the first / second subspace of pair ``i`` at grid weight ``k``.
    ``sizes[i, j, P]`` / ``counts[i, j, P]``: size and sample count of the
    membership atom ``P`` of (a_i, b_i, a_j, b_j).  Each contest is taken on
    the Scheffé set of whichever side ranks first in ``order`` (then grid
    index), so the outcome does not depend on list position.
    """
    npairs, ngrid = dens_a.shape
    total = npairs * ngrid
    wins = np.zeros(total, dtype=np.int64)
    for u in range(total):
        i = u // ngrid
        k = u % ngrid
        for v in range(u + 1, total):
            j = v // ngrid
            l = v % ngrid
            if order[i] < order[j] or (order[i] == order[j] and k <= l):
                r = _contest(dens_a, dens_b, sizes, counts, m, scale, i, k, j, l)
            else:
                r = -_contest(dens_a, dens_b, sizes, counts, m, scale, j, l, i, k)
            if r > 0:
                wins[u] += 1
            elif r < 0:
                wins[v] += 1
    return wins


def _membership(xs: np.ndarray, items) -> np.ndarray:
    """``mem[s, 2i]`` / ``mem[s, 2i+1]``: sample ``s`` lies in a_i / b_i."""
    mem = np.zeros((xs.shape[0], 2 * len(items)), dtype=np.uint8)
    cache: dict[Subspace, np.ndarray] = {}
    for i, (a, b) in enumerate(items):
        for c, s in ((0, a), (1, b)):
            if s not in cache:
                cache[s] = s.contains_packed(xs)
            mem[:, 2 * i + c] = cache[s]
    return mem


def tournament_wins(h: HypothesisList, xs: np.ndarray) -> np.ndarray:
    """Win count of every gridded distribution against the packed sample."""
    items = h.items
    n = items[0][0].ambient
    npairs = len(items)
    ws = h.weights()
    denom = math.lcm(*(w.denominator for w in ws))
    scale = (1 << n) * denom
    if scale.bit_length() > 62:
        raise OverflowError(f"ambient dimension {n} too large for integer densities")
    dens_a = np.zeros((npairs, len(ws)), dtype=np.int64)
    dens_b = np.zeros((npairs, len(ws)), dtype=np.int64)
    for i, (a, b) in enumerate(items):
        for k, w in enumerate(ws):
            dens_a[i, k] = int(w * denom) << (n - a.dim)
            dens_b[i, k] = int((1 - w) * denom) << (n - b.dim)

    mem = _membership(xs, items)
    sizes = np.zeros((npairs, npairs, 16), dtype=np.float64)
    counts = np.zeros((npairs, npairs, 16), dtype=np.int64)
    size_cache: dict[tuple, dict[int, int]] = {}
    for i, (a, b) in enumerate(items):
        for j, (c, d) in enumerate(items):
            key = (a, b, c, d)
            if key not in size_cache:
                size_cache[key] = atom_sizes([a, b, c, d])
            for p, s in size_cache[key].items():
                sizes[i, j, p] = s
            pattern = mem[:, 2 * i] | (mem[:, 2 * i + 1] << 1) | (mem[:, 2 * j] << 2) | (mem[:, 2 * j + 1] << 3)
            counts[i, j] = np.bincount(pattern, minlength=16)
    keys = [(a.rows, b.rows) for a, b in items]
    order = np.array([sorted(keys).index(key) for key in keys], dtype=np.int64)
    return _tournament(dens_a, dens_b, sizes, counts, max(xs.shape[0], 1), float(scale), order)


def choose_right_hypothesis(o, h: HypothesisList, delta: float, constant: float = DEFAULT_SAMPLE_CONSTANT) -> int:
    """Index of the candidate pair whose gridded distribution wins the most
    Scheffé contests; ties go to the lowest flat index."""
    if len(h) == 0:
        raise EmptyHypothesisList("no hypotheses to choose from")
    if len(h) == 1:
        return 0
    xs = o.draw_batch(h.sample_count(delta, constant))
    wins = tournament_wins(h, xs)
    return int(np.argmax(wins)) // (h.M + 1)
