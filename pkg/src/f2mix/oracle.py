"""Sampling oracles for a mixture of two subspaces, and weight estimation.

Every oracle exposes ``n`` (dimension of emitted samples), ``draw()`` for a
single ``GF2Vector`` and ``draw_batch(k)`` for a packed ``(k, words)``
``uint64`` array.  The batch path is what the algorithms use.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import InsufficientSamples, LengthMismatch, Unidentifiable
from .gf2 import (
    GF2Matrix,
    GF2Vector,
    Subspace,
    from_packed,
    intersect,
    is_subset,
    to_packed,
    words_for,
)
from .rng import make_rng, random_words


def _as_fraction(w) -> Fraction:
    if isinstance(w, str):
        return Fraction(w)
    if isinstance(w, float):
        return Fraction(w).limit_denominator(10**9)
    return Fraction(w)


def _combine(rows: Sequence[int], count: int, rng, width: int) -> np.ndarray:
    """Uniform combinations of the given (integer) rows, packed."""
    if not rows:
        return np.zeros((count, words_for(width)), dtype=np.uint64)
    return _kernels.combine_rows(to_packed(rows, width), random_words(rng, count, len(rows)), words_for(width))


class MixtureOracle:
    """Draws uniformly from ``a0`` with probability ``w0``, else from ``a1``.

    ``budget`` caps the total number of samples; exceeding it raises
    ``InsufficientSamples``.  ``drawn`` counts samples handed out so far.
    """

    def __init__(self, a0: Subspace, a1: Subspace, w0, rng=None, budget: int | None = None):
        if a0.ambient != a1.ambient:
            raise LengthMismatch(f"ambient dimensions {a0.ambient} and {a1.ambient}")
        w0 = _as_fraction(w0)
        if not 0 <= w0 <= 1:
            raise ValueError(f"w0 = {w0} outside [0, 1]")
        self.a0, self.a1 = a0, a1
        self.w0 = w0
        self.rng = rng if isinstance(rng, np.random.Generator) else make_rng(rng or 0)
        self.budget = budget
        self.drawn = 0
        self._w0_float = float(w0)

    @property
    def w1(self) -> Fraction:
        return 1 - self.w0

    @property
    def n(self) -> int:
        return self.a0.ambient

    def _charge(self, k: int):
        if self.budget is not None and self.drawn + k > self.budget:
            raise InsufficientSamples(f"requested {k} samples with {self.budget - self.drawn} left in budget")
        self.drawn += k

    def draw_batch(self, k: int, labels: bool = False, through: GF2Matrix | None = None):
        """``k`` samples as a packed array; with ``labels=True`` also return
        the component index (0 or 1) of each sample.

        ``through`` maps every sample by a matrix.  The map is applied to the
        basis rows before combining them, which gives the same output as
        mapping each sample afterwards.
        """
        if through is None:
            return self.draw_images(k, self.a0.rows, self.a1.rows, self.n, labels)
        return self.draw_images(
            k, [through.apply_int(r) for r in self.a0.rows], [through.apply_int(r) for r in self.a1.rows], through.rows, labels
        )

    def draw_images(self, k: int, rows0, rows1, width: int, labels: bool = False):
        """Draw as if sampling, but combine ``rows0`` / ``rows1`` (images of
        the basis rows of ``a0`` / ``a1`` under some linear map) instead of
        the basis rows themselves."""
        self._charge(k)
        which = self.rng.random(k) >= self._w0_float
        n1 = int(which.sum())
        out = np.empty((k, words_for(width)), dtype=np.uint64)
        out[~which] = _combine(rows0, k - n1, self.rng, width)
        out[which] = _combine(rows1, n1, self.rng, width)
        if labels:
            return out, which.astype(np.uint8)
        return out

    def draw(self) -> GF2Vector:
        return GF2Vector(self.n, from_packed(self.draw_batch(1))[0])

    def draw_many(self, k: int) -> list[GF2Vector]:
        return [GF2Vector(self.n, x) for x in from_packed(self.draw_batch(k))]


class ProjectedOracle:
    """Emits ``projector @ x`` for each sample ``x`` of ``inner``."""

    def __init__(self, inner, projector: GF2Matrix):
        if projector.cols != inner.n:
            raise LengthMismatch(f"projector has {projector.cols} columns, oracle emits length {inner.n}")
        self.inner = inner
        self.projector = projector
        self._images = None

    @property
    def n(self) -> int:
        return self.projector.rows

    @property
    def drawn(self) -> int:
        return self.inner.drawn

    def draw_batch(self, k: int, labels: bool = False, through: GF2Matrix | None = None):
        if isinstance(self.inner, MixtureOracle):
            if self._images is None:
                p = self.projector
                self._images = ([p.apply_int(r) for r in self.inner.a0.rows], [p.apply_int(r) for r in self.inner.a1.rows])
            rows0, rows1 = self._images
            if through is not None:
                rows0 = [through.apply_int(r) for r in rows0]
                rows1 = [through.apply_int(r) for r in rows1]
            width = self.n if through is None else through.rows
            return self.inner.draw_images(k, rows0, rows1, width, labels)
        m = self.projector if through is None else through @ self.projector
        res = self.inner.draw_batch(k, labels=labels)
        xs, lab = res if labels else (res, None)
        ys = _kernels.matvec(m.to_packed(), xs, words_for(m.rows))
        return (ys, lab) if labels else ys

    def draw(self) -> GF2Vector:
        return GF2Vector(self.n, from_packed(self.draw_batch(1))[0])


def project(oracle, m: GF2Matrix) -> ProjectedOracle:
    """Compose projections rather than nesting them."""
    if isinstance(oracle, ProjectedOracle):
        return ProjectedOracle(oracle.inner, m @ oracle.projector)
    return ProjectedOracle(oracle, m)


def derived_rng(o) -> np.random.Generator:
    """Fresh generator for an algorithm's own coin flips, split off the
    root oracle's stream so a seeded oracle makes the whole run repeatable."""
    while not hasattr(o, "rng"):
        o = o.inner
    return o.rng.spawn(1)[0]


def _packed_samples(samples, n: int) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return samples
    bits = []
    for v in samples:
        if v.length != n:
            raise LengthMismatch(f"sample of length {v.length} in ambient {n}")
        bits.append(v.bits)
    return to_packed(bits, n)


def estimate_weights(samples: Sequence[GF2Vector] | np.ndarray, a0: Subspace, a1: Subspace) -> tuple[float, float]:
    """Estimate ``(w0, w1)`` from mass on the part of one subspace outside
    the other.  Clamped to ``[0, 1]``."""
    if a0.ambient != a1.ambient:
        raise LengthMismatch(f"ambient dimensions {a0.ambient} and {a1.ambient}")
    if a0 == a1:
        raise Unidentifiable("both components are the same subspace")
    xs = _packed_samples(samples, a0.ambient)
    if xs.shape[0] == 0:
        raise ValueError("no samples")
    common = intersect(a0, a1).dim
    in0 = a0.contains_packed(xs)
    in1 = a1.contains_packed(xs)
    if not is_subset(a0, a1):
        freq = float(np.mean(in0 & ~in1))
        w0 = freq * 2**a0.dim / (2**a0.dim - 2**common)
    else:
        freq = float(np.mean(in1 & ~in0))
        w0 = 1.0 - freq * 2**a1.dim / (2**a1.dim - 2**common)
    w0 = min(1.0, max(0.0, w0))
    return w0, 1.0 - w0
