"""Sample-based test of whether the two hidden subspaces are comparable.

One round: span the first batch of samples, coordinatize that span by its
pivot columns, push a second batch through the coordinate map and count the
quadratics vanishing on it.  For a comparable pair the projected samples
cover a single subspace equal to the whole coordinate space, so only the
zero quadratic vanishes.  For an incomparable pair the product of the two
defining linear forms vanishes too.  Rounds are combined by majority vote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidParams
from .gf2 import GF2Matrix
from .oracle import project
from .poly import count_vanishing_quadratics


@dataclass(frozen=True)
class ComparabilityParams:
    n: int
    wmin: float
    delta: float

    def __post_init__(self):
        if self.n <= 0:
            raise InvalidParams("ambient dimension must be positive")
        if not 0 < self.wmin <= 0.5:
            raise InvalidParams(f"wmin = {self.wmin} outside (0, 1/2]")
        if not 0 < self.delta < 1:
            raise InvalidParams(f"delta = {self.delta} outside (0, 1)")

    @property
    def t(self) -> int:
        """Span samples per round."""
        return math.ceil(16 * self.n / self.wmin**2)

    @property
    def r(self) -> int:
        """Polynomial samples per round."""
        return math.ceil(8 * self.n**2 / self.wmin)

    @property
    def rounds(self) -> int:
        return math.ceil(18 * math.log(2 / self.delta))


def comparability_round(o, params: ComparabilityParams) -> bool:
    """One unamplified round; True means "comparable"."""
    xs = o.draw_batch(params.t)
    _, pivots = _kernels.echelon_basis(xs, params.n)
    v = len(pivots)
    if v == 0:
        o.draw_batch(params.r)
        return True
    coords = GF2Matrix(params.n, tuple(1 << int(p) for p in pivots))
    projected = project(o, coords).draw_batch(params.r)
    return count_vanishing_quadratics(projected, v) == 0


def test_comparability(o, params: ComparabilityParams) -> bool:
    """Majority of ``params.rounds`` independent rounds.

    Stops as soon as one answer holds a strict majority of all rounds; the
    returned value is the same as running every round.  A tie
    (possible for even round counts) reads as "incomparable".
    """
    if o.n != params.n:
        raise InvalidParams(f"oracle emits length {o.n}, params say n = {params.n}")
    k = params.rounds
    yes = no = 0
    while 2 * yes <= k and 2 * no <= k and yes + no < k:
        if comparability_round(o, params):
            yes += 1
        else:
            no += 1
    return 2 * yes > k


test_comparability.__test__ = False  # keep pytest from collecting it
