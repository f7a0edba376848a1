"""Learning parity with noise, and its two-way translation to mixtures of
a full space and a hyperplane.

A labelled sample ``(x, y)`` becomes the vector ``(x, y)`` of length
``n + 1``.  Those vectors are distributed as a mixture of the whole space
(weight ``2 eps``) and the hyperplane ``<s, x> + y = 0`` (weight
``1 - 2 eps``).  Conversely, splitting a mixture sample at a coordinate in
the hyperplane's support gives an LPN sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LengthMismatch
from .gf2 import GF2Matrix, GF2Vector, Subspace, from_packed, kernel, to_packed, words_for
from .hypothesis import DEFAULT_SAMPLE_CONSTANT, HypothesisList, choose_right_hypothesis
from .rng import make_rng, random_words

MAX_BRUTE_FORCE_DIM = 20


class LpnOracle:
    """Uniform ``x`` with label ``<secret, x>``, flipped with probability ``eps``."""

    def __init__(self, secret: GF2Vector, eps: float, rng=None):
        if not 0 <= eps < 0.5:
            raise ValueError(f"noise rate {eps} outside [0, 1/2)")
        self.secret = secret
        self.eps = eps
        self.rng = rng if isinstance(rng, np.random.Generator) else make_rng(rng or 0)
        self.drawn = 0

    @property
    def n(self) -> int:
        return self.secret.length

    def draw_batch(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Packed inputs and a ``uint8`` label array."""
        self.drawn += k
        xs = random_words(self.rng, k, self.n)
        masked = xs & to_packed([self.secret.bits], self.n)[0]
        parity = np.bitwise_count(masked).sum(axis=1) & 1
        noise = self.rng.random(k) < self.eps
        return xs, (parity ^ noise).astype(np.uint8)

    def draw(self) -> tuple[GF2Vector, int]:
        xs, ys = self.draw_batch(1)
        return GF2Vector(self.n, from_packed(xs)[0]), int(ys[0])


def lpn_draw(o: LpnOracle) -> tuple[GF2Vector, int]:
    return o.draw()


def lpn_to_mixture(sample: tuple[GF2Vector, int]) -> GF2Vector:
    """``(x, y)`` as one vector with ``y`` in the last coordinate."""
    x, y = sample
    return GF2Vector(x.length + 1, x.bits | ((int(y) & 1) << x.length))


def mixture_to_lpn(sample: GF2Vector, j: int) -> tuple[GF2Vector, int]:
    """Split off coordinate ``j`` (1-based) as the label."""
    if not 1 <= j <= sample.length:
        raise IndexError(f"coordinate {j} outside 1..{sample.length}")
    c = j - 1
    low = sample.bits & ((1 << c) - 1)
    high = sample.bits >> (c + 1)
    return GF2Vector(sample.length - 1, low | (high << c)), (sample.bits >> c) & 1


def split_packed(zs: np.ndarray, length: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Batch form of ``mixture_to_lpn`` for packed samples of ``length`` bits."""
    if not 1 <= j <= length:
        raise IndexError(f"coordinate {j} outside 1..{length}")
    pairs = [mixture_to_lpn(GF2Vector(length, z), j) for z in from_packed(zs)]
    return to_packed([x.bits for x, _ in pairs], length - 1), np.array([y for _, y in pairs], dtype=np.uint8)


def hyperplane(secret: GF2Vector) -> Subspace:
    """``{(x, y) : <secret, x> + y = 0}`` inside the space of length ``n + 1``."""
    n = secret.length
    return kernel(GF2Matrix(n + 1, (secret.bits | (1 << n),)))


def lpn_mixture_components(secret: GF2Vector, eps) -> tuple[Subspace, Subspace, Fraction]:
    """``(A0, A1, w0)`` of the mixture that concatenated LPN samples follow."""
    eps = Fraction(eps).limit_denominator(10**9) if isinstance(eps, float) else Fraction(eps)
    return Subspace.full(secret.length + 1), hyperplane(secret), 2 * eps


class LpnMixtureOracle:
    """Emits concatenated ``(x, y)`` samples of an ``LpnOracle``."""

    def __init__(self, lpn: LpnOracle):
        self.lpn = lpn

    @property
    def n(self) -> int:
        return self.lpn.n + 1

    @property
    def rng(self):
        return self.lpn.rng

    @property
    def drawn(self) -> int:
        return self.lpn.drawn

    def draw_batch(self, k: int, labels: bool = False):
        if labels:
            raise ValueError("component labels are not observable for LPN samples")
        xs, ys = self.lpn.draw_batch(k)
        n = self.lpn.n
        out = np.zeros((k, words_for(n + 1)), dtype=np.uint64)
        out[:, : xs.shape[1]] = xs
        out[:, n >> 6] |= ys.astype(np.uint64) << np.uint64(n & 63)
        return out

    def draw(self) -> GF2Vector:
        return GF2Vector(self.n, from_packed(self.draw_batch(1))[0])


def _reverse_bits(idx: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros_like(idx)
    for i in range(n):
        out |= ((idx >> i) & 1) << (n - 1 - i)
    return out


def brute_force_lpn(samples, n: int) -> GF2Vector:
    """The parity agreeing with the most samples.

    ``samples`` is a sequence of ``(GF2Vector, bit)`` or a pair ``(packed
    inputs, labels)``.  Agreement for all ``2**n`` parities at once comes
    from a Walsh-Hadamard transform of the signed label histogram.  Ties go
    to the lexicographically smallest bit-string.
    """
    if n > MAX_BRUTE_FORCE_DIM:
        raise ValueError(f"brute force limited to n <= {MAX_BRUTE_FORCE_DIM}, got {n}")
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        xs = samples[0][:, 0].astype(np.int64) if n else np.zeros(len(samples[1]), dtype=np.int64)
        ys = np.asarray(samples[1], dtype=np.int64)
    else:
        samples = list(samples)
        for x, _ in samples:
            if x.length != n:
                raise LengthMismatch(f"sample of length {x.length}, expected {n}")
        xs = np.array([x.bits for x, _ in samples], dtype=np.int64)
        ys = np.array([y for _, y in samples], dtype=np.int64)
    f = np.zeros(1 << n, dtype=np.int64)
    if len(xs):
        np.add.at(f, xs, 1 - 2 * (ys & 1))
    h = 1
    while h < (1 << n):
        f = f.reshape(-1, 2, h)
        a, b = f[:, 0, :].copy(), f[:, 1, :].copy()
        f[:, 0, :], f[:, 1, :] = a + b, a - b
        f = f.reshape(-1)
        h *= 2
    best = np.flatnonzero(f == f.max())
    choice = best[np.argmin(_reverse_bits(best, n))]
    return GF2Vector(n, int(choice))


def candidate_from_guess(secret: GF2Vector, j: int) -> Subspace:
    """Hyperplane of length ``n + 1`` whose constraint is ``secret`` on the
    coordinates other than ``j`` (1-based) plus coordinate ``j`` itself."""
    c = j - 1
    low = secret.bits & ((1 << c) - 1)
    high = secret.bits >> c
    row = low | (1 << c) | (high << (c + 1))
    return kernel(GF2Matrix(secret.length + 1, (row,)))


@dataclass
class RoundTrip:
    recovered: Subspace
    candidates: list[Subspace]
    secrets: list[GF2Vector]


def recover_hyperplane(o, w_lower: float, delta: float, samples_per_guess: int = 200,
                       constant: float = DEFAULT_SAMPLE_CONSTANT) -> RoundTrip:
    """Recover the hyperplane component of a (full space, hyperplane)
    mixture: for every coordinate, read the samples as LPN with that
    coordinate as label, solve by brute force, and let the Scheffé
    tournament pick among the resulting hyperplanes."""
    length = o.n
    full = Subspace.full(length)
    secrets, cands = [], []
    for j in range(1, length + 1):
        xs, ys = split_packed(o.draw_batch(samples_per_guess), length, j)
        s = brute_force_lpn((xs, ys), length - 1)
        secrets.append(s)
        h = candidate_from_guess(s, j)
        if h not in cands:
            cands.append(h)
    idx = choose_right_hypothesis(o, HypothesisList([(h, full) for h in cands], w_lower), delta, constant)
    return RoundTrip(cands[idx], cands, secrets)

