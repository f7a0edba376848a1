"""Dense linear algebra over GF(2).

Vectors and matrix rows are stored as Python integers with coordinate ``c``
at bit ``c``; exporting an integer little-endian into 64-bit words gives the
packed ``uint64`` layout used by the numba kernels (``to_packed`` /
``from_packed``).  All objects are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from .errors import LengthMismatch
from .rng import random_bits, random_words


def words_for(nbits: int) -> int:
    return max(1, (nbits + 63) // 64)


def to_packed(values: Iterable[int], nbits: int) -> np.ndarray:
    values = list(values)
    w = words_for(nbits)
    if not values:
        return np.zeros((0, w), dtype=np.uint64)
    buf = b"".join(v.to_bytes(8 * w, "little") for v in values)
    return np.frombuffer(buf, dtype="<u8").reshape(len(values), w).astype(np.uint64)


def from_packed(arr: np.ndarray) -> list[int]:
    arr = np.ascontiguousarray(arr, dtype="<u8")
    return [int.from_bytes(row.tobytes(), "little") for row in arr]


def _low(x: int) -> int:
    return (x & -x).bit_length() - 1


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


# --------------------------------------------------------------------------
# vectors and matrices


@dataclass(frozen=True)
class GF2Vector:
    length: int
    bits: int = 0

    def __post_init__(self):
        if self.length < 0 or self.bits < 0 or self.bits >> self.length:
            raise ValueError(f"bits do not fit in length {self.length}")

    @classmethod
    def zeros(cls, n: int) -> GF2Vector:
        return cls(n, 0)

    @classmethod
    def unit(cls, n: int, i: int) -> GF2Vector:
        return cls(n, 1 << i)

    @classmethod
    def from_list(cls, coords: Sequence[int]) -> GF2Vector:
        bits = 0
        for i, c in enumerate(coords):
            if c & 1:
                bits |= 1 << i
        return cls(len(coords), bits)

    @classmethod
    def from_string(cls, s: str) -> GF2Vector:
        if any(ch not in "01" for ch in s):
            raise ValueError(f"not a bit-string: {s!r}")
        return cls.from_list([int(ch) for ch in s])

    def to_list(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.length)]

    def to_string(self) -> str:
        return "".join(str(b) for b in self.to_list())

    def to_words(self) -> np.ndarray:
        return to_packed([self.bits], self.length)[0]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __len__(self) -> int:
        return self.length

    def _check(self, other: GF2Vector):
        if self.length != other.length:
            raise LengthMismatch(f"lengths {self.length} and {other.length}")

    def __add__(self, other: GF2Vector) -> GF2Vector:
        self._check(other)
        return GF2Vector(self.length, self.bits ^ other.bits)

    __xor__ = __add__
    __sub__ = __add__

    def dot(self, other: GF2Vector) -> int:
        self._check(other)
        return _parity(self.bits & other.bits)

    @property
    def weight(self) -> int:
        return bin(self.bits).count("1")

    def __bool__(self) -> bool:
        return self.bits != 0

    def __repr__(self) -> str:
        return f"GF2Vector('{self.to_string()}')"


@dataclass(frozen=True)
class GF2Matrix:
    """Row-major matrix; ``data[i]`` is row ``i`` as an integer bit-set."""

    cols: int
    data: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "data", tuple(int(r) for r in self.data))
        for r in self.data:
            if r < 0 or r >> self.cols:
                raise ValueError(f"row does not fit in {self.cols} columns")

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.data), self.cols)

    @classmethod
    def from_rows(cls, rows: Sequence, cols: int | None = None) -> GF2Matrix:
        vecs = [_as_vector(r) for r in rows]
        if cols is None:
            if not vecs:
                raise ValueError("cols required for an empty matrix")
            cols = vecs[0].length
        for v in vecs:
            if v.length != cols:
                raise LengthMismatch(f"row length {v.length} != {cols}")
        return cls(cols, tuple(v.bits for v in vecs))

    @classmethod
    def identity(cls, n: int) -> GF2Matrix:
        return cls(n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> GF2Matrix:
        return cls(cols, (0,) * rows)

    @classmethod
    def from_packed(cls, arr: np.ndarray, cols: int) -> GF2Matrix:
        return cls(cols, tuple(from_packed(arr)))

    def to_packed(self) -> np.ndarray:
        return to_packed(self.data, self.cols)

    def row(self, i: int) -> GF2Vector:
        return GF2Vector(self.cols, self.data[i])

    def vectors(self) -> list[GF2Vector]:
        return [GF2Vector(self.cols, r) for r in self.data]

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> j) & 1

    def transpose(self) -> GF2Matrix:
        out = [0] * self.cols
        for i, r in enumerate(self.data):
            while r:
                j = _low(r)
                out[j] |= 1 << i
                r &= r - 1
        return GF2Matrix(self.rows, tuple(out))

    @cached_property
    def _columns(self) -> tuple[int, ...]:
        return self.transpose().data

    def apply_int(self, x: int) -> int:
        cols = self._columns
        y = 0
        while x:
            y ^= cols[_low(x)]
            x &= x - 1
        return y

    def __matmul__(self, other):
        if isinstance(other, GF2Vector):
            if other.length != self.cols:
                raise LengthMismatch(f"{self.shape} @ vector of length {other.length}")
            return GF2Vector(self.rows, self.apply_int(other.bits))
        if isinstance(other, GF2Matrix):
            if other.rows != self.cols:
                raise LengthMismatch(f"{self.shape} @ {other.shape}")
            out = []
            for r in self.data:
                acc = 0
                while r:
                    j = _low(r)
                    acc ^= other.data[j]
                    r &= r - 1
                out.append(acc)
            return GF2Matrix(other.cols, tuple(out))
        return NotImplemented

    def apply_packed(self, xs: np.ndarray) -> np.ndarray:
        """Apply to every row of a packed sample batch."""
        return _kernels.matvec(self.to_packed(), xs, words_for(self.rows))

    def to_array(self) -> np.ndarray:
        return np.array([[(r >> j) & 1 for j in range(self.cols)] for r in self.data], dtype=np.uint8).reshape(self.rows, self.cols)

    def __repr__(self) -> str:
        body = ", ".join(GF2Vector(self.cols, r).to_string() for r in self.data)
        return f"GF2Matrix({self.rows}x{self.cols}: [{body}])"


def _as_vector(r) -> GF2Vector:
    if isinstance(r, GF2Vector):
        return r
    if isinstance(r, str):
        return GF2Vector.from_string(r)
    return GF2Vector.from_list(list(r))


# --------------------------------------------------------------------------
# elimination on integer rows


def _reduce(x: int, basis: Sequence[tuple[int, int]]) -> int:
    for p, b in basis:
        if (x >> p) & 1:
            x ^= b
    return x


def echelon(rows: Iterable[int]) -> list[tuple[int, int]]:
    """Reduced row-echelon basis as ``(pivot, row)`` pairs sorted by pivot.

    The pivot of a row is its lowest set column; every pivot column is zero
    in all other rows.
    """
    basis: dict[int, int] = {}
    for x in rows:
        x = _reduce(x, basis.items())
        if not x:
            continue
        p = _low(x)
        for q, b in basis.items():
            if (b >> p) & 1:
                basis[q] = b ^ x
        basis[p] = x
    return sorted(basis.items())


def rank(m: GF2Matrix | Sequence[int]) -> int:
    rows = m.data if isinstance(m, GF2Matrix) else m
    return len(echelon(rows))


def rank_packed(arr: np.ndarray, ncols: int, stop_at: int | None = None) -> int:
    """Rank of a packed row batch (numba path, for tall matrices)."""
    if arr.shape[0] == 0 or ncols == 0:
        return 0
    stop = ncols if stop_at is None else stop_at
    r, _ = _kernels.rank_incremental(np.ascontiguousarray(arr), ncols, stop)
    return int(r)


def solve(m: GF2Matrix, b: GF2Vector) -> GF2Vector | None:
    """Some ``x`` with ``m @ x == b`` (zeros on free coordinates), or None."""
    if b.length != m.rows:
        raise LengthMismatch(f"rhs length {b.length} != {m.rows} rows")
    c = m.cols
    aug = [r | (((b.bits >> i) & 1) << c) for i, r in enumerate(m.data)]
    x = 0
    for p, row in echelon(aug):
        if p == c:
            return None
        if (row >> c) & 1:
            x |= 1 << p
    return GF2Vector(c, x)


# --------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of GF(2)^ambient held by its reduced echelon basis.

    Two ``Subspace`` values are equal as sets iff they compare equal.
    """

    ambient: int
    basis: GF2Matrix = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.basis is None:
            object.__setattr__(self, "basis", GF2Matrix(self.ambient, ()))
        if self.basis.cols != self.ambient:
            raise LengthMismatch(f"basis has {self.basis.cols} columns, ambient is {self.ambient}")
        prev = -1
        pivots = []
        for r in self.basis.data:
            p = _low(r) if r else -1
            if p <= prev:
                raise ValueError("basis is not in reduced echelon form")
            pivots.append(p)
            prev = p
        for i, r in enumerate(self.basis.data):
            for j, p in enumerate(pivots):
                if i != j and (r >> p) & 1:
                    raise ValueError("basis is not in reduced echelon form")

    # constructors
    @classmethod
    def zero(cls, n: int) -> Subspace:
        return cls(n)

    @classmethod
    def full(cls, n: int) -> Subspace:
        return cls(n, GF2Matrix.identity(n))

    @classmethod
    def span(cls, vectors: Iterable, ambient: int) -> Subspace:
        return canonical_basis(vectors, ambient)

    @classmethod
    def from_ints(cls, rows: Iterable[int], ambient: int) -> Subspace:
        return cls(ambient, GF2Matrix(ambient, tuple(b for _, b in echelon(rows))))

    @classmethod
    def from_strings(cls, rows: Sequence[str], ambient: int) -> Subspace:
        return canonical_basis([GF2Vector.from_string(s) for s in rows], ambient)

    # views
    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def rows(self) -> tuple[int, ...]:
        return self.basis.data

    @cached_property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_low(r) for r in self.basis.data)

    def to_strings(self) -> list[str]:
        return [v.to_string() for v in self.basis.vectors()]

    def contains_int(self, x: int) -> bool:
        for p, b in zip(self.pivots, self.basis.data):
            if (x >> p) & 1:
                x ^= b
        return x == 0

    def __contains__(self, v: GF2Vector) -> bool:
        return contains(self, v)

    def coordinates(self, x: int) -> int:
        """Coefficients of ``x`` (assumed inside) in the echelon basis."""
        c = 0
        for i, p in enumerate(self.pivots):
            if (x >> p) & 1:
                c |= 1 << i
        return c

    def from_coordinates(self, c: int) -> int:
        x = 0
        i = 0
        while c:
            if c & 1:
                x ^= self.basis.data[i]
            c >>= 1
            i += 1
        return x

    def elements(self) -> Iterator[int]:
        """All ``2**dim`` members as integers (Gray-code order)."""
        x = 0
        yield x
        rows = self.basis.data
        for k in range(1, 1 << len(rows)):
            x ^= rows[_low(k)]
            yield x

    @cached_property
    def parity_check(self) -> GF2Matrix:
        """Rows spanning the annihilator: ``x`` is a member iff ``H @ x == 0``."""
        return kernel(self.basis).basis

    def contains_packed(self, xs: np.ndarray) -> np.ndarray:
        h = self.parity_check
        if h.rows == 0:
            return np.ones(xs.shape[0], dtype=bool)
        syndrome = _kernels.matvec(h.to_packed(), xs, words_for(h.rows))
        return ~np.any(syndrome, axis=1)

    def image(self, m: GF2Matrix) -> Subspace:
        if m.cols != self.ambient:
            raise LengthMismatch(f"map with {m.cols} columns on ambient {self.ambient}")
        return Subspace.from_ints((m.apply_int(r) for r in self.basis.data), m.rows)

    def __le__(self, other: Subspace) -> bool:
        return is_subset(self, other)

    def __repr__(self) -> str:
        return f"Subspace(n={self.ambient}, dim={self.dim}, basis={self.to_strings()})"


def canonical_basis(vectors: Iterable, ambient: int) -> Subspace:
    rows = []
    for v in vectors:
        v = _as_vector(v)
        if v.length != ambient:
            raise LengthMismatch(f"vector of length {v.length} in ambient {ambient}")
        rows.append(v.bits)
    return Subspace.from_ints(rows, ambient)


def kernel(m: GF2Matrix) -> Subspace:
    """``{x : m @ x == 0}``."""
    basis = echelon(m.data)
    pivots = {p for p, _ in basis}
    out = []
    for f in range(m.cols):
        if f in pivots:
            continue
        x = 1 << f
        for p, row in basis:
            if (row >> f) & 1:
                x |= 1 << p
        out.append(x)
    return Subspace.from_ints(out, m.cols)


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient != b.ambient:
        raise LengthMismatch(f"ambient dimensions {a.ambient} and {b.ambient}")


def contains(s: Subspace, v: GF2Vector) -> bool:
    if v.length != s.ambient:
        raise LengthMismatch(f"vector of length {v.length} in ambient {s.ambient}")
    return s.contains_int(v.bits)


def is_subset(a: Subspace, b: Subspace) -> bool:
    _check_ambient(a, b)
    return a.dim <= b.dim and all(b.contains_int(r) for r in a.rows)


def incomparable(a: Subspace, b: Subspace) -> bool:
    return not is_subset(a, b) and not is_subset(b, a)


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    return Subspace.from_ints(a.rows + b.rows, a.ambient)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Zassenhaus: reduce rows ``(a_i | a_i)`` and ``(b_j | 0)`` on the left
    half; rows whose left half vanishes carry a basis of ``a & b``."""
    _check_ambient(a, b)
    n = a.ambient
    rows = [r | (r << n) for r in a.rows] + list(b.rows)
    out = [row >> n for p, row in echelon(rows) if p >= n]
    return Subspace.from_ints(out, n)


def sample_uniform(s: Subspace, rng: np.random.Generator) -> GF2Vector:
    return GF2Vector(s.ambient, s.from_coordinates(random_bits(rng, s.dim)))


def sample_uniform_packed(s: Subspace, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent uniform members of ``s`` as a packed batch."""
    w = words_for(s.ambient)
    if s.dim == 0:
        return np.zeros((count, w), dtype=np.uint64)
    coeffs = random_words(rng, count, s.dim)
    return _kernels.combine_rows(s.basis.to_packed(), coeffs, w)


def random_matrix(rows: int, cols: int, rng: np.random.Generator) -> GF2Matrix:
    return GF2Matrix(cols, tuple(random_bits(rng, cols) for _ in range(rows)))


def random_subspace(n: int, d: int, rng: np.random.Generator) -> Subspace:
    """Uniformly random ``d``-dimensional subspace (rejection on rank)."""
    if not 0 <= d <= n:
        raise ValueError(f"dimension {d} outside [0, {n}]")
    while True:
        s = Subspace.from_ints((random_bits(rng, n) for _ in range(d)), n)
        if s.dim == d:
            return s


def span_packed(xs: np.ndarray, n: int) -> Subspace:
    """Span of the rows of a packed batch."""
    if xs.shape[0] == 0 or n == 0:
        return Subspace(n)
    basis, _ = _kernels.echelon_basis(np.ascontiguousarray(xs), n)
    return Subspace(n, GF2Matrix(n, tuple(from_packed(basis))))
