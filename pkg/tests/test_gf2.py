import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from f2mix.errors import LengthMismatch
from f2mix.gf2 import (
    GF2Matrix,
    GF2Vector,
    Subspace,
    canonical_basis,
    contains,
    from_packed,
    intersect,
    is_subset,
    kernel,
    random_matrix,
    random_subspace,
    rank,
    rank_packed,
    sample_uniform,
    sample_uniform_packed,
    solve,
    span_packed,
    subspace_sum,
    to_packed,
)
from f2mix.rng import make_rng

from naive import subspaces_inside, all_subspaces, naive_kernel, naive_rank, span_set

V = GF2Vector.from_string


def S(*rows, n=None):
    n = n if n is not None else len(rows[0])
    return Subspace.from_strings(list(rows), n)


@st.composite
def matrices(draw, max_rows=12, max_cols=12):
    r = draw(st.integers(0, max_rows))
    c = draw(st.integers(1, max_cols))
    rows = draw(st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r))
    return GF2Matrix(c, tuple(rows))


# ---- vectors and packing -------------------------------------------------

def test_string_orientation():
    v = V("1101")
    assert v.to_list() == [1, 1, 0, 1]
    assert v[0] == 1 and v[2] == 0
    assert v.to_string() == "1101"


def test_vector_addition_is_xor():
    v = V("1100")
    assert v + v == GF2Vector.zeros(4)
    assert v + V("0110") == V("1010")
    with pytest.raises(LengthMismatch):
        v + V("10")


def test_bits_beyond_length_rejected():
    with pytest.raises(ValueError):
        GF2Vector(3, 0b1000)


@given(st.integers(0, 200), st.data())
def test_packing_round_trip(n, data):
    xs = data.draw(st.lists(st.integers(0, (1 << n) - 1), max_size=10))
    arr = to_packed(xs, n)
    assert arr.dtype == np.uint64
    assert from_packed(arr) == xs


def test_packing_is_little_endian_per_word():
    arr = to_packed([1 << 70], 71)
    assert arr.shape == (1, 2)
    assert arr[0, 1] == 1 << 6


# ---- rank ----------------------------------------------------------------

def test_rank_examples():
    assert rank(GF2Matrix.identity(3)) == 3
    assert rank(GF2Matrix.from_rows(["110", "011", "101"])) == 2
    assert rank(GF2Matrix.zeros(2, 5)) == 0


@given(matrices())
def test_rank_matches_naive_and_transpose(m):
    r = rank(m)
    assert r == naive_rank(m.data, m.cols)
    assert r == rank(m.transpose())
    assert r <= min(m.rows, m.cols)


@settings(max_examples=60)
@given(st.integers(1, 300), st.integers(1, 150), st.integers(0, 2**32))
def test_packed_rank_matches_python_rank(rows, cols, seed):
    rng = make_rng(seed)
    # low-rank products exercise the syndrome-mode path
    k = int(rng.integers(1, cols + 1))
    left = random_matrix(rows, k, rng)
    right = random_matrix(k, cols, rng)
    prod = [0] * rows
    for i, a in enumerate(left.data):
        for j in range(k):
            if (a >> j) & 1:
                prod[i] ^= right.data[j]
    m = GF2Matrix(cols, tuple(prod))
    assert rank_packed(m.to_packed(), cols) == rank(m)


def test_rank_does_not_mutate():
    m = GF2Matrix.from_rows(["110", "011"])
    before = m.data
    rank(m)
    assert m.data == before


# ---- canonical basis -----------------------------------------------------

def test_canonical_basis_examples():
    s = canonical_basis([V("110"), V("011")], 3)
    assert s.to_strings() == ["101", "011"]
    z = canonical_basis([], 4)
    assert z.dim == 0 and z.basis.rows == 0
    d = canonical_basis([V("10"), V("10")], 2)
    assert d.to_strings() == ["10"] and d.dim == 1


def test_canonical_basis_length_mismatch():
    with pytest.raises(LengthMismatch):
        canonical_basis([V("10"), V("101")], 2)


@given(st.integers(1, 12), st.data())
def test_canonical_basis_idempotent_and_order_free(n, data):
    xs = data.draw(st.lists(st.integers(0, (1 << n) - 1), max_size=10))
    s = Subspace.from_ints(xs, n)
    perm = data.draw(st.permutations(xs))
    assert Subspace.from_ints(perm, n) == s
    assert canonical_basis(s.basis.vectors(), n) == s
    assert set(s.elements()) == span_set(xs)
    assert s.dim == naive_rank(xs, n)


def test_non_echelon_basis_rejected():
    with pytest.raises(ValueError):
        Subspace(3, GF2Matrix.from_rows(["110", "100"]))


# ---- kernel --------------------------------------------------------------

def test_kernel_examples():
    assert kernel(GF2Matrix.from_rows(["110", "011"])) == S("111")
    assert kernel(GF2Matrix.identity(5)) == Subspace.zero(5)
    assert kernel(GF2Matrix.zeros(1, 3)) == Subspace.full(3)


@given(matrices(max_cols=10))
def test_kernel_matches_enumeration(m):
    k = kernel(m)
    assert set(k.elements()) == naive_kernel(m.data, m.cols)
    assert k.dim == m.cols - rank(m)


# ---- membership and set operations ---------------------------------------

def test_contains_examples():
    assert contains(S("101", "010"), V("111"))
    assert contains(S("110"), GF2Vector.zeros(3))
    assert not contains(S("010"), V("100"))
    with pytest.raises(LengthMismatch):
        contains(S("10"), V("100"))


def test_incomparable_example():
    a = S("100", "010")
    b = S("001", "110")
    assert not is_subset(a, b) and not is_subset(b, a)
    assert intersect(a, b) == S("110")
    assert intersect(a, a) == a
    assert subspace_sum(S("100"), S("010")) == S("100", "010")


def test_ambient_mismatch():
    with pytest.raises(LengthMismatch):
        intersect(S("10"), S("100"))


@given(st.integers(1, 16), st.integers(0, 2**32))
def test_closure_under_addition(n, seed):
    rng = make_rng(seed)
    s = random_subspace(n, int(rng.integers(0, n + 1)), rng)
    for _ in range(10):
        u, v = sample_uniform(s, rng), sample_uniform(s, rng)
        assert contains(s, u) and contains(s, v) and contains(s, u + v)


@given(st.integers(1, 8), st.integers(0, 2**32))
def test_intersection_and_sum_against_enumeration(n, seed):
    rng = make_rng(seed)
    a = random_subspace(n, int(rng.integers(0, n + 1)), rng)
    b = random_subspace(n, int(rng.integers(0, n + 1)), rng)
    ea, eb = set(a.elements()), set(b.elements())
    assert set(intersect(a, b).elements()) == ea & eb
    assert set(subspace_sum(a, b).elements()) == {x ^ y for x in ea for y in eb}
    assert a.dim + b.dim == intersect(a, b).dim + subspace_sum(a, b).dim
    assert is_subset(a, b) == (ea <= eb)


@given(st.integers(1, 40), st.integers(0, 2**32))
def test_packed_membership(n, seed):
    rng = make_rng(seed)
    s = random_subspace(n, int(rng.integers(0, n + 1)), rng)
    xs = rng.integers(0, 1 << min(n, 62), size=50, dtype=np.uint64)[:, None]
    if n > 62:
        xs = to_packed([int(rng.integers(0, 2**62)) << (n - 62) for _ in range(50)], n)
    inside = sample_uniform_packed(s, 50, rng)
    assert s.contains_packed(inside).all()
    assert list(s.contains_packed(xs)) == [s.contains_int(x) for x in from_packed(xs)]


def test_coordinates_round_trip():
    rng = make_rng(3)
    s = random_subspace(20, 7, rng)
    for c in range(0, 128, 5):
        assert s.coordinates(s.from_coordinates(c)) == c


def test_image_and_matrix_product():
    rng = make_rng(5)
    a = random_subspace(9, 4, rng)
    m1, m2 = random_matrix(7, 9, rng), random_matrix(5, 7, rng)
    assert a.image(m1).image(m2) == a.image(m2 @ m1)
    assert set(a.image(m1).elements()) == {m1.apply_int(x) for x in a.elements()}


# ---- solve ---------------------------------------------------------------

def test_solve_examples():
    b = V("1011")
    assert solve(GF2Matrix.identity(4), b) == b
    x = solve(GF2Matrix.from_rows(["11"]), V("1"))
    assert x in (V("10"), V("01"))
    assert solve(GF2Matrix.from_rows(["00"]), V("1")) is None


@given(matrices(max_cols=8), st.data())
def test_solve_consistency(m, data):
    b = GF2Vector(m.rows, data.draw(st.integers(0, (1 << m.rows) - 1)))
    x = solve(m, b)
    reachable = {(m @ GF2Vector(m.cols, y)).bits for y in range(1 << m.cols)}
    if x is None:
        assert b.bits not in reachable
    else:
        assert m @ x == b


# ---- sampling ------------------------------------------------------------

def test_sample_uniform_support():
    rng = make_rng(0)
    assert all(sample_uniform(Subspace.zero(3), rng) == GF2Vector.zeros(3) for _ in range(20))
    s = S("11")
    assert all(sample_uniform(s, rng) in (V("00"), V("11")) for _ in range(50))


def test_sample_uniform_frequencies():
    rng = make_rng(1)
    xs = from_packed(sample_uniform_packed(Subspace.full(2), 4096, rng))
    freq = np.bincount(xs, minlength=4) / 4096
    assert np.all(np.abs(freq - 0.25) <= 0.05)


def test_random_matrix_empty_and_reproducible():
    assert random_matrix(0, 4, make_rng(0)).shape == (0, 4)
    assert random_matrix(6, 9, make_rng(42)) == random_matrix(6, 9, make_rng(42))


def test_random_matrix_full_rank_probability():
    rng = make_rng(2024)
    trials = 10_000
    full = sum(rank(random_matrix(8, 8, rng)) == 8 for _ in range(trials))
    expected = math.prod(1 - 2.0**-j for j in range(1, 9))
    assert abs(expected - 0.2899) < 1e-4
    assert abs(full / trials - expected) <= 0.02


def test_span_packed_matches_python():
    rng = make_rng(8)
    s = random_subspace(100, 30, rng)
    xs = sample_uniform_packed(s, 200, rng)
    assert span_packed(xs, 100) == s


# ---- union of two proper subspaces ---------------------------------------

def test_union_of_two_proper_subspaces_exhaustive():
    for n in range(1, 5):
        for big in all_subspaces(n):
            if len(big) < 2:
                continue
            subs = [t for t in subspaces_inside(big) if len(t) < len(big)]
            for u in subs:
                for v in subs:
                    assert len(big) - len(u | v) >= len(big) / 4


def test_union_of_two_proper_subspaces_random():
    rng = make_rng(11)
    for _ in range(300):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, n + 1))
        s = random_subspace(n, d, rng)
        coords = [random_subspace(d, int(rng.integers(0, d)), rng) for _ in range(2)]
        u, v = ({s.from_coordinates(c) for c in t.elements()} for t in coords)
        assert s.size - len(u | v) >= s.size / 4


# ---- random projections of fixed independent vectors ---------------------

@pytest.mark.parametrize("t,m", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_projected_independent_vectors_are_uniform(t, m):
    rng = make_rng(100 + 10 * t + m)
    n = 5
    bs = [0b00011, 0b10100][:t]
    trials = 100_000
    # each row of M acts independently on the columns; build M b_i by bit tricks
    rows = rng.integers(0, 1 << n, size=(trials, m))
    cells = np.zeros(trials, dtype=np.int64)
    for i, b in enumerate(bs):
        for r in range(m):
            bit = np.bitwise_count(rows[:, r] & b) & 1
            cells |= bit.astype(np.int64) << (i * m + r)
    counts = np.bincount(cells, minlength=1 << (t * m))
    assert stats.chisquare(counts).pvalue > 1e-3
