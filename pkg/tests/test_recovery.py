import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from f2mix.errors import BaseCaseFailed, DimensionMismatch, InfeasibleSpec, ProjectionStalled
from f2mix.gf2 import (
    GF2Matrix,
    GF2Vector,
    Subspace,
    incomparable,
    intersect,
    is_subset,
    random_matrix,
    random_subspace,
    rank,
    sample_uniform_packed,
    span_packed,
    to_packed,
)
from f2mix.harness import InstanceSpec, make_instance
from f2mix.oracle import MixtureOracle
from f2mix.poly import binom_upto
from f2mix.recovery import (
    LargeDiffParams,
    Regime,
    base_case_candidates,
    base_case_sample_count,
    dependent_index_set,
    find_good_projector,
    incomparable_subspace_recovery,
    large_diff_recovery,
    large_diff_run,
    recover_base_case,
    recover_driver,
)
from f2mix.rng import make_rng

from naive import all_subspaces, naive_rank, subspaces_inside


def S(*rows):
    return Subspace.from_strings(list(rows), len(rows[0]))


def incomparable_pair(n, d0, d1, seed):
    inst = make_instance(InstanceSpec(n, d0, d1, "incomparable", "0.5", seed))
    return inst.a0, inst.a1


# ---- union structure ------------------------------------------------------

def _check_union_structure(u, v):
    pts = u | v
    for x in u - v:
        assert {y for y in pts if x ^ y in pts} == u


def test_union_structure_exhaustive():
    for n in range(1, 5):
        subs = all_subspaces(n)
        for u in subs:
            for v in subs:
                if u <= v or v <= u:
                    continue
                _check_union_structure(u, v)
                _check_union_structure(v, u)
                for w in subspaces_inside(u | v):
                    if w <= u | v:
                        assert w <= u or w <= v


def test_union_structure_random_larger_ambient():
    rng = make_rng(1)
    for _ in range(300):
        n = int(rng.integers(5, 7))
        a = random_subspace(n, int(rng.integers(1, n)), rng)
        b = random_subspace(n, int(rng.integers(1, n)), rng)
        if not incomparable(a, b):
            continue
        u, v = set(a.elements()), set(b.elements())
        _check_union_structure(u, v)
        _check_union_structure(v, u)


# ---- base case ------------------------------------------------------------

def test_base_case_hand_trace():
    u, v = S("10"), S("01")
    pts = np.array([0b00, 0b01, 0b10], dtype=np.uint64)
    assert base_case_candidates(pts, 2) == [(u, v)]
    got = recover_base_case(MixtureOracle(u, v, 0.5, rng=1), 0.5, 0.1)
    assert set(got) == {u, v}


def test_base_case_identical_components_fail():
    u = S("110", "001")
    with pytest.raises(BaseCaseFailed):
        recover_base_case(MixtureOracle(u, u, 0.5, rng=2), 0.5, 0.1)


def test_base_case_sample_count():
    assert base_case_sample_count(10, 0.3, 0.1) == math.ceil(2**11 / 0.3 * (10 * math.log(2) + math.log(40)))


def test_base_case_random_pairs():
    rng = make_rng(3)
    hits = 0
    for k in range(20):
        d0, d1 = (int(x) for x in rng.integers(1, 10, size=2))
        a0, a1 = incomparable_pair(10, d0, d1, int(rng.integers(0, 2**63)))
        got = recover_base_case(MixtureOracle(a0, a1, 0.3 if k % 2 else 0.7, rng=rng), 0.3, 0.1)
        hits += set(got) == {a0, a1}
    assert hits >= 19


# ---- projector -------------------------------------------------------------

def test_projector_identity_in_small_dimension():
    o = MixtureOracle(S("1000000000"), S("0100000000"), 0.5)
    m = find_good_projector(o, 10, 0.3)
    assert m == GF2Matrix.identity(10) and o.drawn == 0


def test_projector_keeps_pair_incomparable():
    rng = make_rng(4)
    for _ in range(5):
        a0, a1 = incomparable_pair(16, 6, 6, int(rng.integers(0, 2**63)))
        m = find_good_projector(MixtureOracle(a0, a1, 0.5, rng=rng), 16, 0.3)
        assert m.shape == (10, 16)
        p0, p1 = a0.image(m), a1.image(m)
        assert incomparable(p0, p1)
        assert p0.dim >= 1 and p1.dim >= 1


def test_projector_stalls_on_comparable_pair():
    o = MixtureOracle(Subspace.full(12), random_subspace(12, 3, make_rng(5)), 0.5, rng=5)
    with pytest.raises(ProjectionStalled):
        find_good_projector(o, 12, 0.3, retries=2)


def test_base_dim_must_be_at_least_two():
    with pytest.raises(ValueError):
        find_good_projector(MixtureOracle(S("100"), S("010"), 0.5), 3, 0.3, base_dim=1)


def single_level_rate(draws, seed):
    """Frequency with which one random (n-1) x n map keeps a random
    incomparable pair of F_2^12 incomparable."""
    rng = make_rng(seed)
    kept = 0
    for _ in range(draws):
        while True:
            u = random_subspace(12, int(rng.integers(1, 12)), rng)
            v = random_subspace(12, int(rng.integers(1, 12)), rng)
            if incomparable(u, v):
                break
        t = random_matrix(11, 12, rng)
        kept += incomparable(u.image(t), v.image(t))
    return kept / draws


def test_single_level_preservation_rate():
    assert single_level_rate(2000, 6) >= 9 / 128 - 0.02


# ---- incomparable recovery -------------------------------------------------

def test_spans_of_draws_outside_a_hyperplane():
    rng = make_rng(7)
    n = 12
    ok = 0
    for _ in range(1000):
        s = random_subspace(n, 8, rng)
        coords = random_subspace(8, 7, rng)
        t = Subspace.from_ints((s.from_coordinates(c) for c in coords.rows), n)
        xs = sample_uniform_packed(s, 4 * 8 * n, rng)
        xs = xs[~t.contains_packed(xs)][: 8 * n]
        assert len(xs) == 8 * n
        ok += span_packed(xs, n) == s
    assert ok >= 990


def test_small_ambient_goes_straight_to_base_case():
    a0, a1 = incomparable_pair(8, 4, 5, 11)
    got = incomparable_subspace_recovery(MixtureOracle(a0, a1, 0.5, rng=8), 8, 0.3, 0.1)
    assert set(got) == {a0, a1}


def test_incomparable_recovery_with_projection():
    rng = make_rng(9)
    for _ in range(3):
        a0, a1 = incomparable_pair(16, 7, 8, int(rng.integers(0, 2**63)))
        got = incomparable_subspace_recovery(MixtureOracle(a0, a1, 0.5, rng=rng), 16, 0.5, 0.1)
        assert set(got) == {a0, a1}


def test_large_subsets_of_samples_span():
    rng = make_rng(10)
    ok = 0
    for _ in range(1000):
        d = int(rng.integers(1, 9))
        n = int(rng.integers(d, 17))
        s = random_subspace(n, d, rng)
        k = 100 * d
        xs = sample_uniform_packed(s, k, rng)
        keep = rng.choice(k, size=math.ceil(0.9 * k), replace=False)
        ok += span_packed(xs[keep], n) == s
    assert ok >= 999


# ---- dependent index set ---------------------------------------------------

def test_dependent_index_examples():
    e = [GF2Vector.unit(3, i) for i in range(3)]
    assert dependent_index_set(e) == set()
    v = GF2Vector.from_string("101")
    assert dependent_index_set([v, v]) == {0, 1}
    assert dependent_index_set([e[0], e[1], e[0] + e[1], e[2]]) == {0, 1, 2}
    assert dependent_index_set([]) == set()


def test_dependent_index_matches_naive():
    rng = make_rng(11)
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        k = int(rng.integers(1, 31))
        # low-rank families so that dependencies are common
        r = int(rng.integers(1, n + 1))
        basis = [int(x) for x in rng.integers(0, 1 << n, size=r)]
        fam = []
        for _ in range(k):
            c = int(rng.integers(0, 1 << r))
            x = 0
            for j in range(r):
                if (c >> j) & 1:
                    x ^= basis[j]
            fam.append(x)
        full = naive_rank(fam, n)
        want = {i for i in range(k) if naive_rank(fam[:i] + fam[i + 1:], n) == full}
        assert dependent_index_set([GF2Vector(n, x) for x in fam]) == want
        assert dependent_index_set(to_packed(fam, n), n) == want


# ---- large dimension gap ---------------------------------------------------

def test_formula_parameters():
    p = LargeDiffParams.from_formula(8, 2, 0.5)
    assert p.ell == min(math.ceil(2 * math.log2(200) / 0.75), 8)
    assert p.m == binom_upto(8, p.ell)
    assert p.alpha == 0.25


def test_desk_parameters():
    p = LargeDiffParams.desk(16, 4, 0.5)
    assert p.m * (p.m - 1) <= 2**16
    assert 4 * binom_upto(4, p.ell) <= 0.5 * p.m
    assert 0.5 * p.m >= 16 + 8
    with pytest.raises(InfeasibleSpec):
        LargeDiffParams.desk(8, 2, 0.5)
    assert LargeDiffParams.admissible_d1(16, 0.5)[-1] >= 4


def test_invalid_large_diff_parameters():
    with pytest.raises(ValueError):
        LargeDiffParams(4, 4, 0.5, 1, 5)
    with pytest.raises(ValueError):
        LargeDiffParams(4, 1, 0.5, 0, 1)


def test_zero_small_subspace():
    a0 = Subspace.full(16)
    o = MixtureOracle(a0, Subspace.zero(16), 0.5, rng=12)
    small, large = large_diff_recovery(o, LargeDiffParams.desk(16, 0, 0.5))
    assert small == Subspace.zero(16) and large == a0


def test_wrong_dimension_guess_raises():
    rng = make_rng(13)
    a1 = random_subspace(16, 4, rng)
    o = MixtureOracle(Subspace.full(16), a1, 0.5, rng=rng)
    with pytest.raises(DimensionMismatch):
        large_diff_recovery(o, LargeDiffParams.desk(16, 1, 0.5))


def test_large_gap_recovery_desk_scale():
    rng = make_rng(14)
    params = LargeDiffParams.desk(16, 4, 0.5)
    hits = 0
    for _ in range(20):
        a1 = random_subspace(16, 4, rng)
        try:
            hits += large_diff_recovery(MixtureOracle(Subspace.full(16), a1, 0.5, rng=rng), params) == (
                a1, Subspace.full(16))
        except DimensionMismatch:
            pass
    assert hits >= 17


def formula_instance_rates(trials, seed):
    """Exact recovery rate and E1 rate of the formula parameters on the
    (8, 2) nested instance."""
    rng = make_rng(seed)
    params = LargeDiffParams.from_formula(8, 2, 0.5)
    full = Subspace.full(8)
    hits = e1 = 0
    for _ in range(trials):
        a1 = random_subspace(8, 2, rng)
        run = large_diff_run(MixtureOracle(full, a1, 0.5, rng=rng), params, labels=True)
        hits += (run.small, run.large) == (a1, full)
        e1 += not np.any(run.dependent & (run.labels == 0))
    return hits / trials, e1 / trials


@pytest.mark.xfail(strict=True, reason="256 draws from F_2^8 collide almost surely; see decisions ledger")
def test_formula_parameters_on_eight_two_instance():
    rate, e1 = formula_instance_rates(100, 15)
    assert rate >= 0.9 and e1 >= 0.95


# ---- driver ---------------------------------------------------------------

def test_driver_identical():
    a = random_subspace(12, 5, make_rng(16))
    r = recover_driver(MixtureOracle(a, a, 0.5, rng=16), 12, 0.5, 0.1)
    assert r.regime is Regime.IDENTICAL
    assert r.a0_hat == a == r.a1_hat
    assert r.w0_hat is None


def test_driver_zero_space():
    z = Subspace.zero(6)
    r = recover_driver(MixtureOracle(z, z, 0.5, rng=1), 6, 0.5, 0.1)
    assert r.regime is Regime.IDENTICAL and r.a0_hat == z


def test_driver_incomparable():
    a0, a1 = incomparable_pair(14, 7, 9, 17)
    r = recover_driver(MixtureOracle(a0, a1, 0.4, rng=17), 14, 0.4, 0.1)
    assert r.regime is Regime.INCOMPARABLE
    assert (r.a0_hat, r.a1_hat) == (a1, a0)
    assert abs(r.w1_hat - 0.4) <= 0.05
    assert r.w0_hat + r.w1_hat == 1
    assert r.samples > 0


def test_driver_large_gap_in_larger_ambient():
    inst = make_instance(InstanceSpec(20, 16, 4, "nested", "0.5", 18))
    r = recover_driver(inst.oracle(seed=18), 20, 0.5, 0.1)
    assert r.regime is Regime.LARGE_GAP
    assert (r.a0_hat, r.a1_hat) == (inst.a0, inst.a1)
    assert abs(r.w0_hat - 0.5) <= 0.05


def test_driver_flags_small_gap_as_hard():
    rng = make_rng(19)
    a1 = random_subspace(8, 7, rng)
    r = recover_driver(MixtureOracle(Subspace.full(8), a1, 0.5, rng=rng), 8, 0.5, 0.1)
    assert r.regime is Regime.LPN_HARD
    assert r.a0_hat == Subspace.full(8) and r.a1_hat == Subspace.zero(8)


def test_driver_output_ordering():
    a0, a1 = incomparable_pair(9, 3, 3, 20)
    r = recover_driver(MixtureOracle(a0, a1, 0.5, rng=20), 9, 0.5, 0.1)
    assert r.a0_hat.dim >= r.a1_hat.dim
    assert (r.a0_hat.dim, r.a0_hat.rows) >= (r.a1_hat.dim, r.a1_hat.rows)


def test_driver_warns_below_one_percent():
    a = S("1000", "0100")
    with pytest.warns(UserWarning):
        recover_driver(MixtureOracle(a, a, 0.5, rng=21), 4, 0.009, 0.1, collision_cap=1)
