import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from addcomb import (
    AdjacencyOracle,
    GroupDescriptor,
    GroupSubset,
    TranslateSystem,
    almost_periods,
    find_shattered_set,
    generated_subgroup,
    greedy_packing,
    random_independent_subset_rate,
    sampled_vc,
    sauer_check,
    separated_sample_bound_check,
    set_vc_dimension,
    translate,
    vc_dimension,
)
from addcomb.caps import Caps, CapExceeded
from conftest import MODULI_POOL, subsets

SMALL_POOL = tuple(m for m in MODULI_POOL if math.prod(m) <= 16)


def test_vc_dimension_examples():
    z222 = GroupDescriptor([2, 2, 2])
    assert set_vc_dimension(GroupSubset.empty(z222)) == 0
    assert set_vc_dimension(GroupSubset.full(z222)) == 0
    h = generated_subgroup(z222, [1, 2])
    assert set_vc_dimension(GroupSubset(z222, h.bits)) == 1
    z13 = GroupDescriptor([13])
    interval = GroupSubset.from_ranks(z13, range(1, 7))
    d = set_vc_dimension(interval)
    assert d == 2 and d <= 3
    z16 = GroupDescriptor([2, 2, 2, 2])
    assert set_vc_dimension(GroupSubset.from_ranks(z16, [0, 1, 2, 3, 5, 8])) == 3


def test_vc_threshold_mode():
    z13 = GroupDescriptor([13])
    a = GroupSubset.from_ranks(z13, range(1, 7))
    # exact answer is 2: a generous threshold returns it, a tight one says "> max_d"
    assert set_vc_dimension(a, max_d=3) == 2
    assert set_vc_dimension(a, max_d=2) == 2
    assert set_vc_dimension(a, max_d=1) == 2
    assert set_vc_dimension(a, max_d=0) == 1


def test_vc_ground_cap():
    g = GroupDescriptor([2, 2])
    a = GroupSubset.from_ranks(g, [0, 1])
    with pytest.raises(CapExceeded):
        set_vc_dimension(a, caps=Caps(vc_ground_cap=2))


@given(subsets(pool=SMALL_POOL))
def test_vc_dimension_matches_oracle(a):
    mods = a.group.moduli
    assert set_vc_dimension(a) == oracles.set_vc_dimension(
        mods, {a.group.coords_of(r) for r in a.ranks()}
    )


@given(subsets(pool=SMALL_POOL), st.data())
def test_vc_monotone_under_ground_restriction(a, data):
    g = a.group
    y_bits = data.draw(st.integers(0, g.full_mask))
    y2_bits = y_bits & data.draw(st.integers(0, g.full_mask))
    big = vc_dimension(TranslateSystem(a, ground=GroupSubset(g, y_bits)))
    small = vc_dimension(TranslateSystem(a, ground=GroupSubset(g, y2_bits)))
    assert small <= big


@given(subsets(pool=SMALL_POOL), st.data())
def test_vc_invariant_under_translate_and_complement(a, data):
    z = data.draw(st.integers(0, a.group.order - 1))
    d = set_vc_dimension(a)
    assert set_vc_dimension(translate(a, z)) == d
    assert set_vc_dimension(a.complement()) == d


def test_find_shattered_set_examples():
    z222 = GroupDescriptor([2, 2, 2])
    a = GroupSubset.from_ranks(z222, [0, 1, 2, 4])
    d = set_vc_dimension(a)
    assert d == 3
    got = find_shattered_set(a, 3)
    assert got is not None and len(got) == 3 and got == sorted(got)
    traces = TranslateSystem(a).traces()
    coords = [z222.coords_of(r) for r in got]
    trace_sets = [
        {z222.coords_of(r) for r in range(8) if (t >> r) & 1} for t in traces
    ]
    assert oracles.is_shattered(trace_sets, frozenset(coords))
    assert find_shattered_set(a, 4) is None
    assert find_shattered_set(GroupSubset.empty(z222), 1) is None
    assert find_shattered_set(a, 0) == []


@given(subsets(pool=SMALL_POOL))
def test_find_shattered_set_consistent_with_dimension(a):
    d = set_vc_dimension(a)
    if d > 0:
        assert find_shattered_set(a, d) is not None
    assert find_shattered_set(a, d + 1) is None


def test_sauer_examples():
    z222 = GroupDescriptor([2, 2, 2])
    h = generated_subgroup(z222, [1, 2])
    rep = sauer_check(TranslateSystem(GroupSubset(z222, h.bits)))
    assert rep.trace_count == 2 and rep.dimension == 1
    assert rep.ground_size == 8 and rep.binomial_bound == 9 and rep.poly_bound == 16
    assert rep.holds
    rep = sauer_check(TranslateSystem(GroupSubset.full(z222)))
    assert rep.trace_count == 1 and rep.dimension == 0
    assert rep.binomial_bound == 1 and rep.poly_bound is None and rep.holds


@given(subsets())
def test_sauer_never_fails(a):
    assert sauer_check(TranslateSystem(a)).holds


def test_greedy_packing_examples():
    z222 = GroupDescriptor([2, 2, 2])
    h = GroupSubset(z222, generated_subgroup(z222, [1, 2]).bits)
    res = greedy_packing(h, Fraction(1, 2))
    assert len(res.centers) == 2 and res.certified
    assert res.centers[0].rank == 0
    assert len(greedy_packing(h, 1).centers) == 1
    assert len(greedy_packing(GroupSubset.empty(z222), Fraction(1, 2)).centers) == 1


@given(
    subsets(pool=SMALL_POOL),
    st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]),
)
def test_packing_haussler_and_ball_lower_bound(a, delta):
    d = set_vc_dimension(a)
    res = greedy_packing(a, delta)
    assert len(res.centers) <= (30 / delta) ** d
    ball = almost_periods(a, delta)
    assert ball.members.size >= (delta / 30) ** d * a.group.order


def test_sampled_vc_full_draw_is_exact():
    z16 = GroupDescriptor([2, 2, 2, 2])
    a = GroupSubset.from_ranks(z16, [0, 1, 2, 3, 5, 8])
    n = z16.order
    for d in (0, 2, 3, 4):
        rep = sampled_vc(a, n, n, 1, d, rng_seed=0)
        assert rep.frequency == (1.0 if set_vc_dimension(a) > d else 0.0)
    empty = GroupSubset.empty(z16)
    for d in (0, 1):
        assert sampled_vc(empty, 4, 4, 50, d, rng_seed=1).frequency == 0.0
    with pytest.raises(ValueError):
        sampled_vc(a, 0, 4, 10, 1, rng_seed=0)
    with pytest.raises(ValueError):
        sampled_vc(a, 4, 4, 0, 1, rng_seed=0)


def _exact_restricted_exceed_prob(a, x_size, y_size, d):
    """Enumerate every (X, Y) pair and count restricted vcdim > d."""
    from addcomb.groups import translate_bits
    from addcomb.vc import _max_shattered

    g = a.group
    hits = tot = 0
    for xs in itertools.combinations(range(g.order), x_size):
        for ys in itertools.combinations(range(g.order), y_size):
            y_bits = 0
            for r in ys:
                y_bits |= 1 << r
            traces = sorted({translate_bits(g, a.bits, x) & y_bits for x in xs})
            tot += 1
            if _max_shattered(traces, list(ys), max_d=d) > d:
                hits += 1
    return Fraction(hits, tot)


def test_sampled_vc_matches_exhaustive_enumeration():
    # |G| = 8 keeps the full (X, Y) enumeration tractable; exact values frozen
    z222 = GroupDescriptor([2, 2, 2])
    a = GroupSubset.from_ranks(z222, [0, 1, 2, 4])
    cases = {
        (5, 4, 1): Fraction(3776, 3920),
        (2, 3, 0): Fraction(1472, 1568),
        (4, 4, 1): Fraction(2912, 4900),
    }
    for (x_size, y_size, d), want in cases.items():
        assert _exact_restricted_exceed_prob(a, x_size, y_size, d) == want
        rep = sampled_vc(a, x_size, y_size, 4000, d, rng_seed=7)
        assert rep.wilson_low <= float(want) <= rep.wilson_high


def test_adjacency_oracle_validation_and_cayley():
    with pytest.raises(ValueError):
        AdjacencyOracle.from_edges(3, [(0, 3)])
    with pytest.raises(ValueError):
        AdjacencyOracle.from_edges(3, [(1, 1)])
    g = AdjacencyOracle.from_edges(4, [(0, 1), (2, 3), (1, 2)])
    assert g.max_degree == 2
    z64 = GroupDescriptor([2] * 6)
    b = GroupSubset.from_ranks(z64, [0, 1, 2])
    cay = AdjacencyOracle.from_cayley(b)
    assert cay.n == 64 and cay.max_degree == 2
    for v in range(cay.n):
        assert not (cay.neighbor_masks[v] >> v) & 1
        for w in range(cay.n):
            assert ((cay.neighbor_masks[v] >> w) & 1) == (
                (cay.neighbor_masks[w] >> v) & 1
            )


def test_independent_subset_rate_examples():
    empty = AdjacencyOracle.from_edges(16, [])
    rep = random_independent_subset_rate(empty, 8, 200, rng_seed=3)
    assert rep.rate == 1.0 and rep.meets_bound
    matching = AdjacencyOracle.from_edges(32, [(2 * i, 2 * i + 1) for i in range(16)])
    rep = random_independent_subset_rate(matching, 8, 2000, rng_seed=4)
    assert rep.meets_bound and rep.rate >= rep.bound - 3 * rep.sigma
    z64 = GroupDescriptor([2] * 6)
    cay = AdjacencyOracle.from_cayley(GroupSubset.from_ranks(z64, [0, 1, 2]))
    rep = random_independent_subset_rate(cay, 16, 2000, rng_seed=5)
    assert rep.meets_bound


def test_independent_subset_rate_preconditions():
    empty = AdjacencyOracle.from_edges(16, [])
    with pytest.raises(ValueError):
        random_independent_subset_rate(empty, 9, 10, rng_seed=0)
    star = AdjacencyOracle.from_edges(16, [(0, i) for i in range(1, 16)])
    with pytest.raises(ValueError):
        random_independent_subset_rate(star, 4, 10, rng_seed=0)


def test_separated_sample_bound_examples():
    z222 = GroupDescriptor([2, 2, 2])
    h = GroupSubset(z222, generated_subgroup(z222, [1, 2]).bits)
    rep = separated_sample_bound_check(h, Fraction(1, 2), 4, 1, 200, rng_seed=9)
    assert rep.family_size == 2 and rep.size_bound == 8 and rep.holds
    rep = separated_sample_bound_check(
        GroupSubset.empty(z222), Fraction(1, 2), 3, 1, 50, rng_seed=9
    )
    assert rep.family_size == 1 and rep.holds


@given(subsets(pool=SMALL_POOL), st.sampled_from([Fraction(1, 2), Fraction(1, 4)]))
def test_separated_sample_bound_never_fails(a, delta):
    m = max(2, a.group.order // 2)
    rep = separated_sample_bound_check(a, delta, m, 1, 60, rng_seed=11)
    assert rep.holds
