"""VC dimension of translate set systems, packings, and sampled variants.

The set system of a subset A is {A + x : x in X} viewed as subsets of a
ground set Y (both default to the whole group).  A set U of ground elements
is shattered when every one of the 2^|U| subsets of U arises as (A+x) & U.
The exact search runs a depth-first scan over candidate ground elements,
refining the partition of traces by their pattern on the chosen elements;
a branch dies as soon as one pattern class fails to split, since shattered
sets are closed under subsets.  The smallest pattern class also bounds the
reachable depth (each further element at best halves it), which prunes hard.
"""
from __future__ import annotations

import dataclasses
import math
import random
from fractions import Fraction
from typing import Sequence

from .caps import Caps, CapExceeded, DEFAULT_CAPS
from .groups import GroupDescriptor, GroupElement, add_rank, neg_rank, negate_bits, translate_bits, _bit_ranks
from .stats import binomial_sigma, wilson_interval
from .subsets import GroupSubset, _to_fraction, symdiff_profile

__all__ = [
    "TranslateSystem",
    "PackingResult",
    "SauerReport",
    "SampledVcReport",
    "RateReport",
    "SeparatedSampleReport",
    "AdjacencyOracle",
    "vc_dimension",
    "set_vc_dimension",
    "sauer_check",
    "greedy_packing",
    "sampled_vc",
    "random_independent_subset_rate",
    "separated_sample_bound_check",
]


@dataclasses.dataclass(frozen=True)
class TranslateSystem:
    """The system {(A + x) & Y : x in X}.  ground=Y, translators=X."""

    base: GroupSubset
    ground: GroupSubset | None = None
    translators: GroupSubset | None = None

    def resolved_ground(self) -> GroupSubset:
        return self.ground if self.ground is not None else GroupSubset.full(self.base.group)

    def resolved_translators(self) -> GroupSubset:
        return self.translators if self.translators is not None else GroupSubset.full(self.base.group)

    def traces(self) -> list[int]:
        """Distinct trace bitsets, sorted ascending."""
        g = self.base.group
        y = self.resolved_ground().bits
        seen = set()
        for x in self.resolved_translators().ranks():
            seen.add(translate_bits(g, self.base.bits, x) & y)
        return sorted(seen)


def _max_shattered(traces: Sequence[int], ground_positions: Sequence[int],
                   max_d: int | None) -> int:
    """Size of the largest shattered subset of the ground positions; with
    max_d given, stops early and reports max_d + 1 as soon as a shattered set
    of size max_d + 1 exists."""
    if len(traces) <= 1:
        return 0
    t0 = traces[0]
    diff = 0
    for t in traces:
        diff |= t ^ t0
    cand = [p for p in ground_positions if (diff >> p) & 1]
    best = 0
    limit = None if max_d is None else max_d + 1

    def grow(classes: list[list[int]], start: int, depth: int) -> bool:
        nonlocal best
        if depth > best:
            best = depth
            if limit is not None and best >= limit:
                return True
        min_size = min(len(c) for c in classes)
        if depth + min_size.bit_length() - 1 <= best:
            return False
        for i in range(start, len(cand)):
            if depth + len(cand) - i <= best:
                break
            bit = 1 << cand[i]
            split: list[list[int]] | None = []
            for cls in classes:
                ones = [t for t in cls if t & bit]
                if not ones or len(ones) == len(cls):
                    split = None
                    break
                zeros = [t for t in cls if not t & bit]
                split.append(ones)
                split.append(zeros)
            if split is not None and grow(split, i + 1, depth + 1):
                return True
        return False

    grow([list(traces)], 0, 0)
    return best


def vc_dimension(sys: TranslateSystem, max_d: int | None = None,
                 caps: Caps = DEFAULT_CAPS) -> int:
    """Exact VC dimension of the system.

    With max_d set, the search stops as soon as it certifies the dimension
    exceeds max_d and returns max_d + 1, meaning "> max_d".  Threshold
    queries are much cheaper than exact computation on large systems."""
    ground = sys.resolved_ground()
    if ground.size > caps.vc_ground_cap:
        raise CapExceeded(
            f"ground size {ground.size} exceeds vc cap {caps.vc_ground_cap}"
        )
    return _max_shattered(sys.traces(), ground.ranks(), max_d)


def set_vc_dimension(a: GroupSubset, max_d: int | None = None,
                     caps: Caps = DEFAULT_CAPS) -> int:
    """VC dimension of the full translate system of A."""
    return vc_dimension(TranslateSystem(a), max_d=max_d, caps=caps)


def find_shattered_set(a: GroupSubset, size: int,
                       caps: Caps = DEFAULT_CAPS) -> list[int] | None:
    """First shattered ground set of the given size (positions ascending),
    or None when the VC dimension is smaller than size."""
    if size == 0:
        return []
    sys = TranslateSystem(a)
    ground = sys.resolved_ground()
    if ground.size > caps.vc_ground_cap:
        raise CapExceeded(
            f"ground size {ground.size} exceeds vc cap {caps.vc_ground_cap}"
        )
    traces = sys.traces()
    if len(traces) < 1 << size:
        return None
    t0 = traces[0]
    diff = 0
    for t in traces:
        diff |= t ^ t0
    cand = [p for p in ground.ranks() if (diff >> p) & 1]

    def grow(classes: list[list[int]], start: int, chosen: list[int]) -> list[int] | None:
        if len(chosen) == size:
            return list(chosen)
        min_size = min(len(c) for c in classes)
        if len(chosen) + min_size.bit_length() - 1 < size:
            return None
        for i in range(start, len(cand)):
            if len(chosen) + len(cand) - i < size:
                break
            bit = 1 << cand[i]
            split: list[list[int]] | None = []
            for cls in classes:
                ones = [t for t in cls if t & bit]
                if not ones or len(ones) == len(cls):
                    split = None
                    break
                split.append(ones)
                split.append([t for t in cls if not t & bit])
            if split is not None:
                chosen.append(cand[i])
                got = grow(split, i + 1, chosen)
                if got is not None:
                    return got
                chosen.pop()
        return None

    return grow([list(traces)], 0, [])


@dataclasses.dataclass(frozen=True)
class SauerReport:
    """Distinct-trace count against the shatter-function bounds."""

    ground_size: int
    dimension: int
    trace_count: int
    binomial_bound: int
    poly_bound: int | None
    holds: bool


def sauer_check(sys: TranslateSystem, caps: Caps = DEFAULT_CAPS) -> SauerReport:
    """Count distinct traces and compare with sum_{i<=d} C(n,i), and with
    2n^d when n >= 2 and d >= 1."""
    traces = sys.traces()
    n = sys.resolved_ground().size
    d = vc_dimension(sys, caps=caps)
    count = len(traces)
    binom = sum(math.comb(n, i) for i in range(min(d, n) + 1))
    poly = 2 * n**d if n >= 2 and d >= 1 else None
    holds = count <= binom and (poly is None or count <= poly)
    return SauerReport(n, d, count, binom, poly, holds)


@dataclasses.dataclass(frozen=True)
class PackingResult:
    """A maximal delta-separated set of translate centers."""

    base: GroupSubset
    delta: Fraction
    centers: tuple[GroupElement, ...]
    certified: bool


def greedy_packing(a: GroupSubset, delta) -> PackingResult:
    """Scan x in rank order, keeping x as a center iff |(A+x) xor (A+w)| is
    strictly greater than delta*|G| for every kept center w.  The result is
    delta-separated and maximal by construction; both properties are
    re-verified on the symmetric-difference profile before returning."""
    d = _to_fraction(delta)
    g = a.group
    prof = symdiff_profile(a)
    bound_num = d.numerator * g.order
    den = d.denominator
    centers: list[int] = []
    for x in range(g.order):
        if all(prof[add_rank(g, x, neg_rank(g, w))] * den > bound_num
               for w in centers):
            centers.append(x)
    # re-verify separation and maximality exactly
    for i, w in enumerate(centers):
        for w2 in centers[i + 1:]:
            if prof[add_rank(g, w2, neg_rank(g, w))] * den <= bound_num:
                raise AssertionError("packing separation violated")
    for x in range(g.order):
        if all(prof[add_rank(g, x, neg_rank(g, w))] * den > bound_num
               for w in centers):
            raise AssertionError("packing not maximal")
    return PackingResult(a, d, tuple(g.element(r) for r in centers), True)


@dataclasses.dataclass(frozen=True)
class SampledVcReport:
    """Empirical frequency of vcdim{(A+x) & Y : x in X} > d over random X, Y."""

    x_size: int
    y_size: int
    d: int
    trials: int
    hits: int
    frequency: float
    wilson_low: float
    wilson_high: float


def sampled_vc(a: GroupSubset, x_size: int, y_size: int, trials: int, d: int,
               rng_seed: int, caps: Caps = DEFAULT_CAPS) -> SampledVcReport:
    """Draw X and Y uniformly (without replacement) and measure how often the
    restricted translate system has VC dimension exceeding d.  With
    x_size = y_size = |G| and one trial this is exactly set_vc_dimension > d."""
    g = a.group
    n = g.order
    if not (1 <= x_size <= n and 1 <= y_size <= n):
        raise ValueError("sample sizes must be in 1..|G|")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(rng_seed)
    hits = 0
    everything = range(n)
    for _ in range(trials):
        xs = sorted(rng.sample(everything, x_size))
        y_bits = 0
        for r in rng.sample(everything, y_size):
            y_bits |= 1 << r
        traces = sorted({translate_bits(g, a.bits, x) & y_bits for x in xs})
        got = _max_shattered(traces, _bit_ranks(y_bits), max_d=d)
        if got > d:
            hits += 1
    lo, hi = wilson_interval(hits, trials)
    return SampledVcReport(x_size, y_size, d, trials, hits, hits / trials, lo, hi)


class AdjacencyOracle:
    """Neighbor-mask view of an undirected graph on vertices 0..n-1.

    Explicit edge lists are taken as given (self-loops rejected).  A Cayley
    descriptor over a group subset B connects x and y iff x - y lies in the
    symmetrization of B minus 0."""

    __slots__ = ("n", "neighbor_masks")

    def __init__(self, n: int, neighbor_masks: Sequence[int]):
        if len(neighbor_masks) != n:
            raise ValueError("need one neighbor mask per vertex")
        self.n = n
        self.neighbor_masks = tuple(neighbor_masks)

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> "AdjacencyOracle":
        masks = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u == v:
                raise ValueError("self-loops are not allowed")
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return cls(n, masks)

    @classmethod
    def from_cayley(cls, b: GroupSubset) -> "AdjacencyOracle":
        g = b.group
        conn = (b.bits | negate_bits(g, b.bits)) & ~1
        masks = [translate_bits(g, conn, x) for x in range(g.order)]
        return cls(g.order, masks)

    @property
    def max_degree(self) -> int:
        return max((m.bit_count() for m in self.neighbor_masks), default=0)


@dataclasses.dataclass(frozen=True)
class RateReport:
    """Monte-Carlo rate of the greedy independent-subset event."""

    n: int
    k: int
    trials: int
    successes: int
    rate: float
    bound: float
    sigma: float
    meets_bound: bool


def random_independent_subset_rate(graph: AdjacencyOracle, k: int, trials: int,
                                   rng_seed: int) -> RateReport:
    """Sample k distinct vertices in random order, build an independent set
    greedily (keep a vertex iff it has no edge into the kept set), and count
    how often the kept set reaches size k/4.  Requires max degree <= n/k and
    k <= n/2.  The empirical rate is compared against 1 - e^(-k/8) with three
    plug-in standard errors of slack."""
    n = graph.n
    if k < 1 or 2 * k > n:
        raise ValueError("need 1 <= k <= n/2")
    if graph.max_degree * k > n:
        raise ValueError(
            f"max degree {graph.max_degree} exceeds n/k = {n}/{k}"
        )
    rng = random.Random(rng_seed)
    succ = 0
    masks = graph.neighbor_masks
    for _ in range(trials):
        picked = rng.sample(range(n), k)
        kept_mask = 0
        kept = 0
        for v in picked:
            if not masks[v] & kept_mask:
                kept_mask |= 1 << v
                kept += 1
        if 4 * kept >= k:
            succ += 1
    rate = succ / trials
    bound = 1 - math.exp(-k / 8)
    sigma = binomial_sigma(succ, trials)
    return RateReport(n, k, trials, succ, rate, bound, sigma,
                      rate >= bound - 3 * sigma)


@dataclasses.dataclass(frozen=True)
class SeparatedSampleReport:
    """Check of: families that usually look low-dimensional on a random
    m-sample must be small (at most 2m^d members)."""

    family_size: int
    m: int
    d: int
    delta: Fraction
    trials: int
    low_dim_fraction: float
    sigma: float
    threshold: float
    size_bound: int
    applicable: bool
    holds: bool


def separated_sample_bound_check(a: GroupSubset, delta, m: int, d: int,
                                 trials: int, rng_seed: int,
                                 caps: Caps = DEFAULT_CAPS) -> SeparatedSampleReport:
    """Build a maximal delta-separated translate family greedily, estimate the
    probability that its restriction to a random m-element ground sample has
    VC dimension at most d, and test the contrapositive: when that probability
    (minus 3 sigma) still reaches 3 m^(2d) (1-delta)^m, the family must have
    at most 2 m^d members."""
    dd = _to_fraction(delta)
    g = a.group
    if not 1 <= m <= g.order:
        raise ValueError("m must be in 1..|G|")
    pack = greedy_packing(a, dd)
    fam = [translate_bits(g, a.bits, c.rank) for c in pack.centers]
    rng = random.Random(rng_seed)
    low = 0
    for _ in range(trials):
        y_bits = 0
        positions = rng.sample(range(g.order), m)
        for r in positions:
            y_bits |= 1 << r
        traces = sorted({t & y_bits for t in fam})
        if _max_shattered(traces, sorted(positions), max_d=d) <= d:
            low += 1
    frac = low / trials
    sigma = binomial_sigma(low, trials)
    threshold = 3 * m ** (2 * d) * float((1 - dd) ** m)
    size_bound = 2 * m**d
    applicable = frac - 3 * sigma >= threshold
    holds = (not applicable) or len(fam) <= size_bound
    return SeparatedSampleReport(len(fam), m, d, dd, trials, frac, sigma,
                                 threshold, size_bound, applicable, holds)
