"""Bi-induced bipartite patterns inside group subsets.

A bipartite pattern F has parts U and V (indices 0-based internally).  Maps
phi_u: U -> G and phi_v: V -> G bi-induce F in A when for every pair (u, v)

    (u, v) is an edge of F  <=>  phi_u(u) + phi_v(v) in A.

A *copy* additionally requires phi_u and phi_v to be injective.  The search
assigns the V side first: once phi_v is fixed, the y values usable for a
vertex u are exactly the y whose pattern (which translates A - phi_v(v)
contain y) equals u's neighborhood, so per-u candidate masks both prune the
search and count completions in closed form.
"""
from __future__ import annotations

import dataclasses
import itertools
import random
from fractions import Fraction

from .caps import Caps, CapExceeded, DEFAULT_CAPS
from .groups import (
    GroupDescriptor,
    GroupElement,
    Subgroup,
    add_rank,
    neg_rank,
    translate_bits,
)
from .stats import binomial_sigma, wilson_interval
from .subsets import GroupSubset
from .regularity import coset_round
from .vc import find_shattered_set

__all__ = [
    "BipartitePattern",
    "BiInducedWitness",
    "TesterReport",
    "CosetGoodness",
    "DensifyReport",
    "APWitness",
    "half_graph",
    "augment_f_plus",
    "check_witness",
    "find_bi_induced",
    "witness_from_shattering",
    "sample_tester",
    "exhaustive_density",
    "distance_to_free",
    "coset_goodness",
    "densify",
    "ap_search",
    "ap_half_graph_witness",
]


@dataclasses.dataclass(frozen=True)
class BipartitePattern:
    """A bipartite pattern: u_count by v_count vertices, edges 0-based."""

    u_count: int
    v_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.u_count < 1 or self.v_count < 1:
            raise ValueError("pattern needs at least one vertex per side")
        for u, v in self.edges:
            if not (0 <= u < self.u_count and 0 <= v < self.v_count):
                raise ValueError(f"edge ({u},{v}) out of range")

    def u_neighborhood(self, u: int) -> frozenset[int]:
        return frozenset(v for (uu, v) in self.edges if uu == u)

    @property
    def has_duplicate_u_neighborhoods(self) -> bool:
        seen = set()
        for u in range(self.u_count):
            nb = self.u_neighborhood(u)
            if nb in seen:
                return True
            seen.add(nb)
        return False

    @property
    def vertex_count(self) -> int:
        return self.u_count + self.v_count


def half_graph(k: int) -> BipartitePattern:
    """The k by k half graph: u_i adjacent to v_j iff i <= j (0-based)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return BipartitePattern(
        k, k, frozenset((i, j) for i in range(k) for j in range(k) if i <= j)
    )


def augment_f_plus(f: BipartitePattern) -> BipartitePattern:
    """Append ceil(log2(u_count)) new V-vertices whose edges spell each u's
    index in binary, making all U-neighborhoods pairwise distinct.  The same
    recipe is applied whether or not F already had duplicates."""
    extra = (f.u_count - 1).bit_length()
    edges = set(f.edges)
    for u in range(f.u_count):
        for b in range(extra):
            if (u >> b) & 1:
                edges.add((u, f.v_count + b))
    return BipartitePattern(f.u_count, f.v_count + extra, frozenset(edges))


@dataclasses.dataclass(frozen=True)
class BiInducedWitness:
    """Concrete maps witnessing a bi-induced occurrence of a pattern."""

    pattern: BipartitePattern
    phi_u: tuple[GroupElement, ...]
    phi_v: tuple[GroupElement, ...]
    injective_u: bool
    injective_v: bool

    def __post_init__(self):
        if len(self.phi_u) != self.pattern.u_count:
            raise ValueError("phi_u length mismatch")
        if len(self.phi_v) != self.pattern.v_count:
            raise ValueError("phi_v length mismatch")


def _make_witness(f: BipartitePattern, g: GroupDescriptor,
                  u_ranks: list[int], v_ranks: list[int]) -> BiInducedWitness:
    return BiInducedWitness(
        f,
        tuple(g.element(r) for r in u_ranks),
        tuple(g.element(r) for r in v_ranks),
        len(set(u_ranks)) == len(u_ranks),
        len(set(v_ranks)) == len(v_ranks),
    )


def check_witness(a: GroupSubset, f: BipartitePattern, w: BiInducedWitness,
                  injectivity: str = "none") -> bool:
    """True iff edge(u,v) <=> phi_u(u)+phi_v(v) in A for all pairs.

    injectivity: "none" checks only the iff condition; "per_side" also
    requires each map injective; "global" requires all u- and v-images
    pairwise distinct as one set."""
    if injectivity not in ("none", "per_side", "global"):
        raise ValueError(f"unknown injectivity mode {injectivity!r}")
    g = a.group
    u_ranks = [e.rank for e in w.phi_u]
    v_ranks = [e.rank for e in w.phi_v]
    for u, xr in enumerate(u_ranks):
        for v, yr in enumerate(v_ranks):
            inside = a.contains_rank(add_rank(g, xr, yr))
            if inside != ((u, v) in f.edges):
                return False
    if injectivity == "per_side":
        return (len(set(u_ranks)) == f.u_count
                and len(set(v_ranks)) == f.v_count)
    if injectivity == "global":
        return len(set(u_ranks + v_ranks)) == f.u_count + f.v_count
    return True


def _u_masks(g: GroupDescriptor, a_bits: int, f: BipartitePattern,
             v_ranks: list[int]) -> list[int]:
    """For each u, the bitset of y with: y + phi_v(v) in A iff v in N(u),
    over the currently assigned phi_v prefix."""
    full = g.full_mask
    v_traces = [translate_bits(g, a_bits, neg_rank(g, r)) for r in v_ranks]
    masks = []
    for u in range(f.u_count):
        nb = f.u_neighborhood(u)
        m = full
        for v, t in enumerate(v_traces):
            m &= t if v in nb else (full ^ t)
            if not m:
                break
        masks.append(m)
    return masks


def find_bi_induced(a: GroupSubset, f: BipartitePattern,
                    require_injective: bool = True,
                    caps: Caps = DEFAULT_CAPS) -> BiInducedWitness | None:
    """First bi-induced occurrence of f in a, scanning phi_v assignments in
    rank order; None when no occurrence exists.

    With require_injective, both sides must be injective.  Distinct
    U-neighborhoods have disjoint candidate masks, so injectivity on the U
    side only needs each mask to hold as many candidates as the vertices
    sharing it.  Budgeted by caps.pattern_visit_cap node visits."""
    g = a.group
    n = g.order
    full = g.full_mask
    visits = 0
    nbhd = [f.u_neighborhood(u) for u in range(f.u_count)]
    groups_by_nb: dict[frozenset, list[int]] = {}
    for u, nb in enumerate(nbhd):
        groups_by_nb.setdefault(nb, []).append(u)

    def assign(v_idx: int, v_ranks: list[int], masks: list[int]
               ) -> BiInducedWitness | None:
        nonlocal visits
        if v_idx == f.v_count:
            u_ranks = [0] * f.u_count
            if require_injective:
                for nb, us in groups_by_nb.items():
                    m = masks[us[0]]
                    if m.bit_count() < len(us):
                        return None
                    got = []
                    mm = m
                    while len(got) < len(us):
                        low = mm & -mm
                        got.append(low.bit_length() - 1)
                        mm ^= low
                    for u, r in zip(us, got):
                        u_ranks[u] = r
            else:
                for u, m in enumerate(masks):
                    u_ranks[u] = (m & -m).bit_length() - 1
            return _make_witness(f, g, u_ranks, v_ranks)
        for y in range(n):
            if require_injective and y in v_ranks:
                continue
            visits += 1
            if visits > caps.pattern_visit_cap:
                raise CapExceeded(
                    f"pattern search exceeded {caps.pattern_visit_cap} visits"
                )
            t = translate_bits(g, a.bits, neg_rank(g, y))
            new_masks = []
            dead = False
            for u in range(f.u_count):
                m = masks[u] & (t if v_idx in nbhd[u] else (full ^ t))
                if not m:
                    dead = True
                    break
                new_masks.append(m)
            if dead:
                continue
            got = assign(v_idx + 1, v_ranks + [y], new_masks)
            if got is not None:
                return got
        return None

    return assign(0, [], [full] * f.u_count)


def witness_from_shattering(a: GroupSubset, f: BipartitePattern,
                            caps: Caps = DEFAULT_CAPS) -> BiInducedWitness | None:
    """Build a bi-induced copy of f from a shattered set, or None when the
    VC dimension of A's translate system is too small.

    The augmented pattern F+ has all U-neighborhoods distinct; a shattered
    set of size v_count(F+) supplies phi_v, and for each u the translate
    realizing u's neighborhood pattern supplies phi_u.  Distinct patterns
    force distinct phi_u values, so the copy is injective on both sides."""
    fp = augment_f_plus(f)
    g = a.group
    target = fp.v_count
    shat = find_shattered_set(a, target, caps=caps)
    if shat is None:
        return None
    positions = sorted(shat)
    pos_index = {p: i for i, p in enumerate(positions)}
    want: dict[int, int] = {}
    for u in range(fp.u_count):
        pat = 0
        for v in fp.u_neighborhood(u):
            pat |= 1 << v
        want[u] = pat
    found: dict[int, int] = {}
    needed = set(want.values())
    for x in range(g.order):
        if not needed:
            break
        tr = translate_bits(g, a.bits, x)
        pat = 0
        for p in positions:
            if (tr >> p) & 1:
                pat |= 1 << pos_index[p]
        if pat in needed:
            found[pat] = x
            needed.discard(pat)
    if needed:
        raise AssertionError("shattered set failed to realize a pattern")
    u_ranks = [neg_rank(g, found[want[u]]) for u in range(fp.u_count)]
    v_ranks = positions[:f.v_count]
    w = _make_witness(f, g, u_ranks, v_ranks)
    if not check_witness(a, f, w, injectivity="per_side"):
        raise AssertionError("constructed witness failed verification")
    return w


@dataclasses.dataclass(frozen=True)
class TesterReport:
    """Sampled bi-inducing statistics and the one-sided YES/NO decision."""

    samples: int
    bi_inducing: int
    bi_fraction: float
    wilson_low: float
    wilson_high: float
    injective_bi_inducing: int
    injective_fraction: float
    decision: str


def sample_tester(a: GroupSubset, f: BipartitePattern, samples: int,
                  rng_seed: int) -> TesterReport:
    """Draw uniform maps V(F) -> G (coordinates independent, repeats allowed)
    and count how many bi-induce f; the decision is YES iff some sampled map
    bi-induces f and is injective on each side, so a YES always carries a
    verified witness and the tester never errs on pattern-free sets."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    g = a.group
    n = g.order
    rng = random.Random(rng_seed)
    edges = f.edges
    bi = 0
    inj = 0
    for _ in range(samples):
        u_ranks = [rng.randrange(n) for _ in range(f.u_count)]
        v_ranks = [rng.randrange(n) for _ in range(f.v_count)]
        ok = True
        for u, xr in enumerate(u_ranks):
            if not ok:
                break
            for v, yr in enumerate(v_ranks):
                if a.contains_rank(add_rank(g, xr, yr)) != ((u, v) in edges):
                    ok = False
                    break
        if ok:
            bi += 1
            if (len(set(u_ranks)) == f.u_count
                    and len(set(v_ranks)) == f.v_count):
                inj += 1
    lo, hi = wilson_interval(bi, samples)
    return TesterReport(samples, bi, bi / samples, lo, hi, inj,
                        inj / samples, "YES" if inj else "NO")


def exhaustive_density(a: GroupSubset, f: BipartitePattern,
                       caps: Caps = DEFAULT_CAPS) -> Fraction:
    """Exact probability that a uniform map V(F) -> G bi-induces f.

    Enumerates only the |G|^v_count V-side assignments; for each, the number
    of completing U-side maps is the product of the per-u candidate mask
    sizes.  Injectivity is not required, matching the sampled fraction."""
    g = a.group
    n = g.order
    if n ** f.vertex_count > caps.density_enum_cap:
        raise CapExceeded(
            f"|G|^{f.vertex_count} exceeds density cap {caps.density_enum_cap}"
        )
    full = g.full_mask
    nbhd = [f.u_neighborhood(u) for u in range(f.u_count)]
    total = 0

    def sweep(v_idx: int, masks: list[int]) -> None:
        nonlocal total
        if v_idx == f.v_count:
            prod = 1
            for m in masks:
                prod *= m.bit_count()
            total += prod
            return
        for y in range(n):
            t = translate_bits(g, a.bits, neg_rank(g, y))
            new_masks = []
            dead = False
            for u in range(f.u_count):
                m = masks[u] & (t if v_idx in nbhd[u] else (full ^ t))
                if not m:
                    dead = True
                    break
                new_masks.append(m)
            if not dead:
                sweep(v_idx + 1, new_masks)

    sweep(0, [full] * f.u_count)
    return Fraction(total, n ** f.vertex_count)


_freeness_cache: dict[tuple, bool] = {}


def _is_free(g: GroupDescriptor, f: BipartitePattern, bits: int,
             caps: Caps) -> bool:
    key = (g.moduli, f, bits)
    got = _freeness_cache.get(key)
    if got is None:
        got = find_bi_induced(GroupSubset(g, bits), f, require_injective=True,
                              caps=caps) is None
        _freeness_cache[key] = got
    return got


def distance_to_free(a: GroupSubset, f: BipartitePattern,
                     caps: Caps = DEFAULT_CAPS) -> int:
    """Minimum |A xor A'| over A' containing no injective bi-induced copy of
    f.  Brute force: try flip sets in increasing size, memoizing freeness per
    modified set; capped at caps.distance_group_cap group order."""
    g = a.group
    n = g.order
    if n > caps.distance_group_cap:
        raise CapExceeded(
            f"order {n} exceeds distance cap {caps.distance_group_cap}"
        )
    for t in range(n + 1):
        for flips in itertools.combinations(range(n), t):
            b = a.bits
            for p in flips:
                b ^= 1 << p
            if _is_free(g, f, b, caps):
                return t
    raise AssertionError("unreachable: the empty set is always reachable")


@dataclasses.dataclass(frozen=True)
class CosetGoodness:
    """Which H-cosets have A-density within eta of 0 or 1."""

    subgroup: Subgroup
    eta: Fraction
    good: tuple[bool, ...]
    bad_fraction: Fraction

    @property
    def all_good(self) -> bool:
        return all(self.good)


def coset_goodness(a: GroupSubset, h: Subgroup,
                   f: BipartitePattern) -> CosetGoodness:
    """Classify cosets with eta = 1 / (2 |U| |V|); the boundary is good."""
    g = a.group
    eta = Fraction(1, 2 * f.u_count * f.v_count)
    from .groups import cosets as _cosets

    flags = []
    for c in _cosets(g, h):
        dens = Fraction((a.bits & c).bit_count(), h.size)
        flags.append(dens <= eta or dens >= 1 - eta)
    bad = sum(1 for x in flags if not x)
    return CosetGoodness(h, eta, tuple(flags), Fraction(bad, len(flags)))


@dataclasses.dataclass(frozen=True)
class DensifyReport:
    samples: int
    hits: int
    fraction: float
    sigma: float
    bound: Fraction
    meets_bound: bool


def densify(a: GroupSubset, h: Subgroup, f: BipartitePattern,
            w: BiInducedWitness, samples: int, rng_seed: int) -> DensifyReport:
    """Perturb a witness within its cosets and measure how often it still
    bi-induces f in A.

    Requires the witness to bi-induce f in the rounded set coset_round(A, H)
    and every pair coset phi_u(u) + phi_v(v) + H to be good at
    eta = 1/(2|U||V|): each perturbed pair then disagrees with the pattern
    with probability at most eta, so the joint success probability is at
    least 1/2.  Asserted with three standard errors of slack."""
    g = a.group
    rounded = coset_round(a, h)
    if not check_witness(rounded, f, w):
        raise ValueError("witness does not bi-induce the pattern in the "
                         "rounded set; the perturbation bound does not apply")
    goodness = coset_goodness(a, h, f)
    eta = goodness.eta
    for u, xe in enumerate(w.phi_u):
        for v, ye in enumerate(w.phi_v):
            base = add_rank(g, xe.rank, ye.rank)
            c = translate_bits(g, h.bits, base)
            dens = Fraction((a.bits & c).bit_count(), h.size)
            if not (dens <= eta or dens >= 1 - eta):
                raise ValueError(
                    f"pair coset for (u={u}, v={v}) is bad at eta={eta}"
                )
    rng = random.Random(rng_seed)
    h_ranks = h.ranks()
    hits = 0
    edges = f.edges
    for _ in range(samples):
        xs = [add_rank(g, e.rank, rng.choice(h_ranks)) for e in w.phi_u]
        ys = [add_rank(g, e.rank, rng.choice(h_ranks)) for e in w.phi_v]
        ok = True
        for u, xr in enumerate(xs):
            if not ok:
                break
            for v, yr in enumerate(ys):
                if a.contains_rank(add_rank(g, xr, yr)) != ((u, v) in edges):
                    ok = False
                    break
        if ok:
            hits += 1
    frac = hits / samples
    sigma = binomial_sigma(hits, samples)
    bound = Fraction(1, 2)
    return DensifyReport(samples, hits, frac, sigma, bound,
                         frac >= float(bound) - 3 * sigma)


@dataclasses.dataclass(frozen=True)
class APWitness:
    """A 2k-term progression with the first k terms in A, the last k out."""

    start: GroupElement
    step: GroupElement
    k: int
    terms: tuple[GroupElement, ...]


def ap_search(a: GroupSubset, k: int) -> APWitness | None:
    """First (start, step) in rank order whose 2k-term progression has its
    first k terms in A and last k terms outside A; None when no such
    progression exists.  Exhaustive over all |G|^2 pairs with nonzero step."""
    if k < 1:
        raise ValueError("k must be >= 1")
    g = a.group
    n = g.order
    if 2 * k > n:
        raise ValueError("progression length 2k exceeds |G|")
    bits = a.bits
    for x in range(n):
        if not (bits >> x) & 1:
            continue
        for d in range(1, n):
            r = x
            ok = True
            for j in range(2 * k):
                inside = bool((bits >> r) & 1)
                if inside != (j < k):
                    ok = False
                    break
                if j < 2 * k - 1:
                    r = add_rank(g, r, d)
            if ok:
                terms = []
                r = x
                for j in range(2 * k):
                    terms.append(g.element(r))
                    r = add_rank(g, r, d)
                return APWitness(g.element(x), g.element(d), k, tuple(terms))
    return None


def ap_half_graph_witness(a: GroupSubset, ap: APWitness
                          ) -> tuple[BipartitePattern, BiInducedWitness]:
    """Turn a split progression into a half-graph copy: with x the last
    in-A term and step d, phi_u(i) = (i+1)d and phi_v(j) = x - (j+1)d give
    phi_u(i) + phi_v(j) = x + (i-j)d, which lies in A iff i <= j.  A found
    progression forces the step's order above 2k-1, so both maps are
    injective."""
    g = a.group
    k = ap.k
    f = half_graph(k)
    d = ap.step.rank
    last_in = ap.terms[k - 1].rank
    u_ranks = []
    r = 0
    for _ in range(k):
        r = add_rank(g, r, d)
        u_ranks.append(r)
    v_ranks = []
    r = last_in
    for _ in range(k):
        r = add_rank(g, r, neg_rank(g, d))
        v_ranks.append(r)
    w = _make_witness(f, g, u_ranks, v_ranks)
    if not check_witness(a, f, w, injectivity="per_side"):
        raise AssertionError("progression produced an invalid half-graph copy")
    return f, w
