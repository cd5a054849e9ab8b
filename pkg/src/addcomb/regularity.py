"""Coset-majority rounding and the almost-period regularization pipeline.

regularize(A, eps) sweeps a shrinking threshold delta.  For each delta it
collects the almost-periods B of A, doubles B until sumset growth stalls,
extracts the largest subgroup H inside 2lB - 2lB, and rounds A to the union
S of H-cosets where A holds a majority.  |A xor (A+x)| <= 4*l*delta*|G| for
every x in 2lB - 2lB by the triangle inequality over the 4l summands, and
|A xor S| <= mean over H of |A xor (A+x)|, so small delta yields a certified
approximation.  The sweep keeps the certificate of smallest index among the
successful deltas.
"""
from __future__ import annotations

import dataclasses
import math
import random
from fractions import Fraction

from .caps import Caps, DEFAULT_CAPS
from .groups import (
    GroupDescriptor,
    Subgroup,
    _make_subgroup,
    cosets,
    translate_bits,
)
from .subsets import (
    AlmostPeriodSet,
    DoublingConfig,
    DoublingTrace,
    GroupSubset,
    _to_fraction,
    almost_periods,
    difference_set,
    iterated_doubling,
    max_subgroup_within,
    symdiff_profile,
)
from .vc import SampledVcReport, sampled_vc

__all__ = [
    "RegularityCertificate",
    "CertificateCheck",
    "RoundingBoundReport",
    "PipelineConfig",
    "OracleReport",
    "RobustConfig",
    "RobustOutcome",
    "coset_round",
    "rounding_error_bound_check",
    "regularize",
    "verify_certificate",
    "oracle_best_subgroup",
    "robust_pipeline",
    "default_delta_schedule",
]


def coset_round(a: GroupSubset, h: Subgroup) -> GroupSubset:
    """Union of the H-cosets holding at least half of their elements in A.

    The boundary is inclusive: a coset with exactly |H|/2 elements of A is
    kept."""
    g = a.group
    if h.group != g:
        raise ValueError("subgroup does not belong to the subset's group")
    out = 0
    for c in cosets(g, h):
        if 2 * (a.bits & c).bit_count() >= h.size:
            out |= c
    return GroupSubset(g, out)


@dataclasses.dataclass(frozen=True)
class RoundingBoundReport:
    """|A xor S| against the mean translate distance over H."""

    error: int
    mean_bound: Fraction
    holds: bool


def rounding_error_bound_check(a: GroupSubset, h: Subgroup) -> RoundingBoundReport:
    """Verify |A xor coset_round(A, H)| <= (1/|H|) * sum_{x in H} |A xor (A+x)|."""
    s = coset_round(a, h)
    err = (a.bits ^ s.bits).bit_count()
    prof = symdiff_profile(a)
    total = sum(prof[x] for x in h.ranks())
    bound = Fraction(total, h.size)
    return RoundingBoundReport(err, bound, Fraction(err) <= bound)


@dataclasses.dataclass(frozen=True)
class RegularityCertificate:
    """Everything needed to re-verify one pipeline run independently."""

    base: GroupSubset
    epsilon: Fraction
    delta_used: Fraction | None
    subgroup: Subgroup
    rounded: GroupSubset
    achieved_error: Fraction
    index: int
    degenerate: bool
    trace: DoublingTrace | None

    @property
    def subgroup_to_ball_ratio(self) -> Fraction | None:
        """|H| / |ell*B|: how much of the doubled ball the extracted subgroup
        kept.  Recorded so the unspecified extraction-quality constant can be
        studied empirically; no operation depends on it."""
        if self.trace is None:
            return None
        return Fraction(self.subgroup.size, self.trace.ell_set.size)


@dataclasses.dataclass(frozen=True)
class CertificateCheck:
    closure_ok: bool
    union_of_cosets_ok: bool
    error_ok: bool
    translate_bound_ok: bool

    @property
    def ok(self) -> bool:
        return (self.closure_ok and self.union_of_cosets_ok
                and self.error_ok and self.translate_bound_ok)


def verify_certificate(cert: RegularityCertificate) -> CertificateCheck:
    """Re-verify a certificate from raw bitsets, independently of how it was
    built: subgroup axioms, S a union of H-cosets, the error value, and the
    4*l*delta translate bound on every element of H (skipped for degenerate
    certificates, which carry no delta)."""
    g = cert.base.group
    h = cert.subgroup
    closure_ok = h.verify()
    s_bits = cert.rounded.bits
    union_ok = all(
        translate_bits(g, s_bits, x) == s_bits for x in h.ranks()
    )
    err = Fraction((cert.base.bits ^ s_bits).bit_count(), g.order)
    error_ok = err == cert.achieved_error and err <= cert.epsilon
    if cert.degenerate or cert.delta_used is None or cert.trace is None:
        bound_ok = True
    else:
        prof = symdiff_profile(cert.base)
        limit = 4 * cert.trace.ell * cert.delta_used * g.order
        bound_ok = all(Fraction(prof[x]) <= limit for x in h.ranks())
    return CertificateCheck(closure_ok, union_ok, error_ok, bound_ok)


def default_delta_schedule(epsilon: Fraction, order: int) -> list[Fraction]:
    """eps/2, eps/4, ... halving until the first value below 1/(2|G|), which
    is included: at that point the almost-period set is the exact stabilizer
    of A and further halving changes nothing."""
    floor = Fraction(1, 2 * order)
    out = []
    d = epsilon / 2
    while True:
        out.append(d)
        if d < floor:
            return out
        d = d / 2


@dataclasses.dataclass(frozen=True)
class PipelineConfig:
    delta_schedule: tuple[Fraction, ...] | None = None
    k_floor: float = 2.0
    max_index: int | None = None
    caps: Caps = DEFAULT_CAPS


def _pipeline_step(a: GroupSubset, delta: Fraction, config: PipelineConfig
                   ) -> tuple[AlmostPeriodSet, DoublingTrace, Subgroup, GroupSubset, Fraction]:
    b = almost_periods(a, delta)
    trace = iterated_doubling(b.members, DoublingConfig.from_delta(delta, config.k_floor))
    spread = difference_set(trace.double_set, trace.double_set)
    h = max_subgroup_within(spread, caps=config.caps)
    s = coset_round(a, h)
    err = Fraction((a.bits ^ s.bits).bit_count(), a.group.order)
    return b, trace, h, s, err


def _degenerate_certificate(a: GroupSubset, epsilon: Fraction) -> RegularityCertificate:
    g = a.group
    trivial = _make_subgroup(g, 1, ())
    return RegularityCertificate(
        base=a, epsilon=epsilon, delta_used=None, subgroup=trivial,
        rounded=a, achieved_error=Fraction(0), index=g.order,
        degenerate=True, trace=None,
    )


def regularize(a: GroupSubset, epsilon, config: PipelineConfig | None = None
               ) -> RegularityCertificate:
    """Sweep the delta schedule and return the certificate of smallest index
    among the sweeps whose rounding error meets epsilon (ties broken by
    subgroup bitset, then by larger delta).  Falls back to the flagged
    degenerate certificate (H = {0}, S = A, error 0) when no sweep succeeds,
    so the operation is total even under adversarial schedules."""
    eps = _to_fraction(epsilon)
    if not 0 <= eps <= 1:
        raise ValueError("epsilon must be in [0, 1]")
    cfg = config or PipelineConfig()
    g = a.group
    schedule = (list(cfg.delta_schedule) if cfg.delta_schedule is not None
                else default_delta_schedule(eps, g.order))
    best: RegularityCertificate | None = None
    best_key = None
    for pos, delta in enumerate(schedule):
        d = _to_fraction(delta)
        _, trace, h, s, err = _pipeline_step(a, d, cfg)
        if err > eps:
            continue
        if cfg.max_index is not None and h.index > cfg.max_index:
            continue
        key = (h.index, h.bits, pos)
        if best_key is None or key < best_key:
            best_key = key
            best = RegularityCertificate(
                base=a, epsilon=eps, delta_used=d, subgroup=h, rounded=s,
                achieved_error=err, index=h.index, degenerate=False,
                trace=trace,
            )
    return best if best is not None else _degenerate_certificate(a, eps)


@dataclasses.dataclass(frozen=True)
class OracleReport:
    """Exhaustive best-subgroup rounding over the whole lattice."""

    epsilon: Fraction
    max_index: int | None
    min_index: int | None
    frontier: tuple[tuple[int, Fraction], ...]

    def best_error_at(self, max_index: int) -> Fraction | None:
        best = None
        for idx, err in self.frontier:
            if idx <= max_index and (best is None or err < best):
                best = err
        return best


def oracle_best_subgroup(a: GroupSubset, epsilon, max_index: int | None = None,
                         caps: Caps = DEFAULT_CAPS) -> OracleReport:
    """Round A against every subgroup (of index <= max_index when given) and
    report the minimum index achieving error <= epsilon, plus the full
    (index, best error) frontier.  Exhaustive; capped by the subgroup
    enumeration cap."""
    eps = _to_fraction(epsilon)
    g = a.group
    from .groups import enumerate_subgroups

    best_by_index: dict[int, Fraction] = {}
    for h in enumerate_subgroups(g, max_index=max_index, caps=caps):
        s = coset_round(a, h)
        err = Fraction((a.bits ^ s.bits).bit_count(), g.order)
        cur = best_by_index.get(h.index)
        if cur is None or err < cur:
            best_by_index[h.index] = err
    frontier = tuple(sorted(best_by_index.items()))
    min_index = None
    for idx, err in frontier:
        if err <= eps:
            min_index = idx
            break
    return OracleReport(eps, max_index, min_index, frontier)


@dataclasses.dataclass(frozen=True)
class RobustConfig:
    c_constant: float = 8.0
    trials: int = 50
    delta_schedule: tuple[Fraction, ...] | None = None
    k_floor: float = 2.0
    caps: Caps = DEFAULT_CAPS


@dataclasses.dataclass(frozen=True)
class RobustStep:
    delta: Fraction
    m: int
    m_effective: int
    threshold: Fraction
    ball_size: int
    branch: str


@dataclasses.dataclass(frozen=True)
class RobustOutcome:
    """Exactly one of: a sampled-VC report witnessing dimension > d (kind
    "high_vc"), or a regularity certificate (kind "certificate")."""

    kind: str
    d: int
    report: SampledVcReport | None
    certificate: RegularityCertificate | None
    steps: tuple[RobustStep, ...]


def _robust_m(delta: Fraction, d: int, order: int, c: float) -> tuple[int, int]:
    """m = C * (1/delta) * ln(1/delta), and its desk-scale cap.

    The small-ball branch is only meaningful when |G| >= 24 m^d (the sampled
    sets must fit twice over in G), so m is capped at floor((|G|/24)^(1/d));
    both the raw and the effective value are reported."""
    ratio = float(1 / delta)
    m_raw = max(1, math.ceil(c * ratio * math.log(ratio))) if ratio > 1 else 1
    cap = max(1, math.floor((order / 24) ** (1 / d)))
    return m_raw, min(m_raw, cap)


def robust_pipeline(a: GroupSubset, epsilon, d: int,
                    config: RobustConfig | None = None,
                    rng_seed: int = 0) -> RobustOutcome:
    """Dichotomy sweep: at each delta, if the almost-period set is smaller
    than |G| / (12 m^d), random restricted systems must shatter more than d
    elements, so return the sampled-VC report; otherwise continue the
    regularity pipeline at this delta and return its certificate once the
    rounding error meets epsilon.  The sweep always decides, because the
    final delta reduces the ball to the exact stabilizer."""
    eps = _to_fraction(epsilon)
    if d < 1:
        raise ValueError("d must be >= 1")
    cfg = config or RobustConfig()
    g = a.group
    pipeline_cfg = PipelineConfig(k_floor=cfg.k_floor, caps=cfg.caps)
    schedule = (list(cfg.delta_schedule) if cfg.delta_schedule is not None
                else default_delta_schedule(eps, g.order))
    steps: list[RobustStep] = []
    for delta in schedule:
        dd = _to_fraction(delta)
        m_raw, m_eff = _robust_m(dd, d, g.order, cfg.c_constant)
        denom = 12 * m_eff**d
        threshold = Fraction(g.order, denom)
        ball = almost_periods(a, dd)
        if ball.size * denom < g.order:
            steps.append(RobustStep(dd, m_raw, m_eff, threshold, ball.size,
                                    "small_ball"))
            x_size = min(12 * m_eff**d, g.order)
            y_size = min(max(m_eff, d + 1), g.order)
            report = sampled_vc(a, x_size, y_size, cfg.trials, d, rng_seed,
                                caps=cfg.caps)
            return RobustOutcome("high_vc", d, report, None, tuple(steps))
        _, trace, h, s, err = _pipeline_step(a, dd, pipeline_cfg)
        if err <= eps:
            steps.append(RobustStep(dd, m_raw, m_eff, threshold, ball.size,
                                    "certificate"))
            cert = RegularityCertificate(
                base=a, epsilon=eps, delta_used=dd, subgroup=h, rounded=s,
                achieved_error=err, index=h.index, degenerate=False,
                trace=trace,
            )
            return RobustOutcome("certificate", d, None, cert, tuple(steps))
        steps.append(RobustStep(dd, m_raw, m_eff, threshold, ball.size,
                                "continue"))
    # custom schedules may exhaust without deciding; force the stabilizer delta
    dd = Fraction(1, 2 * g.order)
    m_raw, m_eff = _robust_m(dd, d, g.order, cfg.c_constant)
    denom = 12 * m_eff**d
    threshold = Fraction(g.order, denom)
    ball = almost_periods(a, dd)
    if ball.size * denom < g.order:
        steps.append(RobustStep(dd, m_raw, m_eff, threshold, ball.size,
                                "small_ball"))
        x_size = min(12 * m_eff**d, g.order)
        y_size = min(max(m_eff, d + 1), g.order)
        report = sampled_vc(a, x_size, y_size, cfg.trials, d, rng_seed,
                            caps=cfg.caps)
        return RobustOutcome("high_vc", d, report, None, tuple(steps))
    _, trace, h, s, err = _pipeline_step(a, dd, pipeline_cfg)
    steps.append(RobustStep(dd, m_raw, m_eff, threshold, ball.size,
                            "certificate"))
    cert = RegularityCertificate(
        base=a, epsilon=eps, delta_used=dd, subgroup=h, rounded=s,
        achieved_error=err, index=h.index, degenerate=False, trace=trace,
    )
    return RobustOutcome("certificate", d, None, cert, tuple(steps))
