"""Small shared statistics helpers for Monte-Carlo reports."""
from __future__ import annotations

import math


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def binomial_sigma(successes: int, trials: int) -> float:
    """Plug-in standard error sqrt(p(1-p)/n) of an empirical proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    return math.sqrt(p * (1 - p) / trials)
