"""Resource caps shared by every operation that can blow up combinatorially."""
from __future__ import annotations

import dataclasses
import json


class CapExceeded(Exception):
    """An operation was asked to exceed a configured resource cap."""


@dataclasses.dataclass(frozen=True)
class Caps:
    """Cap configuration.

    order_cap: largest group order a descriptor may have (bitset rank width).
    subgroup_enum_cap: largest group order for full subgroup-lattice enumeration.
    subgroup_exhaustive_cap: largest order at which max_subgroup_within uses the
        exhaustive lattice as the authoritative answer (greedy closure beyond).
    vc_ground_cap: largest ground-set size accepted by the shattering search.
    pattern_visit_cap: node-visit budget for the bi-induced backtracking search.
    density_enum_cap: largest |G|**|V(F)| accepted by exhaustive_density.
    distance_group_cap: largest |G| accepted by distance_to_free.
    """

    order_cap: int = 1 << 20
    subgroup_enum_cap: int = 1 << 12
    subgroup_exhaustive_cap: int = 64
    vc_ground_cap: int = 1 << 14
    pattern_visit_cap: int = 10**9
    density_enum_cap: int = 10**7
    distance_group_cap: int = 16

    @classmethod
    def from_json(cls, obj: dict) -> "Caps":
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(obj) - known
        if bad:
            raise ValueError(f"unknown cap names: {sorted(bad)}")
        return cls(**{k: int(v) for k, v in obj.items()})

    @classmethod
    def load(cls, path: str) -> "Caps":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


DEFAULT_CAPS = Caps()
