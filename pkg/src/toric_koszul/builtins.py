"""Named fans usable without an input file."""
from __future__ import annotations

from .fan import Fan, build_fan

BUILTIN_FANS = {
    "a2": (2, [(1, 0), (0, 1)], [(0, 1)]),
    "p1": (1, [(1,), (-1,)], [(0,), (1,)]),
    "p2": (2, [(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)]),
    "p1xp1": (2, [(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)]),
    "hirzebruch1": (2, [(1, 0), (0, 1), (-1, 1), (0, -1)], [(0, 1), (1, 2), (2, 3), (0, 3)]),
}


def builtin_fan(name: str) -> Fan:
    try:
        rank, rays, cones = BUILTIN_FANS[name]
    except KeyError:
        raise KeyError(f"unknown builtin fan {name!r}; choose from {sorted(BUILTIN_FANS)}") from None
    return build_fan(rank, rays, cones)
