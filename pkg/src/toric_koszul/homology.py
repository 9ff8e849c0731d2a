"""Finite complexes of Q-vector spaces and the degree sets they are checked on."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import linalg
from .errors import NotAComplex
from .fan import Fan, Vec, pairing
from .linalg import Matrix


@dataclass
class EvaluatedComplex:
    """V^start -> V^(start+1) -> ...; ``maps[k]`` goes from dims[k] to dims[k+1]."""

    start: int
    dims: List[int]
    maps: List[Matrix] = field(default_factory=list)

    def __post_init__(self):
        if self.dims and len(self.maps) != len(self.dims) - 1:
            raise NotAComplex("need one map between each pair of consecutive terms")
        for k, mat in enumerate(self.maps):
            rows, cols = self.dims[k + 1], self.dims[k]
            if len(mat) != rows or any(len(r) != cols for r in mat):
                raise NotAComplex(f"map {self.start + k} has shape mismatch")

    @property
    def degrees(self) -> List[int]:
        return list(range(self.start, self.start + len(self.dims)))

    def dim_at(self, k: int) -> int:
        i = k - self.start
        return self.dims[i] if 0 <= i < len(self.dims) else 0

    def square_zero_failures(self) -> List[int]:
        bad = []
        for k in range(len(self.maps) - 1):
            a, b = self.maps[k], self.maps[k + 1]
            prod = linalg.matmul(b, a, inner=self.dims[k + 1], cols=self.dims[k])
            if not linalg.is_zero(prod):
                bad.append(self.start + k)
        return bad

    def ranks(self) -> List[int]:
        return [linalg.rank(m) if m else 0 for m in self.maps]

    def cohomology(self) -> List[int]:
        if self.square_zero_failures():
            raise NotAComplex(f"d^2 != 0 at degrees {self.square_zero_failures()}")
        r = self.ranks()
        out = []
        for k, d in enumerate(self.dims):
            out.append(d - (r[k] if k < len(r) else 0) - (r[k - 1] if k > 0 else 0))
        return out

    def is_exact(self) -> bool:
        return not any(self.cohomology())

    def euler(self) -> int:
        return sum((-1) ** (self.start + k) * d for k, d in enumerate(self.dims))

    def to_json(self) -> dict:
        return {"start": self.start, "dims": list(self.dims), "ranks": self.ranks(),
                "maps": [[[str(x) for x in row] for row in m] for m in self.maps]}


def cohomology_dims(ec: EvaluatedComplex) -> List[int]:
    return ec.cohomology()


def concentrated(ec: EvaluatedComplex, degree: int) -> bool:
    return all(h == 0 for k, h in zip(ec.degrees, ec.cohomology()) if k != degree)


def reindex(ec: EvaluatedComplex, lo: int, hi: int) -> EvaluatedComplex:
    """Pad or trim with zero terms so the complex spans degrees lo..hi."""
    dims, maps = [], []
    for k in range(lo, hi + 1):
        dims.append(ec.dim_at(k))
    for k in range(lo, hi):
        i = k - ec.start
        if 0 <= i < len(ec.maps):
            maps.append(ec.maps[i])
        else:
            maps.append(linalg.zeros(ec.dim_at(k + 1), ec.dim_at(k)))
    return EvaluatedComplex(lo, dims, maps)


def dual_complex(ec: EvaluatedComplex) -> EvaluatedComplex:
    """Degreewise linear dual with the index flip V^k -> (V^-k)^*."""
    n = len(ec.dims)
    dims = list(reversed(ec.dims))
    maps = []
    for k in range(n - 1):
        src = ec.maps[n - 2 - k]
        maps.append(linalg.transpose(src, ec.dims[n - 1 - k]) if src else
                    linalg.zeros(dims[k + 1], dims[k]))
    return EvaluatedComplex(-(ec.start + n - 1), dims, maps)


# -- verification degrees ----------------------------------------------------

@dataclass(frozen=True)
class DegreeWindow:
    lo: Tuple[int, ...]
    hi: Tuple[int, ...]

    def points(self) -> Iterator[Vec]:
        return product(*[range(a, b + 1) for a, b in zip(self.lo, self.hi)])

    def __iter__(self):
        return self.points()

    def __len__(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a + 1
        return n

    def contains(self, m: Sequence[int]) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lo, m, self.hi))

    def clamp(self, m: Sequence[int]) -> Vec:
        return tuple(min(max(x, a), b) for a, x, b in zip(self.lo, m, self.hi))

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}


def cube(rank: int, lo: int, hi: int) -> DegreeWindow:
    return DegreeWindow((lo,) * rank, (hi,) * rank)


def verification_degrees(rank: int, job_degrees: Iterable[Sequence[int]], radius: int = 2) -> DegreeWindow:
    """Bounding box of the job's degrees (always including 0), widened by ``radius``."""
    pts = [tuple(d) for d in job_degrees] + [(0,) * rank]
    lo = tuple(min(p[i] for p in pts) - radius for i in range(rank))
    hi = tuple(max(p[i] for p in pts) + radius for i in range(rank))
    return DegreeWindow(lo, hi)


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def sign_pattern(fan: Fan, twists: Sequence[Sequence[int]], m: Sequence[int]) -> Tuple[int, ...]:
    return tuple(_sign(pairing(tuple(a - b for a, b in zip(m, t)), r))
                 for t in twists for r in fan.rays)


def chambers(fan: Fan, twists: Sequence[Sequence[int]], window: DegreeWindow,
             margin: int = 3) -> List[Vec]:
    """One representative per sign pattern of <m - t, r>, searched in an enlarged box.

    Representatives are the pattern members closest to the window (ties broken
    lexicographically), so they are deterministic.
    """
    twists = [tuple(t) for t in twists] or [(0,) * fan.rank]
    big = DegreeWindow(tuple(a - margin for a in window.lo), tuple(b + margin for b in window.hi))
    best: Dict[Tuple[int, ...], Tuple[Tuple[int, Vec], Vec]] = {}
    for m in big:
        pat = sign_pattern(fan, twists, m)
        c = window.clamp(m)
        key = (sum(abs(a - b) for a, b in zip(m, c)), m)
        if pat not in best or key < best[pat][0]:
            best[pat] = (key, m)
    return sorted(v[1] for v in best.values())
