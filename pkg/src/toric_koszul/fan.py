"""Smooth fans in N_R: cones, faces, dual-cone tests, orientations, morphisms.

Cones are identified with sorted tuples of ray indices; the zero cone is ``()``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import Matrix as SympyMatrix
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import invariant_factors

from . import linalg
from .errors import (NoContainingCone, NonPrimitiveRay, NonSmoothCone, NotAFacet,
                     NotAFan, RankMismatch)

Vec = Tuple[int, ...]
Cone = Tuple[int, ...]

ZERO_CONE: Cone = ()


def pairing(m: Sequence[int], r: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(m, r))


def vadd(a: Sequence[int], b: Sequence[int]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[int], b: Sequence[int]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vneg(a: Sequence[int]) -> Vec:
    return tuple(-x for x in a)


def _det(rows: Sequence[Sequence[int]]) -> int:
    return int(SympyMatrix(rows).det()) if rows else 1


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def invariant_factors_of(rows: Sequence[Sequence[int]]) -> List[int]:
    if not rows:
        return []
    dm = DomainMatrix([[ZZ(x) for x in row] for row in rows], (len(rows), len(rows[0])), ZZ)
    return [int(x) for x in invariant_factors(dm)]


def unimodular_completion(rows: Sequence[Sequence[int]], n: int) -> List[List[int]]:
    """Integer n x n matrix V with det +-1 and (rows @ V) = [I | 0].

    Column i of V (i < d) is then the dual vector u_i with <u_i, r_j> = delta_ij.
    Raises NonSmoothCone if the rows do not extend to a basis of Z^n.
    """
    d = len(rows)
    a = [list(r) for r in rows]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def col_op(j_dst: int, j_src: int, q: int) -> None:
        # column j_dst -= q * column j_src
        for row in a:
            row[j_dst] -= q * row[j_src]
        for row in v:
            row[j_dst] -= q * row[j_src]

    def swap(j1: int, j2: int) -> None:
        for row in a:
            row[j1], row[j2] = row[j2], row[j1]
        for row in v:
            row[j1], row[j2] = row[j2], row[j1]

    for k in range(d):
        # Euclid on row k across columns k..n-1
        while True:
            nz = [j for j in range(k, n) if a[k][j]]
            if not nz:
                raise NonSmoothCone(f"rays {rows} are linearly dependent")
            jmin = min(nz, key=lambda j: abs(a[k][j]))
            if jmin != k:
                swap(k, jmin)
            done = True
            for j in range(k + 1, n):
                if a[k][j]:
                    col_op(j, k, a[k][j] // a[k][k])
                    if a[k][j]:
                        done = False
            if done:
                break
        if abs(a[k][k]) != 1:
            raise NonSmoothCone(f"rays {rows} do not extend to a lattice basis")
        if a[k][k] == -1:
            for row in a:
                row[k] = -row[k]
            for row in v:
                row[k] = -row[k]
    for k in range(d):
        for i in range(k):
            if a[k][i]:
                col_op(i, k, a[k][i])
    return v


@dataclass(eq=False)
class Fan:
    """A validated smooth fan.  Build with :func:`build_fan`."""

    rank: int
    rays: Tuple[Vec, ...]
    cones: Tuple[Cone, ...]
    max_cones: Tuple[Cone, ...]
    complete: bool
    global_orientation: int = 1
    orientation: Mapping[Cone, int] = field(default_factory=dict)
    sign_overrides: Mapping[Tuple[Cone, Cone], int] = field(default_factory=dict)
    _sections: Dict[Cone, List[Vec]] = field(default_factory=dict, repr=False)

    # -- cone bookkeeping -------------------------------------------------
    def dim(self, cone: Cone) -> int:
        return len(cone)

    def cones_of_dim(self, k: int) -> List[Cone]:
        return [c for c in self.cones if len(c) == k]

    def faces(self, cone: Cone) -> List[Cone]:
        """All faces of ``cone`` including itself, in the fan's cone order."""
        s = set(cone)
        return [c for c in self.cones if s.issuperset(c)]

    def cofaces(self, cone: Cone) -> List[Cone]:
        s = set(cone)
        return [c for c in self.cones if s.issubset(c)]

    def facets(self, cone: Cone) -> List[Cone]:
        return [tuple(x for x in cone if x != r) for r in cone]

    def is_face(self, small: Cone, big: Cone) -> bool:
        return set(small).issubset(big)

    def ray_vectors(self, cone: Cone) -> List[Vec]:
        return [self.rays[i] for i in cone]

    def check_rank(self, m: Sequence[int]) -> None:
        if len(m) != self.rank:
            raise RankMismatch(f"degree {tuple(m)} has length {len(m)}, fan rank is {self.rank}")

    def dual_section(self, cone: Cone) -> List[Vec]:
        """u_1..u_d in M with <u_i, r_j> = delta_ij for the rays of ``cone``."""
        if cone not in self._sections:
            v = unimodular_completion(self.ray_vectors(cone), self.rank)
            self._sections[cone] = [tuple(v[row][i] for row in range(self.rank))
                                    for i in range(len(cone))]
        return self._sections[cone]

    # -- orientation -----------------------------------------------------
    def incidence_sign(self, sigma: Cone, tau: Cone) -> int:
        """Sign attached to the facet ``tau`` of ``sigma`` in cellular differentials."""
        if len(tau) != len(sigma) - 1 or not set(tau).issubset(sigma):
            raise NotAFacet(f"{tau} is not a facet of {sigma}")
        if (sigma, tau) in self.sign_overrides:
            return self.sign_overrides[(sigma, tau)]
        (missing,) = set(sigma) - set(tau)
        pos = sigma.index(missing)
        return (-1) ** pos * self.orientation.get(sigma, 1) * self.orientation.get(tau, 1)

    def with_sign_flip(self, sigma: Cone, tau: Cone) -> "Fan":
        """Copy of the fan with one incidence sign negated (fault injection)."""
        s = self.incidence_sign(sigma, tau)
        overrides = dict(self.sign_overrides)
        overrides[(sigma, tau)] = -s
        return Fan(self.rank, self.rays, self.cones, self.max_cones, self.complete,
                   self.global_orientation, dict(self.orientation), overrides)

    def to_json(self) -> dict:
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "max_cones": [list(c) for c in self.max_cones],
                "orientation": self.global_orientation}


def dual_membership(fan: Fan, sigma: Cone, m: Sequence[int]) -> bool:
    fan.check_rank(m)
    return all(pairing(m, fan.rays[i]) >= 0 for i in sigma)


def b_degree(fan: Fan, sigma: Cone, m: Sequence[int]) -> Vec:
    """Image of m in M_sigma = Z^dim(sigma), via pairings with the ordered rays."""
    fan.check_rank(m)
    return tuple(pairing(m, fan.rays[i]) for i in sigma)


def incidence_sign(fan: Fan, sigma: Cone, tau: Cone) -> int:
    return fan.incidence_sign(sigma, tau)


def _meet_properly(rays: Sequence[Vec], c1: Cone, c2: Cone) -> bool:
    """True iff the real cones on c1 and c2 intersect in the cone on c1 & c2."""
    from scipy.optimize import linprog

    only1 = [i for i in c1 if i not in c2]
    only2 = [i for i in c2 if i not in c1]
    if not only1 and not only2:
        return True
    cols = list(c1) + list(c2)
    mat = linalg.to_fraction_matrix([list(rays[i]) for i in cols])
    if linalg.rank(mat) == len(set(cols)):
        return True
    # witness a >= 0, b >= 0 with sum a_i r_i = sum b_j r_j and mass off the common face
    n = len(rays[0])
    a_eq = [[rays[i][k] for i in c1] + [-rays[j][k] for j in c2] for k in range(n)]
    a_eq.append([1 if i in only1 else 0 for i in c1] + [1 if j in only2 else 0 for j in c2])
    b_eq = [0] * n + [1]
    res = linprog([0] * len(cols), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * len(cols),
                  method="highs")
    return res.status != 0


def build_fan(rank: int, rays: Sequence[Sequence[int]], max_cone_ray_sets: Iterable[Iterable[int]],
              orientation: int = 1) -> Fan:
    """Validate and close up a smooth fan given its maximal cones."""
    rays_t = tuple(tuple(int(x) for x in r) for r in rays)
    for r in rays_t:
        if len(r) != rank:
            raise RankMismatch(f"ray {r} has length {len(r)}, expected {rank}")
        g = 0
        for x in r:
            g = gcd(g, x)
        if g != 1:
            raise NonPrimitiveRay(f"ray {r} is not primitive")
    if len(set(rays_t)) != len(rays_t):
        raise NotAFan("rays must be pairwise distinct")
    maxes = []
    for s in max_cone_ray_sets:
        c = tuple(sorted(set(int(i) for i in s)))
        if any(i < 0 or i >= len(rays_t) for i in c):
            raise NotAFan(f"cone {c} references a missing ray")
        maxes.append(c)
    for c in maxes:
        if not c:
            continue
        mat = [list(rays_t[i]) for i in c]
        if linalg.rank(mat) != len(c):
            raise NonSmoothCone(f"rays of cone {c} are linearly dependent")
        if any(f != 1 for f in invariant_factors_of(mat)):
            raise NonSmoothCone(f"cone {c} has invariant factors {invariant_factors_of(mat)}")
    for c1, c2 in combinations(maxes, 2):
        if not _meet_properly(rays_t, c1, c2):
            raise NotAFan(f"cones {c1} and {c2} do not meet in a common face")

    all_cones = {()}
    for c in maxes:
        for k in range(len(c) + 1):
            all_cones.update(combinations(c, k))
    cones = tuple(sorted(all_cones, key=lambda c: (len(c), c)))
    max_cones = tuple(sorted({c for c in cones if not any(set(c) < set(d) for d in cones)},
                             key=lambda c: (len(c), c)))
    complete = _is_complete(rank, cones)

    orient: Dict[Cone, int] = {}
    if complete and rank > 0:
        for c in cones:
            if len(c) == rank:
                orient[c] = orientation * (1 if _det([list(rays_t[i]) for i in c]) > 0 else -1)
    return Fan(rank, rays_t, cones, max_cones, complete, orientation, orient)


def _is_complete(rank: int, cones: Sequence[Cone]) -> bool:
    if rank == 0:
        return True
    tops = [c for c in cones if len(c) == rank]
    if not tops:
        return False
    walls = [c for c in cones if len(c) == rank - 1]
    for w in walls:
        if sum(1 for t in tops if set(w).issubset(t)) != 2:
            return False
    # connectivity through shared facets
    seen = {tops[0]}
    stack = [tops[0]]
    while stack:
        t = stack.pop()
        for u in tops:
            if u not in seen and len(set(t) & set(u)) == rank - 1:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(tops)


# -- fan morphisms -------------------------------------------------------

@dataclass(eq=False)
class FanMorphism:
    source: Fan
    target: Fan
    lattice_map: Tuple[Tuple[int, ...], ...]   # n2 x n1, acting N1 -> N2
    cone_image: Dict[Cone, Cone]

    def apply(self, v: Sequence[int]) -> Vec:
        return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in self.lattice_map)

    def pull_character(self, m: Sequence[int]) -> Vec:
        """Transpose map M2 -> M1."""
        n1 = self.source.rank
        return tuple(sum(self.lattice_map[i][j] * m[i] for i in range(len(m))) for j in range(n1))

    def ray_coefficients(self, tau: Cone) -> List[List[int]]:
        """c[i][j]: coefficient of the j-th ray of f(tau) in the image of the i-th ray of tau."""
        sigma = self.cone_image[tau]
        rows = []
        for i in tau:
            coeffs = _cone_coordinates(self.target, sigma, self.apply(self.source.rays[i]))
            rows.append([int(c) for c in coeffs])
        return rows


def _cone_coordinates(fan: Fan, sigma: Cone, v: Sequence[int]) -> Optional[List[Fraction]]:
    """Coefficients of v in the rays of sigma when v lies in their span, else None."""
    if not sigma:
        return [] if not any(v) else None
    cols = fan.ray_vectors(sigma)
    mat = [[Fraction(cols[j][k]) for j in range(len(sigma))] for k in range(fan.rank)]
    return linalg.solve(mat, list(v), len(sigma))


def _contains(fan: Fan, sigma: Cone, v: Sequence[int]) -> bool:
    c = _cone_coordinates(fan, sigma, v)
    return c is not None and all(x >= 0 for x in c)


def fan_morphism(source: Fan, target: Fan, lattice_map: Sequence[Sequence[int]]) -> FanMorphism:
    lm = tuple(tuple(int(x) for x in row) for row in lattice_map)
    if len(lm) != target.rank or any(len(row) != source.rank for row in lm):
        if not (target.rank == 0 and len(lm) == 0):
            raise RankMismatch("lattice map has the wrong shape")
    probe = FanMorphism(source, target, lm, {})
    image: Dict[Cone, Cone] = {}
    for tau in source.cones:
        imgs = [probe.apply(source.rays[i]) for i in tau]
        best = None
        for sigma in target.cones:
            if all(_contains(target, sigma, v) for v in imgs):
                if best is None or len(sigma) < len(best):
                    best = sigma
        if best is None:
            raise NoContainingCone(f"image of cone {tau} lies in no target cone")
        image[tau] = best
    return FanMorphism(source, target, lm, image)


def identity_morphism(fan: Fan) -> FanMorphism:
    return fan_morphism(fan, fan, [[int(i == j) for j in range(fan.rank)] for i in range(fan.rank)])
