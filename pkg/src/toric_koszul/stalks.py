"""Graded stalk algebras A_sigma = Q[M & sigma^v] and B_sigma = Q[M_sigma^+].

Every homogeneous piece is 0- or 1-dimensional, so an algebra is just a
membership predicate on its grading group.  Flavor A is graded by M; flavor B
over sigma is graded by M_sigma = Z^dim(sigma) in ray coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import LengthMismatch
from .fan import Cone, Fan, Vec, b_degree, dual_membership, pairing, vadd, vsub

FLAVORS = ("A", "B")


@dataclass(frozen=True, eq=False)
class StalkAlgebra:
    fan: Fan
    cone: Cone
    flavor: str = "A"

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")

    def __eq__(self, other):
        return (isinstance(other, StalkAlgebra) and self.fan is other.fan
                and self.cone == other.cone and self.flavor == other.flavor)

    def __hash__(self):
        return hash((id(self.fan), self.cone, self.flavor))

    @property
    def grading_rank(self) -> int:
        return self.fan.rank if self.flavor == "A" else len(self.cone)

    def zero(self) -> Vec:
        return (0,) * self.grading_rank

    def check(self, deg: Sequence[int]) -> None:
        if len(deg) != self.grading_rank:
            if self.flavor == "A":
                self.fan.check_rank(deg)
            raise LengthMismatch(f"degree {tuple(deg)} does not live in M_{self.cone}")

    def contains(self, deg: Sequence[int]) -> bool:
        """True iff the degree-``deg`` piece of the algebra is nonzero."""
        if self.flavor == "A":
            return all(pairing(deg, self.fan.rays[i]) >= 0 for i in self.cone)
        return all(x >= 0 for x in deg)

    def bcoords(self, deg: Sequence[int]) -> Vec:
        """Coordinates in N^dim(sigma) that control all membership questions."""
        if self.flavor == "A":
            return tuple(pairing(deg, self.fan.rays[i]) for i in self.cone)
        return tuple(deg)

    def lift(self, beta: Sequence[int], base: Sequence[int]) -> Vec:
        """A degree with ``bcoords == beta``, chosen close to ``base``."""
        if self.flavor == "B":
            return tuple(beta)
        shift = vsub(beta, self.bcoords(base))
        out = tuple(base)
        for coef, u in zip(shift, self.fan.dual_section(self.cone)):
            if coef:
                out = vadd(out, tuple(coef * x for x in u))
        return out

    def from_M(self, m: Sequence[int]) -> Vec:
        """Image of a character m in this algebra's grading group."""
        return tuple(m) if self.flavor == "A" else b_degree(self.fan, self.cone, m)

    def face(self, tau: Cone) -> "StalkAlgebra":
        return StalkAlgebra(self.fan, tau, self.flavor)

    def restrict_degree(self, deg: Sequence[int], tau: Cone) -> Vec:
        """Push a degree of this algebra to the algebra of a face ``tau``."""
        if self.flavor == "A":
            return tuple(deg)
        pos = {r: k for k, r in enumerate(self.cone)}
        return tuple(deg[pos[r]] for r in tau)


def piece_dim_A(fan: Fan, sigma: Cone, m: Sequence[int]) -> int:
    return int(dual_membership(fan, sigma, m))


def piece_dim_B(fan: Fan, sigma: Cone, m_sigma: Sequence[int]) -> int:
    if len(m_sigma) != len(sigma):
        raise LengthMismatch(f"expected a vector of length {len(sigma)}")
    return int(all(x >= 0 for x in m_sigma))


def piece_dim_A_dual(fan: Fan, sigma: Cone, m: Sequence[int]) -> int:
    return piece_dim_A(fan, sigma, tuple(-x for x in m))


def local_coh_indicator(fan: Fan, tau: Cone, m: Sequence[int]) -> int:
    """Support of the top local cohomology of A_tau along the orbit of tau.

    Strictly negative pairing with every ray of tau; the zero cone gives the
    whole Laurent ring.
    """
    fan.check_rank(m)
    return int(all(pairing(m, fan.rays[i]) < 0 for i in tau))
