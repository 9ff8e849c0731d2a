"""Cellular complexes of fan diagrams and the Koszul functor K.

For a sheaf complex N with free stalks, K(N) is a complex of cosheaves whose
predual is a complex of sums of standard opens: the generator of N^j_sigma of
degree g contributes A(-g)_[sigma] in predual degree dim(sigma) - j, i.e. the
cosheaf A^v_[sigma](g) in degree j - dim(sigma).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import FanNotComplete, SignIncoherence
from .fan import Cone, Fan, Vec, vsub
from .homology import EvaluatedComplex
from .linalg import Matrix
from .sheaves import (CoSheafComplex, SheafComplex, SheafOfModules, SumMorphism, SumOfOpens,
                      delta_complex, morphism_from_generators, projective_resolution,
                      single_term, structure_sheaf)
from .stalks import StalkAlgebra


# -- diagrams and cellular complexes --------------------------------------------

class SigmaDiagram:
    """Objects per cone (graded vector spaces) with maps p_{sigma,tau} for faces.

    ``dim(cone, m)`` gives the degree-m dimension and ``p(sigma, tau, m)`` the
    matrix of the degree-m component of the map, for tau a face of sigma.
    """

    def __init__(self, fan: Fan, dim: Callable[[Cone, Vec], int],
                 p: Callable[[Cone, Cone, Vec], Matrix]):
        self.fan = fan
        self.dim = dim
        self.p = p


def constant_diagram(fan: Fan, xi: Cone, sigma: Cone,
                     space: Optional[Callable[[Vec], int]] = None) -> SigmaDiagram:
    """M between xi and sigma, zero elsewhere, identities in between.

    ``space`` is the piece function of M; the default is Q in every degree.
    """
    space = space or (lambda m: 1)
    inside = {t for t in fan.cones if set(xi) <= set(t) <= set(sigma)}

    def dim(c, m):
        return space(m) if c in inside else 0

    def p(s, t, m):
        if s in inside and t in inside:
            return linalg.identity(space(m))
        return linalg.zeros(dim(t, m), dim(s, m))

    return SigmaDiagram(fan, dim, p)


def check_sign_coherence(fan: Fan) -> None:
    for sigma in fan.cones:
        for i in range(len(sigma)):
            for j in range(i + 1, len(sigma)):
                xi = tuple(x for k, x in enumerate(sigma) if k not in (i, j))
                t1 = tuple(x for k, x in enumerate(sigma) if k != i)
                t2 = tuple(x for k, x in enumerate(sigma) if k != j)
                s = (fan.incidence_sign(sigma, t1) * fan.incidence_sign(t1, xi)
                     + fan.incidence_sign(sigma, t2) * fan.incidence_sign(t2, xi))
                if s:
                    raise SignIncoherence(f"incidence signs around {sigma} > {xi} do not cancel")


class CellularComplex:
    """Term in degree -k is the sum of the diagram objects over k-dimensional cones."""

    def __init__(self, diagram: SigmaDiagram, check: bool = True):
        self.diagram = diagram
        self.fan = diagram.fan
        if check:
            check_sign_coherence(self.fan)
        self.top = max((len(c) for c in self.fan.cones), default=0)

    def evaluate(self, m: Sequence[int]) -> EvaluatedComplex:
        fan, D = self.fan, self.diagram
        m = tuple(m)
        levels = [fan.cones_of_dim(k) for k in range(self.top, -1, -1)]
        dims, offsets = [], []
        for cones in levels:
            off, total = {}, 0
            for c in cones:
                off[c] = total
                total += D.dim(c, m)
            dims.append(total)
            offsets.append(off)
        maps = []
        for i in range(len(levels) - 1):
            mat = linalg.zeros(dims[i + 1], dims[i])
            for s in levels[i]:
                ns = D.dim(s, m)
                if not ns:
                    continue
                for t in fan.facets(s):
                    nt = D.dim(t, m)
                    if not nt:
                        continue
                    sign = fan.incidence_sign(s, t)
                    block = D.p(s, t, m)
                    for a in range(nt):
                        for b in range(ns):
                            mat[offsets[i + 1][t] + a][offsets[i][s] + b] += sign * block[a][b]
            maps.append(mat)
        return EvaluatedComplex(-self.top, dims, maps)


def cellular_complex(diagram: SigmaDiagram, check: bool = True) -> CellularComplex:
    return CellularComplex(diagram, check)


# -- the Koszul functor ---------------------------------------------------------------

def _is_free_complex(N: SheafComplex) -> bool:
    return all(t.stalk(c).is_free for t in N.terms.values() for c in N.fan.cones)


def koszul_predual(N: SheafComplex, check: bool = True) -> SheafComplex:
    fan = N.fan
    flavor = N.flavor
    # predual degree -> list of summands, and (j, cone, gen) -> (degree, index)
    summands: Dict[int, List[Tuple[Cone, Vec]]] = {}
    where: Dict[Tuple[int, Cone, int], Tuple[int, int]] = {}
    for j in sorted(N.terms):
        term = N.terms[j]
        for c in fan.cones:
            for k, g in enumerate(term.stalk(c).gen_degrees):
                p = len(c) - j
                lst = summands.setdefault(p, [])
                where[(j, c, k)] = (p, len(lst))
                lst.append((c, tuple(-x for x in g)))
    if not summands:
        return SheafComplex(fan, {}, {}, flavor)
    lo, hi = min(summands), max(summands)
    terms = {p: SumOfOpens(fan, summands.get(p, []), flavor) for p in range(lo, hi + 1)}
    mats = {p: linalg.zeros(len(terms[p + 1].summands), len(terms[p].summands)) for p in range(lo, hi)}
    for j, term in N.terms.items():
        for s in fan.cones:
            ns = term.stalk(s).ngens
            if not ns:
                continue
            for t in fan.facets(s):
                c = term.restriction(s, t).coeffs
                sign = fan.incidence_sign(s, t)
                for l in range(term.stalk(t).ngens):
                    for k in range(ns):
                        if c[l][k]:
                            p_src, i_src = where[(j, t, l)]
                            p_tgt, i_tgt = where[(j, s, k)]
                            mats[p_src][i_tgt][i_src] += sign * c[l][k]
    for j, d in N.diffs.items():
        for s in fan.cones:
            a = d.at(s).coeffs
            sign = (-1) ** len(s)
            for l in range(len(a)):
                for k in range(len(a[l])):
                    if a[l][k]:
                        p_src, i_src = where[(j + 1, s, l)]
                        p_tgt, i_tgt = where[(j, s, k)]
                        mats[p_src][i_tgt][i_src] += sign * a[l][k]
    if check:
        for p in range(lo, hi - 1):
            prod = linalg.matmul(mats[p + 1], mats[p], inner=len(terms[p + 1].summands),
                                 cols=len(terms[p].summands))
            if not linalg.is_zero(prod):
                raise SignIncoherence(f"K(N) fails d^2 = 0 between predual degrees {p} and {p + 2}")
    diffs = {p: SumMorphism(terms[p], terms[p + 1], mats[p], check=check) for p in range(lo, hi)}
    return SheafComplex(fan, terms, diffs, flavor)


def koszul_K(N, check: bool = True) -> CoSheafComplex:
    """K(N) for a sheaf or a sheaf complex.

    Complexes must have free stalks.  A single sheaf with non-free stalks is
    replaced by its projective resolution first.
    """
    if isinstance(N, SheafOfModules):
        N = single_term(N)
    if not _is_free_complex(N):
        if len(N.terms) != 1:
            raise ValueError("K of a complex with non-free stalks needs a free replacement first")
        (j, F), = N.terms.items()
        res, _ = projective_resolution(F)
        N = SheafComplex(N.fan, {k + j: t for k, t in res.terms.items()},
                         {k + j: d for k, d in res.diffs.items()}, N.flavor)
    return CoSheafComplex(koszul_predual(N, check))


def koszul_K_B(N, check: bool = True) -> CoSheafComplex:
    """The B-flavor functor; takes a B-flavor input or regrades an A-flavor one."""
    if isinstance(N, SheafOfModules):
        N = single_term(N)
    if N.flavor == "A":
        N = delta_complex(N)
    return koszul_K(N, check)


def augmented_K_structure(fan: Fan, check: bool = True) -> CoSheafComplex:
    """A^v_Sigma -> (+) A^v_[sigma] over top cones -> ..., the augmented K(A_Sigma)."""
    if not fan.complete:
        raise FanNotComplete("the augmented complex is only defined on complete fans")
    n = fan.rank
    A = structure_sheaf(fan)
    pre = koszul_predual(single_term(A), check)
    top = pre.terms[n]
    eps = morphism_from_generators(top, A, [[Fraction(1)] for _ in top.summands])
    terms = dict(pre.terms)
    diffs = dict(pre.diffs)
    terms[n + 1] = A
    diffs[n] = eps
    return CoSheafComplex(SheafComplex(fan, terms, diffs, "A"))


# -- verification helpers ------------------------------------------------------------

def commute_square_check(N, window, sites: Optional[Sequence[Cone]] = None) -> List[dict]:
    """Compare delta^* K_A(N) with K_B(delta^* N) along ray-pairing fibers."""
    if isinstance(N, SheafOfModules):
        N = single_term(N)
    ka = koszul_K(N)
    kb = koszul_K_B(N)
    failures = []
    for rho in sites or N.fan.cones:
        alg = StalkAlgebra(N.fan, rho, "A")
        for m in window:
            ea = ka.evaluate(rho, m)
            eb = kb.evaluate(rho, alg.bcoords(m))
            lo = min(ea.start, eb.start)
            hi = max(ea.start + len(ea.dims), eb.start + len(eb.dims)) - 1
            da = [ea.dim_at(k) for k in range(lo, hi + 1)]
            db = [eb.dim_at(k) for k in range(lo, hi + 1)]
            if da != db or ea.cohomology() != eb.cohomology() or ea.ranks() != eb.ranks():
                failures.append({"cone": list(rho), "degree": list(m),
                                 "a_side": ea.to_json(), "b_side": eb.to_json()})
    return failures
