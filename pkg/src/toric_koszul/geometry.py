"""Equivariant line bundles, the functors psi and phi, Cousin complexes.

Geometric complexes are evaluated one affine chart (maximal cone) and one
character at a time.  A term tagged by a cone tau contributes on the chart of
sigma only when tau is a face of sigma.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (FanNotComplete, IncompatibleDivisor, NotCoherentInput, NotLocallyFree,
                     NotTcf)
from .fan import Cone, Fan, Vec, pairing, vadd, vneg, vsub
from .homology import EvaluatedComplex
from .koszul import koszul_K
from .linalg import Matrix
from .modules import ModuleMorphism, free_module
from .sheaves import (CoSheafComplex, CoSheafTcf, SheafOfModules, direct_sum_sheaves,
                      is_coherent, sections_dim, sheaf_dual, structure_sheaf)
from .stalks import StalkAlgebra, local_coh_indicator


# -- line bundles ------------------------------------------------------------------

@dataclass(eq=False)
class EquivariantLineBundle:
    """O(D) for D = sum a_i D_i; ``chars[tau]`` solves <m, r_i> = -a_i on tau."""

    fan: Fan
    coeffs: Tuple[int, ...]
    chars: Dict[Cone, Vec]

    def char(self, cone: Cone) -> Vec:
        return self.chars[cone]


def line_bundle(fan: Fan, divisor_coeffs: Sequence[int]) -> EquivariantLineBundle:
    a = tuple(int(x) for x in divisor_coeffs)
    if len(a) != len(fan.rays):
        raise IncompatibleDivisor(f"expected {len(fan.rays)} divisor coefficients")
    chars: Dict[Cone, Vec] = {}
    for sigma in fan.max_cones:
        m = (0,) * fan.rank
        for i, u in zip(sigma, fan.dual_section(sigma)):
            m = vadd(m, tuple(-a[i] * x for x in u))
        if any(pairing(m, fan.rays[i]) != -a[i] for i in sigma):
            raise IncompatibleDivisor(f"no character solves the divisor equations on {sigma}")
        chars[sigma] = m
    for tau in fan.cones:
        if tau not in chars:
            sigma = next(s for s in fan.max_cones if set(tau) <= set(s))
            chars[tau] = chars[sigma]
    return EquivariantLineBundle(fan, a, chars)


def canonical_bundle(fan: Fan) -> EquivariantLineBundle:
    """omega_X = O(-sum D_i)."""
    return line_bundle(fan, [-1] * len(fan.rays))


def trivial_bundle(fan: Fan) -> EquivariantLineBundle:
    return line_bundle(fan, [0] * len(fan.rays))


def to_sheaf(L: EquivariantLineBundle) -> SheafOfModules:
    fan = L.fan
    stalks = {c: free_module(StalkAlgebra(fan, c), [L.char(c)]) for c in fan.cones}
    res = {(s, t): ModuleMorphism(stalks[s], stalks[t], [[1]]) for s in fan.cones for t in fan.facets(s)}
    return SheafOfModules(fan, "A", stalks, res, check=False)


def psi(data) -> SheafOfModules:
    """Combinatorial model of a coherent equivariant sheaf given by chart data.

    Accepts a line bundle, a list of line bundles (their direct sum), or a
    sheaf of modules that must already be coherent.
    """
    if isinstance(data, EquivariantLineBundle):
        return to_sheaf(data)
    if isinstance(data, (list, tuple)) and data and all(isinstance(x, EquivariantLineBundle) for x in data):
        return direct_sum_sheaves([to_sheaf(x) for x in data])
    if isinstance(data, SheafOfModules):
        if not is_coherent(data):
            raise NotCoherentInput("structure maps are not isomorphisms")
        return data
    raise NotCoherentInput(f"cannot interpret {type(data).__name__} as coherent data")


def tensor_line_bundle(G: SheafOfModules, L: EquivariantLineBundle) -> SheafOfModules:
    fan = G.fan
    stalks = {c: G.stalk(c).twist(L.char(c)) for c in fan.cones}
    res = {(s, t): ModuleMorphism(stalks[s], stalks[t], G.restriction(s, t).coeffs)
           for s in fan.cones for t in fan.facets(s)}
    return SheafOfModules(fan, G.flavor, stalks, res, check=False)


def _require_locally_free(G: SheafOfModules) -> None:
    for c in G.fan.cones:
        if not G.stalk(c).is_free:
            raise NotLocallyFree(f"stalk at {c} is not presented as a free module")
    for s in G.fan.cones:
        for t in G.fan.facets(s):
            c = G.restriction(s, t).coeffs
            n = G.stalk(s).ngens
            if G.stalk(t).ngens != n or linalg.rank(c) != n:
                raise NotLocallyFree(f"restriction {s}->{t} is not invertible")


def _inverse(c: Matrix) -> Matrix:
    n = len(c)
    out = []
    for k in range(n):
        e = [Fraction(int(i == k)) for i in range(n)]
        out.append(linalg.solve(c, e, n))
    return linalg.transpose(out, n)


def dual_locally_free(G: SheafOfModules) -> SheafOfModules:
    """Hom(G, A_Sigma) for locally free G."""
    _require_locally_free(G)
    fan = G.fan
    stalks = {c: free_module(G.algebra(c), [vneg(g) for g in G.stalk(c).gen_degrees]) for c in fan.cones}
    res = {}
    for s in fan.cones:
        for t in fan.facets(s):
            c = G.restriction(s, t).coeffs
            inv = _inverse(c) if c else []
            res[(s, t)] = ModuleMorphism(stalks[s], stalks[t], linalg.transpose(inv, len(c)) if c else [])
    return SheafOfModules(fan, G.flavor, stalks, res, check=False)


def global_sections_degree(F: SheafOfModules, m: Sequence[int]) -> int:
    return sections_dim(F, F.fan.cones, m)


# -- phi ---------------------------------------------------------------------------

class GeometricComplex:
    """Chart-local complex; subclasses implement ``blocks`` and ``block_map``."""

    fan: Fan
    lo: int
    hi: int

    def charts(self) -> List[Cone]:
        return list(self.fan.max_cones)

    def blocks(self, chart: Cone, k: int, m: Vec) -> List[Tuple[object, int]]:
        raise NotImplementedError

    def block_map(self, chart: Cone, k: int, src, tgt, m: Vec) -> Optional[Matrix]:
        raise NotImplementedError

    def evaluate(self, chart: Cone, m: Sequence[int]) -> EvaluatedComplex:
        m = tuple(m)
        layout = []
        for k in range(self.lo, self.hi + 1):
            layout.append([(key, n) for key, n in self.blocks(chart, k, m) if n])
        dims = [sum(n for _, n in blocks) for blocks in layout]
        maps = []
        for i in range(len(layout) - 1):
            mat = linalg.zeros(dims[i + 1], dims[i])
            co = 0
            for skey, sn in layout[i]:
                ro = 0
                for tkey, tn in layout[i + 1]:
                    block = self.block_map(chart, self.lo + i, skey, tkey, m)
                    if block is not None:
                        for a in range(tn):
                            for b in range(sn):
                                mat[ro + a][co + b] += block[a][b]
                    ro += tn
                co += sn
            maps.append(mat)
        return EvaluatedComplex(self.lo, dims, maps)

    def term_dims(self, chart: Cone, m: Sequence[int]) -> Dict[int, int]:
        return {k: sum(n for _, n in self.blocks(chart, k, tuple(m))) for k in range(self.lo, self.hi + 1)}


Augmentation = Callable[[Cone, Vec], Tuple[int, Dict[object, Matrix]]]


class PhiComplex(GeometricComplex):
    """phi(C): costalk C^q_tau sits in degree q + dim(tau).

    The differential is sign(tau', tau) * corestriction + (-1)^dim(tau) * d_C.
    An optional augmentation adds a term in degree lo - 1.
    """

    def __init__(self, C: CoSheafComplex, augmentation: Optional[Augmentation] = None):
        if not isinstance(C, CoSheafComplex):
            raise NotTcf("phi expects a complex of formal-dual cosheaves")
        self.C = C
        self.fan = C.fan
        self.aug = augmentation
        top = max(len(c) for c in self.fan.cones)
        self.lo = C.lo - (1 if augmentation else 0)
        self.hi = C.hi + top

    def blocks(self, chart, k, m):
        out = []
        if self.aug and k == self.lo:
            n, _ = self.aug(chart, m)
            return [("aug", n)]
        for tau in self.fan.faces(chart):
            q = k - len(tau)
            if self.C.lo <= q <= self.C.hi:
                out.append(((q, tau), self.C.piece_dim(q, tau, m)))
        return out

    def block_map(self, chart, k, src, tgt, m):
        if src == "aug":
            _, maps = self.aug(chart, m)
            return maps.get(tgt)
        q, tau = src
        q2, tau2 = tgt
        if tau2 == tau and q2 == q + 1:
            d = self.C.differential(q, tau, m)
            s = (-1) ** len(tau)
            return [[s * x for x in row] for row in d]
        if q2 == q and len(tau2) == len(tau) + 1 and set(tau) <= set(tau2):
            s = self.fan.incidence_sign(tau2, tau)
            return [[s * x for x in row] for row in self.C.corestriction(q, tau, tau2, m)]
        return None


def phi(C: CoSheafComplex, augmentation: Optional[Augmentation] = None) -> PhiComplex:
    return PhiComplex(C, augmentation)


def omega_augmentation(fan: Fan) -> Augmentation:
    """eta: omega -> phi(A^v_Sigma), landing in the open-orbit term with value 1."""
    omega = canonical_bundle(fan)

    def aug(chart, m):
        alg = StalkAlgebra(fan, chart)
        n = int(alg.contains(vsub(m, omega.char(chart))))
        return n, {(0, ()): [[Fraction(1)] * n]}

    return aug


def omega_resolution_complex(fan: Fan) -> PhiComplex:
    """omega -> phi(A^v_Sigma), the complex the chartwise argument shows is acyclic."""
    return PhiComplex(sheaf_dual(structure_sheaf(fan)), omega_augmentation(fan))


# -- Cousin complexes ------------------------------------------------------------------

class CousinComplex(GeometricComplex):
    """Equivariant Cousin complex of a locally free sheaf, chart by chart.

    Degree i collects the top local cohomology along the orbits of the
    i-dimensional faces of the chart; with ``augmented`` the chart module of G
    sits in degree -1.
    """

    def __init__(self, G: SheafOfModules, augmented: bool = False):
        _require_locally_free(G)
        self.G = G
        self.fan = G.fan
        self.augmented = augmented
        self.lo = -1 if augmented else 0
        self.hi = max(len(c) for c in self.fan.cones)

    def _active(self, tau: Cone, m: Vec) -> List[int]:
        return [j for j, g in enumerate(self.G.stalk(tau).gen_degrees)
                if local_coh_indicator(self.fan, tau, vsub(m, g))]

    def blocks(self, chart, k, m):
        if k == -1:
            return [("G", len(self.G.stalk(chart).active(m)))]
        return [(tau, len(self._active(tau, m))) for tau in self.fan.faces(chart) if len(tau) == k]

    def block_map(self, chart, k, src, tgt, m):
        if src == "G":
            if tgt != ():
                return None
            c = self.G.restriction(chart, ()).coeffs
            rows = self._active((), m)
            cols = self.G.stalk(chart).active(m)
            return [[c[i][j] for j in cols] for i in rows]
        tau, tau2 = src, tgt
        if len(tau2) != len(tau) + 1 or not set(tau) <= set(tau2):
            return None
        inv = _inverse(self.G.restriction(tau2, tau).coeffs)
        s = self.fan.incidence_sign(tau2, tau)
        rows = self._active(tau2, m)
        cols = self._active(tau, m)
        return [[s * inv[i][j] for j in cols] for i in rows]


def cousin_complex(G: SheafOfModules, augmented: bool = False) -> CousinComplex:
    return CousinComplex(G, augmented)


def cech_local_cohomology(fan: Fan, tau: Cone, gen_degrees: Sequence[Vec], m: Sequence[int]) -> List[int]:
    """H^j of the Cech complex of a free A_tau-module on the rays of tau, degree m.

    The localization at x_J keeps the condition <m - g, r> >= 0 only for rays
    outside J.
    """
    from itertools import combinations
    rays = list(tau)
    levels = [list(combinations(rays, p)) for p in range(len(rays) + 1)]
    total = [0] * (len(rays) + 1)
    for g in gen_degrees:
        d = vsub(m, g)

        def alive(J):
            return all(pairing(d, fan.rays[r]) >= 0 for r in rays if r not in J)

        dims = [sum(1 for J in lvl if alive(J)) for lvl in levels]
        maps = []
        for p in range(len(rays)):
            src = [J for J in levels[p] if alive(J)]
            tgt = [J for J in levels[p + 1] if alive(J)]
            mat = linalg.zeros(len(tgt), len(src))
            for b, J in enumerate(src):
                for a, J2 in enumerate(tgt):
                    if set(J) <= set(J2):
                        (r,) = set(J2) - set(J)
                        mat[a][b] = Fraction((-1) ** J2.index(r))
            maps.append(mat)
        h = EvaluatedComplex(0, dims, maps).cohomology()
        total = [x + y for x, y in zip(total, h)]
    return total


# -- the Serre functor check ---------------------------------------------------------------

def check_entry(name: str, site, failures: List[dict], degrees: int) -> dict:
    """One report line: a named check at one site over a set of degrees."""
    out = {"name": name, "site": list(site) if site is not None else None,
           "status": "pass" if not failures else "fail", "degrees": degrees}
    if failures:
        out["counterexample"] = failures[0]
        out["failures"] = len(failures)
        out["failing"] = [{k: f[k] for k in ("cone", "degree") if k in f} for f in failures]
    return out


def serre_check(fan: Fan, F, window, charts: Optional[Sequence[Cone]] = None) -> List[dict]:
    """phi K psi(F) against omega[n] (x) F, chart by chart and degree by degree.

    Checks: cohomology concentrated in degree -n with the pieces of omega (x) F;
    for line bundles, agreement with phi K psi(O) shifted by the local
    character; termwise agreement of phi(A^v (x) psi F) with the Cousin complex
    of omega (x) F; exactness of omega -> phi(A^v_Sigma).
    """
    if not fan.complete:
        raise FanNotComplete("the Serre functor comparison needs a complete fan")
    G = psi(F)
    _require_locally_free(G)
    n = fan.rank
    omega = canonical_bundle(fan)
    target = tensor_line_bundle(G, omega)
    pkp = PhiComplex(koszul_K(G))
    base = PhiComplex(koszul_K(structure_sheaf(fan))) if isinstance(F, EquivariantLineBundle) else None
    simple = PhiComplex(sheaf_dual(dual_locally_free(G)))
    cousin = CousinComplex(target)
    aug = omega_resolution_complex(fan)
    pts = [tuple(m) for m in window]
    out = []
    for chart in charts or fan.max_cones:
        conc, twist, terms, exact = [], [], [], []
        for m in pts:
            ec = pkp.evaluate(chart, m)
            h = ec.cohomology()
            want = target.stalk(chart).piece_dim(m)
            got = {k: x for k, x in zip(ec.degrees, h) if x}
            if got != ({-n: want} if want else {}):
                conc.append({"cone": list(chart), "degree": list(m), "expected_top": want,
                             "cohomology": h, "complex": ec.to_json()})
            if base is not None:
                b = base.evaluate(chart, vsub(m, F.char(chart)))
                if ec.dims != b.dims or ec.maps != b.maps:
                    twist.append({"cone": list(chart), "degree": list(m),
                                  "twisted": ec.to_json(), "untwisted": b.to_json()})
            a, c = simple.term_dims(chart, m), cousin.term_dims(chart, m)
            if any(a.get(k, 0) != c.get(k, 0) for k in set(a) | set(c)):
                terms.append({"cone": list(chart), "degree": list(m),
                              "phi_terms": [[k, a[k]] for k in sorted(a)],
                              "cousin_terms": [[k, c[k]] for k in sorted(c)]})
            else:
                hs = [x for x in simple.evaluate(chart, m).cohomology() if x]
                if hs != [x for x in h if x]:
                    terms.append({"cone": list(chart), "degree": list(m),
                                  "phi_cohomology": hs, "phiK_cohomology": h})
            e = aug.evaluate(chart, m)
            if not e.is_exact():
                exact.append({"cone": list(chart), "degree": list(m), "complex": e.to_json()})
        out.append(check_entry("serre-concentration", chart, conc, len(pts)))
        if base is not None:
            out.append(check_entry("twist-comparison", chart, twist, len(pts)))
        out.append(check_entry("cousin-termwise", chart, terms, len(pts)))
        out.append(check_entry("omega-resolution-exact", chart, exact, len(pts)))
    return out


def cousin_check(G: SheafOfModules, window, charts: Optional[Sequence[Cone]] = None) -> List[dict]:
    """Augmented Cousin exactness per chart, and per face of the chart the
    Cech computation of local cohomology along its orbit: concentrated in the
    orbit codimension and equal to the Cousin term."""
    fan = G.fan
    cz = CousinComplex(G, augmented=True)
    pts = [tuple(m) for m in window]
    out = []
    owner = {t: next(c for c in fan.max_cones if set(t) <= set(c)) for t in fan.cones}
    for chart in charts or fan.max_cones:
        fails = []
        for m in pts:
            ec = cz.evaluate(chart, m)
            if not ec.is_exact():
                fails.append({"cone": list(chart), "degree": list(m), "complex": ec.to_json()})
        out.append(check_entry("cousin-exact", chart, fails, len(pts)))
        for tau in fan.faces(chart):
            if owner[tau] != chart:
                continue
            gens = G.stalk(tau).gen_degrees
            fails = []
            for m in pts:
                h = cech_local_cohomology(fan, tau, gens, m)
                want = len(cz._active(tau, m))
                if any(x for j, x in enumerate(h) if j != len(tau)) or h[len(tau)] != want:
                    fails.append({"cone": list(tau), "degree": list(m), "cech": h, "cousin_term": want})
            out.append(check_entry("orbit-local-cohomology", tau, fails, len(pts)))
    return out
