"""Sheaves of graded modules on the finite space of a fan, and their duals.

The open sets of the fan are the face-closed sets of cones; the basic open
around a cone is its set of faces.  A sheaf is a stalk module per cone plus
restriction morphisms along facet pairs; longer restrictions are composites.

Cosheaves are never built element by element: every cosheaf in scope is the
graded dual of a finitely generated sheaf (its predual), and is evaluated by
transposing the predual at the negated degree.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import linalg
from .errors import (ConeMismatch, FlavorMismatch, InvalidMorphism, NotAComplex,
                     NotLocallyClosed, ResolutionTooLong)
from .fan import Cone, Fan, FanMorphism, Vec, vadd, vneg, vsub
from .homology import EvaluatedComplex, dual_complex
from .linalg import Matrix
from .modules import (FgGradedModule, ModuleMorphism, base_change, compose,
                      delta_extension, evaluate_linear, evaluate_morphism, free_module,
                      identity_morphism, kernel_presentation, presented, zero_module)
from .stalks import StalkAlgebra


def _subset(a: Cone, b: Cone) -> bool:
    return set(a).issubset(b)


class SheafOfModules:
    """Stalks per cone and restriction morphisms for facet pairs.

    Missing stalks are zero and missing facet restrictions are zero maps.
    """

    def __init__(self, fan: Fan, flavor: str = "A", stalks: Optional[Dict[Cone, FgGradedModule]] = None,
                 restrictions: Optional[Dict[Tuple[Cone, Cone], ModuleMorphism]] = None,
                 check: bool = True):
        self.fan = fan
        self.flavor = flavor
        self._stalks: Dict[Cone, FgGradedModule] = {}
        self._res: Dict[Tuple[Cone, Cone], ModuleMorphism] = {}
        self._composite: Dict[Tuple[Cone, Cone], ModuleMorphism] = {}
        for cone, mod in (stalks or {}).items():
            cone = tuple(sorted(cone))
            if cone not in fan.cones:
                raise ConeMismatch(f"{cone} is not a cone of the fan")
            if mod.alg != StalkAlgebra(fan, cone, flavor):
                raise ConeMismatch(f"stalk at {cone} lives over the wrong algebra")
            self._stalks[cone] = mod
        for (s, t), mor in (restrictions or {}).items():
            s, t = tuple(sorted(s)), tuple(sorted(t))
            if len(t) != len(s) - 1 or not _subset(t, s):
                # a non-facet restriction is accepted only as a consistency check
                self._composite[(s, t)] = mor
                continue
            if mor.source is not self.stalk(s) or mor.target is not self.stalk(t):
                mor = ModuleMorphism(self.stalk(s), self.stalk(t), mor.coeffs, mor.shift)
            self._res[(s, t)] = mor
        extra = dict(self._composite)
        self._composite = {}
        if check:
            self.check_sheaf_law()
            for (s, t), mor in extra.items():
                if not morphisms_equal(self.restriction(s, t), mor):
                    raise InvalidMorphism(f"given restriction {s}->{t} is not the composite")

    # -- data access -------------------------------------------------------
    def algebra(self, cone: Cone) -> StalkAlgebra:
        return StalkAlgebra(self.fan, cone, self.flavor)

    def stalk(self, cone: Cone) -> FgGradedModule:
        mod = self._stalks.get(cone)
        if mod is None:
            mod = zero_module(self.algebra(cone))
            self._stalks[cone] = mod
        return mod

    def support(self) -> List[Cone]:
        return [c for c in self.fan.cones if self.stalk(c).ngens]

    def restriction(self, sigma: Cone, tau: Cone) -> ModuleMorphism:
        if sigma == tau:
            return identity_morphism(self.stalk(sigma))
        if not _subset(tau, sigma):
            raise ConeMismatch(f"{tau} is not a face of {sigma}")
        key = (sigma, tau)
        mor = self._composite.get(key)
        if mor is None:
            if len(tau) == len(sigma) - 1:
                mor = self._facet_restriction(sigma, tau)
            else:
                r = next(x for x in sigma if x not in tau)
                mid = tuple(x for x in sigma if x != r)
                mor = compose(self.restriction(mid, tau), self.restriction(sigma, mid))
            self._composite[key] = mor
        return mor

    def _facet_restriction(self, sigma: Cone, tau: Cone) -> ModuleMorphism:
        mor = self._res.get((sigma, tau))
        if mor is None:
            src, tgt = self.stalk(sigma), self.stalk(tau)
            mor = ModuleMorphism(src, tgt, linalg.zeros(tgt.ngens, src.ngens), check=False)
            self._res[(sigma, tau)] = mor
        return mor

    def piece_dim(self, cone: Cone, m: Sequence[int]) -> int:
        return self.stalk(cone).piece_dim(m)

    def site_degree(self, cone: Cone, m: Sequence[int]) -> Vec:
        """Grading-group image of a character m at a cone."""
        return self.algebra(cone).from_M(m)

    def job_degrees(self) -> List[Vec]:
        out = []
        for c in self.fan.cones:
            mod = self.stalk(c)
            if self.flavor == "A":
                out.extend(mod.gen_degrees)
                out.extend(mod.relations.col_degrees)
        return out

    def check_sheaf_law(self) -> None:
        """Both facet paths sigma > tau_i > xi agree for every codimension-2 face."""
        for sigma in self.fan.cones:
            if len(sigma) < 2:
                continue
            for i in range(len(sigma)):
                for j in range(i + 1, len(sigma)):
                    xi = tuple(x for k, x in enumerate(sigma) if k not in (i, j))
                    t1 = tuple(x for k, x in enumerate(sigma) if k != i)
                    t2 = tuple(x for k, x in enumerate(sigma) if k != j)
                    p1 = compose(self._facet_restriction(t1, xi), self._facet_restriction(sigma, t1))
                    p2 = compose(self._facet_restriction(t2, xi), self._facet_restriction(sigma, t2))
                    if not morphisms_equal(p1, p2):
                        raise InvalidMorphism(f"restrictions from {sigma} to {xi} do not commute")

    def __repr__(self):
        return f"SheafOfModules(support={self.support()})"


def morphisms_equal(f: ModuleMorphism, g: ModuleMorphism) -> bool:
    if f.source.ngens != g.source.ngens or f.target.ngens != g.target.ngens:
        return False
    for j in range(f.source.ngens):
        diff = [a[j] - b[j] for a, b in zip(f.coeffs, g.coeffs)]
        if any(diff) and any(f.target.piece(f.image_degree(j)).coords(diff)):
            return False
    return True


class SumOfOpens(SheafOfModules):
    """Finite direct sum of standard opens A(d)_[sigma], one per summand (sigma, d).

    For flavor B the summand degree lives in the grading group of its cone.
    """

    def __init__(self, fan: Fan, summands: Sequence[Tuple[Cone, Sequence[int]]], flavor: str = "A"):
        self.fan = fan
        self.flavor = flavor
        self.summands: List[Tuple[Cone, Vec]] = []
        for cone, d in summands:
            cone = tuple(sorted(cone))
            if cone not in fan.cones:
                raise ConeMismatch(f"{cone} is not a cone of the fan")
            StalkAlgebra(fan, cone, flavor).check(d)
            self.summands.append((cone, tuple(d)))
        self._stalks = {}
        self._res = {}
        self._composite = {}
        self._index: Dict[Cone, List[int]] = {}

    def index(self, rho: Cone) -> List[int]:
        """Summands whose open contains rho, i.e. generators of the stalk at rho."""
        idx = self._index.get(rho)
        if idx is None:
            idx = [i for i, (c, _) in enumerate(self.summands) if _subset(rho, c)]
            self._index[rho] = idx
        return idx

    def gen_degree(self, i: int, rho: Cone) -> Vec:
        cone, d = self.summands[i]
        return StalkAlgebra(self.fan, cone, self.flavor).restrict_degree(d, rho)

    def stalk(self, rho: Cone) -> FgGradedModule:
        mod = self._stalks.get(rho)
        if mod is None:
            mod = free_module(self.algebra(rho), [self.gen_degree(i, rho) for i in self.index(rho)])
            self._stalks[rho] = mod
        return mod

    def active(self, rho: Cone, m: Sequence[int]) -> List[int]:
        alg = self.algebra(rho)
        return [i for i in self.index(rho) if alg.contains(vsub(m, self.gen_degree(i, rho)))]

    def piece_dim(self, rho: Cone, m: Sequence[int]) -> int:
        return len(self.active(rho, m))

    def restriction(self, sigma: Cone, tau: Cone) -> ModuleMorphism:
        key = (sigma, tau)
        mor = self._composite.get(key)
        if mor is None:
            if not _subset(tau, sigma):
                raise ConeMismatch(f"{tau} is not a face of {sigma}")
            src, tgt = self.index(sigma), self.index(tau)
            pos = {s: k for k, s in enumerate(tgt)}
            coeffs = linalg.zeros(len(tgt), len(src))
            for j, s in enumerate(src):
                coeffs[pos[s]][j] = Fraction(1)
            mor = ModuleMorphism(self.stalk(sigma), self.stalk(tau), coeffs, check=False)
            self._composite[key] = mor
        return mor

    def _facet_restriction(self, sigma, tau):
        return self.restriction(sigma, tau)

    def check_sheaf_law(self) -> None:
        pass

    def job_degrees(self) -> List[Vec]:
        return [d for _, d in self.summands] if self.flavor == "A" else []

    def __repr__(self):
        return f"SumOfOpens({self.summands})"


# -- morphisms ---------------------------------------------------------------

class SheafMorphism:
    """Degree-0 morphism given by one module morphism per cone."""

    def __init__(self, source: SheafOfModules, target: SheafOfModules,
                 components: Dict[Cone, ModuleMorphism], check: bool = True):
        if source.fan is not target.fan or source.flavor != target.flavor:
            raise ConeMismatch("sheaf morphism between unrelated sheaves")
        self.source = source
        self.target = target
        self._components = dict(components)
        if check:
            self.check_naturality()

    def at(self, rho: Cone) -> ModuleMorphism:
        mor = self._components.get(rho)
        if mor is None:
            src, tgt = self.source.stalk(rho), self.target.stalk(rho)
            mor = ModuleMorphism(src, tgt, linalg.zeros(tgt.ngens, src.ngens), check=False)
            self._components[rho] = mor
        return mor

    def evaluate(self, rho: Cone, m: Sequence[int]) -> Matrix:
        return evaluate_morphism(self.at(rho), m)

    def check_naturality(self) -> None:
        fan = self.source.fan
        for sigma in fan.cones:
            for tau in fan.facets(sigma):
                a = compose(self.target.restriction(sigma, tau), self.at(sigma))
                b = compose(self.at(tau), self.source.restriction(sigma, tau))
                if not morphisms_equal(a, b):
                    raise InvalidMorphism(f"morphism does not commute with restriction {sigma}->{tau}")


class SumMorphism(SheafMorphism):
    """Morphism between sums of standard opens, given by a summand matrix.

    Entry (i, j) is the coefficient of target summand i in the image of the
    generator of source summand j.  It is allowed only if the source cone is a
    face of the target cone and the degree difference lies in the algebra of
    the source cone.
    """

    def __init__(self, source: SumOfOpens, target: SumOfOpens, matrix: Matrix, check: bool = True):
        if source.fan is not target.fan or source.flavor != target.flavor:
            raise ConeMismatch("sheaf morphism between unrelated sheaves")
        self.source = source
        self.target = target
        self.matrix = [[Fraction(x) for x in row] for row in matrix]
        if len(self.matrix) != len(target.summands) or any(len(r) != len(source.summands) for r in self.matrix):
            raise ValueError("summand matrix has the wrong shape")
        self._components = {}
        self._nz = [[i for i in range(len(target.summands)) if self.matrix[i][j]]
                    for j in range(len(source.summands))]
        if check:
            for j, (tau, d) in enumerate(source.summands):
                alg = StalkAlgebra(source.fan, tau, source.flavor)
                for i in self._nz[j]:
                    sigma, e = target.summands[i]
                    if not _subset(tau, sigma):
                        raise InvalidMorphism(f"summand on {tau} cannot map to the open of {sigma}")
                    if not alg.contains(vsub(d, target.gen_degree(i, tau))):
                        raise InvalidMorphism(f"entry ({i},{j}) violates the degree law")

    def at(self, rho: Cone) -> ModuleMorphism:
        mor = self._components.get(rho)
        if mor is None:
            src, tgt = self.source.index(rho), self.target.index(rho)
            coeffs = [[self.matrix[i][j] for j in src] for i in tgt]
            mor = ModuleMorphism(self.source.stalk(rho), self.target.stalk(rho), coeffs, check=False)
            self._components[rho] = mor
        return mor

    def evaluate(self, rho: Cone, m: Sequence[int]) -> Matrix:
        src = self.source.active(rho, m)
        tgt = self.target.active(rho, m)
        return [[self.matrix[i][j] for j in src] for i in tgt]

    def check_naturality(self) -> None:
        pass


def morphism_from_generators(source: SumOfOpens, target: SheafOfModules,
                             images: Sequence[Sequence[Fraction]]) -> SheafMorphism:
    """The morphism sending the generator of summand j to ``images[j]``.

    ``images[j]`` is a vector over the generators of the target stalk at the
    summand's cone; at smaller cones the image is transported by restriction.
    """
    comps: Dict[Cone, ModuleMorphism] = {}
    for rho in source.fan.cones:
        idx = source.index(rho)
        tgt = target.stalk(rho)
        coeffs = linalg.zeros(tgt.ngens, len(idx))
        for k, j in enumerate(idx):
            cone, _ = source.summands[j]
            res = target.restriction(cone, rho)
            v = images[j]
            for i in range(tgt.ngens):
                coeffs[i][k] = sum((res.coeffs[i][l] * v[l] for l in range(len(v))), Fraction(0))
        comps[rho] = ModuleMorphism(source.stalk(rho), tgt, coeffs, check=False)
    return SheafMorphism(source, target, comps, check=False)


# -- complexes ---------------------------------------------------------------

class SheafComplex:
    """Terms indexed by cohomological degree; ``diffs[k]`` maps term k to term k+1."""

    def __init__(self, fan: Fan, terms: Dict[int, SheafOfModules],
                 diffs: Optional[Dict[int, SheafMorphism]] = None, flavor: str = "A"):
        self.fan = fan
        self.flavor = flavor
        self.terms = dict(terms)
        self.diffs = dict(diffs or {})
        for k, d in self.diffs.items():
            if d.source is not self.terms.get(k) or d.target is not self.terms.get(k + 1):
                raise NotAComplex(f"differential {k} does not connect terms {k} and {k + 1}")

    @property
    def lo(self) -> int:
        return min(self.terms) if self.terms else 0

    @property
    def hi(self) -> int:
        return max(self.terms) if self.terms else -1

    def term(self, k: int) -> Optional[SheafOfModules]:
        return self.terms.get(k)

    def evaluate(self, rho: Cone, m: Sequence[int]) -> EvaluatedComplex:
        if not self.terms:
            return EvaluatedComplex(0, [], [])
        dims = []
        for k in range(self.lo, self.hi + 1):
            t = self.terms.get(k)
            dims.append(t.piece_dim(rho, m) if t is not None else 0)
        maps = []
        for k in range(self.lo, self.hi):
            d = self.diffs.get(k)
            i = k - self.lo
            maps.append(d.evaluate(rho, m) if d is not None else linalg.zeros(dims[i + 1], dims[i]))
        return EvaluatedComplex(self.lo, dims, maps)

    def job_degrees(self) -> List[Vec]:
        out = []
        for t in self.terms.values():
            out.extend(t.job_degrees())
        return out


def single_term(sheaf: SheafOfModules, degree: int = 0) -> SheafComplex:
    return SheafComplex(sheaf.fan, {degree: sheaf}, {}, sheaf.flavor)


class CoSheafComplex:
    """Formal graded dual of a sheaf complex: C^k = (P^-k)^v.

    The costalk of C^k at rho in degree m is dual to the stalk of P^-k at rho in
    degree -m; corestrictions are transposed restrictions.
    """

    def __init__(self, predual: SheafComplex):
        self.predual = predual
        self.fan = predual.fan
        self.flavor = predual.flavor

    @property
    def lo(self) -> int:
        return -self.predual.hi

    @property
    def hi(self) -> int:
        return -self.predual.lo

    def evaluate(self, rho: Cone, m: Sequence[int]) -> EvaluatedComplex:
        return dual_complex(self.predual.evaluate(rho, vneg(m)))

    def piece_dim(self, k: int, rho: Cone, m: Sequence[int]) -> int:
        t = self.predual.term(-k)
        return t.piece_dim(rho, vneg(m)) if t is not None else 0

    def corestriction(self, k: int, tau: Cone, sigma: Cone, m: Sequence[int]) -> Matrix:
        """beta: C^k_tau -> C^k_sigma at degree m, for tau a face of sigma."""
        t = self.predual.term(-k)
        res = t.restriction(sigma, tau)
        alg = t.algebra(sigma)
        mat = evaluate_morphism(res, vneg(m))
        return linalg.transpose(mat, t.piece_dim(sigma, vneg(m)))

    def differential(self, k: int, rho: Cone, m: Sequence[int]) -> Matrix:
        """d: C^k -> C^(k+1) at costalk rho in degree m."""
        d = self.predual.diffs.get(-k - 1)
        src = self.predual.term(-k - 1)
        n = src.piece_dim(rho, vneg(m)) if src is not None else 0
        if d is None:
            return linalg.zeros(n, self.piece_dim(k, rho, m))
        return linalg.transpose(d.evaluate(rho, vneg(m)), n)


class CoSheafTcf(CoSheafComplex):
    """A single torsion-cofinite cosheaf, the dual of ``predual_sheaf``."""

    def __init__(self, predual_sheaf: SheafOfModules):
        super().__init__(single_term(predual_sheaf))
        self.predual_sheaf = predual_sheaf

    def costalk_dim(self, rho: Cone, m: Sequence[int]) -> int:
        return self.predual_sheaf.piece_dim(rho, vneg(m))


def sheaf_dual(F) -> CoSheafComplex:
    if isinstance(F, SheafComplex):
        return CoSheafComplex(F)
    return CoSheafTcf(F)


def cosheaf_dual(C: CoSheafComplex):
    if isinstance(C, CoSheafTcf):
        return C.predual_sheaf
    return C.predual


# -- standard objects ----------------------------------------------------------

def standard_open(fan: Fan, sigma: Cone, m: Sequence[int], flavor: str = "A") -> SumOfOpens:
    """A(m)_[sigma]: A_tau(m) at every face tau of sigma, inclusions as restrictions."""
    return SumOfOpens(fan, [(tuple(sorted(sigma)), tuple(m))], flavor)


def standard_point(fan: Fan, sigma: Cone, m: Sequence[int], flavor: str = "A") -> SheafOfModules:
    """A(m)_{sigma}: the single stalk A_sigma(m) at sigma."""
    sigma = tuple(sorted(sigma))
    alg = StalkAlgebra(fan, sigma, flavor)
    return SheafOfModules(fan, flavor, {sigma: free_module(alg, [tuple(m)])})


def structure_sheaf(fan: Fan, flavor: str = "A") -> SheafOfModules:
    """A_Sigma itself: the free rank-one stalk in degree 0 everywhere."""
    stalks = {c: free_module(StalkAlgebra(fan, c, flavor), [StalkAlgebra(fan, c, flavor).zero()])
              for c in fan.cones}
    res = {(s, t): ModuleMorphism(stalks[s], stalks[t], [[1]], check=False)
           for s in fan.cones for t in fan.facets(s)}
    return SheafOfModules(fan, flavor, stalks, res, check=False)


def direct_sum_sheaves(sheaves: Sequence[SheafOfModules]) -> SheafOfModules:
    from .modules import direct_sum
    fan, flavor = sheaves[0].fan, sheaves[0].flavor
    stalks = {c: direct_sum([F.stalk(c) for F in sheaves]) for c in fan.cones}
    res = {}
    for s in fan.cones:
        for t in fan.facets(s):
            blocks = [F.restriction(s, t).coeffs for F in sheaves]
            res[(s, t)] = ModuleMorphism(stalks[s], stalks[t], _block_diag(blocks, sheaves, s, t), check=False)
    return SheafOfModules(fan, flavor, stalks, res, check=False)


def _block_diag(blocks, sheaves, s, t) -> Matrix:
    rows = sum(F.stalk(t).ngens for F in sheaves)
    cols = sum(F.stalk(s).ngens for F in sheaves)
    out = linalg.zeros(rows, cols)
    r0 = c0 = 0
    for F, b in zip(sheaves, blocks):
        nr, nc = F.stalk(t).ngens, F.stalk(s).ngens
        for i in range(nr):
            for j in range(nc):
                out[r0 + i][c0 + j] = b[i][j]
        r0 += nr
        c0 += nc
    return out


def twist_sheaf(F: SheafOfModules, m: Sequence[int]) -> SheafOfModules:
    if isinstance(F, SumOfOpens):
        return SumOfOpens(F.fan, [(c, vadd(d, m)) for c, d in F.summands], F.flavor)
    stalks = {c: F.stalk(c).twist(F.site_degree(c, m)) for c in F.fan.cones}
    res = {(s, t): ModuleMorphism(stalks[s], stalks[t], F.restriction(s, t).coeffs, check=False)
           for s in F.fan.cones for t in F.fan.facets(s)}
    return SheafOfModules(F.fan, F.flavor, stalks, res, check=False)


# -- Hom and sections --------------------------------------------------------

def _mult_matrix(mod: FgGradedModule, d_from: Vec, d_to: Vec) -> Matrix:
    ident = linalg.identity(mod.ngens)
    return evaluate_linear(ident, mod.piece(d_from), mod.piece(d_to))


def hom_pieces(F: SheafOfModules, G: SheafOfModules, m: Sequence[int]) -> int:
    """dim of degree-m homomorphisms F -> G (generators of F_sigma of degree g go to G_sigma at g + m)."""
    if F.fan is not G.fan or F.flavor != G.flavor:
        raise ConeMismatch("Hom between sheaves on different fans")
    fan = F.fan
    blocks: Dict[Tuple[Cone, int], Tuple[int, int, Vec]] = {}   # -> (offset, size, degree)
    total = 0
    for c in fan.cones:
        shift = F.site_degree(c, m)
        Fs, Gs = F.stalk(c), G.stalk(c)
        for i, g in enumerate(Fs.gen_degrees):
            d = vadd(g, shift)
            size = Gs.piece_dim(d)
            blocks[(c, i)] = (total, size, d)
            total += size
    rows: List[List[Fraction]] = []

    def add_rows(mat_blocks):
        # mat_blocks: list of (block key, matrix with common row count)
        nrows = len(mat_blocks[0][1]) if mat_blocks else 0
        for r in range(nrows):
            row = [Fraction(0)] * total
            for key, mat in mat_blocks:
                off, size, _ = blocks[key]
                for k in range(size):
                    row[off + k] += mat[r][k]
            if any(row):
                rows.append(row)

    for c in fan.cones:
        Fs, Gs = F.stalk(c), G.stalk(c)
        shift = F.site_degree(c, m)
        # relations of F_c must map to zero
        for j, cd in enumerate(Fs.relations.col_degrees):
            target = vadd(cd, shift)
            parts = []
            for i in range(Fs.ngens):
                x = Fs.relations.coeffs[i][j]
                if x:
                    _, _, d = blocks[(c, i)]
                    mult = _mult_matrix(Gs, d, target)
                    parts.append(((c, i), [[x * v for v in row] for row in mult]))
            if parts:
                add_rows(parts)
        # naturality along facets
        for t in fan.facets(c):
            Ft, Gt = F.stalk(t), G.stalk(t)
            rG = G.restriction(c, t)
            rF = F.restriction(c, t)
            alg_c = F.algebra(c)
            for i in range(Fs.ngens):
                _, _, d = blocks[(c, i)]
                dt = alg_c.restrict_degree(d, t)
                if Gt.piece_dim(dt) == 0:
                    continue
                parts = [((c, i), evaluate_morphism(rG, d))]
                for l in range(Ft.ngens):
                    x = rF.coeffs[l][i]
                    if x:
                        _, _, dl = blocks[(t, l)]
                        mult = _mult_matrix(Gt, dl, dt)
                        parts.append(((t, l), [[-x * v for v in row] for row in mult]))
                add_rows(parts)
    return total - (linalg.rank(rows) if rows else 0)


def sections_dim(F: SheafOfModules, opens: Iterable[Cone], m: Sequence[int]) -> int:
    """dim of degree-m sections over a face-closed set of cones (an equalizer)."""
    U = [c for c in F.fan.cones if c in set(opens)]
    offs: Dict[Cone, Tuple[int, int]] = {}
    total = 0
    for c in U:
        n = F.piece_dim(c, F.site_degree(c, m))
        offs[c] = (total, n)
        total += n
    rows = []
    Uset = set(U)
    for c in U:
        for t in F.fan.facets(c):
            if t not in Uset:
                continue
            oc, nc = offs[c]
            ot, nt = offs[t]
            mat = evaluate_morphism(F.restriction(c, t), F.site_degree(c, m))
            for r in range(nt):
                row = [Fraction(0)] * total
                for k in range(nc):
                    row[oc + k] = mat[r][k]
                row[ot + r] -= 1
                rows.append(row)
    return total - (linalg.rank(rows) if rows else 0)


def global_sections_dim(F: SheafOfModules, m: Sequence[int]) -> int:
    return sections_dim(F, F.fan.cones, m)


# -- locally closed subsets ----------------------------------------------------

def open_hull(fan: Fan, cones: Iterable[Cone]) -> set:
    out = set()
    for c in cones:
        out.update(fan.faces(c))
    return out


def is_open(fan: Fan, cones: Iterable[Cone]) -> bool:
    s = set(cones)
    return all(f in s for c in s for f in fan.faces(c))


def extension_by_zero(F: SheafOfModules, Z: Iterable[Cone]) -> SheafOfModules:
    fan = F.fan
    Z = {tuple(sorted(c)) for c in Z}
    if not Z.issubset(fan.cones):
        raise ConeMismatch("subset contains cones outside the fan")
    hull = open_hull(fan, Z)
    if not is_open(fan, hull - Z):
        raise NotLocallyClosed("subset is not a difference of two open sets")
    stalks = {c: F.stalk(c) for c in Z}
    res = {}
    for s in Z:
        for t in fan.facets(s):
            if t in Z:
                res[(s, t)] = F.restriction(s, t)
    return SheafOfModules(fan, F.flavor, stalks, res, check=False)


def zero_extension_sequence(F: SheafOfModules, U: Iterable[Cone]):
    """0 -> F_U -> F -> F_Z -> 0 for an open U and its closed complement Z."""
    fan = F.fan
    U = {tuple(sorted(c)) for c in U}
    if not is_open(fan, U):
        raise NotLocallyClosed("U must be open")
    Z = set(fan.cones) - U
    FU, FZ = extension_by_zero(F, U), extension_by_zero(F, Z)
    inc = {c: ModuleMorphism(FU.stalk(c), F.stalk(c), linalg.identity(F.stalk(c).ngens), check=False)
           for c in U}
    proj = {c: ModuleMorphism(F.stalk(c), FZ.stalk(c), linalg.identity(F.stalk(c).ngens), check=False)
            for c in Z}
    a = SheafMorphism(FU, F, inc, check=False)
    b = SheafMorphism(F, FZ, proj, check=False)
    return SheafComplex(fan, {-1: FU, 0: F, 1: FZ}, {-1: a, 0: b}, F.flavor)


# -- projective resolutions ----------------------------------------------------

def _in_image(piece, vectors: List[List[Fraction]], target: List[Fraction]) -> bool:
    t = piece.coords(target)
    if not any(t):
        return True
    span = [piece.coords(v) for v in vectors]
    span = [v for v in span if any(v)]
    if not span:
        return False
    return linalg.rank(span + [t]) == linalg.rank(span)


def projective_cover(F: SheafOfModules) -> Tuple[SumOfOpens, SheafMorphism]:
    """Sum of standard opens surjecting onto F, chosen greedily from the top cones down."""
    fan = F.fan
    chosen: List[Tuple[Cone, Vec, List[Fraction]]] = []
    for sigma in sorted(fan.cones, key=lambda c: (-len(c), c)):
        mod = F.stalk(sigma)
        alg = F.algebra(sigma)
        for j, g in enumerate(mod.gen_degrees):
            vecs = []
            for cone, d, v in chosen:
                if not _subset(sigma, cone):
                    continue
                dd = F.algebra(cone).restrict_degree(d, sigma)
                if not alg.contains(vsub(g, dd)):
                    continue
                res = F.restriction(cone, sigma)
                vecs.append([sum((res.coeffs[i][l] * v[l] for l in range(len(v))), Fraction(0))
                             for i in range(mod.ngens)])
            e = [Fraction(int(i == j)) for i in range(mod.ngens)]
            if not _in_image(mod.piece(g), vecs, e):
                chosen.append((sigma, g, e))
    P = SumOfOpens(fan, [(c, d) for c, d, _ in chosen], F.flavor)
    return P, morphism_from_generators(P, F, [v for _, _, v in chosen])


def kernel_sheaf(eps: SheafMorphism) -> Tuple[SheafOfModules, Dict[Cone, ModuleMorphism]]:
    """Stalkwise kernels of a morphism out of a sum of standard opens."""
    P = eps.source
    fan = P.fan
    kers: Dict[Cone, FgGradedModule] = {}
    incl: Dict[Cone, ModuleMorphism] = {}
    for rho in fan.cones:
        kers[rho], incl[rho] = kernel_presentation(eps.at(rho))
    res = {}
    for s in fan.cones:
        for t in fan.facets(s):
            Ks, Kt = kers[s], kers[t]
            rP = P.restriction(s, t)
            coeffs = linalg.zeros(Kt.ngens, Ks.ngens)
            alg_s = P.algebra(s)
            alg_t = P.algebra(t)
            for k in range(Ks.ngens):
                v = [row[k] for row in incl[s].coeffs]
                w = [sum((rP.coeffs[i][l] * v[l] for l in range(len(v))), Fraction(0))
                     for i in range(P.stalk(t).ngens)]
                if not any(w):
                    continue
                deg = alg_s.restrict_degree(Ks.gen_degrees[k], t)
                act = P.stalk(t).active(deg)
                cols = [l for l in range(Kt.ngens) if alg_t.contains(vsub(deg, Kt.gen_degrees[l]))]
                mat = [[incl[t].coeffs[a][l] for l in cols] for a in act]
                sol = linalg.solve(mat, [w[a] for a in act], len(cols))
                if sol is None:
                    raise InvalidMorphism("kernel restriction failed to factor")
                for x, l in zip(sol, cols):
                    coeffs[l][k] = x
            res[(s, t)] = ModuleMorphism(Ks, Kt, coeffs, check=False)
    return SheafOfModules(fan, P.flavor, kers, res, check=False), incl


def projective_resolution(F: SheafOfModules, max_length: int = 12) -> Tuple[SheafComplex, SheafMorphism]:
    """P_k in degree -k, each a sum of standard opens, with augmentation P_0 -> F."""
    fan = F.fan
    P0, eps0 = projective_cover(F)
    terms: Dict[int, SheafOfModules] = {0: P0}
    diffs: Dict[int, SheafMorphism] = {}
    prev, eps = P0, eps0
    k = 0
    while True:
        K, incl = kernel_sheaf(eps)
        if not any(K.stalk(c).ngens for c in fan.cones):
            break
        k += 1
        if k > max_length:
            raise ResolutionTooLong(f"resolution exceeds length {max_length}")
        P, cover = projective_cover(K)
        mat = linalg.zeros(len(prev.summands), len(P.summands))
        for j, (cone, _) in enumerate(P.summands):
            u = [row[P.index(cone).index(j)] for row in cover.at(cone).coeffs]
            v = [sum((incl[cone].coeffs[a][l] * u[l] for l in range(len(u))), Fraction(0))
                 for a in range(prev.stalk(cone).ngens)]
            for a, i in enumerate(prev.index(cone)):
                mat[i][j] = v[a]
        diffs[-k] = SumMorphism(P, prev, mat)
        terms[-k] = P
        prev, eps = P, cover
    return SheafComplex(fan, terms, diffs, F.flavor), eps0


def augmented_resolution(F: SheafOfModules, max_length: int = 12) -> SheafComplex:
    res, eps = projective_resolution(F, max_length)
    terms = dict(res.terms)
    diffs = dict(res.diffs)
    terms[1] = F
    diffs[0] = eps
    return SheafComplex(F.fan, terms, diffs, F.flavor)


# -- coherence -------------------------------------------------------------------

def is_coherent(F: SheafOfModules) -> bool:
    """Every structure map A_tau (x) F_sigma -> F_tau is an isomorphism."""
    from .modules import image_membership
    fan = F.fan
    for s in fan.cones:
        for t in fan.facets(s):
            src = base_change(F.stalk(s), F.algebra(t))
            tgt = F.stalk(t)
            phi = ModuleMorphism(src, tgt, F.restriction(s, t).coeffs, check=False)
            for i, g in enumerate(tgt.gen_degrees):
                e = [Fraction(int(k == i)) for k in range(tgt.ngens)]
                if not image_membership(phi, g, e):
                    return False
            K, _ = kernel_presentation(phi)
            if any(K.piece_dim(d) for d in K.gen_degrees):
                return False
    return True


def is_locally_free(F: SheafOfModules) -> bool:
    return all(F.stalk(c).is_free for c in F.fan.cones) and is_coherent(F)


def delta_sheaf(F: SheafOfModules) -> SheafOfModules:
    """delta^*: extension of scalars A_Sigma -> B_Sigma, cone by cone."""
    if F.flavor != "A":
        raise FlavorMismatch("delta_sheaf expects an A-flavor sheaf")
    if isinstance(F, SumOfOpens):
        return SumOfOpens(F.fan, [(c, F.algebra(c).bcoords(d)) for c, d in F.summands], "B")
    stalks = {c: delta_extension(F.stalk(c)) for c in F.fan.cones}
    res = {(s, t): ModuleMorphism(stalks[s], stalks[t], F.restriction(s, t).coeffs, check=False)
           for s in F.fan.cones for t in F.fan.facets(s)}
    return SheafOfModules(F.fan, "B", stalks, res, check=False)


def delta_morphism_sheaf(phi: SheafMorphism, source: SheafOfModules, target: SheafOfModules) -> SheafMorphism:
    if isinstance(phi, SumMorphism):
        return SumMorphism(source, target, phi.matrix, check=False)
    comps = {c: ModuleMorphism(source.stalk(c), target.stalk(c), phi.at(c).coeffs, check=False)
             for c in phi.source.fan.cones}
    return SheafMorphism(source, target, comps, check=False)


def delta_complex(N: SheafComplex) -> SheafComplex:
    terms = {k: delta_sheaf(t) for k, t in N.terms.items()}
    diffs = {k: delta_morphism_sheaf(d, terms[k], terms[k + 1]) for k, d in N.diffs.items()}
    return SheafComplex(N.fan, terms, diffs, "B")


# -- fan morphisms -----------------------------------------------------------------

def pullback(f: FanMorphism, F: SheafOfModules) -> SheafOfModules:
    """f^*: stalk at tau is the base change of F at f(tau)."""
    src = f.source
    stalks, res = {}, {}
    for tau in src.cones:
        sigma = f.cone_image[tau]
        alg = StalkAlgebra(src, tau, F.flavor)
        if F.flavor == "A":
            dmap = f.pull_character
        else:
            coeffs = f.ray_coefficients(tau)
            dmap = (lambda c: (lambda beta: tuple(sum(row[j] * beta[j] for j in range(len(beta)))
                                                   for row in c)))(coeffs)
        stalks[tau] = base_change(F.stalk(sigma), alg, dmap)
    for s in src.cones:
        for t in src.facets(s):
            fs, ft = f.cone_image[s], f.cone_image[t]
            coeffs = F.restriction(fs, ft).coeffs if fs != ft else linalg.identity(F.stalk(fs).ngens)
            res[(s, t)] = ModuleMorphism(stalks[s], stalks[t], coeffs, check=False)
    return SheafOfModules(src, F.flavor, stalks, res, check=False)


class Pushforward:
    """f_* computed degreewise: sections over the preimage of each basic open.

    Pieces stay indexed by the source character lattice.
    """

    def __init__(self, f: FanMorphism, F: SheafOfModules):
        self.f = f
        self.F = F

    def preimage(self, sigma: Cone) -> List[Cone]:
        return [t for t in self.f.source.cones if _subset(self.f.cone_image[t], sigma)]

    def piece_dim(self, sigma: Cone, m: Sequence[int]) -> int:
        return sections_dim(self.F, self.preimage(sigma), m)


def pushforward(f: FanMorphism, F: SheafOfModules) -> Pushforward:
    return Pushforward(f, F)
