"""Finitely generated graded modules over a stalk algebra.

A module is presented by generator degrees and a relation matrix whose entries
are scalar multiples of characters.  Since each homogeneous piece of the
algebra has dimension <= 1, an entry's character is forced by the row and
column degrees, so only the scalar coefficients are stored.  Everything is
evaluated one degree at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import linalg
from .errors import ConeMismatch, FlavorMismatch, InvalidMorphism
from .fan import Vec, vadd, vneg, vsub
from .linalg import Matrix, Reducer
from .stalks import StalkAlgebra


@dataclass(frozen=True)
class ScaledCharacter:
    coeff: Fraction
    degree: Vec


@dataclass(eq=False)
class HomogeneousMatrix:
    """Rows indexed by ``row_degrees``, columns by ``col_degrees``.

    Entry (i, j) stands for ``coeffs[i][j] * chi^(col_degrees[j] - row_degrees[i])``.
    """

    row_degrees: Tuple[Vec, ...]
    col_degrees: Tuple[Vec, ...]
    coeffs: Matrix

    def __post_init__(self):
        self.row_degrees = tuple(tuple(d) for d in self.row_degrees)
        self.col_degrees = tuple(tuple(d) for d in self.col_degrees)
        self.coeffs = [[Fraction(x) for x in row] for row in self.coeffs]
        if len(self.coeffs) != len(self.row_degrees):
            raise ValueError("coefficient rows do not match row degrees")
        if any(len(row) != len(self.col_degrees) for row in self.coeffs):
            raise ValueError("coefficient columns do not match column degrees")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_degrees), len(self.col_degrees)

    def entry(self, i: int, j: int) -> Optional[ScaledCharacter]:
        c = self.coeffs[i][j]
        if not c:
            return None
        return ScaledCharacter(c, vsub(self.col_degrees[j], self.row_degrees[i]))

    def column(self, j: int) -> List[Fraction]:
        return [row[j] for row in self.coeffs]

    def validate(self, alg: StalkAlgebra) -> None:
        for i, j in self.nonzero():
            d = vsub(self.col_degrees[j], self.row_degrees[i])
            if not alg.contains(d):
                raise InvalidMorphism(f"entry ({i},{j}) has degree {d} outside the algebra of {alg.cone}")

    def nonzero(self):
        for i, row in enumerate(self.coeffs):
            for j, c in enumerate(row):
                if c:
                    yield i, j


class Piece:
    """The degree-m piece of a presented module: Q^active / span(active relations)."""

    __slots__ = ("degree", "active", "reducer")

    def __init__(self, degree: Vec, active: Tuple[int, ...], reducer: Reducer):
        self.degree = degree
        self.active = active
        self.reducer = reducer

    @property
    def dim(self) -> int:
        return self.reducer.dim

    def basis_generators(self) -> List[int]:
        """Generator index whose monomial multiple is the i-th basis vector."""
        return [self.active[k] for k in self.reducer.free]

    @property
    def basis(self) -> Matrix:
        """Basis vectors as coefficient vectors over the active generators."""
        n = len(self.active)
        out = []
        for k in self.reducer.free:
            v = [Fraction(0)] * n
            v[k] = Fraction(1)
            out.append(v)
        return out

    def coords(self, full: Sequence[Fraction], where: str = "") -> List[Fraction]:
        """Quotient coordinates of a vector indexed by all generators."""
        act = set(self.active)
        for g, x in enumerate(full):
            if x and g not in act:
                raise InvalidMorphism(f"nonzero component on inactive generator {g} at {self.degree}{where}")
        return self.reducer.coords([full[g] for g in self.active])


@dataclass(eq=False)
class FgGradedModule:
    """Finitely generated graded module over ``alg`` given by a presentation."""

    alg: StalkAlgebra
    gen_degrees: Tuple[Vec, ...]
    relations: HomogeneousMatrix
    _pieces: Dict[Vec, Piece] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.gen_degrees = tuple(tuple(d) for d in self.gen_degrees)
        for d in self.gen_degrees:
            self.alg.check(d)
        if self.relations.row_degrees != self.gen_degrees:
            raise ValueError("relation rows must be indexed by the generators")
        self.relations.validate(self.alg)

    @property
    def cone(self):
        return self.alg.cone

    @property
    def flavor(self) -> str:
        return self.alg.flavor

    @property
    def ngens(self) -> int:
        return len(self.gen_degrees)

    @property
    def is_free(self) -> bool:
        return self.relations.shape[1] == 0

    def is_zero_presentation(self) -> bool:
        return self.ngens == 0

    def active(self, m: Vec) -> Tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.gen_degrees) if self.alg.contains(vsub(m, g)))

    def piece(self, m: Sequence[int]) -> Piece:
        m = tuple(m)
        p = self._pieces.get(m)
        if p is None:
            self.alg.check(m)
            active = self.active(m)
            rels = []
            if self.relations.col_degrees and active:
                pos = {g: k for k, g in enumerate(active)}
                for j, c in enumerate(self.relations.col_degrees):
                    if self.alg.contains(vsub(m, c)):
                        col = [Fraction(0)] * len(active)
                        for i in range(self.ngens):
                            x = self.relations.coeffs[i][j]
                            if x:
                                col[pos[i]] = x
                        rels.append(col)
            p = Piece(m, active, Reducer(rels, len(active)))
            self._pieces[m] = p
        return p

    def piece_dim(self, m: Sequence[int]) -> int:
        return self.piece(m).dim

    def twist(self, m: Sequence[int]) -> "FgGradedModule":
        """F(m): every degree moved by +m (so A(0) twisted by m is A(m))."""
        gens = [vadd(g, m) for g in self.gen_degrees]
        cols = [vadd(c, m) for c in self.relations.col_degrees]
        return FgGradedModule(self.alg, gens, HomogeneousMatrix(gens, cols, self.relations.coeffs))


def presented(alg: StalkAlgebra, gens: Sequence[Sequence[int]],
              relations: Sequence[Tuple[Sequence[int], Sequence]] = ()) -> FgGradedModule:
    """Module from generator degrees and relation columns ``(degree, coeff vector)``."""
    gens = [tuple(g) for g in gens]
    cols = [tuple(d) for d, _ in relations]
    coeffs = [[Fraction(vec[i]) for _, vec in relations] for i in range(len(gens))]
    return FgGradedModule(alg, gens, HomogeneousMatrix(gens, cols, coeffs))


def free_module(alg: StalkAlgebra, degrees: Sequence[Sequence[int]]) -> FgGradedModule:
    """Direct sum of A(d) for d in ``degrees``; A(d) is generated in degree d."""
    return presented(alg, degrees)


def zero_module(alg: StalkAlgebra) -> FgGradedModule:
    return presented(alg, [])


def direct_sum(mods: Sequence[FgGradedModule]) -> FgGradedModule:
    if not mods:
        raise ValueError("empty direct sum needs an algebra; use zero_module")
    alg = mods[0].alg
    gens: List[Vec] = []
    rels: List[Tuple[Vec, List[Fraction]]] = []
    offset = 0
    total = sum(m.ngens for m in mods)
    for mod in mods:
        if mod.alg != alg:
            raise ConeMismatch("direct sum of modules over different algebras")
        gens.extend(mod.gen_degrees)
        for j, c in enumerate(mod.relations.col_degrees):
            v = [Fraction(0)] * total
            for i in range(mod.ngens):
                v[offset + i] = mod.relations.coeffs[i][j]
            rels.append((c, v))
        offset += mod.ngens
    return presented(alg, gens, rels)


def base_change(mod: FgGradedModule, alg: StalkAlgebra,
                degree_map: Optional[Callable[[Vec], Vec]] = None) -> FgGradedModule:
    """alg (x) mod along a degree map (identity for A-flavor faces)."""
    if degree_map is None:
        if alg.flavor != mod.flavor:
            raise FlavorMismatch("base change between flavors needs a degree map")
        degree_map = lambda d: mod.alg.restrict_degree(d, alg.cone)  # noqa: E731
    gens = [degree_map(g) for g in mod.gen_degrees]
    cols = [degree_map(c) for c in mod.relations.col_degrees]
    return FgGradedModule(alg, gens, HomogeneousMatrix(gens, cols, mod.relations.coeffs))


# -- morphisms ------------------------------------------------------------

@dataclass(eq=False)
class ModuleMorphism:
    """Homogeneous map source -> target, shifting degrees by ``shift``.

    ``coeffs[i][j]`` is the coefficient of target generator i in the image of
    source generator j; the character is forced by the degrees.  The target may
    live over a face of the source cone (restriction maps).
    """

    source: FgGradedModule
    target: FgGradedModule
    coeffs: Matrix
    shift: Optional[Vec] = None
    check: bool = True

    def __post_init__(self):
        src, tgt = self.source, self.target
        if src.alg.fan is not tgt.alg.fan or src.flavor != tgt.flavor:
            raise ConeMismatch("morphism between modules over unrelated algebras")
        if not set(tgt.cone).issubset(src.cone):
            raise ConeMismatch(f"target cone {tgt.cone} is not a face of {src.cone}")
        if self.shift is None:
            self.shift = src.alg.zero()
        self.shift = tuple(self.shift)
        if any(self.shift) and src.flavor == "B" and src.cone != tgt.cone:
            raise ConeMismatch("shifted B-flavor morphisms must stay on one cone")
        self.coeffs = [[Fraction(x) for x in row] for row in self.coeffs]
        if len(self.coeffs) != tgt.ngens or any(len(r) != src.ngens for r in self.coeffs):
            raise ValueError("coefficient matrix has the wrong shape")
        if self.check:
            self._validate()

    def target_degree(self, m: Sequence[int]) -> Vec:
        return self.source.alg.restrict_degree(vadd(m, self.shift), self.target.cone)

    def image_degree(self, j: int) -> Vec:
        return self.target_degree(self.source.gen_degrees[j])

    def _validate(self) -> None:
        tgt = self.target
        for j in range(self.source.ngens):
            d = self.image_degree(j)
            for i in range(tgt.ngens):
                if self.coeffs[i][j] and not tgt.alg.contains(vsub(d, tgt.gen_degrees[i])):
                    raise InvalidMorphism(
                        f"generator {j} maps to degree {d}, unreachable from target generator {i}")
        # relations must land in the relation submodule
        rel = self.source.relations
        for k in range(rel.shape[1]):
            image = [sum(self.coeffs[i][j] * rel.coeffs[j][k] for j in range(self.source.ngens))
                     for i in range(tgt.ngens)]
            if any(image):
                d = self.target_degree(rel.col_degrees[k])
                if any(tgt.piece(d).coords(image)):
                    raise InvalidMorphism(f"relation {k} does not map to zero")

    def column_image(self, j: int) -> List[Fraction]:
        return [row[j] for row in self.coeffs]


def evaluate_linear(coeffs: Matrix, src: Piece, tgt: Piece) -> Matrix:
    """Matrix of the induced map between two pieces (rows: target basis)."""
    out = [[Fraction(0)] * src.dim for _ in range(tgt.dim)]
    for j, g in enumerate(src.basis_generators()):
        col = tgt.coords([row[g] for row in coeffs])
        for i, x in enumerate(col):
            out[i][j] = x
    return out


def evaluate_morphism(phi: ModuleMorphism, m: Sequence[int]) -> Matrix:
    src = phi.source.piece(m)
    tgt = phi.target.piece(phi.target_degree(m))
    return evaluate_linear(phi.coeffs, src, tgt)


def identity_morphism(mod: FgGradedModule) -> ModuleMorphism:
    return ModuleMorphism(mod, mod, linalg.identity(mod.ngens), check=False)


def zero_morphism(src: FgGradedModule, tgt: FgGradedModule) -> ModuleMorphism:
    return ModuleMorphism(src, tgt, linalg.zeros(tgt.ngens, src.ngens), check=False)


def multiplication_morphism(mod: FgGradedModule, a: Sequence[int]) -> ModuleMorphism:
    """Multiplication by chi^a, a degree-a endomorphism."""
    if not mod.alg.contains(a):
        raise InvalidMorphism(f"chi^{tuple(a)} is not in the algebra")
    return ModuleMorphism(mod, mod, linalg.identity(mod.ngens), shift=tuple(a))


def compose(psi: ModuleMorphism, phi: ModuleMorphism) -> ModuleMorphism:
    """psi o phi."""
    if phi.target is not psi.source:
        if (phi.target.gen_degrees != psi.source.gen_degrees or phi.target.alg != psi.source.alg):
            raise ConeMismatch("morphisms are not composable")
    if phi.source.flavor == "B" and phi.source.cone != psi.target.cone:
        if any(phi.shift) or any(psi.shift):
            raise ConeMismatch("shifted B-flavor morphisms must stay on one cone")
        shift = phi.shift
    else:
        shift = vadd(phi.shift, psi.shift)
    coeffs = linalg.matmul(psi.coeffs, phi.coeffs, inner=phi.target.ngens, cols=phi.source.ngens)
    return ModuleMorphism(phi.source, psi.target, coeffs, shift=shift, check=False)


# -- syzygies and kernels ------------------------------------------------------

def _join(a: Vec, b: Vec) -> Vec:
    return tuple(max(x, y) for x, y in zip(a, b))


def _leq(a: Vec, b: Vec) -> bool:
    return all(x <= y for x, y in zip(a, b))


def join_closure(points: Sequence[Vec]) -> List[Vec]:
    closure = set(points)
    frontier = set(points)
    while frontier:
        new = set()
        for p in frontier:
            for q in closure:
                j = _join(p, q)
                if j not in closure:
                    new.add(j)
        closure |= new
        frontier = new
    return sorted(closure, key=lambda b: (sum(b), b))


def syzygies(alg: StalkAlgebra, nrows: int,
             columns: Sequence[Tuple[Vec, Sequence[Fraction]]]) -> List[Tuple[Vec, List[Fraction]]]:
    """Minimal generators of {a : sum_j a_j chi^(.) col_j = 0}.

    ``columns`` are homogeneous elements (degree, coefficient vector) of a free
    module with ``nrows`` generators.  Candidate generator degrees are joins of
    column degrees in ray coordinates; the kernel at a degree only depends on
    which columns are active there.
    """
    if not columns:
        return []
    bdeg = [alg.bcoords(d) for d, _ in columns]
    gens: List[Tuple[Vec, Vec, List[Fraction]]] = []   # (bcoords, degree, vector)
    ncols = len(columns)
    for beta in join_closure(bdeg):
        act = [j for j in range(ncols) if _leq(bdeg[j], beta)]
        mat = [[Fraction(columns[j][1][i]) for j in act] for i in range(nrows)]
        kernel = linalg.nullspace(mat, len(act))
        if not kernel:
            continue
        span = [v for (b, _, v) in gens if _leq(b, beta)]
        r = linalg.rank(span) if span else 0
        base = columns[act[0]][0]
        for z in kernel:
            full = [Fraction(0)] * ncols
            for k, j in enumerate(act):
                full[j] = z[k]
            r2 = linalg.rank(span + [full])
            if r2 > r:
                span.append(full)
                r = r2
                gens.append((beta, alg.lift(beta, base), full))
    return [(deg, vec) for _, deg, vec in gens]


def _minimal_generators(mod: FgGradedModule, elements: Sequence[Tuple[Vec, List[Fraction]]]):
    """Drop elements of ``mod``'s free cover that are redundant modulo relations."""
    alg = mod.alg
    order = sorted(range(len(elements)), key=lambda k: (sum(alg.bcoords(elements[k][0])), k))
    kept: List[Tuple[Vec, List[Fraction]]] = []
    for k in order:
        deg, vec = elements[k]
        piece = mod.piece(deg)
        span = [piece.coords(v) for d, v in kept if alg.contains(vsub(deg, d))]
        target = piece.coords(vec)
        if not any(target):
            continue
        if span and linalg.rank(span + [target]) == linalg.rank(span):
            continue
        kept.append((deg, vec))
    return kept


def kernel_presentation(phi: ModuleMorphism) -> Tuple[FgGradedModule, ModuleMorphism]:
    """Presentation of ker(phi) together with its inclusion into the source."""
    src, tgt = phi.source, phi.target
    if src.alg != tgt.alg:
        raise ConeMismatch("kernel_presentation needs a morphism over a single algebra")
    if any(phi.shift):
        raise ConeMismatch("kernel_presentation expects a degree-0 morphism")
    alg = src.alg
    nS = src.ngens
    cols = [(src.gen_degrees[j], phi.column_image(j)) for j in range(nS)]
    cols += [(tgt.relations.col_degrees[k], tgt.relations.column(k))
             for k in range(tgt.relations.shape[1])]
    lifted = []
    for deg, vec in syzygies(alg, tgt.ngens, cols):
        a = vec[:nS]
        if any(a):
            lifted.append((deg, a))
    kept = _minimal_generators(src, lifted)
    kgens = [d for d, _ in kept]
    # relations among the kernel generators, modulo the source relations
    cols2 = [(d, v) for d, v in kept]
    cols2 += [(src.relations.col_degrees[k], src.relations.column(k))
              for k in range(src.relations.shape[1])]
    rels = []
    for deg, vec in syzygies(alg, nS, cols2):
        a = vec[:len(kept)]
        if any(a):
            rels.append((deg, a))
    kernel = presented(alg, kgens, rels)
    incl = [[kept[j][1][i] for j in range(len(kept))] for i in range(nS)]
    return kernel, ModuleMorphism(kernel, src, incl)


def image_membership(phi: ModuleMorphism, m: Sequence[int], vec: Sequence[Fraction]) -> bool:
    """Is the class of ``vec`` (a vector over target generators) in im(phi) at m?"""
    tgt_piece = phi.target.piece(phi.target_degree(m))
    target = tgt_piece.coords(vec)
    if not any(target):
        return True
    mat = evaluate_morphism(phi, m)
    cols = linalg.transpose(mat, tgt_piece.dim)
    return linalg.rank(cols + [target]) == linalg.rank(cols)


# -- duals and change of grading -----------------------------------------------

@dataclass(eq=False)
class GradedDualModule:
    """Formal graded dual; the degree-m piece is dual to the underlying degree -m piece."""

    underlying: FgGradedModule

    @property
    def alg(self) -> StalkAlgebra:
        return self.underlying.alg

    def piece_dim(self, m: Sequence[int]) -> int:
        return self.underlying.piece_dim(vneg(m))


def graded_dual(mod: FgGradedModule) -> GradedDualModule:
    return GradedDualModule(mod)


def dual_piece(d: GradedDualModule, m: Sequence[int]) -> int:
    return d.piece_dim(m)


def evaluate_dual_morphism(phi: ModuleMorphism, m: Sequence[int]) -> Matrix:
    """phi^v: target^v -> source^v at degree m (the transpose at -m)."""
    mat = evaluate_morphism(phi, vneg(m))
    return linalg.transpose(mat, phi.source.piece(vneg(m)).dim)


def delta_extension(mod: FgGradedModule) -> FgGradedModule:
    """Extension of scalars A_sigma -> B_sigma: regrade along the ray pairings."""
    if mod.flavor != "A":
        raise FlavorMismatch("delta_extension expects an A-flavor module")
    b_alg = StalkAlgebra(mod.alg.fan, mod.cone, "B")
    return base_change(mod, b_alg, mod.alg.bcoords)


def delta_morphism(phi: ModuleMorphism, source: Optional[FgGradedModule] = None,
                   target: Optional[FgGradedModule] = None) -> ModuleMorphism:
    if phi.source.flavor != "A":
        raise FlavorMismatch("delta_morphism expects an A-flavor morphism")
    src = source or delta_extension(phi.source)
    tgt = target or delta_extension(phi.target)
    shift = phi.source.alg.bcoords(phi.shift)
    return ModuleMorphism(src, tgt, phi.coeffs, shift=shift, check=False)
