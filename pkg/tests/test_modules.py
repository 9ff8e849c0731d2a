import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toric_koszul import builtin_fan
from toric_koszul.errors import InvalidMorphism
from toric_koszul.fan import build_fan
from toric_koszul.homology import verification_degrees
from toric_koszul.modules import (ModuleMorphism, compose, delta_extension, direct_sum,
                                  evaluate_morphism, free_module, graded_dual, image_membership,
                                  kernel_presentation, multiplication_morphism, presented)
from toric_koszul.stalks import StalkAlgebra

from generators import random_monomial_matrix, random_presentation
from oracles import kernel_dim, presented_piece, rank

A2 = builtin_fan("a2")
P2 = builtin_fan("p2")
A3 = build_fan(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1, 2)])
CASES = [(A2, c) for c in A2.cones] + [(P2, c) for c in P2.cones] + [(A3, (0, 1, 2)), (A3, (0, 2))]


def test_torsion_point_module():
    alg = StalkAlgebra(A2, (0, 1))
    q = presented(alg, [(0, 0)], [((1, 0), [1]), ((0, 1), [1])])
    assert q.piece_dim((0, 0)) == 1
    assert [q.piece_dim(m) for m in [(1, 0), (0, 1), (1, 1), (-1, 0)]] == [0, 0, 0, 0]


def test_kernel_of_xy():
    alg = StalkAlgebra(A2, (0, 1))
    src = free_module(alg, [(1, 0), (0, 1)])
    tgt = free_module(alg, [(0, 0)])
    phi = ModuleMorphism(src, tgt, [[1, 1]])
    ker, incl = kernel_presentation(phi)
    assert ker.gen_degrees == ((1, 1),)
    assert incl.coeffs in ([[Fraction(-1)], [Fraction(1)]], [[Fraction(1)], [Fraction(-1)]])
    assert ker.relations.shape == (1, 0)


def test_invalid_morphism_degree():
    alg = StalkAlgebra(A2, (0, 1))
    with pytest.raises(InvalidMorphism):
        ModuleMorphism(free_module(alg, [(0, 0)]), free_module(alg, [(1, 0)]), [[1]])


def test_relations_must_map_to_zero():
    alg = StalkAlgebra(A2, (0, 1))
    q = presented(alg, [(0, 0)], [((1, 0), [1])])
    with pytest.raises(InvalidMorphism):
        ModuleMorphism(q, free_module(alg, [(0, 0)]), [[1]])


def test_compose_and_multiplication():
    alg = StalkAlgebra(A2, (0, 1))
    f = free_module(alg, [(0, 0)])
    x = multiplication_morphism(f, (1, 0))
    xy = compose(multiplication_morphism(f, (0, 1)), x)
    assert xy.shift == (1, 1)
    assert evaluate_morphism(xy, (0, 0)) == [[1]]
    assert image_membership(xy, (0, 0), [1])
    assert image_membership(x, (0, 0), [1])
    assert not image_membership(x, (-1, 0), [1])


@given(st.integers(0, 10_000), st.sampled_from(range(len(CASES))))
def test_piece_dims_against_direct_count(seed, case):
    fan, cone = CASES[case]
    gens, rels = random_presentation(random.Random(seed), fan, cone)
    mod = presented(StalkAlgebra(fan, cone), gens, rels)
    for m in verification_degrees(fan.rank, gens, radius=1):
        assert mod.piece_dim(m) == presented_piece(fan, cone, gens, rels, m)


@given(st.integers(0, 10_000), st.sampled_from(range(len(CASES))))
def test_direct_sum_and_twist_additivity(seed, case):
    fan, cone = CASES[case]
    rng = random.Random(seed)
    alg = StalkAlgebra(fan, cone)
    a = presented(alg, *random_presentation(rng, fan, cone))
    b = presented(alg, *random_presentation(rng, fan, cone))
    s = direct_sum([a, b])
    shift = (1,) + (0,) * (fan.rank - 1)
    for m in verification_degrees(fan.rank, a.gen_degrees + b.gen_degrees, radius=1):
        assert s.piece_dim(m) == a.piece_dim(m) + b.piece_dim(m)
        assert a.twist(shift).piece_dim(m) == a.piece_dim(tuple(x - y for x, y in zip(m, shift)))
        assert graded_dual(a).piece_dim(m) == a.piece_dim(tuple(-x for x in m))


@given(st.integers(0, 10_000), st.sampled_from(range(len(CASES))))
def test_kernel_presentation_matches_degreewise_kernel(seed, case):
    fan, cone = CASES[case]
    src, tgt, coeffs = random_monomial_matrix(random.Random(seed), fan, cone)
    alg = StalkAlgebra(fan, cone)
    phi = ModuleMorphism(free_module(alg, src), free_module(alg, tgt), coeffs)
    ker, incl = kernel_presentation(phi)
    for m in verification_degrees(fan.rank, src + tgt, radius=1):
        want = kernel_dim(fan, cone, src, tgt, coeffs, m)
        assert ker.piece_dim(m) == want
        mat = evaluate_morphism(incl, m)
        assert (rank(mat) if want else 0) == want


@given(st.integers(0, 10_000), st.sampled_from(range(len(CASES))))
def test_delta_extension_preserves_pieces(seed, case):
    fan, cone = CASES[case]
    gens, rels = random_presentation(random.Random(seed), fan, cone)
    alg = StalkAlgebra(fan, cone)
    mod = presented(alg, gens, rels)
    ext = delta_extension(mod)
    for m in verification_degrees(fan.rank, gens, radius=1):
        assert ext.piece_dim(alg.bcoords(m)) == mod.piece_dim(m)
