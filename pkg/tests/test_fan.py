import pytest
import sympy
from hypothesis import given, strategies as st

from toric_koszul import builtin_fan
from toric_koszul.errors import (FanNotComplete, NonPrimitiveRay, NonSmoothCone, NotAFacet, NotAFan,
                                 RankMismatch, SignIncoherence)
from toric_koszul.fan import (build_fan, dual_membership, fan_morphism, identity_morphism,
                              invariant_factors_of, unimodular_completion)
from toric_koszul.koszul import check_sign_coherence

from oracles import pairing


def test_cone_lists_of_builtins():
    p2 = builtin_fan("p2")
    assert p2.cones == ((), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2))
    assert p2.complete
    assert not builtin_fan("a2").complete
    assert builtin_fan("p1").max_cones == ((0,), (1,))


def test_completeness_flags(any_fan):
    assert any_fan.complete == (len(any_fan.rays) > any_fan.rank)


@pytest.mark.parametrize("rank,rays,cones,exc", [
    (2, [(2, 0), (0, 1)], [(0, 1)], NonPrimitiveRay),
    (2, [(1, 0), (1, 2)], [(0, 1)], NonSmoothCone),
    (2, [(1, 0), (0, 1), (1, 1)], [(0, 1), (1, 2)], NotAFan),
    (2, [(1, 0, 0)], [(0,)], RankMismatch),
    (2, [(1, 0)], [(0, 3)], NotAFan),
])
def test_invalid_fans(rank, rays, cones, exc):
    with pytest.raises(exc):
        build_fan(rank, rays, cones)


def test_dual_membership():
    p2 = builtin_fan("p2")
    assert dual_membership(p2, (0, 1), (0, 0))
    assert dual_membership(p2, (1, 2), (-1, 0))
    assert not dual_membership(p2, (1, 2), (1, 0))
    with pytest.raises(RankMismatch):
        dual_membership(p2, (), (0,))


def test_dual_section_is_dual_basis(any_fan):
    for c in any_fan.cones:
        us = any_fan.dual_section(c)
        for i, u in zip(c, us):
            assert [pairing(u, any_fan.rays[j]) for j in c] == [int(j == i) for j in c]


@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3).filter(lambda v: invariant_factors_of([v]) == [1]))
def test_unimodular_completion_of_primitive_vector(v):
    basis = unimodular_completion([v], 3)
    assert abs(sympy.Matrix(basis).det()) == 1
    assert [pairing(v, [row[j] for row in basis]) for j in range(3)] == [1, 0, 0]


def test_incidence_signs_square_to_zero(any_fan):
    check_sign_coherence(any_fan)


def test_not_a_facet():
    p2 = builtin_fan("p2")
    with pytest.raises(NotAFacet):
        p2.incidence_sign((0, 1), ())


def test_sign_flip_detected():
    p2 = builtin_fan("p2")
    bad = p2.with_sign_flip((0, 1), (0,))
    assert bad.incidence_sign((0, 1), (0,)) == -p2.incidence_sign((0, 1), (0,))
    with pytest.raises(SignIncoherence):
        check_sign_coherence(bad)


def test_fan_morphisms():
    p1 = builtin_fan("p1")
    hz = builtin_fan("hirzebruch1")
    f = fan_morphism(hz, p1, [[1, 0]])
    assert f.cone_image[(0, 1)] == (0,)
    assert f.cone_image[(1,)] == ()
    idm = identity_morphism(p1)
    assert idm.cone_image == {c: c for c in p1.cones}
