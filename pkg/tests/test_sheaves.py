import pytest
from hypothesis import given, strategies as st

from toric_koszul import builtin_fan
from toric_koszul.errors import NotLocallyClosed
from toric_koszul.fan import fan_morphism
from toric_koszul.geometry import line_bundle, to_sheaf
from toric_koszul.homology import cube
from toric_koszul.modules import presented
from toric_koszul.sheaves import (SheafOfModules, augmented_resolution, delta_sheaf, extension_by_zero,
                                  global_sections_dim, hom_pieces, is_coherent, open_hull,
                                  projective_resolution, pullback, pushforward, sections_dim,
                                  standard_open, standard_point, structure_sheaf, twist_sheaf,
                                  zero_extension_sequence)
from toric_koszul.stalks import StalkAlgebra

from oracles import in_dual, polytope_count

P2 = builtin_fan("p2")
A2 = builtin_fan("a2")


def _exact_everywhere(cx, fan, window):
    return all(cx.evaluate(rho, m).is_exact() for rho in fan.cones for m in window)


def test_standard_object_stalks(any_fan):
    z = (0,) * any_fan.rank
    for s in any_fan.cones:
        op, pt = standard_open(any_fan, s, z), standard_point(any_fan, s, z)
        for rho in any_fan.cones:
            for m in cube(any_fan.rank, -1, 1):
                assert op.piece_dim(rho, m) == int(set(rho) <= set(s) and in_dual(any_fan, rho, m))
                assert pt.piece_dim(rho, m) == int(rho == s and in_dual(any_fan, rho, m))


def test_hom_between_standard_opens():
    # Hom(A_[s](m), A_[t](0)) in degree 0 is the degree-m piece of A_s when s is a face of t.
    z = (0, 0)
    for s in A2.cones:
        for t in A2.cones:
            for m in cube(2, -1, 1):
                want = int(set(s) <= set(t) and in_dual(A2, s, m))
                assert hom_pieces(standard_open(A2, s, m), standard_open(A2, t, z), z) == want


@pytest.mark.parametrize("coeffs", [[0, 0, 0], [1, 0, 0], [1, 1, 1], [-1, -1, -1], [2, 0, 1]])
def test_global_sections_match_polytope(coeffs):
    F = to_sheaf(line_bundle(P2, coeffs))
    for m in cube(2, -3, 3):
        assert global_sections_dim(F, m) == polytope_count(P2, coeffs, m)


def test_global_sections_p1_structure_sheaf():
    p1 = builtin_fan("p1")
    assert [global_sections_dim(structure_sheaf(p1), (m,)) for m in range(-2, 3)] == [0, 0, 1, 0, 0]


def test_resolution_of_torsion_point():
    alg = StalkAlgebra(A2, (0, 1))
    q = presented(alg, [(0, 0)], [((1, 0), [1]), ((0, 1), [1])])
    F = extension_by_zero(standard_point(A2, (0, 1), (0, 0)), [(0, 1)])
    stalks = {c: F.stalk(c) for c in A2.cones}
    stalks[(0, 1)] = q
    T = SheafOfModules(A2, "A", stalks, {})
    res, _ = projective_resolution(T)
    shape = {k: sorted(res.term(k).summands) for k in res.terms}
    assert shape == {0: [((0, 1), (0, 0))],
                     -1: [((0, 1), (0, 1)), ((0, 1), (1, 0))],
                     -2: [((0, 1), (1, 1))]}
    assert _exact_everywhere(augmented_resolution(T), A2, cube(2, -2, 3))


def test_resolution_of_point_on_line():
    a1 = builtin_fan("p1")
    F = standard_point(a1, (0,), (0,))
    res, _ = projective_resolution(F)
    assert sorted(res.terms) == [-1, 0]
    assert res.term(0).summands == [((0,), (0,))]
    assert res.term(-1).summands == [((), (0,))]


@st.composite
def locally_closed(draw, fan):
    cones = list(fan.cones)
    big = open_hull(fan, draw(st.lists(st.sampled_from(cones), min_size=1, max_size=3)))
    small = open_hull(fan, draw(st.lists(st.sampled_from(sorted(big)), max_size=2)))
    z = big - small
    return sorted(z) if z else sorted(big)


@given(locally_closed(P2), st.tuples(st.integers(-1, 1), st.integers(-1, 1)))
def test_extension_by_zero_resolutions_are_exact(Z, m):
    F = twist_sheaf(extension_by_zero(structure_sheaf(P2), Z), m)
    F.check_sheaf_law()
    assert _exact_everywhere(augmented_resolution(F), P2, cube(2, -2, 2))


def test_not_locally_closed():
    with pytest.raises(NotLocallyClosed):
        extension_by_zero(structure_sheaf(P2), [(), (0, 1)])


def test_zero_extension_sequence_is_exact():
    U = open_hull(P2, [(0, 1)])
    seq = zero_extension_sequence(structure_sheaf(P2), U)
    assert _exact_everywhere(seq, P2, cube(2, -2, 2))


def test_coherence():
    assert is_coherent(structure_sheaf(P2))
    assert is_coherent(standard_open(A2, (0, 1), (0, 0)))
    assert not is_coherent(standard_open(P2, (0, 1), (0, 0)))
    assert not is_coherent(standard_point(P2, (0, 1), (0, 0)))


def test_pullback_and_pushforward_of_structure_sheaf():
    hz, p1 = builtin_fan("hirzebruch1"), builtin_fan("p1")
    f = fan_morphism(hz, p1, [[1, 0]])
    O1 = structure_sheaf(p1)
    up = pullback(f, O1)
    for rho in hz.cones:
        for m in cube(2, -2, 2):
            assert up.piece_dim(rho, m) == int(in_dual(hz, rho, m))
    down = pushforward(f, structure_sheaf(hz))
    for sigma in p1.cones:
        pre = [t for t in hz.cones if set(f.cone_image[t]) <= set(sigma)]
        for m in cube(2, -2, 2):
            want = int(all(in_dual(hz, t, m) for t in pre))
            assert down.piece_dim(sigma, m) == want


def test_delta_sheaf_hom_dimensions():
    z = (0, 0)
    objs = [standard_open(P2, s, z) for s in P2.cones] + [standard_point(P2, s, z) for s in P2.cones]
    for F in objs:
        for G in objs:
            assert hom_pieces(F, G, z) == hom_pieces(delta_sheaf(F), delta_sheaf(G), z)


def test_sections_on_open_subset():
    O = structure_sheaf(P2)
    U = open_hull(P2, [(0, 1), (0, 2)])
    for m in cube(2, -2, 2):
        want = int(all(in_dual(P2, c, m) for c in U))
        assert sections_dim(O, U, m) == want
