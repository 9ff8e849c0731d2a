import pytest
from hypothesis import given, strategies as st

from toric_koszul import builtin_fan
from toric_koszul.errors import LengthMismatch, RankMismatch
from toric_koszul.stalks import (StalkAlgebra, local_coh_indicator, piece_dim_A, piece_dim_A_dual,
                                 piece_dim_B)

from oracles import in_dual

vec2 = st.tuples(st.integers(-4, 4), st.integers(-4, 4))
FANS = {name: builtin_fan(name) for name in ["a2", "p2", "hirzebruch1"]}


@given(st.sampled_from(sorted(FANS)), vec2)
def test_piece_dims_match_dual_cone(name, m):
    fan = FANS[name]
    for c in fan.cones:
        assert piece_dim_A(fan, c, m) == int(in_dual(fan, c, m))
        assert piece_dim_A_dual(fan, c, m) == int(in_dual(fan, c, [-x for x in m]))


@given(st.sampled_from(sorted(FANS)), vec2, vec2)
def test_bcoords_lift_roundtrip(name, m, base):
    fan = FANS[name]
    for c in fan.cones:
        alg = StalkAlgebra(fan, c)
        beta = alg.bcoords(m)
        assert alg.bcoords(alg.lift(beta, base)) == beta
        assert alg.contains(m) == (piece_dim_B(fan, c, beta) == 1)


def test_b_pieces_and_errors():
    fan = FANS["p2"]
    assert piece_dim_B(fan, (0, 1), (0, 3)) == 1
    assert piece_dim_B(fan, (0, 1), (-1, 3)) == 0
    assert piece_dim_B(fan, (), ()) == 1
    with pytest.raises(LengthMismatch):
        piece_dim_B(fan, (0,), (1, 2))
    with pytest.raises(RankMismatch):
        piece_dim_A(fan, (0,), (1,))


def test_local_cohomology_indicator():
    fan = FANS["a2"]
    assert local_coh_indicator(fan, (0, 1), (-1, -1)) == 1
    assert local_coh_indicator(fan, (0, 1), (-1, 0)) == 0
    assert local_coh_indicator(fan, (0,), (-1, 5)) == 1
    assert local_coh_indicator(fan, (), (3, 3)) == 1
