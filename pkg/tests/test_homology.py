from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from toric_koszul import builtin_fan
from toric_koszul.errors import NotAComplex
from toric_koszul.homology import (DegreeWindow, EvaluatedComplex, chambers, cube, dual_complex,
                                   sign_pattern, verification_degrees)

from oracles import cohomology

small = st.integers(-3, 3)


@st.composite
def three_term_complexes(draw):
    """V0 -A-> V1 -B-> V2 with B A = 0, built from a left-null basis of A."""
    n0, n1, n2 = draw(st.integers(0, 3)), draw(st.integers(1, 4)), draw(st.integers(0, 3))
    a = sympy.Matrix(n1, n0, draw(st.lists(small, min_size=n1 * n0, max_size=n1 * n0)))
    left = (a.T.nullspace() if n0 else [sympy.eye(n1)[:, i] for i in range(n1)])
    k = len(left)
    c = sympy.Matrix(n2, k, draw(st.lists(small, min_size=n2 * k, max_size=n2 * k)))
    b = c * sympy.Matrix.hstack(*left).T if k else sympy.zeros(n2, n1)
    to_list = lambda m: [[Fraction(int(x.p), int(x.q)) for x in m.row(i)] for i in range(m.rows)]  # noqa: E731
    return [n0, n1, n2], [to_list(a), to_list(b)]


@given(three_term_complexes(), st.integers(-3, 3))
def test_cohomology_against_sympy(cx, start):
    dims, maps = cx
    ec = EvaluatedComplex(start, dims, maps)
    assert ec.cohomology() == cohomology(dims, maps)
    assert ec.euler() == sum((-1) ** k * x for k, x in zip(ec.degrees, ec.cohomology()))
    dual = dual_complex(ec)
    assert list(reversed(dual.cohomology())) == ec.cohomology()


def test_square_zero_failure():
    ec = EvaluatedComplex(0, [1, 1, 1], [[[Fraction(1)]], [[Fraction(1)]]])
    assert ec.square_zero_failures() == [0]
    with pytest.raises(NotAComplex):
        ec.cohomology()
    with pytest.raises(NotAComplex):
        EvaluatedComplex(0, [1, 2], [[[1]]])


def test_windows():
    w = cube(2, -1, 1)
    assert len(w) == 9 and len(list(w.points())) == 9
    assert w.contains((1, -1)) and not w.contains((2, 0))
    assert w.clamp((5, -7)) == (1, -1)
    v = verification_degrees(2, [(3, -1)], radius=1)
    assert v == DegreeWindow((-1, -2), (4, 1))


def test_chambers_cover_every_sign_pattern():
    fan = builtin_fan("p2")
    w = cube(2, -1, 1)
    reps = chambers(fan, [(0, 0)], w)
    pats = {sign_pattern(fan, [(0, 0)], m) for m in reps}
    assert len(pats) == len(reps)
    everything = {sign_pattern(fan, [(0, 0)], m) for m in cube(2, -6, 6)}
    assert pats == everything
    assert reps == chambers(fan, [(0, 0)], w)
