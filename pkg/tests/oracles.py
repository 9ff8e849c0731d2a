"""Independent reference computations used by the tests (sympy ranks, lattice counts)."""
from itertools import product

import sympy


def rank(rows):
    if not rows or not rows[0]:
        return 0
    return sympy.Matrix(rows).rank()


def pairing(m, r):
    return sum(a * b for a, b in zip(m, r))


def in_dual(fan, cone, m):
    return all(pairing(m, fan.rays[i]) >= 0 for i in cone)


def presented_piece(fan, cone, gens, relations, m):
    """dim of (free on gens)/(relations) at m, by direct counting."""
    act = [i for i, g in enumerate(gens) if in_dual(fan, cone, [a - b for a, b in zip(m, g)])]
    cols = [[vec[i] for i in act] for d, vec in relations
            if in_dual(fan, cone, [a - b for a, b in zip(m, d)])]
    return len(act) - rank(cols)


def kernel_dim(fan, cone, src, tgt, coeffs, m):
    """dim ker of a monomial matrix between free modules at degree m."""
    s_act = [j for j, g in enumerate(src) if in_dual(fan, cone, [a - b for a, b in zip(m, g)])]
    t_act = [i for i, g in enumerate(tgt) if in_dual(fan, cone, [a - b for a, b in zip(m, g)])]
    mat = [[coeffs[i][j] for j in s_act] for i in t_act]
    return len(s_act) - (rank(mat) if t_act else 0)


def cohomology(dims, maps):
    """Cohomology dims of a finite complex given as dims and matrices (rows = target)."""
    ranks = [rank(mp) if dims[i] and dims[i + 1] else 0 for i, mp in enumerate(maps)]
    out = []
    for i, d in enumerate(dims):
        r_out = ranks[i] if i < len(ranks) else 0
        r_in = ranks[i - 1] if i > 0 else 0
        out.append(d - r_out - r_in)
    return out


def polytope_count(fan, coeffs, m):
    """Is m a lattice point of {m : <m, u_i> >= -a_i}?"""
    return int(all(pairing(m, r) >= -a for r, a in zip(fan.rays, coeffs)))


def box(rank, lo, hi):
    return list(product(range(lo, hi + 1), repeat=rank))
