"""Seeded random presented modules and monomial matrices."""
import random

from oracles import in_dual


def _deg(rng, rank, lo, hi):
    return tuple(rng.randint(lo, hi) for _ in range(rank))


def random_presentation(rng: random.Random, fan, cone, max_gens=3, max_rels=3):
    """(gens, relations) with relation columns homogeneous over A_cone."""
    n = fan.rank
    gens = [_deg(rng, n, -2, 2) for _ in range(rng.randint(1, max_gens))]
    rels = []
    for _ in range(rng.randint(0, max_rels)):
        d = _deg(rng, n, -2, 3)
        vec = [rng.randint(-2, 2) if in_dual(fan, cone, [a - b for a, b in zip(d, g)]) else 0
               for g in gens]
        if any(vec):
            rels.append((d, vec))
    return gens, rels


def random_monomial_matrix(rng: random.Random, fan, cone, max_size=4):
    """Source and target generator degrees and a coefficient matrix of a degree-0 map."""
    n = fan.rank
    src = [_deg(rng, n, -2, 2) for _ in range(rng.randint(1, max_size))]
    tgt = [_deg(rng, n, -2, 2) for _ in range(rng.randint(1, max_size))]
    coeffs = [[rng.choice([-2, -1, 1, 1, 2, 3]) if in_dual(fan, cone, [a - b for a, b in zip(s, t)])
               and rng.random() < 0.8 else 0 for s in src] for t in tgt]
    return src, tgt, coeffs
