"""Exhaustive and randomized generators for the chain-algebra test suites.

Shared between the module tests and the acceptance suite so both run the
identical case inventory.
"""

import itertools
import random

from mbhlab.cubical import (
    FREE,
    BaseDims,
    CubeFace,
    Leaf,
    ModuliSymbol,
    Node,
    Word,
    chain_boundary,
    cube_boundary,
    moduli_boundary,
    tree_boundary,
    word_boundary,
)

WORD_SEED = 20240809


def all_faces(N):
    for states in itertools.product((FREE, 0, 1), repeat=N):
        yield CubeFace(states)


def iter_face_cases(max_N=6):
    """Every face of I^N with N <= max_N and degree >= 1."""
    for N in range(1, max_N + 1):
        for face in all_faces(N):
            if face.degree >= 1:
                yield face


def iter_moduli_cases(max_i=6, dims_choices=(0, 1, 2)):
    """Every (i, j, b_i) with i <= max_i plus every population pattern of the
    intermediate levels (empty / dim 0 / dim 1)."""
    for i in range(1, max_i + 1):
        for j in range(1, i + 1):
            intermediates = list(range(i - j + 1, i))
            for b_i in dims_choices:
                for pattern in itertools.product((None, 0, 1), repeat=len(intermediates)):
                    dims = {i: b_i, i - j: 0}
                    dims.update({n: d for n, d in zip(intermediates, pattern)})
                    # inner recursion reaches levels below the intermediates
                    for n in range(0, i):
                        dims.setdefault(n, 0)
                    yield i, j, BaseDims(dims)


def random_fibered_words(count=1000, seed=WORD_SEED):
    """Seeded words Q x_{B_i1} M(B_i1, B_i2) x ... with consistent junctions."""
    rng = random.Random(seed)
    for _ in range(count):
        N = rng.randint(1, 4)
        states = tuple(rng.choice((FREE, 0, 1)) for _ in range(N))
        Q = CubeFace(states)
        length = rng.randint(1, 3)
        levels = sorted(rng.sample(range(0, 7), length + 1), reverse=True)
        dims = {lvl: rng.randint(0, 1) for lvl in range(0, 8)}
        # junction of Q with the first symbol is that symbol's upper level;
        # consecutive symbols meet over the shared level.
        factors = [Q] + [ModuliSymbol(a, b) for a, b in zip(levels, levels[1:])]
        bases = [levels[0]] + levels[1:-1]
        yield Word(tuple(factors), tuple(bases)), BaseDims(dims)


def random_three_factor_trees(count=1000, seed=WORD_SEED + 1):
    """Seeded three-factor words in both associations."""
    rng = random.Random(seed)
    made = 0
    while made < count:
        kind = rng.choice(("cubes", "mixed", "moduli"))
        dims = {lvl: rng.randint(0, 1) for lvl in range(0, 10)}
        if kind == "cubes":
            factors = []
            for _ in range(3):
                N = rng.randint(1, 4)
                factors.append(CubeFace(tuple(rng.choice((FREE, 0, 1)) for _ in range(N))))
            b1, b2 = rng.randint(0, 9), rng.randint(0, 9)
        else:
            levels = sorted(rng.sample(range(0, 8), 4 if kind == "moduli" else 3), reverse=True)
            if kind == "moduli":
                factors = [ModuliSymbol(a, b) for a, b in zip(levels, levels[1:])]
                b1, b2 = levels[1], levels[2]
            else:
                N = rng.randint(1, 4)
                Q = CubeFace(tuple(rng.choice((FREE, 0, 1)) for _ in range(N)))
                factors = [Q] + [ModuliSymbol(a, b) for a, b in zip(levels, levels[1:])]
                b1, b2 = levels[0], levels[1]
        ctx = BaseDims(dims)
        left = Node(Node(Leaf(factors[0]), Leaf(factors[1]), b1), Leaf(factors[2]), b2)
        right = Node(Leaf(factors[0]), Node(Leaf(factors[1]), Leaf(factors[2]), b2), b1)
        yield left, right, ctx
        made += 1


def face_dd_failures(max_N=6, sign_variant="standard"):
    """Faces whose double boundary fails to vanish under a sign variant."""
    dims = BaseDims({})
    bad = []
    for face in iter_face_cases(max_N):
        dd = chain_boundary(cube_boundary(face), dims, sign_variant)
        if dd:
            bad.append(face)
    return bad


def moduli_dd_failures(max_i=6, sign_variant="standard"):
    bad = []
    for i, j, dims in iter_moduli_cases(max_i):
        d1 = moduli_boundary(i, j, dims, sign_variant)
        dd = chain_boundary(d1, dims, sign_variant)
        if dd:
            bad.append((i, j, dims.dims))
    return bad


def word_dd_failures(count=1000, sign_variant="standard"):
    bad = []
    for word, dims in random_fibered_words(count):
        dd = chain_boundary(word_boundary(word, dims, sign_variant), dims, sign_variant)
        if dd:
            bad.append(word)
    return bad


def associativity_failures(count=1000, sign_variant="standard"):
    bad = []
    for left, right, dims in random_three_factor_trees(count):
        if tree_boundary(left, dims, sign_variant) != tree_boundary(right, dims, sign_variant):
            bad.append((left, right))
    return bad
