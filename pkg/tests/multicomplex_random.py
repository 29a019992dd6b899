"""Seeded random multicomplexes with the defining relations guaranteed.

Construction: start from a direct sum of elementary pieces (a lone bigraded
generator, or a pair g -> n g' dropping total degree by one and filtration
level by some j >= 0), then change basis degreewise by unimodular matrices
that are block-triangular with respect to the filtration.  Triangular basis
changes preserve the "d_j only lowers p" support, and conjugation preserves
sum d_i d_j = 0 exactly.
"""

import random

from mbhlab.exact import IntegerMatrix
from mbhlab.multicomplex import Multicomplex


def _filtered_unimodular(rng, levels):
    """Unimodular S with S[j][i] != 0 only when levels[j] <= levels[i], plus
    its inverse.  Columns are new basis vectors: each may only mix in
    generators of lower-or-equal filtration level, so conjugating by S keeps
    every differential filtration-decreasing."""
    n = len(levels)
    S = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Sinv = [row[:] for row in S]
    for _ in range(3 * n):
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j or levels[j] > levels[i]:
            continue
        c = rng.randint(-2, 2)
        if c == 0:
            continue
        # column op: col_i += c * col_j ;  inverse: row_j -= c * row_i
        for k in range(n):
            S[k][i] += c * S[k][j]
        for k in range(n):
            Sinv[j][k] -= c * Sinv[i][k]
    return S, Sinv


def random_multicomplex(rng_or_seed, max_total_degree=6, pieces=8):
    rng = (
        rng_or_seed
        if isinstance(rng_or_seed, random.Random)
        else random.Random(rng_or_seed)
    )
    # generators[k] = list of filtration levels p, one per generator of (CX)_k
    generators = {k: [] for k in range(max_total_degree + 1)}
    arrows = []  # (k, src_idx, tgt_idx, coefficient): degree k -> k-1

    for _ in range(pieces):
        if rng.random() < 0.4:
            k = rng.randint(0, max_total_degree)
            p = rng.randint(0, k)
            generators[k].append(p)
        else:
            k = rng.randint(1, max_total_degree)
            p_src = rng.randint(0, k)
            j = rng.randint(0, p_src)
            p_tgt = p_src - j
            if p_tgt > k - 1:
                p_tgt = k - 1
            src = len(generators[k])
            generators[k].append(p_src)
            tgt = len(generators[k - 1])
            generators[k - 1].append(p_tgt)
            arrows.append((k, src, tgt, rng.choice([1, 1, 2, 3, -1])))

    # boundary matrices in the elementary basis
    mats = {}
    for k in range(1, max_total_degree + 1):
        rows = len(generators[k - 1])
        cols = len(generators[k])
        mat = [[0] * cols for _ in range(rows)]
        for (kk, src, tgt, coeff) in arrows:
            if kk == k:
                mat[tgt][src] = coeff
        mats[k] = mat

    # filtration-respecting change of basis per degree
    changes = {}
    for k, levels in generators.items():
        changes[k] = _filtered_unimodular(rng, levels)

    def matmul(A, B):
        if not A or not B or not B[0]:
            return [[0] * (len(B[0]) if B else 0) for _ in range(len(A))]
        return [
            [sum(A[i][t] * B[t][j] for t in range(len(B))) for j in range(len(B[0]))]
            for i in range(len(A))
        ]

    new_mats = {}
    for k in range(1, max_total_degree + 1):
        _, Sinv_tgt = changes[k - 1]
        S_src, _ = changes[k]
        if generators[k - 1] and generators[k]:
            new_mats[k] = matmul(matmul(Sinv_tgt, mats[k]), S_src)
        else:
            new_mats[k] = mats[k]

    # slice into bigraded ranks and d_j blocks
    ranks = {}
    order = {}  # (k, generator index) -> (p, offset within (p, k-p))
    for k, levels in generators.items():
        for idx, p in enumerate(levels):
            q = k - p
            ranks[(p, q)] = ranks.get((p, q), 0) + 1
            order[(k, idx)] = (p, ranks[(p, q)] - 1)

    diffs = {}
    for k in range(1, max_total_degree + 1):
        mat = new_mats[k]
        for src_idx, p_src in enumerate(generators[k]):
            for tgt_idx, p_tgt in enumerate(generators[k - 1]):
                val = mat[tgt_idx][src_idx]
                if val == 0:
                    continue
                j = p_src - p_tgt
                assert j >= 0, "filtration violated by construction"
                key = (j, p_src, k - p_src)
                if key not in diffs:
                    diffs[key] = [
                        [0] * ranks[(p_src, k - p_src)]
                        for _ in range(ranks[(p_tgt, k - 1 - p_tgt)])
                    ]
                _, roff = order[(k, src_idx)]
                _, coff = order[(k - 1, tgt_idx)]
                diffs[key][coff][roff] = val

    diff_mats = {
        key: IntegerMatrix(len(block), len(block[0]) if block else 0, block)
        for key, block in diffs.items()
    }
    return Multicomplex(ranks, diff_mats)
