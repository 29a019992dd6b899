import random

import pytest

from multicomplex_random import random_multicomplex
from mbhlab.errors import RelationFailure, ShapeMismatch
from mbhlab.exact import IntegerMatrix, betti_table, verify_complex
from mbhlab.multicomplex import (
    Multicomplex,
    assemble,
    multicomplex_from_document,
    multicomplex_to_document,
    verify_multicomplex,
)


def test_double_complex_passes():
    # anticommuting square: d0 on columns, d1 on rows, d0 d1 + d1 d0 = 0.
    ranks = {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    diffs = {
        (0, 0, 1): IntegerMatrix.from_rows([[1]]),
        (0, 1, 1): IntegerMatrix.from_rows([[1]]),
        (1, 1, 0): IntegerMatrix.from_rows([[1]]),
        (1, 1, 1): IntegerMatrix.from_rows([[-1]]),
    }
    X = Multicomplex(ranks, diffs)
    assert X.is_double_complex()
    assert verify_multicomplex(X) is None


def test_all_zero_differentials_pass():
    X = Multicomplex({(0, 0): 2, (1, 1): 3}, {})
    assert verify_multicomplex(X) is None


def test_d0_squared_nonzero_fails_at_n0():
    ranks = {(0, 0): 1, (0, 1): 1, (0, 2): 1}
    diffs = {
        (0, 0, 1): IntegerMatrix.from_rows([[1]]),
        (0, 0, 2): IntegerMatrix.from_rows([[1]]),
    }
    X = Multicomplex(ranks, diffs)
    failing = verify_multicomplex(X)
    assert failing and failing[0][0] == 0


def test_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        Multicomplex({(0, 0): 1, (0, 1): 2}, {(0, 0, 1): IntegerMatrix.from_rows([[1]])})


def test_assemble_single_column():
    # only p = 0: assembly is the column complex with d_0.
    ranks = {(0, 0): 1, (0, 1): 2, (0, 2): 1}
    d01 = IntegerMatrix.from_rows([[1, -1]])
    d02 = IntegerMatrix.from_rows([[1], [1]])
    X = Multicomplex(ranks, {(0, 0, 1): d01, (0, 0, 2): d02})
    asm = assemble(X)
    assert asm.complex.generators == (1, 2, 1)
    assert asm.complex.boundary_matrix(1) == d01
    assert asm.complex.boundary_matrix(2) == d02


def test_assemble_rejects_bad_relations():
    ranks = {(0, 0): 1, (0, 1): 1, (0, 2): 1}
    diffs = {
        (0, 0, 1): IntegerMatrix.from_rows([[1]]),
        (0, 0, 2): IntegerMatrix.from_rows([[1]]),
    }
    with pytest.raises(RelationFailure):
        assemble(Multicomplex(ranks, diffs))


def test_random_multicomplexes_assemble():
    rng = random.Random(99)
    for trial in range(60):
        X = random_multicomplex(rng)
        assert verify_multicomplex(X) is None, f"trial {trial}"
        asm = assemble(X)
        assert verify_complex(asm.complex) is None
        assert asm.filtration_respected()


def test_500_seeded_random_multicomplexes():
    # acceptance-scale inventory; seeds fixed for reproducibility
    for seed in range(500):
        X = random_multicomplex(seed)
        assert verify_multicomplex(X) is None
        asm = assemble(X)
        assert verify_complex(asm.complex) is None
        assert asm.filtration_respected()


def test_document_round_trip():
    X = random_multicomplex(7)
    doc = multicomplex_to_document(X)
    Y = multicomplex_from_document(doc)
    assert X.ranks == Y.ranks
    assert X.diffs == Y.diffs


def test_document_rejects_malformed():
    with pytest.raises(ShapeMismatch):
        multicomplex_from_document({"ranks": [{"p": 0}]})
    with pytest.raises(ShapeMismatch):
        multicomplex_from_document(
            {
                "ranks": [{"p": 0, "q": 0, "rank": 1}],
                "differentials": [
                    {"j": 0, "p": 0, "q": 0, "shape": [1, 1], "entries": [1, 2]}
                ],
            }
        )


def test_homology_of_assembled_matches_column_case():
    ranks = {(0, 0): 1, (0, 1): 1}
    X = Multicomplex(ranks, {(0, 0, 1): IntegerMatrix.from_rows([[0]])})
    asm = assemble(X)
    assert betti_table(asm.homology()) == (1, 1)
