"""First-quadrant multicomplexes: relation checking, diagonal assembly and
the filtration, plus homology of the assembled complex.

A multicomplex here is a bigraded family of free Z-modules X_{p,q} with maps
d_j : X_{p,q} -> X_{p-j, q+j-1} subject to  sum_{i+j=n} d_i d_j = 0  for all
n.  Assembly sums along diagonals, (CX)_k = sum_{p+q=k} X_{p,q}, with blocks
ordered by increasing p; the filtration by p <= s is then automatic block
lower-triangularity, which is still verified explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

from .errors import ShapeMismatch
from .exact import (
    GradedChainComplex,
    IntegerMatrix,
    homology,
    verify_complex,
)

__all__ = [
    "Multicomplex",
    "AssembledComplex",
    "verify_multicomplex",
    "assemble",
    "multicomplex_from_document",
    "multicomplex_to_document",
]


class Multicomplex:
    """Bigraded generator counts plus differentials d_j.

    ``ranks`` maps (p, q) -> generator count (missing means 0);
    ``diffs`` maps (j, p, q) -> IntegerMatrix from X_{p,q} to
    X_{p-j, q+j-1}.  Matrices into or out of zero-rank positions may be
    omitted.
    """

    def __init__(self, ranks: Dict[Tuple[int, int], int], diffs: Dict[Tuple[int, int, int], IntegerMatrix]):
        self.ranks = {pq: int(r) for pq, r in ranks.items() if r}
        for (p, q), r in self.ranks.items():
            if p < 0 or q < 0 or r < 0:
                raise ShapeMismatch(f"invalid support at {(p, q)} with rank {r}")
        self.diffs = {}
        for (j, p, q), mat in diffs.items():
            if j < 0:
                raise ShapeMismatch(f"d_{j} is not a differential label")
            src = self.rank(p, q)
            tgt_p, tgt_q = p - j, q + j - 1
            tgt = self.rank(tgt_p, tgt_q)
            if mat.rows != tgt or mat.cols != src:
                raise ShapeMismatch(
                    f"d_{j} at {(p, q)} has shape {mat.rows}x{mat.cols}, expected {tgt}x{src}"
                )
            if tgt_p < 0 or tgt_q < 0:
                if not mat.is_zero():
                    raise ShapeMismatch(f"d_{j} at {(p, q)} leaves the first quadrant")
                continue
            if src and tgt:
                self.diffs[(j, p, q)] = mat

    def rank(self, p: int, q: int) -> int:
        if p < 0 or q < 0:
            return 0
        return self.ranks.get((p, q), 0)

    def d(self, j: int, p: int, q: int) -> IntegerMatrix:
        mat = self.diffs.get((j, p, q))
        if mat is not None:
            return mat
        return IntegerMatrix.zeros(self.rank(p - j, q + j - 1), self.rank(p, q))

    @property
    def max_total_degree(self) -> int:
        return max((p + q for p, q in self.ranks), default=0)

    def positions(self):
        return sorted(self.ranks)

    def is_double_complex(self) -> bool:
        return all(j <= 1 for (j, _, _) in self.diffs)


def verify_multicomplex(X: Multicomplex):
    """Exact check of sum_{i+j=n} d_i d_j = 0 at every bidegree.

    Returns None on success, else the tuple of failing (n, (p, q)) pairs
    where (p, q) is the source bidegree of the composite.
    """
    failing = []
    top = X.max_total_degree
    for (p, q) in X.positions():
        for n in range(0, top + 2):
            tgt_p, tgt_q = p - n, q + n - 2
            if X.rank(tgt_p, tgt_q) == 0:
                continue
            total = IntegerMatrix.zeros(X.rank(tgt_p, tgt_q), X.rank(p, q))
            for j in range(0, n + 1):
                i = n - j
                mid_p, mid_q = p - j, q + j - 1
                if X.rank(mid_p, mid_q) == 0:
                    continue
                total = total + (X.d(i, mid_p, mid_q) @ X.d(j, p, q))
            if not total.is_zero():
                failing.append((n, (p, q)))
    return tuple(failing) if failing else None


@dataclass
class AssembledComplex:
    """The filtered chain complex of a multicomplex.

    ``blocks[k]`` lists the (p, q) bidegrees contributing to degree k in
    increasing p; ``offsets[k]`` maps each bidegree to its first generator
    index inside (CX)_k.
    """

    complex: GradedChainComplex
    blocks: dict
    offsets: dict

    def filtration_respected(self) -> bool:
        """No boundary entry maps a generator to a higher filtration level."""
        for k in range(1, self.complex.max_degree + 1):
            mat = self.complex.boundary_matrix(k)
            for (p_src, q_src) in self.blocks.get(k, []):
                src0 = self.offsets[k][(p_src, q_src)]
                width = self._block_width(k, (p_src, q_src))
                for (p_tgt, q_tgt) in self.blocks.get(k - 1, []):
                    if p_tgt <= p_src:
                        continue
                    tgt0 = self.offsets[k - 1][(p_tgt, q_tgt)]
                    for r in range(tgt0, tgt0 + self._block_width(k - 1, (p_tgt, q_tgt))):
                        for c in range(src0, src0 + width):
                            if mat.data[r][c] != 0:
                                return False
        return True

    def _block_width(self, k, pq):
        blocks = self.blocks[k]
        idx = blocks.index(pq)
        start = self.offsets[k][pq]
        if idx + 1 < len(blocks):
            return self.offsets[k][blocks[idx + 1]] - start
        return self.complex.generators[k] - start

    def homology(self, coefficients: str = "z"):
        return homology(self.complex, coefficients)


def assemble(X: Multicomplex) -> AssembledComplex:
    """Assemble along diagonals; the multicomplex relations are re-verified
    numerically on the assembled boundary (d.d = 0)."""
    failing = verify_multicomplex(X)
    if failing:
        from .errors import RelationFailure

        raise RelationFailure(f"multicomplex relations fail at {failing}")

    top = X.max_total_degree
    blocks = {}
    offsets = {}
    gens = []
    for k in range(top + 1):
        diag = [(p, k - p) for p in range(0, k + 1) if X.rank(p, k - p)]
        blocks[k] = diag
        offsets[k] = {}
        total = 0
        for pq in diag:
            offsets[k][pq] = total
            total += X.rank(*pq)
        gens.append(total)

    boundary = {}
    for k in range(1, top + 1):
        rows = gens[k - 1]
        cols = gens[k]
        mat = [[0] * cols for _ in range(rows)]
        for (p, q) in blocks[k]:
            src0 = offsets[k][(p, q)]
            for j in range(0, p + 1):
                tgt = (p - j, q + j - 1)
                if tgt not in offsets[k - 1]:
                    continue
                block = X.d(j, p, q)
                if block.is_zero():
                    continue
                tgt0 = offsets[k - 1][tgt]
                for r in range(block.rows):
                    row = mat[tgt0 + r]
                    brow = block.data[r]
                    for c in range(block.cols):
                        row[src0 + c] += brow[c]
            # j ranges over all labels that stay in the quadrant; d_j with
            # j > p would leave it and must be zero, which Multicomplex
            # construction already enforced.
        boundary[k] = IntegerMatrix(rows, cols, mat)

    complex_ = GradedChainComplex(gens, boundary)
    bad = verify_complex(complex_)
    if bad:
        from .errors import RelationFailure

        raise RelationFailure(f"assembled boundary fails d.d = 0 in degrees {bad}")
    return AssembledComplex(complex_, blocks, offsets)


# ---------------------------------------------------------------------------
# symbolic-mode document format
# ---------------------------------------------------------------------------


def multicomplex_from_document(doc: dict) -> Multicomplex:
    """Parse the symbolic-mode JSON document.

    Format::

        {
          "ranks": [ {"p": 0, "q": 0, "rank": 2}, ... ],
          "differentials": [
            {"j": 1, "p": 1, "q": 0, "shape": [rows, cols],
             "entries": [ ... row-major integers ... ]},
            ...
          ]
        }
    """
    try:
        ranks = {(int(r["p"]), int(r["q"])): int(r["rank"]) for r in doc["ranks"]}
        diffs = {}
        for item in doc.get("differentials", []):
            rows, cols = (int(x) for x in item["shape"])
            entries = [int(x) for x in item["entries"]]
            if len(entries) != rows * cols:
                raise ShapeMismatch(
                    f"differential entry count {len(entries)} != {rows}x{cols}"
                )
            mat = IntegerMatrix(rows, cols, [entries[i * cols:(i + 1) * cols] for i in range(rows)])
            diffs[(int(item["j"]), int(item["p"]), int(item["q"]))] = mat
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeMismatch(f"malformed multicomplex document: {exc}") from exc
    return Multicomplex(ranks, diffs)


def multicomplex_to_document(X: Multicomplex) -> dict:
    ranks = [
        {"p": p, "q": q, "rank": X.rank(p, q)} for (p, q) in X.positions()
    ]
    diffs = []
    for (j, p, q) in sorted(X.diffs):
        mat = X.diffs[(j, p, q)]
        diffs.append(
            {
                "j": j,
                "p": p,
                "q": q,
                "shape": [mat.rows, mat.cols],
                "entries": [x for row in mat.data for x in row],
            }
        )
    return {"ranks": ranks, "differentials": diffs}
