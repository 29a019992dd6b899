"""Exact integer linear algebra and homology of finitely generated chain
complexes over Z and over the field with two elements.

Everything in this module is pure Python integer arithmetic; no floats enter
anywhere.  Matrices are immutable.  The Smith normal form uses a fixed pivot
rule (smallest nonzero absolute value, then row-major position) so that the
output of every operation is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import NotAComplex

__all__ = [
    "IntegerMatrix",
    "SNFDecomposition",
    "GradedChainComplex",
    "HomologyResult",
    "smith_normal_form",
    "rank_fraction_free",
    "rank_mod2",
    "homology",
    "verify_complex",
]


class IntegerMatrix:
    """Immutable matrix of arbitrary-precision integers.

    The 0 x n and n x 0 matrices are valid; they behave as expected under
    multiplication and rank computations.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, entries: Iterable[Iterable[int]]):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        data = tuple(tuple(int(x) for x in row) for row in entries)
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError(f"entries do not have shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_rows(cls, entries: Sequence[Sequence[int]]) -> "IntegerMatrix":
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        return cls(rows, cols, entries)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntegerMatrix":
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "IntegerMatrix":
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntegerMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"IntegerMatrix({self.rows}x{self.cols}, {list(map(list, self.data))})"

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        ot = other.data
        out = []
        for row in self.data:
            out.append(
                [
                    sum(row[k] * ot[k][j] for k in range(self.cols))
                    for j in range(other.cols)
                ]
            )
        return IntegerMatrix(self.rows, other.cols, out)

    def __neg__(self) -> "IntegerMatrix":
        return IntegerMatrix(self.rows, self.cols, [[-x for x in row] for row in self.data])

    def __add__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in addition")
        return IntegerMatrix(
            self.rows,
            self.cols,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix(self.cols, self.rows, list(zip(*self.data)) if self.rows else [[] for _ in range(self.cols)])

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.data)

    def to_lists(self) -> list:
        return [list(row) for row in self.data]

    def determinant(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(row) for row in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                pivot_row = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if pivot_row is None:
                    return 0
                a[k], a[pivot_row] = a[pivot_row], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SNFDecomposition:
    """U @ A @ V = D with U, V unimodular and D in Smith normal form.

    ``diagonal`` lists min(rows, cols) nonnegative integers: the positive
    invariant factors d_1 | d_2 | ... | d_r followed by trailing zeros.
    """

    U: IntegerMatrix
    D: IntegerMatrix
    V: IntegerMatrix
    diagonal: tuple

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def torsion(self) -> tuple:
        return tuple(d for d in self.diagonal if d > 1)


def _pivot(a, t, rows, cols):
    """Smallest nonzero |entry| in the trailing submatrix, then row-major."""
    best = None
    for i in range(t, rows):
        for j in range(t, cols):
            v = a[i][j]
            if v != 0 and (best is None or abs(v) < abs(best[2])):
                best = (i, j, v)
                if abs(v) == 1:
                    return best
    return best


def smith_normal_form(A: IntegerMatrix) -> SNFDecomposition:
    """Smith normal form over Z by row/column reduction.

    Total function: any shape (including empty) is accepted.  Deterministic
    for a given input thanks to the fixed pivot rule.
    """
    rows, cols = A.rows, A.cols
    a = [list(row) for row in A.data]
    u = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    v = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def row_swap(i1, i2):
        a[i1], a[i2] = a[i2], a[i1]
        u[i1], u[i2] = u[i2], u[i1]

    def col_swap(j1, j2):
        for r in a:
            r[j1], r[j2] = r[j2], r[j1]
        for r in v:
            r[j1], r[j2] = r[j2], r[j1]

    def row_add(dst, src, c):
        # row[dst] += c * row[src]
        ad, asrc = a[dst], a[src]
        for j in range(cols):
            ad[j] += c * asrc[j]
        ud, usrc = u[dst], u[src]
        for j in range(rows):
            ud[j] += c * usrc[j]

    def col_add(dst, src, c):
        for r in a:
            r[dst] += c * r[src]
        for r in v:
            r[dst] += c * r[src]

    def row_negate(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    n = min(rows, cols)
    while t < n:
        piv = _pivot(a, t, rows, cols)
        if piv is None:
            break
        pi, pj, _ = piv
        if pi != t:
            row_swap(t, pi)
        if pj != t:
            col_swap(t, pj)

        # Clear row/column t; the pivot shrinks each pass, so this ends.
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    row_add(i, t, -q)
                    if a[i][t] != 0:
                        # Remainder is strictly smaller; promote it to pivot.
                        row_swap(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    col_add(j, t, -q)
                    if a[t][j] != 0:
                        col_swap(t, j)
                        dirty = True
            if not dirty and all(a[i][t] == 0 for i in range(t + 1, rows)) and all(
                a[t][j] == 0 for j in range(t + 1, cols)
            ):
                break

        if a[t][t] < 0:
            row_negate(t)

        # Divisibility: pivot must divide every trailing entry.
        offender = None
        d = a[t][t]
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % d != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_add(t, offender, 1)
            continue  # redo position t with the enlarged row
        t += 1

    diagonal = tuple(a[i][i] for i in range(n))
    return SNFDecomposition(
        U=IntegerMatrix(rows, rows, u),
        D=IntegerMatrix(rows, cols, a),
        V=IntegerMatrix(cols, cols, v),
        diagonal=diagonal,
    )


def rank_fraction_free(A: IntegerMatrix) -> int:
    """Rank over the rationals by Bareiss fraction-free elimination.

    Independent of the Smith normal form code path; used to cross-check it.
    """
    rows, cols = A.rows, A.cols
    a = [list(row) for row in A.data]
    rank = 0
    prev = 1
    r = 0
    for c in range(cols):
        pivot_row = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                a[i][j] = (a[i][j] * a[r][c] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        rank += 1
        if r == rows:
            break
    return rank


def rank_mod2(A: IntegerMatrix) -> int:
    """Rank over GF(2), rows packed into Python ints as bit masks."""
    rows = []
    for row in A.data:
        bits = 0
        for j, x in enumerate(row):
            if x & 1:
                bits |= 1 << j
        rows.append(bits)
    rank = 0
    for col in range(A.cols):
        mask = 1 << col
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


class GradedChainComplex:
    """Finitely generated chain complex over Z.

    ``boundary[k]`` maps degree k to degree k-1 and has shape
    generators[k-1] x generators[k].  Degrees outside [0, max_degree] are
    zero.  The d.d = 0 condition is *checked* by :func:`verify_complex`, not
    assumed.
    """

    def __init__(self, generators: Sequence[int], boundary: dict):
        self.generators = tuple(int(g) for g in generators)
        self.max_degree = len(self.generators) - 1
        bnd = {}
        for k in range(1, self.max_degree + 1):
            mat = boundary.get(k)
            if mat is None:
                mat = IntegerMatrix.zeros(self.generators[k - 1], self.generators[k])
            if mat.rows != self.generators[k - 1] or mat.cols != self.generators[k]:
                raise ValueError(
                    f"boundary[{k}] has shape {mat.rows}x{mat.cols}, "
                    f"expected {self.generators[k - 1]}x{self.generators[k]}"
                )
            bnd[k] = mat
        extra = set(boundary) - set(bnd)
        if any(not boundary[k].is_zero() for k in extra):
            raise ValueError(f"nonzero boundary outside degrees 1..{self.max_degree}")
        self.boundary = bnd

    def boundary_matrix(self, k: int) -> IntegerMatrix:
        if 1 <= k <= self.max_degree:
            return self.boundary[k]
        rows = self.generators[k - 1] if 0 <= k - 1 <= self.max_degree else 0
        cols = self.generators[k] if 0 <= k <= self.max_degree else 0
        return IntegerMatrix.zeros(rows, cols)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GradedChainComplex)
            and self.generators == other.generators
            and self.boundary == other.boundary
        )


@dataclass(frozen=True)
class HomologyResult:
    """Per-degree Betti rank and torsion coefficients.

    betti = generators[k] - rank d_k - rank d_{k+1} over the rationals;
    torsion lists the invariant factors of d_{k+1} exceeding 1, in
    divisibility order (not factored into prime powers).
    """

    degree: int
    betti: int
    torsion: tuple

    def as_tuple(self):
        return (self.betti, self.torsion)


def verify_complex(C: GradedChainComplex):
    """Exact check of d_{k-1} . d_k = 0 for every degree.

    Returns None when the complex is valid, otherwise the tuple of failing
    degrees k (meaning boundary[k-1] @ boundary[k] != 0).
    """
    failing = []
    for k in range(2, C.max_degree + 1):
        if not (C.boundary_matrix(k - 1) @ C.boundary_matrix(k)).is_zero():
            failing.append(k)
    return tuple(failing) if failing else None


def homology(C: GradedChainComplex, coefficients: str = "z"):
    """Homology of a verified chain complex.

    coefficients="z": per-degree Betti rank plus torsion coefficients.
    coefficients="z2": ranks over the two-element field (torsion empty).

    Raises NotAComplex when d.d != 0 somewhere; this error doubles as a test
    hook for upstream pipelines.
    """
    failing = verify_complex(C)
    if failing:
        raise NotAComplex(failing)
    if coefficients not in ("z", "z2"):
        raise ValueError(f"unknown coefficient ring {coefficients!r}")

    results = []
    if coefficients == "z2":
        ranks = {k: rank_mod2(C.boundary_matrix(k)) for k in range(1, C.max_degree + 2)}
        for k in range(C.max_degree + 1):
            betti = C.generators[k] - ranks.get(k, 0) - ranks.get(k + 1, 0)
            results.append(HomologyResult(degree=k, betti=betti, torsion=()))
        return results

    snfs = {k: smith_normal_form(C.boundary_matrix(k)) for k in range(1, C.max_degree + 2)}
    for k in range(C.max_degree + 1):
        r_in = snfs[k + 1].rank if k + 1 in snfs else 0
        r_out = snfs[k].rank if k in snfs else 0
        betti = C.generators[k] - r_out - r_in
        torsion = snfs[k + 1].torsion if k + 1 in snfs else ()
        results.append(HomologyResult(degree=k, betti=betti, torsion=torsion))
    return results


def betti_table(results) -> tuple:
    """Convenience: the tuple of Betti numbers of a homology computation."""
    return tuple(r.betti for r in results)
