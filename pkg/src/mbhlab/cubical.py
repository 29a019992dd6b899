"""Abstract topological chains at desk scale.

Three layers live here:

* faces of the N-cube with the signed boundary
  d(P) = sum_j (-1)^j [P|_{x_j=1} - P|_{x_j=0}]  over free coordinates x_j;
* purely formal fibered-product words
  Q x_B M(B_i1, B_i2) x_B ...  with the Koszul-type signs on boundaries of
  fibered products and of moduli-of-flow-lines symbols;
* finite cubical complexes (elementary cubes on a grid, optionally periodic
  per axis) whose homology is computed exactly.

The fibered-product layer is sign bookkeeping only; the symbols carry no
point-set content.  Both sign rules accept a ``sign_variant`` override used
by the mutation tests that confirm the signs cannot be dropped.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import DegreeZero, NotFaceClosed
from .exact import GradedChainComplex, IntegerMatrix, homology

__all__ = [
    "FREE",
    "CubeFace",
    "FormalChain",
    "cube_boundary",
    "ModuliSymbol",
    "Word",
    "BaseDims",
    "degree_of",
    "moduli_boundary",
    "fibered_boundary",
    "word_boundary",
    "chain_boundary",
    "Node",
    "Leaf",
    "tree_boundary",
    "Cube",
    "CubicalComplex",
    "cubical_homology",
]

FREE = -1

STANDARD = "standard"
NO_MODULI_SIGN = "no-moduli-sign"
NO_JUNCTION_SIGN = "no-junction-sign"


# ---------------------------------------------------------------------------
# cube faces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubeFace:
    """A face of I^N: each coordinate free (-1) or fixed to 0/1."""

    states: tuple

    def __post_init__(self):
        if any(s not in (FREE, 0, 1) for s in self.states):
            raise ValueError("states must be -1 (free), 0 or 1")

    @classmethod
    def full_cube(cls, N: int) -> "CubeFace":
        return cls((FREE,) * N)

    @property
    def N(self) -> int:
        return len(self.states)

    @property
    def degree(self) -> int:
        return sum(1 for s in self.states if s == FREE)

    def free_positions(self) -> tuple:
        return tuple(i for i, s in enumerate(self.states) if s == FREE)

    def fix(self, position: int, value: int) -> "CubeFace":
        states = list(self.states)
        assert states[position] == FREE
        states[position] = value
        return CubeFace(tuple(states))

    def __repr__(self):
        sym = {FREE: "*", 0: "0", 1: "1"}
        return "Face[" + "".join(sym[s] for s in self.states) + "]"


class FormalChain:
    """Formal integer combination of hashable generators of one degree."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = {}
        if terms:
            for g, c in terms.items():
                if c:
                    self.terms[g] = self.terms.get(g, 0) + c
            self.terms = {g: c for g, c in self.terms.items() if c}

    @classmethod
    def zero(cls) -> "FormalChain":
        return cls()

    @classmethod
    def of(cls, gen, coeff: int = 1) -> "FormalChain":
        return cls({gen: coeff})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, FormalChain) and self.terms == other.terms

    def __add__(self, other: "FormalChain") -> "FormalChain":
        out = dict(self.terms)
        for g, c in other.terms.items():
            out[g] = out.get(g, 0) + c
        return FormalChain(out)

    def __mul__(self, scalar: int) -> "FormalChain":
        return FormalChain({g: scalar * c for g, c in self.terms.items()})

    __rmul__ = __mul__

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: repr(kv[0])))

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*{g!r}" for g, c in self)


def cube_boundary(P: CubeFace) -> FormalChain:
    """Signed boundary of a single cube face over its free coordinates.

    Raises DegreeZero for a vertex (boundary is zero by convention; callers
    working at chain level use :func:`chain_boundary`).
    """
    if P.degree == 0:
        raise DegreeZero("boundary of a zero-dimensional face")
    out = {}
    for j, pos in enumerate(P.free_positions(), start=1):
        sign = (-1) ** j
        top = P.fix(pos, 1)
        bottom = P.fix(pos, 0)
        out[top] = out.get(top, 0) + sign
        out[bottom] = out.get(bottom, 0) - sign
    return FormalChain(out)


# ---------------------------------------------------------------------------
# formal fibered-product words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuliSymbol:
    """Formal symbol for the compactified space of flow lines from the
    index-``upper`` critical level down to index ``lower``."""

    upper: int
    lower: int

    def __post_init__(self):
        if not self.upper > self.lower >= 0:
            raise ValueError("need upper > lower >= 0")

    def __repr__(self):
        return f"M({self.upper},{self.lower})"


@dataclass(frozen=True)
class Word:
    """Flat fibered-product word: factors joined over base levels.

    ``bases`` has one entry per junction (len(factors) - 1); each entry is a
    level whose dimension is looked up in a :class:`BaseDims` context.
    """

    factors: tuple
    bases: tuple

    def __post_init__(self):
        if len(self.bases) != max(len(self.factors) - 1, 0):
            raise ValueError("need one base per junction")

    def __repr__(self):
        parts = [repr(self.factors[0])]
        for b, f in zip(self.bases, self.factors[1:]):
            parts.append(f"x_B{b} {f!r}")
        return "<" + " ".join(parts) + ">"


class BaseDims:
    """Dimension context: level -> dimension, or None for an empty level."""

    def __init__(self, dims: dict):
        self.dims = dict(dims)

    def dim(self, level: int) -> Optional[int]:
        return self.dims.get(level)

    def is_empty(self, level: int) -> bool:
        return self.dims.get(level) is None


def degree_of(gen, dims: BaseDims) -> int:
    """Degree of a face, symbol or word.

    deg M(B_i, B_{i-j}) = j + dim(B_i) - 1; a fibered product loses the base
    dimension at each junction.
    """
    if isinstance(gen, CubeFace):
        return gen.degree
    if isinstance(gen, ModuliSymbol):
        b = dims.dim(gen.upper)
        if b is None:
            raise ValueError(f"degree of a symbol over the empty level {gen.upper}")
        return (gen.upper - gen.lower) + b - 1
    if isinstance(gen, Word):
        total = sum(degree_of(f, dims) for f in gen.factors)
        return total - sum(dims.dim(b) for b in gen.bases)
    raise TypeError(f"unknown generator {gen!r}")


def _as_flat(gen):
    """View any generator as (factors, bases)."""
    if isinstance(gen, Word):
        return gen.factors, gen.bases
    return (gen,), ()


def _make_word(factors, bases) -> object:
    if len(factors) == 1:
        return factors[0]
    return Word(tuple(factors), tuple(bases))


def _concat(gen_left, base, gen_right):
    fl, bl = _as_flat(gen_left)
    fr, br = _as_flat(gen_right)
    return _make_word(fl + fr, bl + (base,) + br)


def moduli_boundary(i: int, j: int, dims: BaseDims, sign_variant: str = STANDARD) -> FormalChain:
    """Boundary of the flow-moduli symbol M(B_i, B_{i-j}):

        (-1)^{i + b_i} sum_{i-j < n < i}  M(B_i, B_n) x_{B_n} M(B_n, B_{i-j})

    with terms over empty intermediate levels dropped.  The ``j = 1`` range is
    empty, so those symbols are boundaryless.
    """
    if not 1 <= j <= i:
        raise ValueError("need 1 <= j <= i")
    if dims.is_empty(i) or dims.is_empty(i - j):
        return FormalChain.zero()
    b_i = dims.dim(i)
    sign = 1 if sign_variant == NO_MODULI_SIGN else (-1) ** (i + b_i)
    out = FormalChain.zero()
    for n in range(i - j + 1, i):
        if dims.is_empty(n):
            continue
        word = _concat(ModuliSymbol(i, n), n, ModuliSymbol(n, i - j))
        out = out + FormalChain.of(word, sign)
    return out


def _factor_boundary(factor, dims: BaseDims, sign_variant: str) -> FormalChain:
    if isinstance(factor, CubeFace):
        if factor.degree == 0:
            return FormalChain.zero()
        return cube_boundary(factor)
    if isinstance(factor, ModuliSymbol):
        return moduli_boundary(factor.upper, factor.upper - factor.lower, dims, sign_variant)
    raise TypeError(f"cannot differentiate {factor!r}")


# association trees, used to state and test associativity of the boundary


@dataclass(frozen=True)
class Leaf:
    factor: object


@dataclass(frozen=True)
class Node:
    left: object
    right: object
    base: int


def _tree_degree(tree, dims: BaseDims) -> int:
    if isinstance(tree, Leaf):
        return degree_of(tree.factor, dims)
    return _tree_degree(tree.left, dims) + _tree_degree(tree.right, dims) - dims.dim(tree.base)


def _tree_flatten(tree):
    if isinstance(tree, Leaf):
        return _as_flat(tree.factor)
    fl, bl = _tree_flatten(tree.left)
    fr, br = _tree_flatten(tree.right)
    return fl + fr, bl + (tree.base,) + br


def tree_boundary(tree, dims: BaseDims, sign_variant: str = STANDARD) -> FormalChain:
    """Boundary of a parenthesized fibered product:

        d(P1 x_B P2) = dP1 x_B P2 + (-1)^{p1 + b} P1 x_B dP2

    with p1 the degree of the left factor group and b = dim B.  The result is
    flattened to :class:`Word` generators, so different parenthesizations can
    be compared directly.
    """
    if isinstance(tree, Leaf):
        return _factor_boundary(tree.factor, dims, sign_variant)
    p1 = _tree_degree(tree.left, dims)
    b = dims.dim(tree.base)
    if b is None:
        return FormalChain.zero()
    sign = 1 if sign_variant == NO_JUNCTION_SIGN else (-1) ** (p1 + b)

    right_flat = _tree_flatten(tree.right)
    left_flat = _tree_flatten(tree.left)

    out = {}
    for gen, coeff in tree_boundary(tree.left, dims, sign_variant).terms.items():
        fl, bl = _as_flat(gen)
        word = _make_word(fl + right_flat[0], bl + (tree.base,) + right_flat[1])
        out[word] = out.get(word, 0) + coeff
    for gen, coeff in tree_boundary(tree.right, dims, sign_variant).terms.items():
        fr, br = _as_flat(gen)
        word = _make_word(left_flat[0] + fr, left_flat[1] + (tree.base,) + br)
        out[word] = out.get(word, 0) + sign * coeff
    return FormalChain(out)


def _left_tree(factors, bases):
    tree = Leaf(factors[0])
    for base, factor in zip(bases, factors[1:]):
        tree = Node(tree, Leaf(factor), base)
    return tree


def word_boundary(gen, dims: BaseDims, sign_variant: str = STANDARD) -> FormalChain:
    """Boundary of a flat word (canonical left association)."""
    factors, bases = _as_flat(gen)
    return tree_boundary(_left_tree(factors, bases), dims, sign_variant)


def fibered_boundary(P1, P2, base: int, dims: BaseDims, sign_variant: str = STANDARD) -> FormalChain:
    """Boundary of the single-junction fibered product P1 x_B P2."""
    return tree_boundary(Node(Leaf(P1), Leaf(P2), base), dims, sign_variant)


def chain_boundary(chain: FormalChain, dims: BaseDims, sign_variant: str = STANDARD) -> FormalChain:
    out = FormalChain.zero()
    for gen, coeff in chain.terms.items():
        out = out + coeff * word_boundary(gen, dims, sign_variant)
    return out


# ---------------------------------------------------------------------------
# finite cubical complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cube:
    """Elementary cube on an integer grid: anchor corner plus 0/1 extents."""

    anchor: tuple
    extent: tuple

    @property
    def dim(self) -> int:
        return sum(self.extent)

    def __repr__(self):
        spans = [
            f"[{a},{a + e}]" if e else f"[{a}]"
            for a, e in zip(self.anchor, self.extent)
        ]
        return "Cube(" + "x".join(spans) + ")"


class CubicalComplex:
    """Finite set of elementary cubes closed under faces.

    ``periods[axis]`` is None for a plain grid axis or an integer n for a
    circular axis with coordinates mod n.  Elementary cubes are nondegenerate
    by construction (no free coordinate of a stored cube is collapsed), which
    realizes the quotient by degenerate chains at this scale.
    """

    def __init__(self, cubes: Iterable[Cube], periods: Sequence[Optional[int]]):
        self.periods = tuple(periods)
        self.cubes = frozenset(self._normalize(c) for c in cubes)
        if not self.cubes:
            raise ValueError("empty complex")
        ambient = {len(c.anchor) for c in self.cubes}
        if ambient != {len(self.periods)}:
            raise ValueError("cube arity does not match the period vector")
        self.dim = max(c.dim for c in self.cubes)

    def _normalize(self, cube: Cube) -> Cube:
        anchor = tuple(
            a % p if p else a for a, p in zip(cube.anchor, self.periods)
        )
        return Cube(anchor, tuple(cube.extent))

    @classmethod
    def from_top_cells(cls, cells: Iterable[Cube], periods: Sequence[Optional[int]]) -> "CubicalComplex":
        periods = tuple(periods)
        todo = list(cells)
        seen = set()
        while todo:
            cube = todo.pop()
            cube = Cube(
                tuple(a % p if p else a for a, p in zip(cube.anchor, periods)),
                cube.extent,
            )
            if cube in seen:
                continue
            seen.add(cube)
            for face, _ in _cube_faces(cube, periods):
                todo.append(face)
        return cls(seen, periods)

    @classmethod
    def vertex(cls) -> "CubicalComplex":
        return cls([Cube((0,), (0,))], (None,))

    @classmethod
    def circle(cls, n: int = 4) -> "CubicalComplex":
        """Circular grid with n vertices and n edges (n >= 3)."""
        if n < 3:
            raise ValueError("need at least 3 vertices")
        edges = [Cube((k,), (1,)) for k in range(n)]
        return cls.from_top_cells(edges, (n,))

    @classmethod
    def square_boundary(cls) -> "CubicalComplex":
        """The boundary of the unit grid square: 4 vertices, 4 edges."""
        cells = [
            Cube((0, 0), (1, 0)),
            Cube((0, 1), (1, 0)),
            Cube((0, 0), (0, 1)),
            Cube((1, 0), (0, 1)),
        ]
        return cls.from_top_cells(cells, (None, None))

    @classmethod
    def cube_surface(cls) -> "CubicalComplex":
        """The boundary of the unit 3-cube: the minimal sphere model."""
        cells = []
        for axis in range(3):
            for side in (0, 1):
                anchor = [0, 0, 0]
                extent = [1, 1, 1]
                anchor[axis] = side
                extent[axis] = 0
                cells.append(Cube(tuple(anchor), tuple(extent)))
        return cls.from_top_cells(cells, (None, None, None))

    @classmethod
    def torus(cls, n1: int = 4, n2: int = 4) -> "CubicalComplex":
        return cls.circle(n1).product(cls.circle(n2))

    def product(self, other: "CubicalComplex") -> "CubicalComplex":
        cubes = [
            Cube(c1.anchor + c2.anchor, c1.extent + c2.extent)
            for c1 in self.cubes
            for c2 in other.cubes
        ]
        return CubicalComplex(cubes, self.periods + other.periods)

    def cells(self, d: int) -> list:
        return sorted(
            (c for c in self.cubes if c.dim == d),
            key=lambda c: (c.anchor, c.extent),
        )

    def boundary_terms(self, cube: Cube) -> list:
        return _cube_faces(self._normalize(cube), self.periods)

    def is_face_closed(self) -> bool:
        for cube in self.cubes:
            for face, _ in self.boundary_terms(cube):
                if face not in self.cubes:
                    return False
        return True

    def fundamental_cycle_1d(self) -> dict:
        """For a circular axis complex of pure dimension 1: the edge cycle
        oriented by increasing anchor, as a {cube: coeff} chain."""
        edges = self.cells(1)
        return {e: 1 for e in edges}

    def chain_complex(self) -> tuple:
        """The complex of this cubical set plus cell index maps per degree."""
        cells = {d: self.cells(d) for d in range(self.dim + 1)}
        index = {d: {c: i for i, c in enumerate(cells[d])} for d in cells}
        gens = [len(cells[d]) for d in range(self.dim + 1)]
        boundary = {}
        for d in range(1, self.dim + 1):
            rows = len(cells[d - 1])
            cols = len(cells[d])
            mat = [[0] * cols for _ in range(rows)]
            for jcol, cube in enumerate(cells[d]):
                for face, sign in self.boundary_terms(cube):
                    mat[index[d - 1][face]][jcol] += sign
            boundary[d] = IntegerMatrix(rows, cols, mat)
        return GradedChainComplex(gens, boundary), index


def _cube_faces(cube: Cube, periods) -> list:
    """Signed faces with the same convention as :func:`cube_boundary`:
    the j-th free axis contributes (-1)^j [top - bottom]."""
    out = []
    free_axes = [i for i, e in enumerate(cube.extent) if e]
    for j, axis in enumerate(free_axes, start=1):
        sign = (-1) ** j
        ext = list(cube.extent)
        ext[axis] = 0
        bottom = Cube(cube.anchor, tuple(ext))
        top_anchor = list(cube.anchor)
        p = periods[axis]
        top_anchor[axis] = (top_anchor[axis] + 1) % p if p else top_anchor[axis] + 1
        top = Cube(tuple(top_anchor), tuple(ext))
        out.append((top, sign))
        out.append((bottom, -sign))
    return out


def cubical_homology(K: CubicalComplex, coefficients: str = "z"):
    """Exact homology of a face-closed cubical complex."""
    if not K.is_face_closed():
        raise NotFaceClosed("complex is missing faces of some cubes")
    complex_, _ = K.chain_complex()
    return homology(complex_, coefficients)
