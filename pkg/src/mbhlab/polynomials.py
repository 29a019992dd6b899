"""Integer polynomials in one variable t, and the polynomial pipeline that
relates critical-point counts to Betti numbers.

The central identity is  M = P + (1+t)R  with R having nonnegative integer
coefficients; ``solve_r`` inverts it exactly (divisibility tested by
evaluation at t = -1, quotient by coefficient recurrence, no remainder
tolerance anywhere).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import InvalidKernelRank, NegativeCoefficient, NotDivisible

__all__ = [
    "IntPoly",
    "poincare_poly",
    "morse_poly",
    "morse_bott_poly",
    "solve_r",
    "r_from_kernels",
    "perturbed_morse_poly",
    "kernel_inequality_check",
]


class IntPoly:
    """Immutable integer polynomial, coefficients indexed by power of t.

    Trailing zeros are normalized away; the zero polynomial has an empty
    coefficient tuple.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int] = ()):
        c = [int(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def zero(cls) -> "IntPoly":
        return cls(())

    @classmethod
    def monomial(cls, power: int, coeff: int = 1) -> "IntPoly":
        if power < 0:
            raise ValueError("negative power")
        return cls([0] * power + [coeff])

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = IntPoly([other])
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPoly([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        return self + (-other)

    def __neg__(self) -> "IntPoly":
        return IntPoly([-x for x in self.coeffs])

    def __mul__(self, other) -> "IntPoly":
        if isinstance(other, int):
            return IntPoly([other * x for x in self.coeffs])
        out = [0] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def shift(self, k: int) -> "IntPoly":
        """Multiply by t^k."""
        if not self.coeffs:
            return self
        return IntPoly((0,) * k + self.coeffs)

    def __call__(self, t: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def coeff(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __repr__(self) -> str:
        if not self.coeffs:
            return "IntPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}t" if c != 1 else "t")
            else:
                terms.append(f"{c}t^{k}" if c != 1 else f"t^{k}")
        return "IntPoly(" + " + ".join(terms) + ")"


def poincare_poly(homology_results) -> IntPoly:
    """Generating polynomial of the Betti numbers (torsion ignored: ranks are
    taken modulo the torsion subgroup)."""
    return IntPoly([r.betti for r in homology_results])


def morse_poly(nu: Sequence[int]) -> IntPoly:
    """sum_k nu_k t^k for critical-point counts nu."""
    return IntPoly(nu)


def morse_bott_poly(submanifolds: Sequence[tuple]) -> IntPoly:
    """sum over critical submanifolds of P_t(C_j) t^{lambda_j}.

    ``submanifolds`` is a sequence of (IntPoly, index) pairs.
    """
    total = IntPoly.zero()
    for poly, lam in submanifolds:
        if lam < 0:
            raise ValueError("negative index")
        total = total + poly.shift(lam)
    return total


def solve_r(M: IntPoly, P: IntPoly) -> IntPoly:
    """Solve M - P = (1+t) R for R with nonnegative integer coefficients.

    Raises NotDivisible when (M-P)(-1) != 0, NegativeCoefficient when the
    quotient exists but some coefficient is negative.  Either failure means
    the inequality M >= P in the (1+t)-divisibility sense is violated.
    """
    Q = M - P
    if Q(-1) != 0:
        raise NotDivisible(f"(M - P)(-1) = {Q(-1)} != 0")
    # Q = (1+t) R  <=>  r_0 = q_0, r_k = q_k - r_{k-1}; the top coefficient
    # recurrence closes exactly because Q(-1) = 0.
    r = []
    prev = 0
    for k, q in enumerate(Q.coeffs):
        if k == Q.degree:
            # last quotient coefficient is q itself; consistency holds
            break
        val = q - prev
        r.append(val)
        prev = val
    R = IntPoly(r)
    if any(c < 0 for c in R.coeffs):
        raise NegativeCoefficient(f"quotient {R!r} has a negative coefficient")
    return R


def r_from_kernels(nu: Sequence[int], z: Sequence[int]) -> IntPoly:
    """R(t) = sum_{k>=1} (nu_k - z_k) t^{k-1} from chain ranks and boundary
    kernel ranks.

    nu_k - z_k is the rank of the image of d_k, hence nonnegative; a kernel
    rank exceeding its chain rank is rejected.
    """
    if len(z) != len(nu):
        raise ValueError("nu and z must have equal length")
    for k, (n_k, z_k) in enumerate(zip(nu, z)):
        if z_k > n_k:
            raise InvalidKernelRank(f"z_{k} = {z_k} exceeds nu_{k} = {n_k}")
        if z_k < 0:
            raise InvalidKernelRank(f"z_{k} = {z_k} negative")
    return IntPoly([nu[k] - z[k] for k in range(1, len(nu))])


def perturbed_morse_poly(per_submanifold: Sequence[tuple]) -> IntPoly:
    """sum over submanifolds of M_t(f_j) t^{lambda_j}."""
    total = IntPoly.zero()
    for poly, lam in per_submanifold:
        if lam < 0:
            raise ValueError("negative index")
        total = total + poly.shift(lam)
    return total


def kernel_inequality_check(z_sub: Sequence[tuple], z_h: Sequence[int]) -> tuple:
    """Check sum_{lambda_j + k = n} z_k^j >= z_n^h for n = 1, ..., m.

    ``z_sub`` is a sequence of (lambda_j, kernel-rank list) pairs, one per
    critical submanifold; ``z_h`` the kernel ranks of the perturbed complex.
    Returns the tuple of failing degrees (empty means the inequality holds).
    """
    failing = []
    for n in range(1, len(z_h)):
        lhs = 0
        for lam, zs in z_sub:
            k = n - lam
            if 0 <= k < len(zs):
                lhs += zs[k]
        if lhs < z_h[n]:
            failing.append(n)
    return tuple(failing)
