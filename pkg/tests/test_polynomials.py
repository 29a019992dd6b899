import pytest
from hypothesis import given, settings, strategies as st

from mbhlab.errors import InvalidKernelRank, NegativeCoefficient, NotDivisible
from mbhlab.exact import HomologyResult
from mbhlab.polynomials import (
    IntPoly,
    kernel_inequality_check,
    morse_bott_poly,
    morse_poly,
    perturbed_morse_poly,
    poincare_poly,
    r_from_kernels,
    solve_r,
)


def H(*bettis):
    return [HomologyResult(k, b, ()) for k, b in enumerate(bettis)]


ONE_PLUS_T = IntPoly([1, 1])


def test_intpoly_normalization():
    assert IntPoly([1, 0, 0]).coeffs == (1,)
    assert IntPoly([0, 0]).coeffs == ()
    assert not IntPoly.zero()


def test_poincare_point():
    assert poincare_poly(H(1)) == IntPoly([1])


def test_poincare_torus():
    assert poincare_poly(H(1, 2, 1)) == IntPoly([1, 2, 1])


def test_poincare_sphere():
    assert poincare_poly(H(1, 0, 1)) == IntPoly([1, 0, 1])


def test_poincare_ignores_torsion():
    res = [HomologyResult(0, 1, ()), HomologyResult(1, 0, (2,))]
    assert poincare_poly(res) == IntPoly([1])


def test_morse_poly():
    assert morse_poly([1, 0, 1]) == IntPoly([1, 0, 1])
    assert morse_poly([1, 2, 1]) == IntPoly([1, 2, 1])
    assert morse_poly([]) == IntPoly.zero()


def test_morse_bott_poly_point():
    assert morse_bott_poly([(IntPoly([1]), 0)]) == IntPoly([1])


def test_morse_bott_poly_sphere_zsq():
    # equator circle at index 0, two poles at index 2
    mb = morse_bott_poly([(IntPoly([1, 1]), 0), (IntPoly([1]), 2), (IntPoly([1]), 2)])
    assert mb == IntPoly([1, 1, 2])


def test_morse_bott_poly_torus():
    mb = morse_bott_poly([(IntPoly([1, 1]), 0), (IntPoly([1, 1]), 1)])
    assert mb == IntPoly([1, 2, 1])


def test_solve_r_perfect():
    p = IntPoly([1, 0, 1])
    assert solve_r(p, p) == IntPoly.zero()


def test_solve_r_dented_sphere():
    # (t + t^2) / (1 + t) = t by hand long division
    assert solve_r(IntPoly([1, 1, 2]), IntPoly([1, 0, 1])) == IntPoly([0, 1])


def test_solve_r_negative():
    with pytest.raises(NegativeCoefficient):
        solve_r(IntPoly([1]), IntPoly([2, 1]))


def test_solve_r_not_divisible():
    with pytest.raises(NotDivisible):
        solve_r(IntPoly([2, 0, 1]), IntPoly([1, 0, 1]))


def test_r_from_kernels_examples():
    assert r_from_kernels([1, 1], [1, 1]) == IntPoly.zero()
    assert r_from_kernels([1, 2, 1], [1, 2, 1]) == IntPoly.zero()
    assert r_from_kernels([1, 1, 2], [1, 1, 1]) == IntPoly([0, 1])


def test_r_from_kernels_invalid():
    with pytest.raises(InvalidKernelRank):
        r_from_kernels([1, 1], [1, 2])


def test_perturbed_morse_poly():
    assert perturbed_morse_poly([(IntPoly([1, 1]), 0)]) == IntPoly([1, 1])
    got = perturbed_morse_poly([(IntPoly([1, 1]), 0), (IntPoly([1]), 2), (IntPoly([1]), 2)])
    assert got == IntPoly([1, 1, 2])
    got = perturbed_morse_poly([(IntPoly([1, 1]), 0), (IntPoly([1, 1]), 1)])
    assert got == IntPoly([1, 2, 1])


def test_kernel_inequality_morse_case():
    # Every submanifold a point: z ranks match degree-for-degree.
    sub = [(0, [1]), (1, [1]), (2, [1])]
    assert kernel_inequality_check(sub, [1, 1, 1]) == ()


def test_kernel_inequality_violation():
    sub = [(0, [1, 1]), (2, [1]), (2, [1])]
    ok = [1, 1, 1]
    assert kernel_inequality_check(sub, ok) == ()
    inflated = [1, 2, 1]
    assert kernel_inequality_check(sub, inflated) == (1,)


small_coeffs = st.lists(st.integers(min_value=0, max_value=5), min_size=0, max_size=6)


@settings(max_examples=200, deadline=None)
@given(small_coeffs, small_coeffs)
def test_solve_r_round_trip(p_coeffs, r_coeffs):
    P = IntPoly(p_coeffs)
    R = IntPoly(r_coeffs)
    M = P + ONE_PLUS_T * R
    assert solve_r(M, P) == R


@settings(max_examples=100, deadline=None)
@given(
    st.lists(
        st.tuples(small_coeffs, small_coeffs, st.integers(min_value=0, max_value=3)),
        min_size=1,
        max_size=4,
    )
)
def test_identity_chain(parts):
    """If M_t(f_j) = P_t(C_j) + (1+t) R_j for every j, then the Morse-Bott
    polynomial equals the perturbed Morse polynomial minus (1+t) sum R_j t^l."""
    mb_parts = []
    pm_parts = []
    correction = IntPoly.zero()
    for p_coeffs, r_coeffs, lam in parts:
        P_j = IntPoly(p_coeffs)
        R_j = IntPoly(r_coeffs)
        M_j = P_j + ONE_PLUS_T * R_j
        mb_parts.append((P_j, lam))
        pm_parts.append((M_j, lam))
        correction = correction + R_j.shift(lam)
    mb = morse_bott_poly(mb_parts)
    pm = perturbed_morse_poly(pm_parts)
    assert mb == pm - ONE_PLUS_T * correction


@settings(max_examples=100, deadline=None)
@given(small_coeffs, small_coeffs)
def test_euler_characteristic_consistency(p_coeffs, r_coeffs):
    """At t = -1 the (1+t)R term drops: M(-1) = P(-1) is the Euler
    characteristic identity; at t = 1 counts add up."""
    P = IntPoly(p_coeffs)
    R = IntPoly(r_coeffs)
    M = P + ONE_PLUS_T * R
    assert M(-1) == P(-1)
    assert M(1) == P(1) + 2 * R(1)
