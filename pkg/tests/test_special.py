from fractions import Fraction
from itertools import permutations
from math import factorial

import pytest
import sympy as sp

from mfcheck.exact import Poly, poly_eval
from mfcheck.special import (
    LAMBDA,
    bernoulli_higher,
    bernoulli_higher_poly,
    bernoulli_second_kind,
    derangement,
    derangement_poly,
    derangement_poly_gf,
    dual_route_mismatches,
    forward_difference_power,
    perturbed,
    stirling1,
    stirling1_deg,
    stirling2,
    stirling2_deg,
)

F = Fraction
lam_sym, x_sym, t_sym = sp.symbols("lam x t")


def as_poly(expr) -> Poly:
    """sympy polynomial in lam -> Poly, for comparison."""
    coeffs = sp.Poly(sp.expand(expr), lam_sym).all_coeffs()[::-1] if expr != 0 else []
    return Poly([F(int(sp.numer(c)), int(sp.denom(c))) for c in coeffs], LAMBDA)


def sympy_series_coeffs(expr, order):
    s = sp.series(expr, t_sym, 0, order + 1).removeO()
    return [sp.Rational(s.coeff(t_sym, n) * sp.factorial(n)) for n in range(order + 1)]


def brute_stirling2(n, k):
    def parts(items):
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for p in parts(rest):
            yield [[head]] + p
            for i in range(len(p)):
                yield p[:i] + [[head] + p[i]] + p[i + 1 :]

    return sum(1 for p in parts(list(range(n))) if len(p) == k)


def falling_factorial_coeffs(n, step=1):
    x = sp.Symbol("x")
    expr = sp.Integer(1)
    for i in range(n):
        expr *= x - i * step
    return sp.Poly(sp.expand(expr), x).all_coeffs()[::-1]


# --- classical Stirling ---------------------------------------------------------

def test_stirling1_examples():
    assert [stirling1(3, k) for k in (1, 2, 3)] == [2, -3, 1]
    assert stirling1(0, 0) == 1
    assert stirling1(5, 0) == 0


@pytest.mark.parametrize("n", range(0, 9))
def test_stirling1_matches_falling_factorial_expansion(n):
    coeffs = falling_factorial_coeffs(n)
    assert [stirling1(n, k) for k in range(n + 1)] == [int(c) for c in coeffs]


def test_stirling2_examples():
    assert stirling2(4, 2) == brute_stirling2(4, 2) == 7
    assert stirling2(3, 1) == 1
    assert all(stirling2(n, n) == 1 for n in range(13))


@pytest.mark.parametrize("n", range(0, 8))
def test_stirling2_matches_partition_count(n):
    assert [stirling2(n, k) for k in range(n + 1)] == [brute_stirling2(n, k) for k in range(n + 1)]


def test_out_of_triangle_is_zero():
    assert stirling1(3, 4) == 0 and stirling2(3, -1) == 0
    assert stirling1_deg(2, 3).is_zero() and stirling2_deg(-1, 0).is_zero()


def test_orthogonality():
    for n in range(13):
        for m in range(n + 1):
            total = sum(stirling1(n, l) * stirling2(l, m) for l in range(n + 1))
            assert total == (1 if n == m else 0)


# --- degenerate Stirling ----------------------------------------------------------

def test_stirling1_deg_examples():
    assert stirling1_deg(2, 1) == Poly([0, -1])
    assert stirling1_deg(3, 1) == Poly([0, 0, 2])
    assert all(stirling1_deg(n, n) == Poly([1]) for n in range(10))


@pytest.mark.parametrize("n", range(0, 8))
def test_stirling1_deg_matches_lambda_falling_factorial(n):
    coeffs = falling_factorial_coeffs(n, step=lam_sym)
    assert [stirling1_deg(n, k) for k in range(n + 1)] == [as_poly(c) for c in coeffs]


def test_stirling1_deg_is_a_single_monomial():
    for n in range(13):
        for k in range(n + 1):
            p = stirling1_deg(n, k)
            nonzero = [i for i, c in enumerate(p.coeffs) if c != 0]
            # column k = 0 vanishes for n >= 1
            assert nonzero == ([n - k] if k or n == 0 else [])


def test_stirling2_deg_examples():
    assert stirling2_deg(2, 1) == Poly([1, -1])
    assert stirling2_deg(3, 1) == Poly([1, -3, 2])
    assert all(stirling2_deg(n, n) == Poly([1]) for n in range(10))


@pytest.mark.parametrize("k", range(0, 4))
def test_stirling2_deg_matches_sympy_series(k):
    # oracle: expand ((1 + lam t)^(1/lam) - 1)^k / k! directly
    order = 5
    gen = (sp.exp(sp.log(1 + lam_sym * t_sym) / lam_sym) - 1) ** k / sp.factorial(k)
    s = sp.series(gen, t_sym, 0, order + 1).removeO()
    for n in range(k, order + 1):
        expected = as_poly(sp.simplify(s.coeff(t_sym, n) * sp.factorial(n)))
        assert stirling2_deg(n, k) == expected


def test_stirling2_deg_degree_bound():
    for n in range(13):
        for k in range(n + 1):
            assert stirling2_deg(n, k).degree <= n - k


def test_specializations():
    for n in range(13):
        for k in range(n + 1):
            delta = 1 if n == k else 0
            assert poly_eval(stirling1_deg(n, k), 1) == stirling1(n, k)
            assert poly_eval(stirling1_deg(n, k), 0) == delta
            assert poly_eval(stirling2_deg(n, k), 0) == stirling2(n, k)
            assert poly_eval(stirling2_deg(n, k), 1) == delta


def test_forward_difference_power():
    assert forward_difference_power(1, 2) == 1 == stirling2(2, 1)
    assert forward_difference_power(2, 1) == 0
    assert forward_difference_power(0, 0) == 1
    for m in range(10):
        for k in range(10):
            assert forward_difference_power(k, m) == (stirling2(m, k) if m >= k else 0)


# --- Bernoulli ---------------------------------------------------------------------

def test_bernoulli_second_kind_examples():
    assert [bernoulli_second_kind(n) for n in range(4)] == [1, F(1, 2), F(-1, 6), F(1, 4)]


def test_bernoulli_second_kind_matches_sympy():
    expected = sympy_series_coeffs(t_sym / sp.log(1 + t_sym), 8)
    assert [bernoulli_second_kind(n) for n in range(9)] == [F(str(c)) for c in expected]


def test_bernoulli_higher_examples():
    assert bernoulli_higher(1, 1) == F(-1, 2)
    assert bernoulli_higher(2, 2) == F(5, 6)
    assert bernoulli_higher(0, 0) == 1
    assert all(bernoulli_higher(n, 0) == 0 for n in range(1, 8))


@pytest.mark.parametrize("r", [-2, -1, 1, 2, 3, 5])
def test_bernoulli_higher_matches_sympy(r):
    x0 = F(-3, 2)
    gen = (t_sym / (sp.exp(t_sym) - 1)) ** r * sp.exp(sp.Rational(-3, 2) * t_sym)
    expected = sympy_series_coeffs(gen, 6)
    assert [bernoulli_higher(n, r, x0) for n in range(7)] == [F(str(c)) for c in expected]


def test_bernoulli_higher_poly_agrees_with_pointwise():
    for n in range(6):
        p = bernoulli_higher_poly(n, 3)
        for x in (F(0), F(1), F(-2, 3)):
            assert poly_eval(p, x) == bernoulli_higher(n, 3, x)


def test_second_kind_equals_diagonal_higher_order():
    for n in range(13):
        assert bernoulli_second_kind(n) == bernoulli_higher(n, n, 1)


# --- derangements -------------------------------------------------------------------

def test_derangement_examples():
    assert [derangement(n) for n in range(6)] == [1, 0, 1, 2, 9, 44]
    assert derangement(3) == sum(all(p[i] != i for i in range(3)) for p in permutations(range(3)))
    assert derangement(4) == factorial(4) * (1 - 1 + F(1, 2) - F(1, 6) + F(1, 24))
    assert derangement_poly(2, 2) == 5


def test_derangement_recurrence_and_sign():
    for n in range(1, 20):
        assert derangement(n) == n * derangement(n - 1) + (-1) ** n
        assert derangement(n) >= 0


def test_derangement_poly_at_one_and_gf():
    for n in range(10):
        assert derangement_poly(n, 1) == derangement(n)
        for x in (2, 3, F(1, 2)):
            assert derangement_poly(n, x) == derangement_poly_gf(n, x)


# --- dual routes and fault hook --------------------------------------------------------

def test_dual_routes_agree():
    assert dual_route_mismatches(12) == []


def test_perturbed_restores_entry():
    before = stirling2(5, 2)
    with perturbed("s2", (5, 2)):
        assert stirling2(5, 2) == before + 1
    assert stirling2(5, 2) == before
    b = bernoulli_higher(3, 2)
    with perturbed("bern-higher:2", (3,), delta=F(1, 2)):
        assert bernoulli_higher(3, 2) == b + F(1, 2)
    assert bernoulli_higher(3, 2) == b
    with pytest.raises(ValueError):
        with perturbed("nope", (1,)):
            pass
