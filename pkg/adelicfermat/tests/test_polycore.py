import cmath
import importlib
from fractions import Fraction

import mpmath
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import mark, raises

from .. import adelic, exprparse, fermat, mahler, polycore
from ..polycore import (
    NotExactError,
    NotHomogeneousError,
    NotPrimeError,
    PrimeDivisor,
    PrimitiveIntPolynomial,
    RationalFunction,
    RationalPolynomial,
    VariableCountError,
    ZeroPolynomialError,
    content_primitive,
    cyclotomic,
    cyclotomic_indices,
    dehomogenize,
    factor_integer,
    gauss_norm,
    homogenize,
    multi_gcd,
    ord_at_divisor,
    padic_valuation,
    squarefree_decomposition,
    torus_eval,
)
from .strategies import integer_polynomials, nonzero_polynomials, polynomials, rational_functions


def P(coeffs, num_vars=1, var=0):
    """Univariate polynomial from low-to-high coefficients"""
    return RationalPolynomial.univariate(coeffs, num_vars, var)


def test_ring_operations(X, XY):
    assert (X + 1) * (X - 1) == X**2 - 1
    assert (X**2 - 1).exact_div(X + 1) == X - 1
    x, y = XY
    assert (x + y) ** 2 == x**2 + 2 * x * y + y**2
    assert (x + y) - (x + y) == 0
    assert X**0 == 1


def test_exact_division_refuses_remainders(X):
    assert (X**2 + 1).try_exact_div(X + 1) is None
    with raises(NotExactError):
        (X**2 + 1).exact_div(X + 1)
    with raises(ZeroDivisionError):
        X.exact_div(RationalPolynomial(1))


def test_variable_counts_must_match(X, XY):
    with raises(VariableCountError):
        X + XY[0]
    with raises(VariableCountError):
        RationalPolynomial(2, {(1,): 1})


def test_degree_of_zero_is_negative():
    assert RationalPolynomial(3).degree == -1
    assert RationalPolynomial.constant(5, 3).degree == 0


@mark.parametrize(
    "test_variation_id,terms,expect_content,expect_primitive",
    [
        ("00", {(1, 0): 6, (0, 1): 9}, Fraction(3), {(1, 0): 2, (0, 1): 3}),
        (
            "01",
            {(1, 0): Fraction(1, 2), (0, 0): Fraction(1, 3)},
            Fraction(1, 6),
            {(1, 0): 3, (0, 0): 2},
        ),
        ("02", {(1, 0): -2}, Fraction(-2), {(1, 0): 1}),
        ("03", {(0, 0): Fraction(-5, 7)}, Fraction(-5, 7), {(0, 0): 1}),
    ],
)
def test_content_primitive(test_variation_id, terms, expect_content, expect_primitive):
    content, primitive = content_primitive(RationalPolynomial(2, terms))
    assert content == expect_content
    assert primitive.poly == RationalPolynomial(2, expect_primitive)


@mark.parametrize(
    "test_variation_id,coeffs,expect_content,expect_primitive",
    [
        ("00", [0, -2], Fraction(-2), [0, 1]),
        ("01", [-2], Fraction(-2), [1]),
        ("02", [-1], Fraction(-1), [1]),
        ("03", [0, 0, Fraction(-3, 4)], Fraction(-3, 4), [0, 0, 1]),
    ],
)
def test_content_primitive_of_negative_monomials(
    test_variation_id, coeffs, expect_content, expect_primitive
):
    content, primitive = content_primitive(P(coeffs))
    assert content == expect_content
    assert primitive.poly == P(expect_primitive)


def test_negative_constants_are_canonical(X):
    minus_one = RationalFunction.constant(-1, 1)
    assert minus_one.scalar == -1
    assert minus_one.num.poly == P([1])
    assert RationalFunction.from_polynomial(-X).scalar == -1
    assert -minus_one == RationalFunction.constant(1, 1)


def test_content_of_zero():
    with raises(ZeroPolynomialError):
        content_primitive(RationalPolynomial(1))


@given(nonzero_polynomials(num_vars=2))
def test_content_times_primitive_is_identity(f):
    content, primitive = content_primitive(f)
    assert primitive.poly * content == f
    assert primitive.poly.leading_coefficient > 0


def test_primitive_polynomial_rejects_bad_input(X):
    with raises(ValueError):
        PrimitiveIntPolynomial(2 * X)
    with raises(ValueError):
        PrimitiveIntPolynomial(-X)
    with raises(ValueError):
        PrimitiveIntPolynomial(X * Fraction(1, 2))


@mark.parametrize(
    "test_variation_id,coeffs,p,expect_norm",
    [
        ("00", [8, 12], 2, Fraction(1, 4)),
        ("01", [1, 1], 7, Fraction(1)),
        ("02", [0, Fraction(1, 3)], 3, Fraction(3)),
        ("03", [Fraction(25, 6)], 5, Fraction(1, 25)),
    ],
)
def test_gauss_norm(test_variation_id, coeffs, p, expect_norm):
    assert gauss_norm(P(coeffs), p) == expect_norm


def test_gauss_norm_of_quotient(X):
    f = RationalFunction.from_polynomials(4 * X + 4, 3 * X)
    assert gauss_norm(f, 2) == Fraction(1, 4)
    assert gauss_norm(f, 3) == 3


def test_gauss_norm_needs_prime_and_nonzero(X):
    with raises(NotPrimeError):
        gauss_norm(X, 4)
    with raises(ZeroPolynomialError):
        gauss_norm(RationalPolynomial(1), 2)


@given(nonzero_polynomials(max_terms=3), nonzero_polynomials(max_terms=3))
@settings(max_examples=50)
def test_gauss_norm_is_multiplicative(f, g):
    for p in (2, 3, 5):
        assert gauss_norm(f * g, p) == gauss_norm(f, p) * gauss_norm(g, p)


def test_padic_valuation_and_factoring():
    assert padic_valuation(Fraction(12, 5), 2) == 2
    assert padic_valuation(Fraction(12, 5), 5) == -1
    assert factor_integer(-360) == {2: 3, 3: 2, 5: 1}
    assert factor_integer(1) == {}


def test_multi_gcd(X, XY):
    assert multi_gcd([X**2 - 1, X**2 + 2 * X + 1]).poly == X + 1
    x, y = XY
    assert multi_gcd([x + y, x - y]).poly == 1
    assert multi_gcd([2 * X, 4 * X**2]).poly == X
    assert multi_gcd([RationalPolynomial(1), 3 * X - 6]).poly == X - 2
    with raises(ZeroPolynomialError):
        multi_gcd([RationalPolynomial(1)])


def test_multi_gcd_multivariate(XY):
    x, y = XY
    common = x * y + 1
    g = multi_gcd([common * (x - y) ** 2, common * (x + 2 * y), common * x])
    assert g.poly == common


small_integer_polynomials = integer_polynomials(num_vars=2, max_degree=2, max_terms=3)


@given(small_integer_polynomials, small_integer_polynomials)
@settings(max_examples=50, deadline=None)
def test_gcd_divides_both(f, g):
    if f.is_zero and g.is_zero:
        return
    d = multi_gcd([f, g]).poly
    assert f.try_exact_div(d) is not None
    assert g.try_exact_div(d) is not None


def test_rational_function_is_canonical(X):
    f = RationalFunction.from_polynomials(X**2 - 1, 2 * X + 2)
    assert f == RationalFunction.from_polynomial(X * Fraction(1, 2) - Fraction(1, 2))
    assert f.is_polynomial
    g = RationalFunction.from_polynomials(-X, -2 * X**2 + 2)
    assert g.scalar == Fraction(1, 2)
    assert g.den.poly == X**2 - 1
    with raises(ZeroDivisionError):
        RationalFunction.from_polynomials(X, RationalPolynomial(1))


@given(
    polynomials(max_terms=3), nonzero_polynomials(max_terms=3), nonzero_polynomials(max_terms=3)
)
@settings(max_examples=50, deadline=None)
def test_field_operations(a, b, c):
    f = RationalFunction.from_polynomials(a, b)
    g = RationalFunction.from_polynomial(c)
    assert (f + g) - g == f
    assert (f * g) / g == f
    assert f * g == g * f


def test_rational_function_powers(X):
    f = RationalFunction.from_polynomials(X + 1, 2 * X)
    assert f**-1 == f.inverse()
    assert f**2 * f**-2 == RationalFunction.constant(1, 1)
    assert RationalFunction.zero(1) ** 0 == RationalFunction.constant(1, 1)


@mark.parametrize(
    "test_variation_id,f,omega,expect_order",
    [
        ("00", P([-1, 1]) ** 2 * P([2, 1]), P([-1, 1]), 2),
        ("01", P([1, 0, 1]), None, -2),
        ("02", P([1]), None, 0),
    ],
)
def test_ord_at_divisor_univariate(test_variation_id, f, omega, expect_order):
    divisor = PrimeDivisor.infinity(1) if omega is None else PrimeDivisor.from_polynomial(omega)
    assert ord_at_divisor(f, divisor) == expect_order


def test_ord_at_divisor(XY):
    x, y = XY
    assert ord_at_divisor(x**2 - y**2, PrimeDivisor.from_polynomial(x + y)) == 1
    f = RationalFunction.from_polynomials(x + 1, (x - y) ** 3)
    assert ord_at_divisor(f, PrimeDivisor.from_polynomial(x - y)) == -3
    assert ord_at_divisor(f, PrimeDivisor.infinity(2)) == 2
    with raises(ZeroPolynomialError):
        ord_at_divisor(RationalPolynomial(2), PrimeDivisor.infinity(2))


nonzero_functions = rational_functions(num_vars=2).filter(lambda f: not f.is_zero)


@given(nonzero_functions, nonzero_functions)
@settings(max_examples=50, deadline=None)
def test_ord_is_additive(f, g):
    x = RationalPolynomial.variable(0, 2)
    y = RationalPolynomial.variable(1, 2)
    divisors = [PrimeDivisor.infinity(2)] + [
        PrimeDivisor.from_polynomial(p) for p in (x, y, x - y, x + 1)
    ]
    for omega in divisors:
        assert ord_at_divisor(f * g, omega) == ord_at_divisor(f, omega) + ord_at_divisor(g, omega)


@mark.parametrize(
    "test_variation_id,f,t,expect_value",
    [
        ("00", P([0, 1]), (0,), 1),
        ("01", P([1, 1]), (Fraction(1, 2),), 0),
        ("02", P([0, 1]), (Fraction(1, 4),), 1j),
    ],
)
def test_torus_eval(test_variation_id, f, t, expect_value):
    value, error = torus_eval(f, t)
    assert abs(value - expect_value) <= error
    assert error < 1e-12


def test_torus_eval_two_variables(XY):
    x, y = XY
    value, error = torus_eval(x + y, (0, Fraction(1, 2)))
    assert abs(value) <= error
    # the phase is reduced exactly, so huge degrees stay accurate
    value, error = torus_eval(x**1000 + 2, (Fraction(1, 3), 0))
    assert abs(value - (2 + cmath.exp(2j * cmath.pi / 3))) <= max(error, 1e-12)
    with raises(VariableCountError):
        torus_eval(x, (0,))


def reference_torus_eval(f, t):
    with mpmath.workdps(50):
        total = mpmath.mpc(0)
        for exps, c in f.terms.items():
            phase = sum((e * x for e, x in zip(exps, t)), Fraction(0))
            c = Fraction(c)
            total += mpmath.mpf(c.numerator) / c.denominator * mpmath.expjpi(
                2 * mpmath.mpf(phase.numerator) / phase.denominator
            )
        return complex(total)


angles = st.builds(Fraction, st.integers(0, 359), st.integers(1, 360)).map(lambda q: q % 1)


@given(polynomials(num_vars=2, max_degree=60, max_terms=6), st.tuples(angles, angles))
@settings(max_examples=200, deadline=None)
def test_torus_eval_error_bound(f, t):
    value, error = torus_eval(f, t)
    assert abs(value - reference_torus_eval(f, t)) <= error


def test_homogenize_and_dehomogenize():
    one_plus_x = P([1, 1])
    form = homogenize(one_plus_x, 1)
    t0, t1 = RationalPolynomial.variable(0, 2), RationalPolynomial.variable(1, 2)
    assert form == t0 + t1
    assert dehomogenize(form) == one_plus_x
    assert dehomogenize(t0) == 1
    assert homogenize(one_plus_x, 3) == t0**3 + t0**2 * t1
    with raises(NotHomogeneousError):
        dehomogenize(t0**2 + t1)
    with raises(ValueError):
        homogenize(one_plus_x**2, 1)


def test_prime_divisor_from_homogeneous():
    t0, t1 = RationalPolynomial.variable(0, 2), RationalPolynomial.variable(1, 2)
    assert PrimeDivisor.from_homogeneous(t0).at_infinity
    assert PrimeDivisor.from_homogeneous(2 * t0).at_infinity
    omega = PrimeDivisor.from_homogeneous(2 * t1 - t0)
    assert omega.defining.poly == P([-1, 2])
    assert omega.degree == 1
    assert omega.homogeneous() == 2 * t1 - t0
    with raises(ValueError):
        PrimeDivisor.from_homogeneous(t0 * t1)


def test_cyclotomic():
    assert cyclotomic(1).poly == P([-1, 1])
    assert cyclotomic(6).poly == P([1, -1, 1])
    assert cyclotomic(12).poly == P([1, 0, -1, 0, 1])
    assert cyclotomic_indices(2) == [1, 2, 3, 4, 6]


def test_squarefree_decomposition(X):
    f = 3 * (X - 1) ** 3 * (X + 2) * (X**2 + 1) ** 2
    factors = squarefree_decomposition(f)
    assert [(p.poly, k) for p, k in factors] == [(X + 2, 1), (X**2 + 1, 2), (X - 1, 3)]
    assert squarefree_decomposition(RationalPolynomial.constant(4, 1)) == []


def test_json_round_trip(XY):
    x, y = XY
    f = x**2 * Fraction(3, 4) - y + 7
    assert RationalPolynomial.from_json(f.to_json()) == f


def test_json_is_validated():
    from jsonschema import ValidationError

    with raises(ValidationError):
        RationalPolynomial.from_json({"vars": 1, "terms": [[[1], "x"]]})


@mark.parametrize("module", [adelic, exprparse, fermat, mahler, polycore])
def test_public_names(module):
    assert all(hasattr(module, name) for name in module.__all__)
    assert not {"math", "np", "mpmath", "app_log", "reduce"} & set(module.__all__)
    package = importlib.import_module(module.__package__)
    for helper in ("np", "mpmath", "app_log", "reduce", "itertools"):
        assert not hasattr(package, helper)
