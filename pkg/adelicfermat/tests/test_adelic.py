import itertools
import math
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import mark, raises
from traitlets import TraitError

from ..adelic import (
    AdelicParams,
    DivisorPlace,
    FactoredElement,
    NonCoprimeError,
    NorthcottError,
    PrimePlace,
    ProjPoint,
    TorusPlace,
    absolute_value,
    element_height,
    height,
    is_height_zero,
    log_absolute_value,
    log_height_terms,
    northcott_element_bounds,
    place_constant,
    product_formula_residual,
    product_formula_terms,
    torsion_witness,
)
from ..exprparse import parse
from ..mahler import QuadratureSpec
from ..polycore import (
    NotPrimeError,
    PrimeDivisor,
    RationalFunction,
    RationalPolynomial,
    ZeroPolynomialError,
)
from .strategies import integer_polynomials


def forms():
    """T_0 and T_1 of P^1"""
    return RationalPolynomial.variable(0, 2), RationalPolynomial.variable(1, 2)


def test_params_validation():
    with raises(TraitError):
        AdelicParams(n=0)
    with raises(TraitError):
        AdelicParams(lambda_=-0.5)
    with raises(NorthcottError):
        AdelicParams(lambda_=0.0).require_northcott()


def test_place_constant(make_params, spec):
    params = make_params(lambda_=0.5)
    t0, t1 = forms()
    assert place_constant(PrimeDivisor.from_homogeneous(t0), params, spec).value == 0.5
    c = place_constant(PrimeDivisor.from_homogeneous(t1 - t0), params, spec)
    assert abs(c.value - 0.5) < 1e-9
    c = place_constant(PrimeDivisor.from_homogeneous(2 * t1 - t0), params, spec)
    assert abs(c.value - (0.5 + math.log(2))) <= c.error_bound + 1e-12


@mark.parametrize(
    "test_variation_id,place,expect_value",
    [
        ("00", "inf", math.e),
        ("01", "p:3", 1 / 3),
        ("02", "p:2", 1.0),
        ("03", "t:1/4", 1.0),
        ("04", "div:x", 1 / math.e),
        ("05", "div:x+1", 1.0),
    ],
)
def test_absolute_value_of_x(test_variation_id, place, expect_value, make_params, X, spec):
    params = make_params(lambda_=1.0)
    f = 3 * X if place.startswith("p:") else X
    kinds = {
        "inf": lambda: DivisorPlace(PrimeDivisor.infinity(1)),
        "p:3": lambda: PrimePlace(3),
        "p:2": lambda: PrimePlace(2),
        "t:1/4": lambda: TorusPlace((Fraction(1, 4),)),
        "div:x": lambda: DivisorPlace(PrimeDivisor.from_polynomial(X)),
        "div:x+1": lambda: DivisorPlace(PrimeDivisor.from_polynomial(X + 1)),
    }
    value = absolute_value(f, kinds[place](), params, spec)
    assert abs(value - expect_value) < 1e-9


def test_absolute_value_of_zero(make_params, X, spec):
    params = make_params()
    zero = RationalPolynomial(1)
    assert absolute_value(zero, PrimePlace(5), params, spec) == 0.0
    assert absolute_value(zero, TorusPlace((0,)), params, spec) == 0.0
    with raises(ZeroPolynomialError):
        absolute_value(zero, DivisorPlace(PrimeDivisor.infinity(1)), params, spec)


def test_log_absolute_value_at_a_zero_on_the_torus(make_params, X, spec):
    estimate = log_absolute_value(X + 1, TorusPlace((Fraction(1, 2),)), make_params(), spec)
    assert estimate.value == -math.inf
    assert not estimate.converged


def test_place_validation():
    with raises(NotPrimeError):
        PrimePlace(9)
    with raises(ValueError):
        TorusPlace((Fraction(3, 2),))
    assert str(TorusPlace((Fraction(1, 3), 0))) == "t:1/3,0"
    assert str(PrimePlace(7)) == "p:7"
    assert str(DivisorPlace(PrimeDivisor.infinity(2))) == "inf"


def test_canonicalize(X):
    point = ProjPoint.canonicalize([X * Fraction(1, 2), X**2 * Fraction(1, 3)])
    assert point.coords == (RationalPolynomial.constant(3, 1), 2 * X)
    inverse = RationalFunction.from_polynomial(X).inverse()
    assert ProjPoint.canonicalize([inverse, 1]).coords == (RationalPolynomial.constant(1, 1), X)
    assert ProjPoint.canonicalize([-X, X]).coords == (X**0, -(X**0))
    assert ProjPoint.canonicalize([0, -2]).coords == (RationalPolynomial(1), X**0)
    zero = RationalPolynomial(1)
    assert ProjPoint.canonicalize([0, -X, 0]).coords == (zero, X, zero)
    with raises(ZeroPolynomialError):
        ProjPoint.canonicalize([0, 0])


def test_projective_scaling_does_not_change_the_point(X):
    a = ProjPoint.canonicalize([X + 1, 2 * X])
    b = ProjPoint.canonicalize([(X + 1) * (X - 3) * 5, (X - 3) * 10 * X])
    assert a == b
    assert a.degree == 1
    assert a.power(3).coords == tuple(c**3 for c in a.coords)


line_coordinates = integer_polynomials(max_degree=2, max_terms=3)


@given(
    st.tuples(line_coordinates, line_coordinates).filter(lambda c: not all(f.is_zero for f in c)),
    st.integers(2, 10),
)
@settings(max_examples=25, deadline=None)
def test_height_of_a_power(coords, N):
    params = AdelicParams(lambda_=0.5)
    spec = QuadratureSpec()
    point = ProjPoint.canonicalize(coords)
    base = height(point, params, spec)
    power = height(point.power(N), params, spec)
    assert abs(power.value - N * base.value) <= power.error_bound + N * base.error_bound + 1e-9


@mark.parametrize(
    "test_variation_id,coords,lambda_,expect_height",
    [
        ("00", ["1", "2"], 1.0, math.log(2)),
        ("01", ["1", "x"], 0.7, 0.7),
        ("02", ["2", "x"], 0.7, 0.7 + math.log(2)),
        ("03", ["1", "1/x"], 0.7, 0.7),
        ("04", ["3", "6", "-9"], 0.2, math.log(3)),
    ],
)
def test_height(test_variation_id, coords, lambda_, expect_height, make_params, spec):
    point = ProjPoint.canonicalize([parse(c, 1) for c in coords])
    estimate = height(point, make_params(lambda_=lambda_), spec)
    assert abs(estimate.value - expect_height) < 1e-6


def test_height_in_two_variables(make_params, XY, spec):
    x, y = XY
    estimate = height([1, x, y], make_params(n=2, lambda_=1.0), spec)
    assert abs(estimate.value - 1.0) < 1e-6


def test_height_terms(make_params, X, spec):
    terms = log_height_terms([2, X], make_params(lambda_=0.7), spec)
    assert terms["degree"] == 0.7
    assert abs(terms["integral"].value - math.log(2)) < 1e-6


def test_element_height_and_bounds(make_params, X, spec):
    params = make_params(lambda_=0.5)
    assert abs(element_height(X**2, params, spec).value - 1.0) < 1e-6
    assert northcott_element_bounds(2.5, params) == (5, 2.5)
    assert northcott_element_bounds(-1, params)[0] == -1
    with raises(NorthcottError):
        northcott_element_bounds(1.0, make_params(lambda_=0.0))


@mark.parametrize(
    "test_variation_id,coords,expect_zero",
    [
        ("00", [1, -1, 0], True),
        ("01", [1, 2], False),
        ("02", ["x", "x"], True),
        ("03", ["x", "1"], False),
        ("04", [Fraction(1, 2), Fraction(-1, 2)], True),
        ("05", [0, 3], True),
    ],
)
def test_is_height_zero(test_variation_id, coords, expect_zero, make_params):
    coords = [parse(c, 1) if isinstance(c, str) else c for c in coords]
    assert is_height_zero(coords, make_params(lambda_=0.5)) is expect_zero


def test_height_zero_needs_northcott(make_params):
    with raises(NorthcottError):
        is_height_zero([1, 1], make_params(lambda_=0.0))


def unit_ratios(coords):
    """Every x_i / x_k in {0, 1, -1} for the first nonzero x_k"""
    base = next(x for x in coords if not x.is_zero)
    return all(x.is_zero or x == base or x == -base for x in coords)


@mark.parametrize(
    "test_variation_id,dimension,coefficients",
    [
        ("00", 1, range(-3, 4)),
        ("01", 2, range(-1, 2)),
    ],
)
def test_height_zero_over_a_box(test_variation_id, dimension, coefficients, make_params):
    params = make_params(lambda_=0.5)
    lines = [
        RationalPolynomial.univariate(list(c)) for c in itertools.product(coefficients, repeat=2)
    ]
    for coords in itertools.product(lines, repeat=dimension + 1):
        if all(x.is_zero for x in coords):
            continue
        assert is_height_zero(list(coords), params) is unit_ratios(coords), coords


@given(st.lists(integer_polynomials(max_degree=2, max_terms=2), min_size=2, max_size=4))
@settings(max_examples=200, deadline=None)
def test_height_zero_matches_unit_ratios(coords):
    if all(x.is_zero for x in coords):
        return
    assert is_height_zero(coords, AdelicParams(lambda_=1.0)) is unit_ratios(coords)


@mark.parametrize(
    "test_variation_id,coords,expect_scalar",
    [
        ("00", [2, -2], Fraction(1, 2)),
        ("01", [0, 3], Fraction(1, 3)),
        ("02", [-1, 1, 1], Fraction(-1)),
    ],
)
def test_torsion_witness(test_variation_id, coords, expect_scalar, make_params):
    witness = torsion_witness(coords, make_params())
    assert witness == RationalFunction.constant(expect_scalar, 1)
    scaled = [witness * c for c in coords]
    assert all(c.is_zero or abs(c.constant_value()) == 1 for c in scaled)


def test_torsion_witness_absent(make_params, X):
    assert torsion_witness([1, X], make_params()) is None


@mark.parametrize(
    "test_variation_id,scalar,factors,lambda_",
    [
        ("00", 2, [], 1.0),
        ("01", 1, [([-1, 1], 1)], 0.5),
        ("02", 1, [([-1, 2], 1)], 0.5),
        ("03", Fraction(-12, 35), [([1, 1], 2), ([1, 0, 1], -1), ([-1, 3], 3)], 0.3),
    ],
)
def test_product_formula(test_variation_id, scalar, factors, lambda_, make_params, spec):
    elem = FactoredElement.from_polynomials(
        scalar, [(RationalPolynomial.univariate(c), e) for c, e in factors]
    )
    residual = product_formula_residual(elem, make_params(lambda_=lambda_), spec)
    assert abs(residual.value) <= residual.error_bound + 1e-12


@mark.parametrize(
    "test_variation_id,scalar,factors,lambda_",
    [
        ("00", 5, [([0, 1], 1)], 1.0),
        ("01", Fraction(1, 6), [([1, 1], -1)], 0.5),
        ("02", 1, [([-1, 2], 2)], 0.3),
        ("03", -7, [([2, 3], 1), ([-3, 7], -1)], 1.0),
        ("04", 1, [([1, 0, 1], 1)], 0.5),
        ("05", 2, [([1, 1, 1], -2)], 0.5),
        ("06", Fraction(3, 10), [([-2, 0, 1], 1)], 2.0),
        ("07", 1, [([-1, 1, 1], 3)], 0.1),
        ("08", 4, [([3, 0, 2], 1), ([0, 1], -1)], 1.0),
        ("09", 1, [([-2, 0, 0, 1], 1)], 0.5),
        ("10", Fraction(-1, 9), [([1, 1, 0, 1], 1)], 0.5),
        ("11", 1, [([-1, -1, 0, 1], -1)], 1.5),
        ("12", 3, [([1, 0, 0, 0, 1], 1)], 0.5),
        ("13", 1, [([1, 0, -10, 0, 1], 1)], 0.5),
        ("14", 1, [([1, 1, 0, 0, 1], 2)], 0.2),
        ("15", Fraction(12, 5), [([-3, 0, 5], 1), ([1, -1, 1], -1)], 1.0),
        ("16", 1, [([1, -3, 0, 1], 1), ([-1, 1], 1)], 0.5),
        ("17", 6, [([-3, 7], 2), ([1, 1], -3), ([1, 0, 1], 1)], 0.7),
        ("18", Fraction(-35, 4), [([0, 1], 2), ([-2, 0, 1], -1), ([1, 0, 0, 0, 1], 1)], 1.0),
        ("19", 1, [([1, 0, -10, 0, 1], -1), ([-2, 0, 0, 1], 1), ([1, 1, 1], 1)], 0.4),
    ],
)
def test_product_formula_univariate_suite(
    test_variation_id, scalar, factors, lambda_, make_params, spec
):
    elem = FactoredElement.from_polynomials(
        scalar, [(RationalPolynomial.univariate(c), e) for c, e in factors]
    )
    residual = product_formula_residual(elem, make_params(lambda_=lambda_), spec)
    assert abs(residual.value) <= 1e-9


@mark.parametrize(
    "test_variation_id,scalar,exponents",
    [
        ("00", 1, (1, 0, 0)),
        ("01", 1, (0, 1, 0)),
        ("02", 3, (0, 0, 0)),
        ("03", 1, (0, 0, 1)),
        ("04", 3, (1, -1, 2)),
    ],
)
def test_product_formula_two_variable_set(
    test_variation_id, scalar, exponents, make_params, XY, fast_spec
):
    x, y = XY
    bases = (x - y, 1 + x + y, 2 * x - 1)
    elem = FactoredElement.from_polynomials(
        scalar, [(f, e) for f, e in zip(bases, exponents) if e]
    )
    residual = product_formula_residual(elem, make_params(n=2, lambda_=1.0), fast_spec)
    assert abs(residual.value) <= 5e-3
    assert abs(residual.value) <= residual.error_bound + 1e-12


def test_product_formula_terms(make_params, spec):
    elem = FactoredElement.from_polynomials(2, [(RationalPolynomial.univariate([-1, 1]), 1)])
    terms = product_formula_terms(elem, make_params(lambda_=0.5), spec)
    by_kind = {t.kind: t for t in terms}
    assert by_kind["divisor"].label == "div:x - 1"
    assert by_kind["divisor"].estimate.value == -0.5
    assert by_kind["infinity"].estimate.value == 0.5
    assert by_kind["prime"].label == "p:2"
    assert abs(by_kind["prime"].estimate.value + math.log(2)) < 1e-15
    assert abs(by_kind["archimedean"].estimate.value - math.log(2)) < 1e-9


def test_product_formula_two_variables(make_params, XY, fast_spec):
    x, y = XY
    elem = FactoredElement.from_polynomials(3, [(1 + x + y, 1), (x - 2 * y, -1)])
    residual = product_formula_residual(elem, make_params(n=2, lambda_=1.0), fast_spec)
    assert abs(residual.value) <= residual.error_bound + 1e-9


def test_factored_element_validation(X):
    with raises(NonCoprimeError):
        FactoredElement.from_polynomials(1, [(X + 1, 1), (X**2 - 1, 1)])
    with raises(ZeroPolynomialError):
        FactoredElement(0)
    elem = FactoredElement.from_polynomials(1, [(2 * X + 2, 1), (X, -2)])
    assert elem.scalar == 2
    assert elem.to_rational_function() == RationalFunction.from_polynomials(2 * X + 2, X**2)
