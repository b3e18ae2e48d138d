"""
The adelic structure on Q(X_1, ..., X_n) with parameter lambda.

Places come in three kinds: prime divisors of projective n-space (with
|f|_w = exp(lambda deg P_w + mu(p_w))^(-ord_w f)), rational primes (Gauss
norms) and points t of the torus [0,1]^n (|f(e(t))|). Heights of projective
points are computed from the closed formula for coprime integer tuples

    h(x_0 : ... : x_m) = lambda max deg x_i + int log max |x_i(e(t))| dt

which only involves the divisor at infinity and the torus.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Union

from tornado.log import app_log
from traitlets import Float, Integer, TraitError, validate
from traitlets.config import Configurable

from .exprparse import format_polynomial
from .mahler import (
    MahlerEstimate,
    integrate_log_max,
    log_abs,
    mahler_measure,
    sum_estimates,
)
from .polycore import (
    NotPrimeError,
    PrimeDivisor,
    PrimitiveIntPolynomial,
    RationalFunction,
    RationalPolynomial,
    VariableCountError,
    ZeroPolynomialError,
    as_rational_function,
    content_primitive,
    factor_integer,
    gauss_norm,
    is_prime,
    multi_gcd,
    ord_at_divisor,
    padic_valuation,
    torus_eval,
)

__all__ = [
    "NorthcottError",
    "NonCoprimeError",
    "AdelicParams",
    "DivisorPlace",
    "PrimePlace",
    "TorusPlace",
    "place_constant",
    "log_absolute_value",
    "absolute_value",
    "ProjPoint",
    "canonicalize",
    "height",
    "element_height",
    "northcott_element_bounds",
    "is_height_zero",
    "torsion_witness",
    "FactoredElement",
    "PlaceTerm",
    "product_formula_terms",
    "product_formula_residual",
    "log_height_terms",
]


class NorthcottError(ValueError):
    """The operation relies on Northcott's property, which needs lambda > 0"""


class NonCoprimeError(ValueError):
    """Factors of a factored element share a common factor"""


class AdelicParams(Configurable):
    """The number of variables n and the weight lambda of the degree"""

    n = Integer(
        1,
        config=True,
        help="""
        Number of variables of the rational function field Q(x1, ..., xn).
        """,
    )

    lambda_ = Float(
        1.0,
        config=True,
        help="""
        Non-negative weight of the degree in every divisorial absolute value.

        With lambda = 0 the structure is still proper, but Northcott's
        property fails and height-zero decisions are refused.
        """,
    )

    @validate("n")
    def _validate_n(self, proposal):
        if proposal.value < 1:
            raise TraitError(f"n must be at least 1, not {proposal.value}")
        return proposal.value

    @validate("lambda_")
    def _validate_lambda(self, proposal):
        if not proposal.value >= 0:
            raise TraitError(f"lambda must be non-negative, not {proposal.value}")
        return proposal.value

    def require_northcott(self):
        if self.lambda_ == 0:
            raise NorthcottError(
                "lambda = 0 does not have Northcott's property; use a positive lambda"
            )


# -----------------------------------------------------------------------------
# places
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class DivisorPlace:
    divisor: PrimeDivisor

    def __str__(self):
        if self.divisor.at_infinity:
            return "inf"
        return f"div:{format_polynomial(self.divisor.defining.poly)}"


@dataclass(frozen=True)
class PrimePlace:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrimeError(f"{self.p!r} is not a prime number")

    def __str__(self):
        return f"p:{self.p}"


@dataclass(frozen=True)
class TorusPlace:
    t: tuple

    def __post_init__(self):
        coords = tuple(Fraction(x) for x in self.t)
        if not all(0 <= x <= 1 for x in coords):
            raise ValueError(f"Torus coordinates must lie in [0, 1], not {self.t}")
        object.__setattr__(self, "t", coords)

    def __str__(self):
        return f"t:{','.join(str(x) for x in self.t)}"


Place = Union[DivisorPlace, PrimePlace, TorusPlace]


def place_constant(omega, params, spec=None):
    """c_w = lambda deg P_w + mu(p_w); exactly lambda at infinity"""
    if omega.at_infinity:
        return MahlerEstimate.exact(params.lambda_)
    return mahler_measure(omega.defining.poly, spec) + params.lambda_ * omega.degree


def log_absolute_value(f, place, params, spec=None):
    """log |f|_w as an estimate; -inf for f = 0 away from divisor places"""
    f = as_rational_function(f)
    if isinstance(place, DivisorPlace):
        if f.is_zero:
            raise ZeroPolynomialError("|0| is not defined by a divisorial valuation")
        order = ord_at_divisor(f, place.divisor)
        if order == 0:
            return MahlerEstimate.exact(0.0)
        return place_constant(place.divisor, params, spec).scale(-order)
    if f.is_zero:
        return MahlerEstimate.exact(-math.inf)
    if isinstance(place, PrimePlace):
        return MahlerEstimate.exact(-padic_valuation(f.scalar, place.p) * math.log(place.p))
    if len(place.t) != f.num_vars:
        raise VariableCountError(f"Torus point {place} does not have {f.num_vars} coordinates")
    num, num_err = torus_eval(f.num.poly, place.t)
    den, den_err = torus_eval(f.den.poly, place.t)
    parts = []
    error = 0.0
    for value, err, sign in ((num, num_err, 1), (den, den_err, -1)):
        size = abs(value)
        if size <= err:
            # the computed value cannot be told apart from 0
            return MahlerEstimate(
                -math.inf if sign > 0 else math.inf, math.inf, "exact", converged=False
            )
        parts.append(sign * math.log(size))
        error += err / (size - err)
    parts.append(log_abs(f.scalar))
    return MahlerEstimate(math.fsum(parts), error, "exact")


def absolute_value(f, place, params, spec=None):
    """
    |f|_w for any place.

    |0| is 0 at prime and torus places; divisor places refuse 0.
    """
    f = as_rational_function(f)
    if isinstance(place, PrimePlace):
        return 0.0 if f.is_zero else float(gauss_norm(f, place.p))
    if isinstance(place, TorusPlace):
        if f.is_zero:
            return 0.0
        if len(place.t) != f.num_vars:
            raise VariableCountError(
                f"Torus point {place} does not have {f.num_vars} coordinates"
            )
        num, _ = torus_eval(f.num.poly, place.t)
        den, _ = torus_eval(f.den.poly, place.t)
        if den == 0:
            return math.inf
        return abs(float(f.scalar)) * abs(num) / abs(den)
    return math.exp(log_absolute_value(f, place, params, spec).value)


# -----------------------------------------------------------------------------
# projective points and heights
# -----------------------------------------------------------------------------


def _poly_lcm(a, b):
    return (a * b).exact_div(multi_gcd([a, b]).poly)


@dataclass(frozen=True)
class ProjPoint:
    """
    A point of P^m(Q(X_1, ..., X_n)) in canonical form.

    The coordinates are integer polynomials, not all zero, without common
    integer or polynomial factor, and the first nonzero coordinate has a
    positive leading coefficient. Use `canonicalize` to build one.
    """

    coords: tuple

    @classmethod
    def canonicalize(cls, coords, num_vars=None):
        return cls(_canonical_coords(coords, num_vars)[0])

    @property
    def num_vars(self):
        return self.coords[0].num_vars

    @property
    def dimension(self):
        return len(self.coords) - 1

    @property
    def degree(self):
        return max(x.degree for x in self.coords)

    def power(self, N):
        """(x_0^N : ... : x_m^N), still canonical"""
        if N < 1:
            raise ValueError(f"Powers of points need N >= 1, not {N}")
        return ProjPoint(tuple(x**N for x in self.coords))


def _canonical_coords(coords, num_vars=None):
    """
    Canonical coordinates and the scalar that carries the input to them.

    Returns:
        (tuple of RationalPolynomial, RationalFunction scalar)
    """
    raw = [x if isinstance(x, (int, Fraction)) else as_rational_function(x) for x in coords]
    if not raw:
        raise ValueError("A projective point needs at least one coordinate")
    counts = {x.num_vars for x in raw if isinstance(x, RationalFunction)}
    if num_vars is not None:
        counts.add(num_vars)
    if len(counts) > 1:
        raise VariableCountError("Coordinates must live in one rational function field")
    n = counts.pop() if counts else 1
    raw = [x if isinstance(x, RationalFunction) else RationalFunction.constant(x, n) for x in raw]
    if all(x.is_zero for x in raw):
        raise ZeroPolynomialError("(0 : ... : 0) is not a projective point")

    common_den = reduce(_poly_lcm, (x.den.poly for x in raw if not x.is_zero))
    polys = [
        RationalPolynomial(n)
        if x.is_zero
        else x.num.poly * common_den.exact_div(x.den.poly) * x.scalar
        for x in raw
    ]
    nonzero = [f for f in polys if not f.is_zero]
    g = multi_gcd(nonzero).poly
    polys = [f.exact_div(g) for f in polys]
    coeffs = [c for f in polys for c in f.terms.values()]
    content = Fraction(
        reduce(math.gcd, (c.numerator for c in coeffs), 0),
        reduce(math.lcm, (c.denominator for c in coeffs)),
    )
    first = next(f for f in polys if not f.is_zero)
    if first.leading_coefficient < 0:
        content = -content
    canonical = tuple(f * (1 / content) for f in polys)

    i = next(i for i, x in enumerate(raw) if not x.is_zero)
    scalar = RationalFunction.from_polynomial(canonical[i]) / raw[i]
    return canonical, scalar


def canonicalize(coords, num_vars=None):
    return ProjPoint.canonicalize(coords, num_vars)


def height(point, params, spec=None):
    """
    h(x) = lambda max deg x_i + int log max_i |x_i(e(t))| dt.

    The degree term is exact; the integral carries the quadrature error.
    """
    if not isinstance(point, ProjPoint):
        point = ProjPoint.canonicalize(point)
    degree_term = params.lambda_ * point.degree
    integral = integrate_log_max(point.coords, spec)
    return integral + degree_term if degree_term else integral


def element_height(f, params, spec=None):
    """h(1 : f), the height bounded in Northcott's property"""
    f = as_rational_function(f)
    point = ProjPoint.canonicalize([RationalFunction.constant(1, f.num_vars), f])
    return height(point, params, spec)


def northcott_element_bounds(C, params):
    """
    Degree and Mahler measure bounds of the finite set {f : h(1:f) <= C}.

    Writing f = f_1/f_2 coprime, h(1:f) <= C forces max(deg f_1, deg f_2)
    <= C / lambda and max(mu(f_1), mu(f_2)) <= C.
    """
    params.require_northcott()
    if C < 0:
        return -1, C
    return math.floor(C / params.lambda_), C


def is_height_zero(point, params):
    """
    Exact: for lambda > 0 a canonical point has height 0 exactly when all
    coordinates are 0, 1 or -1.
    """
    params.require_northcott()
    if not isinstance(point, ProjPoint):
        point = ProjPoint.canonicalize(point)
    return point.degree <= 0 and all(
        x.is_zero or abs(x.constant_value()) == 1 for x in point.coords
    )


def torsion_witness(coords, params, num_vars=None):
    """
    The scalar c with c x_i in {0, 1, -1} for all i, if the point has height
    zero; None otherwise.
    """
    canonical, scalar = _canonical_coords(coords, num_vars)
    if not is_height_zero(ProjPoint(canonical), params):
        return None
    app_log.debug(f"Torsion witness {scalar!r}")
    return scalar


# -----------------------------------------------------------------------------
# the product formula
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class FactoredElement:
    """
    a * prod p_i^{e_i} with p_i nonconstant, primitive, pairwise coprime and
    asserted irreducible.
    """

    scalar: Fraction
    factors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "scalar", Fraction(self.scalar))
        if self.scalar == 0:
            raise ZeroPolynomialError("A factored element must be nonzero")
        factors = tuple((p, int(e)) for p, e in self.factors)
        object.__setattr__(self, "factors", factors)
        for p, e in factors:
            if not isinstance(p, PrimitiveIntPolynomial):
                raise TypeError(f"Factors must be PrimitiveIntPolynomial, not {p!r}")
            if p.is_constant:
                raise ValueError("Factors must be nonconstant")
            if e == 0:
                raise ValueError(f"Exponent of {p.poly!r} must be nonzero")
        if len({p.num_vars for p, _ in factors}) > 1:
            raise VariableCountError("Factors live in different polynomial rings")
        for i, (p, _) in enumerate(factors):
            for q, _ in factors[i + 1 :]:
                if not multi_gcd([p.poly, q.poly]).is_constant:
                    raise NonCoprimeError(f"{p.poly!r} and {q.poly!r} share a factor")

    @classmethod
    def from_polynomials(cls, scalar, factors):
        """Take content out of each factor into the scalar"""
        scalar = Fraction(scalar)
        clean = []
        for f, e in factors:
            c, p = content_primitive(f)
            scalar *= c**e
            clean.append((p, e))
        return cls(scalar, tuple(clean))

    def num_vars(self, default=1):
        return self.factors[0][0].num_vars if self.factors else default

    def expand(self, num_vars=None):
        n = self.num_vars(num_vars or 1)
        num = RationalPolynomial.constant(1, n)
        den = RationalPolynomial.constant(1, n)
        for p, e in self.factors:
            if e > 0:
                num = num * p.poly**e
            else:
                den = den * p.poly ** (-e)
        return num, den

    def to_rational_function(self, num_vars=None):
        num, den = self.expand(num_vars)
        return RationalFunction.from_polynomials(num * self.scalar, den)


@dataclass(frozen=True)
class PlaceTerm:
    """One summand of the product formula"""

    kind: str  # "divisor", "infinity", "prime" or "archimedean"
    label: str
    estimate: MahlerEstimate


def product_formula_terms(elem, params, spec=None, num_vars=None):
    """
    log |f|_w for every place where it is nonzero, plus the archimedean
    integral int log |f(e(t))| dt. Their sum vanishes.
    """
    n = elem.num_vars(num_vars or params.n)
    terms = []
    total_degree = 0
    for p, e in elem.factors:
        omega = PrimeDivisor(p)
        contribution = place_constant(omega, params, spec).scale(-e)
        terms.append(PlaceTerm("divisor", str(DivisorPlace(omega)), contribution))
        total_degree += e * p.degree
    if total_degree:
        terms.append(
            PlaceTerm(
                "infinity",
                str(DivisorPlace(PrimeDivisor.infinity(n))),
                MahlerEstimate.exact(params.lambda_ * total_degree),
            )
        )
    for prime in sorted(factor_integer(elem.scalar.numerator * elem.scalar.denominator)):
        value = -padic_valuation(elem.scalar, prime) * math.log(prime)
        terms.append(PlaceTerm("prime", str(PrimePlace(prime)), MahlerEstimate.exact(value)))
    num, den = elem.expand(n)
    archimedean = mahler_measure(num, spec) - mahler_measure(den, spec) + log_abs(elem.scalar)
    terms.append(PlaceTerm("archimedean", "torus", archimedean))
    return terms


def product_formula_residual(elem, params, spec=None, num_vars=None):
    """The sum of all place contributions, 0 up to the combined error bound"""
    terms = product_formula_terms(elem, params, spec, num_vars)
    residual = sum_estimates(t.estimate for t in terms)
    app_log.debug(f"Product formula residual {residual.value} +- {residual.error_bound}")
    return residual


def log_height_terms(point, params, spec=None):
    """Degree and integral parts of the height, reported separately"""
    if not isinstance(point, ProjPoint):
        point = ProjPoint.canonicalize(point)
    return {
        "degree": params.lambda_ * point.degree,
        "integral": integrate_log_max(point.coords, spec),
    }

