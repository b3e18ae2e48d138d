"""
Exact arithmetic on multivariate polynomials and rational functions over the
rationals.

Polynomials are sparse maps from exponent vectors to nonzero Fractions.
Every canonical form produced here (primitive parts, GCDs, rational
functions) follows one sign rule: the coefficient of the lexicographically
greatest monomial is positive.
"""
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from types import MappingProxyType

import jsonschema
from ruamel.yaml import YAML
from tornado.log import app_log

yaml = YAML(typ="safe", pure=True)

# unit roundoff of IEEE double precision
EPS = 2.0**-53

__all__ = [
    "VariableCountError",
    "NotExactError",
    "ZeroPolynomialError",
    "NotPrimeError",
    "NotHomogeneousError",
    "is_prime",
    "factor_integer",
    "padic_valuation",
    "RationalPolynomial",
    "PrimitiveIntPolynomial",
    "content_primitive",
    "integer_content",
    "multi_gcd",
    "RationalFunction",
    "as_rational_function",
    "gauss_norm",
    "torus_eval",
    "homogenize",
    "dehomogenize",
    "PrimeDivisor",
    "multiplicity",
    "ord_at_divisor",
    "cyclotomic",
    "cyclotomic_indices",
    "squarefree_decomposition",
]


class VariableCountError(ValueError):
    """Operands live in polynomial rings with different numbers of variables"""


class NotExactError(ArithmeticError):
    """Exact division left a nonzero remainder"""


class ZeroPolynomialError(ValueError):
    """A nonzero polynomial or rational function was required"""


class NotPrimeError(ValueError):
    """A rational prime was required"""


class NotHomogeneousError(ValueError):
    """A homogeneous form was required"""


@lru_cache(maxsize=None)
def load_schema(name):
    """Load one of the YAML encoded JSON schemas shipped in `schemas/`"""
    root_dir = os.path.dirname(os.path.abspath(__file__))
    schema_file = os.path.join(root_dir, "schemas", f"{name}-schema.yaml")
    with open(schema_file) as schema_fd:
        return yaml.load(schema_fd)


# -----------------------------------------------------------------------------
# integers
# -----------------------------------------------------------------------------


def is_prime(p):
    """Trial division primality test"""
    if not isinstance(p, int) or p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def factor_integer(n):
    """
    Factor a nonzero integer by trial division.

    Returns:
        dict mapping each prime dividing `n` to its exponent; the sign is
        dropped and `factor_integer(1) == {}`.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("Cannot factor 0")
    factors = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors[n] = factors.get(n, 0) + 1
    return factors


def padic_valuation(q, p):
    """ord_p of a nonzero rational number"""
    q = Fraction(q)
    if q == 0:
        raise ZeroPolynomialError("The p-adic valuation of 0 is infinite")

    def _ord(k):
        v = 0
        while k % p == 0:
            k //= p
            v += 1
        return v

    return _ord(abs(q.numerator)) - _ord(q.denominator)


# -----------------------------------------------------------------------------
# polynomials
# -----------------------------------------------------------------------------


class RationalPolynomial:
    """
    An immutable sparse polynomial in `num_vars` variables with Fraction
    coefficients.

    `terms` maps exponent tuples to nonzero coefficients; the zero
    polynomial has no terms. Variables are indexed from 0, so variable `i`
    is X_{i+1}.
    """

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars, terms=None):
        if not isinstance(num_vars, int) or num_vars < 1:
            raise VariableCountError(f"num_vars must be a positive integer, not {num_vars!r}")
        clean = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise VariableCountError(
                    f"Exponent vector {exps} does not have length {num_vars}"
                )
            if min(exps, default=0) < 0:
                raise ValueError(f"Negative exponent in {exps}")
            value = clean.get(exps, 0) + Fraction(coeff)
            if value:
                clean[exps] = value
            else:
                clean.pop(exps, None)
        self.num_vars = num_vars
        self._terms = clean
        self._hash = None

    # construction helpers

    @classmethod
    def constant(cls, value, num_vars):
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def variable(cls, index, num_vars):
        if not 0 <= index < num_vars:
            raise VariableCountError(f"No variable {index} among {num_vars}")
        exps = [0] * num_vars
        exps[index] = 1
        return cls(num_vars, {tuple(exps): 1})

    @classmethod
    def from_coefficients(cls, coeffs, var, num_vars):
        """Inverse of `coefficients_in`: sum of coeffs[k] * X_var^k"""
        result = cls(num_vars)
        for k, c in coeffs.items():
            if isinstance(c, RationalPolynomial):
                result = result + c * cls._monomial(var, k, num_vars)
            else:
                result = result + cls._monomial(var, k, num_vars) * c
        return result

    @classmethod
    def univariate(cls, coeffs, num_vars=1, var=0):
        """Build sum(coeffs[k] * X_var^k) from a low-to-high coefficient list"""
        return cls.from_coefficients(dict(enumerate(coeffs)), var, num_vars)

    @classmethod
    def _monomial(cls, var, power, num_vars):
        exps = [0] * num_vars
        exps[var] = power
        return cls(num_vars, {tuple(exps): 1})

    # read access

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    @property
    def is_zero(self):
        return not self._terms

    @property
    def is_constant(self):
        return all(not any(exps) for exps in self._terms)

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial"""
        return max((sum(exps) for exps in self._terms), default=-1)

    @property
    def is_integral(self):
        return all(c.denominator == 1 for c in self._terms.values())

    def constant_value(self):
        if not self.is_constant:
            raise ValueError(f"{self!r} is not constant")
        return self._terms.get((0,) * self.num_vars, Fraction(0))

    def leading_term(self):
        """(exponents, coefficient) of the lexicographically greatest monomial"""
        if self.is_zero:
            raise ZeroPolynomialError("The zero polynomial has no leading term")
        exps = max(self._terms)
        return exps, self._terms[exps]

    @property
    def leading_coefficient(self):
        return self.leading_term()[1]

    def active_variables(self):
        return sorted({i for exps in self._terms for i, e in enumerate(exps) if e})

    def degree_in(self, var):
        return max((exps[var] for exps in self._terms), default=-1)

    def coefficients_in(self, var):
        """View as a polynomial in X_var: {power: coefficient polynomial}"""
        buckets = {}
        for exps, c in self._terms.items():
            rest = exps[:var] + (0,) + exps[var + 1 :]
            buckets.setdefault(exps[var], {})[rest] = c
        return {
            k: RationalPolynomial(self.num_vars, terms) for k, terms in buckets.items()
        }

    def univariate_coefficients(self, var):
        """Low-to-high Fraction coefficients of a polynomial in X_var only"""
        if any(v != var for v in self.active_variables()):
            raise ValueError(f"{self!r} involves variables other than {var}")
        coeffs = [Fraction(0)] * (max(self.degree_in(var), 0) + 1)
        for exps, c in self._terms.items():
            coeffs[exps[var]] = c
        return coeffs

    def derivative(self, var):
        terms = {}
        for exps, c in self._terms.items():
            if exps[var]:
                new = exps[:var] + (exps[var] - 1,) + exps[var + 1 :]
                terms[new] = c * exps[var]
        return RationalPolynomial(self.num_vars, terms)

    def evaluate(self, point):
        """Exact evaluation at a point with rational coordinates"""
        if len(point) != self.num_vars:
            raise VariableCountError(f"Expected {self.num_vars} coordinates")
        point = [Fraction(x) for x in point]
        total = Fraction(0)
        for exps, c in self._terms.items():
            value = c
            for x, e in zip(point, exps):
                value *= x**e
            total += value
        return total

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, RationalPolynomial):
            if other.num_vars != self.num_vars:
                raise VariableCountError(
                    f"Cannot combine polynomials in {self.num_vars} and {other.num_vars} variables"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial.constant(other, self.num_vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for exps, c in other._terms.items():
            terms[exps] = terms.get(exps, 0) + c
        return RationalPolynomial(self.num_vars, terms)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(
            self.num_vars, {exps: -c for exps, c in self._terms.items()}
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial(
                self.num_vars, {exps: c * other for exps, c in self._terms.items()}
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                terms[key] = terms.get(key, 0) + c1 * c2
        return RationalPolynomial(self.num_vars, terms)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError(f"Polynomial powers must be non-negative integers, not {k!r}")
        result = RationalPolynomial.constant(1, self.num_vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def try_exact_div(self, other):
        """Return self / other if the division is exact in Q[X], else None"""
        divisor = self._coerce(other)
        if divisor is NotImplemented:
            raise TypeError(f"Cannot divide a polynomial by {other!r}")
        other = divisor
        if other.is_zero:
            raise ZeroDivisionError("Division by the zero polynomial")
        lead_exps, lead_coeff = other.leading_term()
        remainder = dict(self._terms)
        quotient = {}
        while remainder:
            # lex order is a monomial order, so {other} is a Groebner basis
            # and a non-divisible leading term means a nonzero remainder
            exps = max(remainder)
            shift = tuple(a - b for a, b in zip(exps, lead_exps))
            if min(shift) < 0:
                return None
            factor = remainder[exps] / lead_coeff
            quotient[shift] = factor
            for oexps, ocoeff in other._terms.items():
                key = tuple(a + b for a, b in zip(shift, oexps))
                value = remainder.get(key, 0) - factor * ocoeff
                if value:
                    remainder[key] = value
                else:
                    remainder.pop(key, None)
        return RationalPolynomial(self.num_vars, quotient)

    def exact_div(self, other):
        quotient = self.try_exact_div(other)
        if quotient is None:
            raise NotExactError(f"{other!r} does not divide {self!r}")
        return quotient

    # comparison and display

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalPolynomial.constant(other, self.num_vars)
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        if self.is_zero:
            return f"RationalPolynomial({self.num_vars}, 0)"
        parts = []
        for exps in sorted(self._terms, reverse=True):
            mono = "*".join(
                f"X{i + 1}^{e}" if e > 1 else f"X{i + 1}"
                for i, e in enumerate(exps)
                if e
            )
            parts.append(f"{self._terms[exps]}" + (f"*{mono}" if mono else ""))
        return f"RationalPolynomial({self.num_vars}, {' + '.join(parts)})"

    # serialization

    def to_json(self):
        return {
            "vars": self.num_vars,
            "terms": [
                [list(exps), str(self._terms[exps])]
                for exps in sorted(self._terms, reverse=True)
            ],
        }

    @classmethod
    def from_json(cls, data):
        # Raises useful exception if validation fails
        jsonschema.validate(data, load_schema("polynomial"))
        return cls(data["vars"], {tuple(e): Fraction(c) for e, c in data["terms"]})


def _check_same_vars(polys):
    counts = {f.num_vars for f in polys}
    if len(counts) > 1:
        raise VariableCountError(f"Mixed variable counts {sorted(counts)}")


@dataclass(frozen=True)
class PrimitiveIntPolynomial:
    """
    A nonzero integer polynomial with coprime coefficients whose
    lexicographically leading coefficient is positive.
    """

    poly: RationalPolynomial

    def __post_init__(self):
        f = self.poly
        if f.is_zero:
            raise ZeroPolynomialError("A primitive polynomial cannot be zero")
        if not f.is_integral:
            raise ValueError(f"{f!r} has non-integer coefficients")
        if reduce(math.gcd, (int(c) for c in f.terms.values()), 0) != 1:
            raise ValueError(f"{f!r} is not primitive")
        if f.leading_coefficient < 0:
            raise ValueError(f"{f!r} does not have a positive leading coefficient")

    @classmethod
    def one(cls, num_vars):
        return cls(RationalPolynomial.constant(1, num_vars))

    @property
    def num_vars(self):
        return self.poly.num_vars

    @property
    def degree(self):
        return self.poly.degree

    @property
    def is_constant(self):
        return self.poly.is_constant

    def __mul__(self, other):
        # Gauss's lemma: products of primitive polynomials stay primitive
        return PrimitiveIntPolynomial(self.poly * other.poly)

    def __pow__(self, k):
        return PrimitiveIntPolynomial(self.poly**k)


def content_primitive(f):
    """
    Split a nonzero polynomial as f = content * primitive.

    The content is positive unless the sign rule for the primitive part
    forces the sign into it, e.g. -2X -> (-2, X).
    """
    if f.is_zero:
        raise ZeroPolynomialError("The zero polynomial has no content")
    coeffs = f.terms.values()
    content = Fraction(
        reduce(math.gcd, (c.numerator for c in coeffs), 0),
        reduce(math.lcm, (c.denominator for c in coeffs)),
    )
    if f.leading_coefficient < 0:
        content = -content
    return content, PrimitiveIntPolynomial(f * (1 / content))


def integer_content(f):
    """Content of an integer-coefficient polynomial (0 for zero)"""
    return reduce(math.gcd, (int(c) for c in f.terms.values()), 0)


# -----------------------------------------------------------------------------
# GCD by primitive polynomial remainder sequences
# -----------------------------------------------------------------------------


def _normalize_sign(f):
    return -f if not f.is_zero and f.leading_coefficient < 0 else f


def _content_in(f, var):
    """GCD of the coefficients of f viewed in Z[others][X_var]"""
    return reduce(_gcd_integral, f.coefficients_in(var).values())


def _pseudo_remainder(a, b, var):
    db = b.degree_in(var)
    lb = b.coefficients_in(var)[db]
    r = a
    while not r.is_zero and r.degree_in(var) >= db:
        dr = r.degree_in(var)
        lr = r.coefficients_in(var)[dr]
        shift = RationalPolynomial._monomial(var, dr - db, r.num_vars)
        r = r * lb - lr * b * shift
    return r


def _primitive_prs(a, b, var):
    """GCD of two polynomials primitive in X_var, up to sign"""
    if a.degree_in(var) < b.degree_in(var):
        a, b = b, a
    while not b.is_zero:
        if b.degree_in(var) <= 0:
            return RationalPolynomial.constant(1, a.num_vars)
        r = _pseudo_remainder(a, b, var)
        if not r.is_zero:
            r = r.exact_div(_content_in(r, var))
        a, b = b, r
    return a.exact_div(_content_in(a, var))


def _gcd_integral(a, b):
    """GCD in Z[X_1, ..., X_n], integer content included, sign normalized"""
    if a.is_zero:
        return _normalize_sign(b)
    if b.is_zero:
        return _normalize_sign(a)
    active = set(a.active_variables()) | set(b.active_variables())
    if not active:
        return RationalPolynomial.constant(
            math.gcd(int(a.constant_value()), int(b.constant_value())), a.num_vars
        )
    var = max(active)
    ca = _content_in(a, var)
    cb = _content_in(b, var)
    c = _gcd_integral(ca, cb)
    g = _primitive_prs(a.exact_div(ca), b.exact_div(cb), var)
    return _normalize_sign(c * g)


def multi_gcd(polys):
    """
    GCD of a list of polynomials as a primitive integer polynomial.

    Rational contents are ignored: gcd(2X, 4X^2) is X.
    """
    polys = list(polys)
    _check_same_vars(polys)
    nonzero = [content_primitive(f)[1].poly for f in polys if not f.is_zero]
    if not nonzero:
        raise ZeroPolynomialError("The GCD of only zero polynomials is undefined")
    g = reduce(_gcd_integral, nonzero)
    return content_primitive(g)[1]


# -----------------------------------------------------------------------------
# rational functions
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """
    scalar * num / den with num, den primitive and coprime.

    The zero function has scalar 0 and num = den = 1, so the representation
    of every element of Q(X_1, ..., X_n) is unique and equality is
    structural.
    """

    scalar: Fraction
    num: PrimitiveIntPolynomial
    den: PrimitiveIntPolynomial

    def __post_init__(self):
        if self.num.num_vars != self.den.num_vars:
            raise VariableCountError("Numerator and denominator variable counts differ")

    @classmethod
    def from_polynomials(cls, numerator, denominator=None):
        if denominator is None:
            denominator = RationalPolynomial.constant(1, numerator.num_vars)
        _check_same_vars([numerator, denominator])
        if denominator.is_zero:
            raise ZeroDivisionError("Zero denominator")
        if numerator.is_zero:
            return cls.zero(numerator.num_vars)
        g = multi_gcd([numerator, denominator])
        if not g.is_constant:
            numerator = numerator.exact_div(g.poly)
            denominator = denominator.exact_div(g.poly)
        cn, pn = content_primitive(numerator)
        cd, pd = content_primitive(denominator)
        return cls(Fraction(cn / cd), pn, pd)

    @classmethod
    def from_polynomial(cls, f):
        if f.is_zero:
            return cls.zero(f.num_vars)
        c, p = content_primitive(f)
        return cls(c, p, PrimitiveIntPolynomial.one(f.num_vars))

    @classmethod
    def constant(cls, value, num_vars):
        return cls.from_polynomial(RationalPolynomial.constant(value, num_vars))

    @classmethod
    def zero(cls, num_vars):
        one = PrimitiveIntPolynomial.one(num_vars)
        return cls(Fraction(0), one, one)

    @property
    def num_vars(self):
        return self.num.num_vars

    @property
    def is_zero(self):
        return self.scalar == 0

    @property
    def is_polynomial(self):
        return self.den.is_constant

    @property
    def is_constant(self):
        return self.num.is_constant and self.den.is_constant

    def constant_value(self):
        if not self.is_constant:
            raise ValueError(f"{self!r} is not constant")
        return self.scalar

    def numerator(self):
        """scalar * num as a polynomial (den carries no content)"""
        return self.num.poly * self.scalar

    def denominator(self):
        return self.den.poly

    def as_polynomial(self):
        if not self.is_polynomial:
            raise ValueError(f"{self!r} is not a polynomial")
        return self.numerator()

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if other.num_vars != self.num_vars:
                raise VariableCountError("Rational functions in different variable counts")
            return other
        if isinstance(other, RationalPolynomial):
            return RationalFunction.from_polynomial(other)
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(other, self.num_vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction.from_polynomials(
            self.numerator() * other.denominator()
            + other.numerator() * self.denominator(),
            self.denominator() * other.denominator(),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.scalar, self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero or other.is_zero:
            return RationalFunction.zero(self.num_vars)
        return RationalFunction.from_polynomials(
            self.num.poly * other.num.poly * (self.scalar * other.scalar),
            self.den.poly * other.den.poly,
        )

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero:
            raise ZeroDivisionError("Division by zero rational function")
        # swapping num and den keeps the representation canonical
        return RationalFunction(1 / self.scalar, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError(f"Rational function powers must be integers, not {k!r}")
        if k < 0:
            return self.inverse() ** (-k)
        if self.is_zero:
            return self if k else RationalFunction.constant(1, self.num_vars)
        # powers of coprime primitive polynomials stay coprime and primitive
        return RationalFunction(self.scalar**k, self.num**k, self.den**k)


def as_rational_function(f):
    if isinstance(f, RationalFunction):
        return f
    if isinstance(f, RationalPolynomial):
        return RationalFunction.from_polynomial(f)
    raise TypeError(f"Expected a polynomial or rational function, not {f!r}")


def gauss_norm(f, p):
    """
    The p-adic Gauss norm |f|_p, extended multiplicatively to rational
    functions. Primitive parts have norm 1, so only the content counts.
    """
    if not is_prime(p):
        raise NotPrimeError(f"{p!r} is not a prime number")
    f = as_rational_function(f)
    if f.is_zero:
        raise ZeroPolynomialError("The Gauss norm is only defined for nonzero input")
    return Fraction(p) ** (-padic_valuation(f.scalar, p))


# -----------------------------------------------------------------------------
# torus evaluation
# -----------------------------------------------------------------------------


def torus_eval(f, t):
    """
    Evaluate f at (e^{2 pi i t_1}, ..., e^{2 pi i t_n}).

    The phase of every monomial is reduced mod 1 in exact arithmetic before
    it is converted to a float, and the real and imaginary parts are summed
    with `math.fsum`, so the forward error depends only on the coefficient
    magnitudes and the number of terms, not on the degree.

    Returns:
        (value, error_bound) with |value - f(e(t))| <= error_bound
    """
    if len(t) != f.num_vars:
        raise VariableCountError(f"Expected {f.num_vars} torus coordinates, got {len(t)}")
    t = [Fraction(x) for x in t]
    real = []
    imag = []
    magnitude = 0.0
    for exps, c in f.terms.items():
        phase = sum((e * x for e, x in zip(exps, t)), Fraction(0)) % 1
        angle = 2 * math.pi * float(phase)
        coeff = float(c)
        real.append(coeff * math.cos(angle))
        imag.append(coeff * math.sin(angle))
        magnitude += abs(coeff)
    value = complex(math.fsum(real), math.fsum(imag))
    # per term: coefficient rounding, phase rounding amplified by 2 pi,
    # cos/sin and the product; the final sums are correctly rounded
    error_bound = EPS * (magnitude * (8 + 2 * math.pi) + 2 * abs(value)) * 2
    return value, error_bound


# -----------------------------------------------------------------------------
# prime divisors
# -----------------------------------------------------------------------------


def homogenize(f, total_deg):
    """P(T_0, ..., T_n) = T_0^total_deg * f(T_1/T_0, ..., T_n/T_0)"""
    if isinstance(f, PrimitiveIntPolynomial):
        f = f.poly
    if total_deg < f.degree:
        raise ValueError(f"Cannot homogenize degree {f.degree} to degree {total_deg}")
    return RationalPolynomial(
        f.num_vars + 1,
        {(total_deg - sum(exps),) + exps: c for exps, c in f.terms.items()},
    )


def dehomogenize(form):
    """p(X_1, ..., X_n) = P(1, X_1, ..., X_n)"""
    if form.num_vars < 2:
        raise VariableCountError("A form needs at least two variables T_0, T_1")
    degrees = {sum(exps) for exps in form.terms}
    if len(degrees) > 1:
        raise NotHomogeneousError(f"{form!r} is not homogeneous")
    return RationalPolynomial(
        form.num_vars - 1, {exps[1:]: c for exps, c in form.terms.items()}
    )


@dataclass(frozen=True)
class PrimeDivisor:
    """
    A prime divisor of projective n-space over the rationals.

    Stored through its dehomogenized primitive equation p = P(1, X); the
    hyperplane at infinity {T_0 = 0} has p = 1 and `at_infinity` set.
    Irreducibility of p is asserted by the caller and not verified.
    """

    defining: PrimitiveIntPolynomial
    at_infinity: bool = False

    def __post_init__(self):
        if self.at_infinity:
            if not self.defining.is_constant:
                raise ValueError("The divisor at infinity is defined by p = 1")
        elif self.defining.is_constant:
            raise ValueError("A prime divisor needs a nonconstant defining polynomial")

    @classmethod
    def infinity(cls, num_vars):
        return cls(PrimitiveIntPolynomial.one(num_vars), at_infinity=True)

    @classmethod
    def from_polynomial(cls, f):
        if isinstance(f, PrimitiveIntPolynomial):
            return cls(f)
        return cls(content_primitive(f)[1])

    @classmethod
    def from_homogeneous(cls, form):
        p = dehomogenize(form)
        if p.degree != form.degree:
            # T_0 divides the form
            t0 = RationalPolynomial.variable(0, form.num_vars)
            if form.degree == 1 and content_primitive(form)[1].poly == t0:
                return cls.infinity(form.num_vars - 1)
            raise ValueError(f"{form!r} is divisible by T_0 and so not irreducible")
        return cls.from_polynomial(p)

    @property
    def num_vars(self):
        return self.defining.num_vars

    @property
    def degree(self):
        """deg(P_omega), equal to deg(p_omega) away from infinity"""
        return 1 if self.at_infinity else self.defining.degree

    def homogeneous(self):
        if self.at_infinity:
            return RationalPolynomial.variable(0, self.num_vars + 1)
        return homogenize(self.defining, self.degree)


def multiplicity(f, p):
    """Largest k with p^k | f, for nonzero f and nonconstant p"""
    if f.is_zero:
        raise ZeroPolynomialError("Every power divides 0")
    k = 0
    while f.degree >= p.degree:
        q = f.try_exact_div(p)
        if q is None:
            break
        f = q
        k += 1
    return k


def ord_at_divisor(f, omega):
    """The order of vanishing of a nonzero rational function along omega"""
    f = as_rational_function(f)
    if f.is_zero:
        raise ZeroPolynomialError("ord of 0 is infinite")
    if f.num_vars != omega.num_vars:
        raise VariableCountError("Rational function and divisor variable counts differ")
    if omega.at_infinity:
        return f.den.degree - f.num.degree
    p = omega.defining.poly
    return multiplicity(f.num.poly, p) - multiplicity(f.den.poly, p)


# -----------------------------------------------------------------------------
# univariate helpers
# -----------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _totient(k):
    result = k
    for p in factor_integer(k):
        result = result // p * (p - 1)
    return result


@lru_cache(maxsize=256)
def cyclotomic(k, num_vars=1, var=0):
    """The k-th cyclotomic polynomial in X_var"""
    if k < 1:
        raise ValueError(f"No cyclotomic polynomial of index {k}")
    f = RationalPolynomial._monomial(var, k, num_vars) - 1
    for d in range(1, k):
        if k % d == 0:
            f = f.exact_div(cyclotomic(d, num_vars, var).poly)
    return content_primitive(f)[1]


def cyclotomic_indices(degree):
    """All k whose cyclotomic polynomial has degree at most `degree`"""
    # phi(k) >= sqrt(k/2), so phi(k) <= d forces k <= 2 d^2
    return [k for k in range(1, 2 * degree * degree + 2) if _totient(k) <= degree]


def squarefree_decomposition(f):
    """
    Yun's algorithm for a univariate polynomial.

    Returns:
        list of (PrimitiveIntPolynomial, multiplicity) with pairwise coprime
        squarefree nonconstant factors; their product equals the primitive
        part of f up to sign.
    """
    if f.is_zero:
        raise ZeroPolynomialError("The zero polynomial has no squarefree decomposition")
    active = f.active_variables()
    if len(active) > 1:
        raise ValueError(f"{f!r} is not univariate")
    if not active:
        return []
    var = active[0]
    a = content_primitive(f)[1].poly
    da = a.derivative(var)
    g = multi_gcd([a, da]).poly
    b = a.exact_div(g)
    c = da.exact_div(g)
    d = c - b.derivative(var)
    factors = []
    i = 1
    while not b.is_constant:
        ai = multi_gcd([b, d]).poly
        b = b.exact_div(ai)
        c = d.exact_div(ai)
        d = c - b.derivative(var)
        if not ai.is_constant:
            factors.append((content_primitive(ai)[1], i))
        i += 1
    app_log.debug(f"Squarefree decomposition of {f!r}: {len(factors)} factor(s)")
    return factors
