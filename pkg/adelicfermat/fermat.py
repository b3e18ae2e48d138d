"""
Fermat curves x^N + y^N = 1 over Q(X_1, ..., X_n).

Point checks, solutions in a finite group of roots of unity, the bound on
multiples m_0 = ceil(exp(H/a)), the smallest positive height, and the
density lemma: simulation of the set

    T = union over primes p >= p0 of p * Z_{>= m_p}

and certificates (eps, p_1..p_r, Q, phi(Q), n_0, m-threshold) for it.
"""
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import jsonschema
import mpmath
import numpy as np
from tornado.log import app_log

from .adelic import ProjPoint, height, is_height_zero
from .mahler import (
    BoxTooLargeError,
    QuadratureSpec,
    mahler_measure,
    northcott_enumerate,
)
from .polycore import (
    RationalFunction,
    RationalPolynomial,
    as_rational_function,
    factor_integer,
    load_schema,
)

__all__ = [
    "OffCurveError",
    "SearchSpaceError",
    "SieveCapError",
    "FermatInstance",
    "PointCheck",
    "fermat_check_point",
    "ProjectiveCheck",
    "FermatReport",
    "fermat_property_over_points",
    "TorsionAngle",
    "torsion_group",
    "roots_of_unity_solutions",
    "BoundInputs",
    "MultipleBound",
    "multiple_bound",
    "MinHeightResult",
    "min_positive_height",
    "euler_phi",
    "primes_up_to",
    "HeightRule",
    "ConstHeight",
    "LogHeight",
    "DensityRule",
    "ConstRule",
    "IdentityRule",
    "TableRule",
    "ExpProfileRule",
    "DensitySpec",
    "DensityResult",
    "density_simulate",
    "density_profile",
    "coprime_count",
    "DensityCertificate",
    "complement_bound",
    "CertificateReport",
    "density_certificate",
    "PipelineReport",
    "theorem_pipeline",
]


class OffCurveError(ValueError):
    """A supplied point does not satisfy x^N + y^N = z^N"""


class SearchSpaceError(ValueError):
    """The minimal height search needs more tuples than allowed"""


class SieveCapError(ValueError):
    """The sieve or certificate is larger than allowed"""


@dataclass(frozen=True)
class FermatInstance:
    """The Fermat curve of degree N"""

    N: int

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"The Fermat degree must be a positive integer, not {self.N!r}")


def _is_unit_or_zero(f):
    """f in {0} u mu(K_0) = {0, 1, -1}"""
    return f.is_zero or (f.is_constant and abs(f.constant_value()) == 1)


@dataclass(frozen=True)
class PointCheck:
    on_curve: bool
    torsion_solution: bool


def fermat_check_point(x, y, N):
    """Exact check of x^N + y^N = 1 and of x, y in {0, 1, -1}"""
    FermatInstance(N)
    x = as_rational_function(x)
    y = as_rational_function(y)
    on_curve = x**N + y**N == RationalFunction.constant(1, x.num_vars)
    return PointCheck(on_curve, _is_unit_or_zero(x) and _is_unit_or_zero(y))


@dataclass(frozen=True)
class ProjectiveCheck:
    """One point of F_N and the two sides of the height-zero criterion"""

    point: ProjPoint
    height_zero: bool
    torsion_criterion: bool
    # y = zeta x on the line at infinity; None when z != 0
    zeta: Optional[Fraction] = None


@dataclass(frozen=True)
class FermatReport:
    holds: bool
    equivalence: bool
    checks: tuple
    witnesses: tuple = field(default=())


def fermat_property_over_points(points, N, params):
    """
    Check that every supplied point of X^N + Y^N = Z^N has height zero.

    Every point is also checked against the affine criterion: for z != 0
    both x/z and y/z lie in {0, 1, -1}, and for z = 0 there is zeta in
    {1, -1} with y = zeta x. `equivalence` reports whether both criteria
    agree on every point.

    Raises:
        OffCurveError: when a point is not on the curve
    """
    FermatInstance(N)
    checks = []
    for raw in points:
        if len(raw) != 3:
            raise ValueError(f"Points of P^2 have three coordinates, not {len(raw)}")
        x, y, z = (as_rational_function(c) for c in raw)
        if x**N + y**N != z**N:
            raise OffCurveError(f"({x!r} : {y!r} : {z!r}) is not on the Fermat curve of degree {N}")
        point = ProjPoint.canonicalize([x, y, z])
        zero = is_height_zero(point, params)
        zeta = None
        if z.is_zero:
            ratio = y / x
            criterion = ratio.is_constant and abs(ratio.constant_value()) == 1
            zeta = ratio.constant_value() if ratio.is_constant else None
        else:
            criterion = _is_unit_or_zero(x / z) and _is_unit_or_zero(y / z)
        checks.append(ProjectiveCheck(point, zero, criterion, zeta))
    witnesses = tuple(c.point for c in checks if not c.height_zero)
    equivalence = all(c.height_zero == c.torsion_criterion for c in checks)
    if not equivalence:
        app_log.warning("Height-zero and torsion criteria disagree on the supplied points")
    return FermatReport(not witnesses, equivalence, tuple(checks), witnesses)


# -----------------------------------------------------------------------------
# roots of unity
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionAngle:
    """
    e^{2 pi i q} for 0 <= q < 1, or the zero element when q is None.
    """

    q: Optional[Fraction] = None

    def __post_init__(self):
        if self.q is not None:
            q = Fraction(self.q)
            if not 0 <= q < 1:
                raise ValueError(f"Angles live in [0, 1), not {q}")
            object.__setattr__(self, "q", q)

    @property
    def is_zero(self):
        return self.q is None

    def sort_key(self):
        return (-1, 0) if self.q is None else (0, self.q)

    def __str__(self):
        return "0_" if self.q is None else str(self.q)


def torsion_group(M):
    """{0} u {e^{2 pi i k/M}}"""
    if M < 1:
        raise ValueError(f"Group order must be positive, not {M}")
    return [TorsionAngle()] + [TorsionAngle(Fraction(k, M)) for k in range(M)]


SIXTHS = {Fraction(1, 6), Fraction(5, 6)}


def roots_of_unity_solutions(N, M):
    """
    All (x, y) in ({0} u mu_M)^2 with x^N + y^N = 1.

    Two roots of unity sum to 1 exactly when they are e^{pi i/3} and
    e^{-pi i/3}, so with both coordinates nonzero the condition is
    {N q_1, N q_2} = {1/6, 5/6} mod 1; with one coordinate zero the other
    must satisfy N q = 0 mod 1.
    """
    FermatInstance(N)
    group = torsion_group(M)
    solutions = []
    for a, b in itertools.product(group, repeat=2):
        if a.is_zero and b.is_zero:
            continue
        if a.is_zero or b.is_zero:
            other = b if a.is_zero else a
            if (N * other.q) % 1 == 0:
                solutions.append((a, b))
        elif {(N * a.q) % 1, (N * b.q) % 1} == SIXTHS:
            solutions.append((a, b))
    solutions.sort(key=lambda s: (s[0].sort_key(), s[1].sort_key()))
    return solutions


# -----------------------------------------------------------------------------
# bounds on heights
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundInputs:
    """H: largest height on the known points, a: smallest positive height"""

    H: float
    a: float

    def __post_init__(self):
        if not self.H >= 0:
            raise ValueError(f"H must be non-negative, not {self.H}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, not {self.a}")


@dataclass(frozen=True)
class MultipleBound:
    # ceil(exp(H/a))
    m0: int
    # floor(H/a) + 1, the smallest m with m a > H
    tight: int


def multiple_bound(bound):
    """
    m_0 = ceil(exp(H/a)) and the tight bound floor(H/a) + 1.

    Any m >= m_0 satisfies m a > H, so no point of positive height can have
    its m-th power inside a set of height at most H.
    """
    ratio = mpmath.mpf(bound.H) / mpmath.mpf(bound.a)
    # enough digits to represent exp(ratio) as an integer
    dps = max(30, int(ratio / math.log(10)) + 30)
    with mpmath.workdps(dps):
        ratio = mpmath.mpf(bound.H) / mpmath.mpf(bound.a)
        m0 = int(mpmath.ceil(mpmath.exp(ratio)))
        tight = int(mpmath.floor(ratio)) + 1
    return MultipleBound(max(m0, 1), tight)


@dataclass(frozen=True)
class MinHeightResult:
    value: float
    error_bound: float
    witness: Optional[ProjPoint]
    examined: int


def _coordinate_candidates(D, C, coeff_bound, num_vars, spec, cap):
    """
    Integer polynomials f with deg f <= D, |coefficients| <= coeff_bound and
    mu(f) <= C, both signs and 0 included.
    """
    if num_vars == 1 and not math.isinf(C):
        try:
            enumerated = northcott_enumerate(D, C, spec, cap=cap)
        except BoxTooLargeError as e:
            raise SearchSpaceError(str(e)) from e
        found = [f for f in enumerated if max(abs(c) for c in f.terms.values()) <= coeff_bound]
    else:
        exps = [e for e in itertools.product(range(D + 1), repeat=num_vars) if sum(e) <= D]
        volume = (2 * coeff_bound + 1) ** len(exps)
        if volume > cap:
            raise SearchSpaceError(
                f"{volume} coefficient vectors in {num_vars} variables exceed the cap of {cap}"
            )
        found = []
        for coeffs in itertools.product(range(-coeff_bound, coeff_bound + 1), repeat=len(exps)):
            f = RationalPolynomial(num_vars, dict(zip(exps, coeffs)))
            if f.is_zero or f.leading_coefficient < 0:
                continue
            if math.isinf(C):
                found.append(f)
            elif math.log(f.leading_coefficient) <= C + 1e-9:
                if mahler_measure(f, spec).value <= C + 1e-9:
                    found.append(f)
    zero = RationalPolynomial(num_vars)
    return [zero] + found + [-f for f in found]


def min_positive_height(params, deg_bound, coeff_bound, dimension=2, spec=None, cap=2_000_000):
    """
    The least positive height of a point of P^dimension(K_0) whose canonical
    coordinates have degree <= deg_bound and coefficients bounded by
    coeff_bound.

    Degrees are searched in increasing order. A point of degree D has height
    at least lambda D plus the Mahler measure of each coordinate, so only
    coordinates with mu < best - lambda D are combined, and the search stops
    once lambda D reaches the best height found.
    """
    params.require_northcott()
    if dimension < 1:
        raise ValueError(f"Points need dimension >= 1, not {dimension}")
    spec = spec or QuadratureSpec()
    n = params.n
    best = MinHeightResult(math.inf, 0.0, None, 0)
    seen = set()
    for D in range(deg_bound + 1):
        if params.lambda_ * D >= best.value:
            break
        C = best.value - params.lambda_ * D
        candidates = _coordinate_candidates(D, C, coeff_bound, n, spec, cap)
        count = len(candidates) ** (dimension + 1)
        if count > cap:
            raise SearchSpaceError(f"{count} tuples of degree {D} exceed the cap of {cap}")
        app_log.debug(f"Degree {D}: {len(candidates)} coordinate candidates, bound {C}")
        examined = best.examined
        for coords in itertools.product(candidates, repeat=dimension + 1):
            if all(f.is_zero for f in coords) or max(f.degree for f in coords) != D:
                continue
            point = ProjPoint.canonicalize(coords, n)
            if point in seen or point.degree != D:
                continue
            seen.add(point)
            examined += 1
            if is_height_zero(point, params):
                continue
            estimate = height(point, params, spec)
            if estimate.value < best.value:
                best = MinHeightResult(estimate.value, estimate.error_bound, point, examined)
        best = MinHeightResult(best.value, best.error_bound, best.witness, examined)
    return best


# -----------------------------------------------------------------------------
# density of T
# -----------------------------------------------------------------------------


def euler_phi(Q):
    if not isinstance(Q, int) or Q < 1:
        raise ValueError(f"phi is defined on positive integers, not {Q!r}")
    result = Q
    for p in factor_integer(Q):
        result = result // p * (p - 1)
    return result


def primes_up_to(limit):
    """Sieve of Eratosthenes"""
    if limit < 2:
        return np.array([], dtype=np.int64)
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


class HeightRule:
    """p -> H_p"""

    def value(self, p):
        raise NotImplementedError

    @classmethod
    def from_json(cls, data):
        jsonschema.validate(data, load_schema("height-rule"))
        if isinstance(data, (int, float)):
            return ConstHeight(data)
        if "const" in data:
            return ConstHeight(data["const"])
        return LogHeight(data["log"])


@dataclass(frozen=True)
class ConstHeight(HeightRule):
    h: float

    def value(self, p):
        return mpmath.mpf(self.h)

    def to_json(self):
        return {"const": self.h}


@dataclass(frozen=True)
class LogHeight(HeightRule):
    """H_p = c log p"""

    c: float

    def value(self, p):
        return mpmath.mpf(self.c) * mpmath.log(p)

    def to_json(self):
        return {"log": self.c}


class DensityRule:
    """p -> m_p >= 1 for every prime p >= p0"""

    def m(self, p, clip=None):
        """m_p, or `clip` if m_p is larger"""
        raise NotImplementedError

    @staticmethod
    def _clip(value, clip):
        return value if clip is None else min(value, clip)


@dataclass(frozen=True)
class ConstRule(DensityRule):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"m_p must be at least 1, not {self.k}")

    def m(self, p, clip=None):
        return self._clip(self.k, clip)

    def to_json(self):
        return {"const": self.k}


@dataclass(frozen=True)
class IdentityRule(DensityRule):
    def m(self, p, clip=None):
        return self._clip(p, clip)

    def to_json(self):
        return "identity"


@dataclass(frozen=True)
class TableRule(DensityRule):
    table: tuple
    default: int

    def __post_init__(self):
        if self.default < 1 or any(m < 1 for _, m in self.table):
            raise ValueError("m_p must be at least 1")

    def m(self, p, clip=None):
        return self._clip(dict(self.table).get(p, self.default), clip)

    def to_json(self):
        data = {str(p): m for p, m in self.table}
        data["default"] = self.default
        return {"table": data}


@dataclass(frozen=True)
class ExpProfileRule(DensityRule):
    """m_p = ceil(exp(H_p / a)), the multiple bound for each prime"""

    a: float
    H: HeightRule

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be positive, not {self.a}")

    def m(self, p, clip=None):
        ratio = self.H.value(p) / mpmath.mpf(self.a)
        if clip is not None and ratio > math.log(clip):
            return clip
        return multiple_bound(BoundInputs(float(self.H.value(p)), self.a)).m0

    def to_json(self):
        return {"exp_profile": {"a": self.a, "H": self.H.to_json()}}


@dataclass(frozen=True)
class DensitySpec:
    p0: int
    rule: DensityRule

    def __post_init__(self):
        if self.p0 < 1:
            raise ValueError(f"p0 must be positive, not {self.p0}")

    def primes(self, limit):
        primes = primes_up_to(limit)
        return primes[primes >= self.p0]

    def to_json(self):
        return {"p0": self.p0, "rule": self.rule.to_json()}

    @classmethod
    def from_json(cls, data):
        # Raises useful exception if validation fails
        jsonschema.validate(data, load_schema("density-spec"))
        rule = data["rule"]
        if rule == "identity" or (isinstance(rule, dict) and "identity" in rule):
            parsed = IdentityRule()
        elif "const" in rule:
            parsed = ConstRule(rule["const"])
        elif "table" in rule:
            table = dict(rule["table"])
            default = table.pop("default")
            parsed = TableRule(tuple(sorted((int(p), m) for p, m in table.items())), default)
        else:
            profile = rule["exp_profile"]
            parsed = ExpProfileRule(profile["a"], HeightRule.from_json(profile["H"]))
        return cls(data["p0"], parsed)


@dataclass(frozen=True)
class DensityResult:
    m: int
    count: int
    ratio: float


def _sieve_members(spec, m, cap):
    """Boolean array over [0, m] marking the members of T"""
    if m < 1:
        raise ValueError(f"m must be positive, not {m}")
    if m > cap:
        raise SieveCapError(f"Sieving [1, {m}] exceeds the cap of {cap}")
    members = np.zeros(m + 1, dtype=bool)
    for p in spec.primes(m):
        p = int(p)
        start = p * spec.rule.m(p, clip=m // p + 1)
        if start <= m:
            members[start::p] = True
    return members


def density_simulate(spec, m, cap=10_000_000):
    """#(T n [1, m]) and its ratio to m"""
    members = _sieve_members(spec, m, cap)
    count = int(np.count_nonzero(members[1:]))
    return DensityResult(m, count, count / m)


def density_profile(spec, checkpoints, cap=10_000_000):
    """density_simulate at every checkpoint from one sieve"""
    checkpoints = sorted(set(checkpoints))
    if not checkpoints:
        return []
    members = _sieve_members(spec, checkpoints[-1], cap)
    counts = np.cumsum(members)
    return [DensityResult(m, int(counts[m]), int(counts[m]) / m) for m in checkpoints]


def _product(values):
    """Product by balanced halving, fast for many big factors"""
    values = list(values)
    if not values:
        return 1
    while len(values) > 1:
        values = [
            values[i] * values[i + 1] if i + 1 < len(values) else values[i]
            for i in range(0, len(values), 2)
        ]
    return values[0]


def coprime_count(Q, chunk=1 << 20):
    """#{1 <= n <= Q : gcd(n, Q) = 1} by direct count"""
    total = 0
    for start in range(1, Q + 1, chunk):
        n = np.arange(start, min(start + chunk, Q + 1), dtype=np.int64)
        total += int(np.count_nonzero(np.gcd(n, Q) == 1))
    return total


@dataclass(frozen=True)
class DensityCertificate:
    epsilon: Fraction
    primes: tuple
    Q: int
    phi_Q: int
    n0: int
    m_threshold: int

    @property
    def euler_product(self):
        return Fraction(self.phi_Q, self.Q)

    def to_json(self):
        return {
            "epsilon": str(self.epsilon),
            "primes": list(self.primes),
            "Q": str(self.Q),
            "phi_Q": str(self.phi_Q),
            "euler_product": float(self.euler_product),
            "n0": str(self.n0),
            "m_threshold": str(self.m_threshold),
        }


def complement_bound(certificate, m):
    """
    (n0 - 1) + (floor(m/Q) + 1) phi(Q) bounds #([1, m] \\ T): below n0
    everything may be missing, above it only integers coprime to Q are.
    """
    return (certificate.n0 - 1) + (m // certificate.Q + 1) * certificate.phi_Q


@dataclass(frozen=True)
class CertificateReport:
    certificate: DensityCertificate
    # "verified", "failed" or "unverified-at-scale"
    status: str
    simulated: Optional[DensityResult] = None
    complement_within_bound: Optional[bool] = None
    coprime_count_matches: Optional[bool] = None


def _as_fraction(x):
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def _greedy_primes(p0, epsilon, prime_cap):
    """Shortest run of primes >= p0 with prod (1 - 1/p) <= epsilon"""
    target = math.log(epsilon)
    limit = max(1024, 2 * p0)
    while True:
        primes = primes_up_to(limit)
        primes = primes[primes >= p0]
        logs = np.cumsum(np.log1p(-1.0 / primes))
        hits = np.nonzero(logs <= target + 1e-9)[0]
        if len(hits):
            r = int(hits[0]) + 1
            break
        if len(primes) > prime_cap:
            raise SieveCapError(f"More than {prime_cap} primes are needed for epsilon = {epsilon}")
        limit *= 4
    if r > prime_cap:
        raise SieveCapError(f"{r} primes are needed for epsilon = {epsilon}, above {prime_cap}")
    chosen = [int(p) for p in primes[:r]]
    # settle the float estimate exactly
    num, den = _product(p - 1 for p in chosen), _product(chosen)
    while Fraction(num, den) > epsilon:
        p = int(primes[len(chosen)])
        chosen.append(p)
        num, den = num * (p - 1), den * p
    while len(chosen) > 1 and Fraction(num // (chosen[-1] - 1), den // chosen[-1]) <= epsilon:
        p = chosen.pop()
        num, den = num // (p - 1), den // p
    return chosen, num, den


def density_certificate(spec, epsilon, cap=10_000_000, prime_cap=100_000):
    """
    Greedy certificate for the density lemma and its check by simulation.

    Consecutive primes from p0 are taken until prod (1 - 1/p_i) <= eps. Then
    Q = prod p_i, n0 = max p_i m_{p_i} and m_threshold = ceil(max((n0 - 1)/eps,
    Q/eps)); from m_threshold on at most 3 eps m integers in [1, m] are
    outside T. The simulation at m_threshold is run when it fits in `cap`.
    """
    epsilon = _as_fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), not {epsilon}")
    primes, phi_Q, Q = _greedy_primes(spec.p0, epsilon, prime_cap)
    n0 = max(p * spec.rule.m(p) for p in primes)
    m_threshold = math.ceil(max(Fraction(n0 - 1) / epsilon, Fraction(Q) / epsilon))
    certificate = DensityCertificate(epsilon, tuple(primes), Q, phi_Q, n0, m_threshold)
    app_log.debug(f"Certificate with {len(primes)} primes, Q={Q}, m_threshold={m_threshold}")

    coprime = coprime_count(Q) == phi_Q if Q <= cap else None
    if m_threshold > cap:
        app_log.warning(
            f"m_threshold={m_threshold} exceeds the sieve cap {cap}; certificate unverified"
        )
        return CertificateReport(certificate, "unverified-at-scale", coprime_count_matches=coprime)
    simulated = density_simulate(spec, m_threshold, cap)
    within = (m_threshold - simulated.count) <= complement_bound(certificate, m_threshold)
    verified = Fraction(simulated.count, m_threshold) >= 1 - 3 * epsilon and within
    return CertificateReport(
        certificate, "verified" if verified else "failed", simulated, within, coprime
    )


@dataclass(frozen=True)
class PipelineReport:
    spec: DensitySpec
    multiple_bounds: tuple
    simulated: DensityResult
    certificate: Optional[CertificateReport]
    warnings: tuple = ()


def theorem_pipeline(height_rule, a, epsilon, m, p0=5, cap=10_000_000, prime_cap=100_000, show=10):
    """
    From height data to density: m_p = ceil(exp(H_p / a)) for every prime
    p >= p0, the simulated density of T at m, and the certificate at eps.

    The heights H_p stand in for the maximal height on the finitely many
    points of each curve F_p, which is not computed here.
    """
    spec = DensitySpec(p0, ExpProfileRule(a, height_rule))
    shown = [int(p) for p in spec.primes(max(p0, 2) * 64)[:show]]
    bounds = tuple(
        (p, multiple_bound(BoundInputs(float(height_rule.value(p)), a))) for p in shown
    )
    simulated = density_simulate(spec, m, cap)
    warnings = []
    try:
        certificate = density_certificate(spec, epsilon, cap, prime_cap)
        if certificate.status != "verified":
            warnings.append(f"certificate {certificate.status}")
    except SieveCapError as e:
        app_log.warning(f"No certificate: {e}")
        certificate = None
        warnings.append(str(e))
    return PipelineReport(spec, bounds, simulated, certificate, tuple(warnings))
