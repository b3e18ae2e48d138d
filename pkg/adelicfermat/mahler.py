"""
Mahler measures and torus integrals of log max |f_i|.

One variable goes through Jensen's formula with high precision roots; more
variables go through a periodic trapezoid grid with local refinement of
near-singular cells, or a randomly shifted lattice rule.
"""
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from tornado.log import app_log
from traitlets import Bool, Enum, Float, Integer, TraitError, validate
from traitlets.config import Configurable

from .polycore import (
    EPS,
    RationalPolynomial,
    ZeroPolynomialError,
    as_rational_function,
    content_primitive,
    cyclotomic,
    cyclotomic_indices,
    squarefree_decomposition,
)

JENSEN = "jensen_exact"
GRID = "tensor_grid"
QMC = "qmc"
EXACT = "exact"

# complex entries held by one chunk of grid evaluation
CHUNK_ENTRIES = 1 << 20

# per-axis offsets of the grid in units of one cell
GOLDEN = (math.sqrt(5) - 1) / 2

# sub-cells per axis at each local refinement level
SUBDIVISION = 4

__all__ = [
    "JENSEN",
    "GRID",
    "QMC",
    "EXACT",
    "BoxTooLargeError",
    "QuadratureSpec",
    "MahlerEstimate",
    "sum_estimates",
    "log_abs",
    "integrate_log_max",
    "mahler_measure",
    "mahler_measure_rational",
    "coefficient_bound_check",
    "northcott_box",
    "northcott_enumerate",
]


class BoxTooLargeError(ValueError):
    """The Northcott coefficient box is larger than the enumeration cap"""


class QuadratureSpec(Configurable):
    """How Mahler measures and height integrals are evaluated"""

    method = Enum(
        ["auto", "jensen", "grid", "qmc"],
        default_value="auto",
        config=True,
        help="""
        Integration method.

        `auto` uses Jensen's formula whenever at most one variable occurs,
        the tensor grid in two dimensions and the lattice rule above that.
        `jensen` on input with two or more variables falls back to the grid.
        """,
    )

    resolution = Integer(
        64,
        config=True,
        help="""
        Points per axis of the first grid pass. Each further pass doubles it.
        """,
    )

    levels = Integer(
        12,
        config=True,
        help="""
        Maximum number of grid or lattice passes.
        """,
    )

    samples = Integer(
        4096,
        config=True,
        help="""
        Points of the first lattice rule pass.
        """,
    )

    shifts = Integer(
        8,
        config=True,
        help="""
        Random shifts of the lattice rule; the spread of the shifted
        estimates gives the error estimate.
        """,
    )

    singular_threshold = Float(
        1e-6,
        config=True,
        help="""
        Points where max |f_i| is below this fraction of the largest
        coefficient 1-norm are treated as near-singular and refined locally.
        """,
    )

    singular_depth = Integer(
        3,
        config=True,
        help="""
        Levels of local refinement around near-singular points. Points still
        unresolved afterwards are clamped and inflate the error bound.
        """,
    )

    singular_cap = Integer(
        100_000,
        config=True,
        help="""
        Maximum number of near-singular points refined per pass.
        """,
    )

    tolerance = Float(
        1e-3,
        config=True,
        help="""
        Target error bound of grid and lattice integration.
        """,
    )

    jensen_tolerance = Float(
        1e-6,
        config=True,
        help="""
        Target error bound of the Jensen path. Root precision is raised
        until the bound is met.
        """,
    )

    root_dps = Integer(
        50,
        config=True,
        help="""
        Decimal digits used to isolate complex roots.
        """,
    )

    strip_cyclotomic = Bool(
        True,
        config=True,
        help="""
        Divide out cyclotomic factors exactly before root finding.
        """,
    )

    budget = Integer(
        10_000_000,
        config=True,
        help="""
        Maximum number of polynomial evaluations of one integration. When the
        next pass does not fit, the best estimate is returned flagged as not
        converged.
        """,
    )

    workers = Integer(
        1,
        config=True,
        help="""
        Threads evaluating grid chunks. Results do not depend on it.
        """,
    )

    seed = Integer(
        0,
        config=True,
        help="""
        Seed of the random lattice shifts.
        """,
    )

    @validate("resolution", "samples", "shifts")
    def _validate_at_least_two(self, proposal):
        if proposal.value < 2:
            raise TraitError(f"{proposal.trait.name} must be at least 2, not {proposal.value}")
        return proposal.value

    @validate("levels", "budget", "workers")
    def _validate_positive(self, proposal):
        if proposal.value < 1:
            raise TraitError(f"{proposal.trait.name} must be positive, not {proposal.value}")
        return proposal.value

    @validate("singular_depth", "singular_cap")
    def _validate_non_negative(self, proposal):
        if proposal.value < 0:
            raise TraitError(f"{proposal.trait.name} must be non-negative, not {proposal.value}")
        return proposal.value

    @validate("tolerance", "jensen_tolerance", "singular_threshold")
    def _validate_positive_float(self, proposal):
        if not proposal.value > 0:
            raise TraitError(f"{proposal.trait.name} must be positive, not {proposal.value}")
        return proposal.value

    @validate("root_dps")
    def _validate_root_dps(self, proposal):
        if proposal.value < 15:
            raise TraitError(f"root_dps must be at least 15, not {proposal.value}")
        return proposal.value


@dataclass(frozen=True)
class MahlerEstimate:
    """
    A value with an error bound.

    For `jensen_exact` and `exact` the bound is rigorous up to the root
    inclusion radii; for `tensor_grid` and `qmc` it is a heuristic estimate.
    """

    value: float
    error_bound: float = 0.0
    method: str = EXACT
    evaluations: int = 0
    converged: bool = True

    def __post_init__(self):
        if not self.error_bound >= 0:
            raise ValueError(f"error_bound must be non-negative, not {self.error_bound}")

    @classmethod
    def exact(cls, value):
        return cls(float(value), 0.0, EXACT)

    def _merge_method(self, other):
        methods = []
        for m in self.method.split("+") + other.method.split("+"):
            if m not in methods:
                methods.append(m)
        # an exact summand adds nothing to the description
        if len(methods) > 1 and EXACT in methods:
            methods.remove(EXACT)
        return "+".join(methods)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return MahlerEstimate(
                self.value + other,
                self.error_bound + EPS * abs(self.value + other),
                self.method,
                self.evaluations,
                self.converged,
            )
        value = self.value + other.value
        return MahlerEstimate(
            value,
            self.error_bound + other.error_bound + EPS * abs(value),
            self._merge_method(other),
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    __radd__ = __add__

    def __neg__(self):
        return MahlerEstimate(
            -self.value, self.error_bound, self.method, self.evaluations, self.converged
        )

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor):
        return MahlerEstimate(
            self.value * factor,
            self.error_bound * abs(factor),
            self.method,
            self.evaluations,
            self.converged,
        )

    def to_json(self):
        def _number(x):
            if math.isinf(x):
                return "-inf" if x < 0 else "inf"
            return x

        return {
            "value": _number(self.value),
            "error_bound": _number(self.error_bound),
            "method": self.method,
            "evaluations": self.evaluations,
            "converged": self.converged,
        }


def sum_estimates(estimates):
    """Add estimates with a compensated sum of their values"""
    estimates = list(estimates)
    if not estimates:
        return MahlerEstimate.exact(0.0)
    total = estimates[0]
    for est in estimates[1:]:
        total = total + est
    value = math.fsum(est.value for est in estimates)
    return MahlerEstimate(
        value, total.error_bound, total.method, total.evaluations, total.converged
    )


def log_abs(q):
    """log |q| for a nonzero rational of any size"""
    q = abs(Fraction(q))
    if q == 0:
        raise ZeroPolynomialError("log 0 is not finite")
    return math.log(q.numerator) - math.log(q.denominator)


# -----------------------------------------------------------------------------
# Jensen's formula
# -----------------------------------------------------------------------------


def _strip_cyclotomic_factors(g, var):
    """Divide out every cyclotomic factor of a primitive univariate g"""
    stripped = []
    for k in cyclotomic_indices(g.degree):
        phi = cyclotomic(k, g.num_vars, var).poly
        while g.degree >= phi.degree:
            q = g.try_exact_div(phi)
            if q is None:
                break
            g = q
            stripped.append(k)
    if stripped:
        app_log.debug(f"Stripped cyclotomic factors {stripped}")
    return g


def _root_sum(h, var, dps):
    """
    sum max(0, log|alpha|) over the roots of a squarefree h and an error
    bound from inclusion disks around the computed roots.
    """
    coeffs = [int(c) for c in reversed(h.univariate_coefficients(var))]
    deg = len(coeffs) - 1
    with mpmath.workdps(dps):
        maxsteps = 50 + 10 * deg
        while True:
            try:
                roots = mpmath.polyroots(
                    coeffs, maxsteps=maxsteps, cleanup=False, extraprec=2 * dps
                )
                break
            except mpmath.NoConvergence:
                if maxsteps > 5000 + 100 * deg:
                    raise
                maxsteps *= 4
        lead = mpmath.mpf(coeffs[0])
        total = mpmath.mpf(0)
        error = mpmath.mpf(0)
        for i, z in enumerate(roots):
            denom = lead
            for j, w in enumerate(roots):
                if i != j:
                    denom *= z - w
            # every root of h lies in the union of these disks
            radius = deg * abs(mpmath.polyval(coeffs, z) / denom)
            size = abs(z)
            if size > 1:
                total += mpmath.log(size)
            if size + radius <= 1:
                continue
            if size - radius >= 1:
                error += radius / (size - radius)
            else:
                # a root straddling the unit circle contributes 0 to log(size + radius)
                error += mpmath.log(size + radius)
        return float(total), float(error) + EPS * deg


def _jensen(f, spec):
    """Mahler measure of a polynomial in at most one variable"""
    if f.is_constant:
        return MahlerEstimate(log_abs(f.constant_value()), 0.0, JENSEN)
    (var,) = f.active_variables()
    content, primitive = content_primitive(f)
    g = primitive.poly
    # X^k contributes nothing
    low = min(exps[var] for exps in g.terms)
    if low:
        shift = RationalPolynomial._monomial(var, low, g.num_vars)
        g = g.exact_div(shift)
    if spec.strip_cyclotomic:
        g = _strip_cyclotomic_factors(g, var)
    base = log_abs(content) + log_abs(g.leading_coefficient)
    if g.is_constant:
        return MahlerEstimate(base, EPS * abs(base), JENSEN)

    factors = squarefree_decomposition(g)
    dps = spec.root_dps
    for attempt in range(4):
        parts = [base]
        error = EPS * abs(base)
        evaluations = 0
        for h, multiplicity in factors:
            value, err = _root_sum(h.poly, var, dps)
            parts.append(multiplicity * value)
            error += multiplicity * err
            evaluations += h.degree
        value = math.fsum(parts)
        error += EPS * abs(value)
        if error <= spec.jensen_tolerance:
            return MahlerEstimate(value, error, JENSEN, evaluations)
        app_log.debug(f"Jensen error {error} above tolerance at {dps} digits")
        dps *= 2
    app_log.warning(f"Jensen path did not reach tolerance {spec.jensen_tolerance}")
    return MahlerEstimate(value, error, JENSEN, evaluations, converged=False)


# -----------------------------------------------------------------------------
# torus integration
# -----------------------------------------------------------------------------


class TorusIntegrand:
    """
    log max_i |f_i(e(t))| restricted to the variables that occur.

    Holds every polynomial as an integer exponent matrix over the active
    variables and a complex coefficient vector.
    """

    def __init__(self, polys):
        polys = [f for f in polys if not f.is_zero]
        active = sorted({v for f in polys for v in f.active_variables()})
        self.dims = len(active)
        self.count = len(polys)
        self.exponents = []
        self.coefficients = []
        for f in polys:
            exps = sorted(f.terms)
            self.exponents.append(
                np.array([[e[v] for v in active] for e in exps], dtype=np.int64).reshape(
                    len(exps), self.dims
                )
            )
            self.coefficients.append(np.array([float(f.terms[e]) for e in exps]))
        self.scale = max(float(np.sum(np.abs(c))) for c in self.coefficients)
        self.max_terms = max(len(c) for c in self.coefficients)

    def offsets(self):
        """Grid offset of each axis, in cells"""
        return np.array([(GOLDEN * (i + 1)) % 1.0 for i in range(self.dims)])

    def magnitude_on_grid(self, indices, resolution, shift, table):
        """
        max_i |f_i| at t = (indices + shift) / resolution.

        The integer part of every phase is reduced mod resolution and looked
        up in `table`, the fractional part is folded into the coefficients.
        """
        result = None
        for exps, coeffs in zip(self.exponents, self.coefficients):
            folded = coeffs * np.exp(2j * np.pi * ((exps @ shift) / resolution))
            phases = (indices @ exps.T) % resolution
            values = np.abs(table[phases] @ folded)
            result = values if result is None else np.maximum(result, values)
        return result

    def magnitude_at(self, points):
        """max_i |f_i| at float points of [0,1]^dims"""
        result = None
        for exps, coeffs in zip(self.exponents, self.coefficients):
            phases = (points @ exps.T) % 1.0
            values = np.abs(np.exp(2j * np.pi * phases) @ coeffs)
            result = values if result is None else np.maximum(result, values)
        return result


@dataclass
class _Pass:
    integral: float
    inflation: float
    evaluations: int


def _refine(integrand, points, width, weight, spec, floor):
    """
    Replace the value at near-singular points by averages over sub-cells.

    Returns:
        (weighted sum of log values, error inflation, evaluations)
    """
    k = integrand.dims
    offsets = ((np.arange(SUBDIVISION) + 0.5) / SUBDIVISION) - 0.5
    sub = np.array(list(itertools.product(offsets, repeat=k))).reshape(-1, k)
    parts = []
    evaluations = 0
    for level in range(spec.singular_depth):
        if not len(points):
            break
        # centres of the sub-cells of each flagged cell
        points = (points[:, None, :] + sub[None, :, :] * width).reshape(-1, k) % 1.0
        width /= SUBDIVISION
        weight /= len(sub)
        mags = integrand.magnitude_at(points)
        evaluations += len(points) * integrand.count
        good = mags > floor
        parts.append(weight * float(np.sum(np.log(mags[good]))))
        points = points[~good]
        app_log.debug(f"Refinement level {level + 1}: {len(points)} point(s) unresolved")
    unresolved = weight * len(points)
    parts.append(unresolved * math.log(floor))
    inflation = unresolved * (math.log(integrand.scale) - math.log(floor) + 1)
    return math.fsum(parts), inflation, evaluations


def _singular_points(integrand, points, width, weight, spec, floor):
    if len(points) > spec.singular_cap:
        app_log.warning(
            f"{len(points)} near-singular points exceed singular_cap={spec.singular_cap};"
            " clamping them"
        )
        unresolved = weight * len(points)
        inflation = unresolved * (math.log(integrand.scale) - math.log(floor) + 1)
        return unresolved * math.log(floor), inflation, 0
    return _refine(integrand, points, width, weight, spec, floor)


def _lattice_pass(integrand, indices_for, size, shift, spec):
    """
    Average of log max |f_i| over the points (J + shift) / size where J runs
    over the rows produced by indices_for(start, stop).

    Work is split into fixed chunks; their partial sums are combined in
    chunk order, so the result does not depend on the number of workers.
    """
    k = integrand.dims
    table = np.exp(2j * np.pi * np.arange(size) / size)
    total_points = indices_for.count
    chunk = max(1, CHUNK_ENTRIES // integrand.max_terms)
    floor = spec.singular_threshold * integrand.scale

    def work(start):
        stop = min(start + chunk, total_points)
        indices = indices_for(start, stop)
        mags = integrand.magnitude_on_grid(indices, size, shift, table)
        bad = mags <= floor
        partial = float(np.sum(np.log(mags[~bad])))
        flagged = (indices[bad] + shift) / size
        return partial, flagged

    starts = range(0, total_points, chunk)
    if spec.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(work, starts))
    else:
        results = [work(start) for start in starts]

    weight = 1.0 / total_points
    flagged = np.concatenate([r[1] for r in results]).reshape(-1, k)
    evaluations = total_points * integrand.count
    singular, inflation, extra = _singular_points(
        integrand, flagged, total_points ** (-1.0 / k), weight, spec, floor
    )
    integral = math.fsum([weight * math.fsum(r[0] for r in results), singular])
    return _Pass(integral, inflation, evaluations + extra)


class _TensorIndices:
    """Rows of the full tensor grid {0..R-1}^k in C order"""

    def __init__(self, resolution, dims):
        self.resolution = resolution
        self.dims = dims
        self.count = resolution**dims

    def __call__(self, start, stop):
        flat = np.arange(start, stop, dtype=np.int64)
        return np.stack(
            np.unravel_index(flat, (self.resolution,) * self.dims), axis=1
        ).astype(np.int64)


class _KorobovIndices:
    """Rows j * (1, a, a^2, ...) mod N of a rank-1 lattice"""

    def __init__(self, size, dims):
        self.count = size
        a = max(1, round(size * GOLDEN))
        while math.gcd(a, size) != 1:
            a += 1
        self.generator = np.array([pow(a, i, size) for i in range(dims)], dtype=np.int64)
        self.size = size

    def __call__(self, start, stop):
        j = np.arange(start, stop, dtype=np.int64)
        return (j[:, None] * self.generator[None, :]) % self.size


def _grid(integrand, spec):
    resolution = spec.resolution
    shift = integrand.offsets()
    previous = None
    evaluations = 0
    error = math.inf
    for _ in range(spec.levels):
        cost = resolution**integrand.dims * integrand.count
        if previous is not None and evaluations + cost > spec.budget:
            app_log.warning(
                f"Evaluation budget {spec.budget} exhausted at resolution {resolution // 2}"
            )
            break
        current = _lattice_pass(
            integrand, _TensorIndices(resolution, integrand.dims), resolution, shift, spec
        )
        evaluations += current.evaluations
        app_log.debug(f"Grid pass at resolution {resolution}: {current.integral}")
        if previous is not None:
            error = 2 * abs(current.integral - previous.integral) + current.inflation
            error += EPS * resolution**integrand.dims * (1 + abs(current.integral))
            if error <= spec.tolerance:
                return MahlerEstimate(current.integral, error, GRID, evaluations)
        previous = current
        resolution *= 2
    return MahlerEstimate(previous.integral, error, GRID, evaluations, converged=False)


def _qmc(integrand, spec):
    rng = np.random.default_rng(spec.seed)
    size = spec.samples
    evaluations = 0
    best = None
    for _ in range(spec.levels):
        cost = size * spec.shifts * integrand.count
        if best is not None and evaluations + cost > spec.budget:
            app_log.warning(f"Evaluation budget {spec.budget} exhausted at {size // 2} points")
            break
        indices = _KorobovIndices(size, integrand.dims)
        estimates = []
        inflation = 0.0
        for _ in range(spec.shifts):
            shift = rng.random(integrand.dims) * size
            current = _lattice_pass(integrand, indices, size, shift, spec)
            estimates.append(current.integral)
            inflation = max(inflation, current.inflation)
            evaluations += current.evaluations
        value = math.fsum(estimates) / len(estimates)
        spread = float(np.std(estimates, ddof=1))
        error = 3 * spread / math.sqrt(len(estimates)) + inflation
        best = MahlerEstimate(value, error, QMC, evaluations)
        app_log.debug(f"Lattice pass with {size} points: {value} +- {error}")
        if error <= spec.tolerance:
            return best
        size *= 2
    return MahlerEstimate(best.value, best.error_bound, QMC, evaluations, converged=False)


def _choose_method(dims, spec):
    if spec.method == "qmc":
        return QMC
    if spec.method == "grid":
        return GRID
    if spec.method == "jensen":
        app_log.warning("Jensen's formula needs a single variable; using the grid")
        return GRID
    return GRID if dims <= 2 else QMC


def integrate_log_max(polys, spec=None):
    """
    The torus integral of log max_i |f_i(e(t_1), ..., e(t_n))| dt.

    A single nonzero polynomial is a Mahler measure and goes through
    `mahler_measure`; tuples whose polynomials are all constant are exact.
    Zero polynomials do not change the maximum and are skipped.
    """
    spec = spec or QuadratureSpec()
    nonzero = [f for f in polys if not f.is_zero]
    if not nonzero:
        return MahlerEstimate(-math.inf, 0.0, EXACT)
    if len(nonzero) == 1:
        return mahler_measure(nonzero[0], spec)
    if all(f.is_constant for f in nonzero):
        return MahlerEstimate.exact(max(log_abs(f.constant_value()) for f in nonzero))
    integrand = TorusIntegrand(nonzero)
    if _choose_method(integrand.dims, spec) == QMC:
        return _qmc(integrand, spec)
    return _grid(integrand, spec)


def mahler_measure(f, spec=None):
    """
    mu(f): the integral of log |f| over the unit torus.

    The zero polynomial has measure -inf. Polynomials in at most one variable
    use Jensen's formula unless another method is requested explicitly.
    """
    spec = spec or QuadratureSpec()
    if f.is_zero:
        return MahlerEstimate(-math.inf, 0.0, JENSEN)
    active = f.active_variables()
    if len(active) <= 1 and spec.method in ("auto", "jensen"):
        return _jensen(f, spec)
    if f.is_constant:
        return MahlerEstimate.exact(log_abs(f.constant_value()))
    integrand = TorusIntegrand([f])
    method = _choose_method(integrand.dims, spec)
    if method == QMC:
        return _qmc(integrand, spec)
    return _grid(integrand, spec)


def mahler_measure_rational(f, spec=None):
    """log|scalar| + mu(num) - mu(den) for a nonzero rational function"""
    f = as_rational_function(f)
    if f.is_zero:
        raise ZeroPolynomialError("The Mahler measure of 0 is -inf, not a field element value")
    return (
        mahler_measure(f.num.poly, spec)
        - mahler_measure(f.den.poly, spec)
        + log_abs(f.scalar)
    )


def coefficient_bound_check(f, spec=None):
    """
    Check mu(f) >= log min |a| over the nonzero coefficients a of f.

    Returns:
        (holds, estimate) where holds is the truth of
        estimate.value + estimate.error_bound >= log min |a|
    """
    if f.is_zero:
        raise ZeroPolynomialError("The coefficient bound needs a nonzero polynomial")
    estimate = mahler_measure(f, spec)
    lower = min(log_abs(c) for c in f.terms.values())
    return estimate.value + estimate.error_bound >= lower, estimate


# -----------------------------------------------------------------------------
# Northcott sets
# -----------------------------------------------------------------------------


def northcott_box(d, C):
    """|a_i| <= binom(d, i) e^C, the Landau-Mahler bound on coefficients"""
    bound = math.exp(C)
    return [math.floor(math.comb(d, i) * bound + 1e-9) for i in range(d + 1)]


def northcott_enumerate(d, C, spec=None, cap=1_000_000, tolerance=1e-9):
    """
    All integer polynomials in one variable with degree <= d and
    mu(f) <= C + tolerance, one per pair {f, -f}.

    The coefficient box of `northcott_box` is enumerated; candidates are
    rejected when log max(|lead|, |const|) > C + tolerance and accepted when
    log ||f||_2 <= C, and the remaining ones are decided by Jensen's formula.

    Returns:
        list of RationalPolynomial in one variable with positive leading
        coefficient, sorted by degree and then coefficients
    """
    if d < 0:
        raise ValueError(f"Degree bound must be non-negative, not {d}")
    if C < 0:
        return []
    spec = spec or QuadratureSpec()
    box = northcott_box(d, C)
    volume = math.prod(2 * b + 1 for b in box)
    if volume > cap:
        raise BoxTooLargeError(f"Coefficient box of {volume} points exceeds the cap of {cap}")
    app_log.debug(f"Enumerating {volume} coefficient vectors for d={d}, C={C}")
    found = []
    for coeffs in itertools.product(*(range(-b, b + 1) for b in box)):
        nonzero = [i for i, a in enumerate(coeffs) if a]
        if not nonzero:
            continue
        top = nonzero[-1]
        if coeffs[top] < 0:
            continue
        low = coeffs[nonzero[0]]
        if math.log(max(coeffs[top], abs(low))) > C + tolerance:
            continue
        f = RationalPolynomial.univariate(coeffs)
        if 0.5 * math.log(sum(a * a for a in coeffs)) > C:
            estimate = _jensen(f, spec)
            if estimate.value > C + tolerance:
                continue
        found.append(f)
    found.sort(key=lambda f: (f.degree, [f.terms.get((i,), 0) for i in range(f.degree, -1, -1)]))
    return found
