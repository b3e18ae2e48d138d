"""
Command line front end.

Every operation of the package is a subcommand::

    adelicfermat mahler -n 1 "2*x - 1"
    adelicfermat height -n 1 --lambda 1 1 x
    adelicfermat fermat-check -n 1 --deg 1 x "1 - x"

Configuration comes from built-in defaults, then `--config <file.json>`
(sections named after the configurable classes, e.g.
`{"QuadratureSpec": {"tolerance": 1e-4}}`), then explicit flags.
Expressions that start with `-` must follow `--`.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import jsonschema
from tornado.log import LogFormatter
from traitlets import Bool, Float, Integer, List, TraitError, Unicode, default
from traitlets.config import Application, catch_config_error

from ._version import __version__
from .adelic import (
    AdelicParams,
    DivisorPlace,
    FactoredElement,
    PrimePlace,
    ProjPoint,
    TorusPlace,
    absolute_value,
    log_absolute_value,
    log_height_terms,
    product_formula_terms,
    torsion_witness,
)
from .exprparse import format, parse, parse_polynomial
from .fermat import (
    BoundInputs,
    CertificateReport,
    DensitySpec,
    HeightRule,
    density_certificate,
    density_profile,
    density_simulate,
    fermat_check_point,
    fermat_property_over_points,
    min_positive_height,
    multiple_bound,
    roots_of_unity_solutions,
    theorem_pipeline,
)
from .mahler import (
    QuadratureSpec,
    mahler_measure,
    mahler_measure_rational,
    northcott_enumerate,
    sum_estimates,
)
from .polycore import PrimeDivisor


class UsageError(Exception):
    """Wrong number or shape of positional arguments"""


@dataclass
class Outcome:
    result: dict
    error_bound: Optional[float] = None
    warnings: list = field(default_factory=list)
    non_converged: bool = False


def _number(x):
    """JSON has no infinities"""
    if isinstance(x, float) and x in (float("inf"), float("-inf")):
        return "inf" if x > 0 else "-inf"
    return x


def _load_json(text):
    """Inline JSON, or the contents of a file when written as @path"""
    if text.startswith("@"):
        with open(text[1:]) as f:
            return json.load(f)
    return json.loads(text)


def parse_place(text, num_vars):
    """inf | div:<expr> | p:<prime> | t:<t1>,<t2>,..."""
    if text == "inf":
        return DivisorPlace(PrimeDivisor.infinity(num_vars))
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"Unknown place {text!r}; use inf, div:<expr>, p:<prime> or t:<t1>,...")
    if kind == "div":
        return DivisorPlace(PrimeDivisor.from_polynomial(parse_polynomial(rest, num_vars)))
    if kind == "p":
        return PrimePlace(int(rest))
    if kind == "t":
        return TorusPlace(tuple(Fraction(x) for x in rest.split(",")))
    raise ValueError(f"Unknown place kind {kind!r}")


def _parse_factor(text, num_vars):
    """`expr:e`, or `expr` for exponent 1"""
    expr, sep, exponent = text.rpartition(":")
    if sep and exponent.lstrip("-").isdigit():
        return parse_polynomial(expr, num_vars), int(exponent)
    return parse_polynomial(text, num_vars), 1


class Command(Application):
    """Shared options and output of every subcommand"""

    command = ""

    classes = [AdelicParams, QuadratureSpec]

    aliases = {
        "n": "AdelicParams.n",
        "lambda": "AdelicParams.lambda_",
        "method": "QuadratureSpec.method",
        "res": "QuadratureSpec.resolution",
        "tol": "QuadratureSpec.tolerance",
        "budget": "QuadratureSpec.budget",
        "seed": "QuadratureSpec.seed",
        "workers": "QuadratureSpec.workers",
        "config": "Command.config_file",
        "box-cap": "Command.box_cap",
        "search-cap": "Command.search_cap",
        "sieve-cap": "Command.sieve_cap",
        "log-level": "Application.log_level",
    }

    flags = {
        "json": (
            {"Command": {"json_output": True}},
            "Emit one JSON document instead of text.",
        ),
        "debug": (
            {"Application": {"log_level": logging.DEBUG}},
            "Set log-level to debug, for the most verbose logging.",
        ),
    }

    version = __version__

    json_output = Bool(False, config=True, help="Emit a single JSON document on stdout.")

    config_file = Unicode(
        "",
        config=True,
        help="""
        JSON configuration file. Flags given on the command line take
        precedence over its values.
        """,
    )

    box_cap = Integer(
        1_000_000,
        config=True,
        help="Largest coefficient box enumerated for Northcott sets.",
    )

    search_cap = Integer(
        2_000_000,
        config=True,
        help="Largest number of tuples examined by the minimal height search.",
    )

    sieve_cap = Integer(
        10_000_000,
        config=True,
        help="Largest range [1, m] sieved for the density of T.",
    )

    raise_config_file_errors = Bool(True)

    @default("log_format")
    def _log_format_default(self):
        """override default log format to include time"""
        return "%(color)s[%(levelname)1.1s %(asctime)s.%(msecs).03d %(name)s %(module)s:%(lineno)d]%(end_color)s %(message)s"

    _log_formatter_cls = LogFormatter

    @catch_config_error
    def initialize(self, argv=None):
        super().initialize(argv)
        if self.config_file:
            if not os.path.isfile(self.config_file):
                self.log.critical(f"Config file {self.config_file} not found")
                self.exit(2)
            try:
                self.load_config_file(os.path.abspath(self.config_file))
            except (ValueError, OSError) as e:
                self.log.critical(f"Could not load {self.config_file}: {e}")
                self.exit(2)
        self.init_logging()

    def init_logging(self):
        # library modules log through tornado's app_log; route it here
        self.log.propagate = False
        logger = logging.getLogger("tornado")
        logger.propagate = True
        logger.parent = self.log
        logger.setLevel(self.log_level)

    def require_args(self, low, high=None):
        args = self.extra_args
        high = low if high is None else high
        if not low <= len(args) <= (high if high >= 0 else len(args)):
            wanted = f"{low}" if low == high else f"at least {low}"
            raise UsageError(f"{self.command} takes {wanted} expression(s), got {len(args)}")
        return args

    def compute(self, params, spec):
        raise NotImplementedError

    def inputs(self, params, spec):
        data = {
            "args": list(self.extra_args),
            "n": params.n,
            "lambda": params.lambda_,
            "method": spec.method,
            "resolution": spec.resolution,
            "tolerance": spec.tolerance,
            "budget": spec.budget,
            "seed": spec.seed,
        }
        for name in sorted(self.class_own_traits(config=True)):
            data[name] = getattr(self, name)
        return data

    def start(self):
        try:
            params = AdelicParams(parent=self)
            spec = QuadratureSpec(parent=self)
        except TraitError as e:
            self.log.error(f"Bad option: {e}")
            return 2
        try:
            outcome = self.compute(params, spec)
        except UsageError as e:
            self.log.error(str(e))
            return 2
        except (ValueError, ArithmeticError, jsonschema.ValidationError) as e:
            self.log.error(f"{self.command}: {e}")
            return 1
        for warning in outcome.warnings:
            self.log.warning(warning)
        self.emit(outcome, self.inputs(params, spec))
        return 0

    def emit(self, outcome, inputs):
        if self.json_output:
            document = {
                "command": self.command,
                "inputs": inputs,
                "result": outcome.result,
                "warnings": outcome.warnings,
                "non_converged": outcome.non_converged,
            }
            if outcome.error_bound is not None:
                document["error_bound"] = _number(outcome.error_bound)
            print(json.dumps(document, sort_keys=True, indent=1))
            return
        for key in sorted(outcome.result):
            value = outcome.result[key]
            if isinstance(value, (dict, list)):
                value = json.dumps(value, sort_keys=True)
            print(f"{key}: {value}")
        if outcome.error_bound is not None:
            print(f"error_bound: {_number(outcome.error_bound)}")
        if outcome.non_converged:
            print("non_converged: true")


def _estimate_outcome(result, estimate):
    warnings = [] if estimate.converged else ["quadrature did not converge within its budget"]
    return Outcome(result, estimate.error_bound, warnings, not estimate.converged)


class MahlerCommand(Command):
    command = "mahler"
    description = """
    Logarithmic Mahler measure mu(f) = int_[0,1]^n log |f(e(t))| dt of one
    polynomial or rational function. Univariate input uses Jensen's formula
    mu(f) = log |lead| + sum log max(1, |root|).
    """

    def compute(self, params, spec):
        (text,) = self.require_args(1)
        f = parse(text, params.n)
        if f.is_polynomial:
            estimate = mahler_measure(f.as_polynomial(), spec)
        else:
            estimate = mahler_measure_rational(f, spec)
        return _estimate_outcome({"expression": format(f), **estimate.to_json()}, estimate)


class HeightCommand(Command):
    command = "height"
    description = """
    Height of a projective point (x_0 : ... : x_m) with coordinates in
    Q(x1, ..., xn): lambda max deg x_i + int log max |x_i(e(t))| dt on the
    canonical integral coprime representative.
    """

    def compute(self, params, spec):
        args = self.require_args(2, -1)
        point = ProjPoint.canonicalize([parse(a, params.n) for a in args], params.n)
        terms = log_height_terms(point, params, spec)
        total = terms["integral"] + terms["degree"]
        result = {
            "point": [format(c) for c in point.coords],
            "height": _number(total.value),
            "degree_term": terms["degree"],
            "integral": terms["integral"].to_json(),
            "method": total.method,
        }
        return _estimate_outcome(result, total)


class AbsvalCommand(Command):
    command = "absval"
    description = """
    |f|_w and log |f|_w at one place: inf, div:<expr> (a prime divisor with
    |f| = exp(lambda deg P + mu(p))^(-ord f)), p:<prime> (Gauss norm) or
    t:<t1>,...,<tn> (evaluation at e(t)).
    """

    place = Unicode("inf", config=True, help="The place, e.g. inf, div:x+1, p:3 or t:1/3")

    aliases = {**Command.aliases, "place": "AbsvalCommand.place"}

    def compute(self, params, spec):
        (text,) = self.require_args(1)
        f = parse(text, params.n)
        place = parse_place(self.place, params.n)
        estimate = log_absolute_value(f, place, params, spec)
        result = {
            "place": str(place),
            "absolute_value": _number(absolute_value(f, place, params, spec)),
            "log_absolute_value": estimate.to_json(),
        }
        return _estimate_outcome(result, estimate)


class PfCheckCommand(Command):
    command = "pf-check"
    description = """
    Product formula check: the contributions log |f|_w of all places of
    f = scalar * prod p_i^e_i, whose sum vanishes. Factors are given as
    `expr:e` and must be pairwise coprime.
    """

    scalar = Unicode("1", config=True, help="Rational scalar, e.g. 3/2")

    aliases = {**Command.aliases, "scalar": "PfCheckCommand.scalar"}

    def compute(self, params, spec):
        args = self.require_args(0, -1)
        factors = [_parse_factor(a, params.n) for a in args]
        elem = FactoredElement.from_polynomials(Fraction(self.scalar), factors)
        terms = product_formula_terms(elem, params, spec, num_vars=params.n)
        residual = sum_estimates(t.estimate for t in terms)
        result = {
            "element": format(elem.to_rational_function(params.n)),
            "terms": [{"kind": t.kind, "label": t.label, **t.estimate.to_json()} for t in terms],
            "residual": residual.value,
        }
        outcome = _estimate_outcome(result, residual)
        if abs(residual.value) > residual.error_bound:
            outcome.warnings.append("residual exceeds its error bound")
        return outcome


class TorsionCommand(Command):
    command = "torsion"
    description = """
    Height zero test: for lambda > 0 a point has height 0 exactly when some
    scalar c makes every c x_i equal to 0, 1 or -1; that scalar is printed.
    """

    def compute(self, params, spec):
        args = self.require_args(2, -1)
        coords = [parse(a, params.n) for a in args]
        witness = torsion_witness(coords, params, num_vars=params.n)
        point = ProjPoint.canonicalize(coords, params.n)
        result = {
            "point": [format(c) for c in point.coords],
            "height_zero": witness is not None,
            "witness": None if witness is None else format(witness),
        }
        return Outcome(result)


class FermatCheckCommand(Command):
    command = "fermat-check"
    description = """
    Points of the Fermat curve x^N + y^N = 1: exact membership and whether
    both coordinates lie in {0, 1, -1}. With --projective every argument is
    a triple `x,y,z` on X^N + Y^N = Z^N and the height-zero criterion is
    compared with the torsion criterion.
    """

    degree = Integer(1, config=True, help="Degree N of the Fermat curve.")

    projective = Bool(False, config=True, help="Read projective triples x,y,z.")

    aliases = {**Command.aliases, "deg": "FermatCheckCommand.degree"}

    flags = {
        **Command.flags,
        "projective": (
            {"FermatCheckCommand": {"projective": True}},
            "Check projective points x,y,z.",
        ),
    }

    def compute(self, params, spec):
        if not self.projective:
            x, y = (parse(a, params.n) for a in self.require_args(2))
            check = fermat_check_point(x, y, self.degree)
            return Outcome({"on_curve": check.on_curve, "torsion_solution": check.torsion_solution})
        points = []
        for text in self.require_args(1, -1):
            parts = text.split(",")
            if len(parts) != 3:
                raise UsageError(f"{text!r} is not a triple x,y,z")
            points.append([parse(p, params.n) for p in parts])
        report = fermat_property_over_points(points, self.degree, params)
        result = {
            "holds": report.holds,
            "equivalence": report.equivalence,
            "points": [
                {
                    "point": [format(c) for c in check.point.coords],
                    "height_zero": check.height_zero,
                    "torsion_criterion": check.torsion_criterion,
                    "zeta": None if check.zeta is None else str(check.zeta),
                }
                for check in report.checks
            ],
            "witnesses": [[format(c) for c in p.coords] for p in report.witnesses],
        }
        return Outcome(result)


class SolutionsCommand(Command):
    command = "solutions"
    description = """
    Solutions of x^N + y^N = 1 with x, y in {0} u {M-th roots of unity},
    written as angles q with x = e^{2 pi i q} and 0_ for zero.
    """

    degree = Integer(1, config=True, help="Degree N of the Fermat curve.")

    order = Integer(6, config=True, help="Order M of the group of roots of unity.")

    aliases = {
        **Command.aliases,
        "deg": "SolutionsCommand.degree",
        "order": "SolutionsCommand.order",
    }

    def compute(self, params, spec):
        self.require_args(0)
        solutions = roots_of_unity_solutions(self.degree, self.order)
        return Outcome(
            {"count": len(solutions), "solutions": [[str(a), str(b)] for a, b in solutions]}
        )


class BoundCommand(Command):
    command = "bound"
    description = """
    m_0 = ceil(exp(H/a)): for m >= m_0 and a point of positive height at
    least a, m a > H. Also prints the tight bound floor(H/a) + 1.
    """

    max_height = Float(0.0, config=True, help="Largest height H on the known points.")

    a = Float(1.0, config=True, help="Smallest positive height.")

    aliases = {**Command.aliases, "H": "BoundCommand.max_height", "a": "BoundCommand.a"}

    def compute(self, params, spec):
        self.require_args(0)
        bound = multiple_bound(BoundInputs(self.max_height, self.a))
        return Outcome({"m0": bound.m0, "tight": bound.tight})


class MinHeightCommand(Command):
    command = "min-height"
    description = """
    Smallest positive height of a point of P^dim whose canonical coordinates
    have degree <= deg and coefficients bounded by coeff; requires lambda > 0.
    """

    deg_bound = Integer(2, config=True, help="Degree bound of the coordinates.")

    coeff_bound = Integer(4, config=True, help="Bound on the absolute value of coefficients.")

    dimension = Integer(2, config=True, help="Dimension of projective space.")

    aliases = {
        **Command.aliases,
        "deg": "MinHeightCommand.deg_bound",
        "coeff": "MinHeightCommand.coeff_bound",
        "dim": "MinHeightCommand.dimension",
    }

    def compute(self, params, spec):
        self.require_args(0)
        found = min_positive_height(
            params, self.deg_bound, self.coeff_bound, self.dimension, spec, self.search_cap
        )
        result = {
            "value": _number(found.value),
            "witness": None
            if found.witness is None
            else [format(c) for c in found.witness.coords],
            "examined": found.examined,
        }
        return Outcome(result, found.error_bound)


class DensityCommand(Command):
    command = "density"
    description = """
    #(T n [1, m]) / m for T = union over primes p >= p0 of p Z_{>= m_p},
    by sieving. The rule is a JSON document (inline or @file).
    """

    spec_json = Unicode(
        '{"p0": 5, "rule": "identity"}',
        config=True,
        help="""
        Density rule, e.g. {"p0": 5, "rule": {"const": 1}}. Prefix a path with
        @ to read it from a file.
        """,
    )

    m = Integer(10_000, config=True, help="Right end of the range [1, m].")

    checkpoints = List(Integer(), config=True, help="Report the ratio at each of these m.")

    aliases = {
        **Command.aliases,
        "spec": "DensityCommand.spec_json",
        "m": "DensityCommand.m",
        "checkpoint": "DensityCommand.checkpoints",
    }

    def compute(self, params, spec):
        self.require_args(0)
        density = DensitySpec.from_json(_load_json(self.spec_json))
        result = {"spec": density.to_json()}
        if self.checkpoints:
            profile = density_profile(density, self.checkpoints, self.sieve_cap)
            result["profile"] = [{"m": r.m, "count": r.count, "ratio": r.ratio} for r in profile]
        else:
            simulated = density_simulate(density, self.m, self.sieve_cap)
            result.update(m=simulated.m, count=simulated.count, ratio=simulated.ratio)
        return Outcome(result)


def _certificate_result(report: CertificateReport):
    result = {"certificate": report.certificate.to_json(), "status": report.status}
    if report.simulated is not None:
        result["simulated_ratio"] = report.simulated.ratio
        result["simulated_count"] = report.simulated.count
        result["complement_within_bound"] = report.complement_within_bound
    result["coprime_count_matches"] = report.coprime_count_matches
    return result


class CertificateCommand(Command):
    command = "certificate"
    description = """
    Certificate that T has density at least 1 - 3 eps from m_threshold on:
    primes p_1..p_r >= p0 with prod (1 - 1/p_i) <= eps, Q, phi(Q), n0 and
    m_threshold, checked by sieving when m_threshold is within the cap.
    """

    spec_json = Unicode('{"p0": 5, "rule": "identity"}', config=True, help="Density rule JSON.")

    epsilon = Unicode("1/2", config=True, help="eps in (0, 1), exact: 0.1 or 1/10")

    prime_cap = Integer(100_000, config=True, help="Most primes a certificate may use.")

    aliases = {
        **Command.aliases,
        "spec": "CertificateCommand.spec_json",
        "eps": "CertificateCommand.epsilon",
        "prime-cap": "CertificateCommand.prime_cap",
    }

    def compute(self, params, spec):
        self.require_args(0)
        density = DensitySpec.from_json(_load_json(self.spec_json))
        report = density_certificate(
            density, Fraction(self.epsilon), self.sieve_cap, self.prime_cap
        )
        warnings = [] if report.status == "verified" else [f"certificate {report.status}"]
        return Outcome(_certificate_result(report), warnings=warnings)


class PipelineCommand(Command):
    command = "pipeline"
    description = """
    From heights to density: m_p = ceil(exp(H_p / a)) for each prime p >= p0,
    the density of T at m and the certificate at eps. H_p is a number,
    {"const": h} or {"log": c} for c log p.
    """

    height_rule = Unicode("0", config=True, help="Height rule JSON for H_p.")

    a = Float(1.0, config=True, help="Smallest positive height.")

    epsilon = Unicode("1/2", config=True, help="eps in (0, 1)")

    m = Integer(10_000, config=True, help="Right end of the simulated range.")

    p0 = Integer(5, config=True, help="Smallest prime in T.")

    prime_cap = Integer(100_000, config=True, help="Most primes a certificate may use.")

    aliases = {
        **Command.aliases,
        "H": "PipelineCommand.height_rule",
        "a": "PipelineCommand.a",
        "eps": "PipelineCommand.epsilon",
        "m": "PipelineCommand.m",
        "p0": "PipelineCommand.p0",
        "prime-cap": "PipelineCommand.prime_cap",
    }

    def compute(self, params, spec):
        self.require_args(0)
        rule = HeightRule.from_json(_load_json(self.height_rule))
        report = theorem_pipeline(
            rule,
            self.a,
            Fraction(self.epsilon),
            self.m,
            self.p0,
            self.sieve_cap,
            self.prime_cap,
        )
        result = {
            "spec": report.spec.to_json(),
            "multiple_bounds": {str(p): b.m0 for p, b in report.multiple_bounds},
            "m": report.simulated.m,
            "count": report.simulated.count,
            "ratio": report.simulated.ratio,
            "certificate": None
            if report.certificate is None
            else _certificate_result(report.certificate),
        }
        return Outcome(result, warnings=list(report.warnings))


class EnumCommand(Command):
    command = "enum"
    description = """
    Northcott set {f in Z[x] : deg f <= d, mu(f) <= C}, one polynomial per
    pair {f, -f}.
    """

    deg = Integer(1, config=True, help="Degree bound d.")

    bound = Float(0.0, config=True, help="Mahler measure bound C.")

    aliases = {**Command.aliases, "deg": "EnumCommand.deg", "C": "EnumCommand.bound"}

    def compute(self, params, spec):
        self.require_args(0)
        found = northcott_enumerate(self.deg, self.bound, spec, cap=self.box_cap)
        return Outcome({"count": len(found), "polynomials": [format(f) for f in found]})


SUBCOMMANDS = {
    cls.command: cls
    for cls in (
        MahlerCommand,
        HeightCommand,
        AbsvalCommand,
        PfCheckCommand,
        TorsionCommand,
        FermatCheckCommand,
        SolutionsCommand,
        BoundCommand,
        MinHeightCommand,
        DensityCommand,
        CertificateCommand,
        PipelineCommand,
        EnumCommand,
    )
}


class AdelicFermatApp(Application):
    name = "adelicfermat"
    description = "Heights, Mahler measures and Fermat curves over Q(x1, ..., xn)."
    version = __version__

    subcommands = {
        name: (cls, cls.description.strip().splitlines()[0]) for name, cls in SUBCOMMANDS.items()
    }

    def start(self):
        if self.subapp is None:
            if self.extra_args:
                self.log.error(f"Unknown subcommand {self.extra_args[0]!r}")
            else:
                self.print_subcommands()
            return 2
        return self.subapp.start()


def _clear_instances():
    for cls in (AdelicFermatApp, *SUBCOMMANDS.values()):
        cls.clear_instance()


def run(argv=None):
    """Run one command line; returns the exit code"""
    _clear_instances()
    app = AdelicFermatApp.instance()
    try:
        app.initialize(argv)
        status = app.start()
    except SystemExit as e:
        status = e.code
    finally:
        _clear_instances()
    if status is None:
        return 0
    return status if isinstance(status, int) else 1


def main(argv=None):
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
