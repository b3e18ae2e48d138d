"""Py.Test fixtures"""
from pytest import fixture
from traitlets.config import Config

from ..adelic import AdelicParams
from ..mahler import QuadratureSpec
from ..polycore import RationalPolynomial


@fixture
def spec():
    """Default quadrature settings"""
    return QuadratureSpec()


@fixture
def fast_spec():
    """Coarse grid settings for tests that only need a rough integral"""
    c = Config()
    c.QuadratureSpec.resolution = 32
    c.QuadratureSpec.tolerance = 5e-3
    return QuadratureSpec(config=c)


@fixture
def make_params():
    def _make(n=1, lambda_=1.0):
        c = Config()
        c.AdelicParams.n = n
        c.AdelicParams.lambda_ = lambda_
        return AdelicParams(config=c)

    return _make


@fixture
def X():
    return RationalPolynomial.variable(0, 1)


@fixture
def XY():
    """The two variables of Q[X, Y]"""
    return RationalPolynomial.variable(0, 2), RationalPolynomial.variable(1, 2)
