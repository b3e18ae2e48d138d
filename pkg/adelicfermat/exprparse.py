"""
Reading and writing rational functions as text.

Grammar, loosest binding first::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" exponent)?
    exponent := INT ("^" exponent)?
    atom   := INT | VAR | "(" expr ")"

Variables are `x1` ... `xn`; when n <= 3 the aliases `x`, `y`, `z` name the
first three. Literals are non-negative integers, rationals are written as
quotients.
"""
from dataclasses import dataclass
from typing import Optional

from tornado.log import app_log

from .polycore import RationalFunction, RationalPolynomial

ALIASES = ("x", "y", "z")

# binding power of the infix operators
INFIX = {"+": 10, "-": 10, "*": 20, "/": 20}

# exponents beyond this are rejected rather than expanded
MAX_EXPONENT = 10_000

__all__ = [
    "ParseError",
    "tokenize",
    "parse_ast",
    "parse",
    "parse_polynomial",
    "format_polynomial",
    "format",
    "variable_names",
]


class ParseError(ValueError):
    """
    Malformed expression.

    `position` is the 0-based offset into the input where the problem was
    found and `expected` the set of tokens that would have been accepted
    there (empty when the failure is not a syntax error).
    """

    def __init__(self, message, position, expected=()):
        self.position = position
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {position}{detail}")


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op", "end"
    text: str
    position: int


def tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            start = i
            while i < len(text) and text[i].isdigit():
                i += 1
            tokens.append(Token("int", text[start:i], start))
        elif c.isascii() and c.isalpha():
            start = i
            while i < len(text) and text[i].isascii() and text[i].isalnum():
                i += 1
            tokens.append(Token("name", text[start:i], start))
        elif c in "+-*/^()":
            tokens.append(Token("op", c, i))
            i += 1
        else:
            raise ParseError(f"Unexpected character {c!r}", i)
    tokens.append(Token("end", "", len(text)))
    return tokens


# -----------------------------------------------------------------------------
# syntax tree
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: int
    position: int


@dataclass(frozen=True)
class Variable:
    index: int
    position: int


@dataclass(frozen=True)
class Neg:
    operand: object
    position: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    position: int


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    position: int


def variable_names(num_vars):
    if num_vars <= len(ALIASES):
        return list(ALIASES[:num_vars])
    return [f"x{i + 1}" for i in range(num_vars)]


class Parser:
    """Precedence-climbing parser over the token list of one expression"""

    def __init__(self, text, num_vars):
        if num_vars < 1:
            raise ValueError(f"Need at least one variable, not {num_vars}")
        self.text = text
        self.num_vars = num_vars
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.current
        if token.kind != "end":
            self.index += 1
        return token

    def fail(self, expected):
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ParseError(f"Unexpected {found}", token.position, expected)

    def parse(self):
        if not self.text.strip():
            raise ParseError("Empty expression", 0, {"integer", "variable", "(", "-"})
        node = self.expression(0)
        if self.current.kind != "end":
            self.fail({"+", "-", "*", "/", "^", "end of input"})
        return node

    def expression(self, min_power):
        left = self.unary()
        while True:
            token = self.current
            power = INFIX.get(token.text) if token.kind == "op" else None
            if power is None or power <= min_power:
                return left
            self.advance()
            # left associative: the right operand only takes tighter operators
            right = self.expression(power)
            left = BinOp(token.text, left, right, token.position)

    def unary(self):
        token = self.current
        if token.kind == "op" and token.text == "-":
            self.advance()
            return Neg(self.unary(), token.position)
        return self.power()

    def power(self):
        base = self.atom()
        token = self.current
        if token.kind == "op" and token.text == "^":
            self.advance()
            return Pow(base, self.exponent(), token.position)
        return base

    def exponent(self):
        token = self.current
        if token.kind != "int":
            self.fail({"integer exponent"})
        self.advance()
        value = int(token.text)
        if self.current.kind == "op" and self.current.text == "^":
            self.advance()
            # right associative: 2^3^2 is 2^9
            value = value ** self.exponent()
        if value > MAX_EXPONENT:
            raise ParseError(f"Exponent {value} exceeds {MAX_EXPONENT}", token.position)
        return value

    def atom(self):
        token = self.current
        if token.kind == "int":
            self.advance()
            return Literal(int(token.text), token.position)
        if token.kind == "name":
            self.advance()
            return Variable(self.resolve(token), token.position)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expression(0)
            if not (self.current.kind == "op" and self.current.text == ")"):
                self.fail({")"})
            self.advance()
            return node
        self.fail({"integer", "variable", "(", "-"})

    def resolve(self, token):
        name = token.text
        if self.num_vars <= len(ALIASES) and name in ALIASES[: self.num_vars]:
            return ALIASES.index(name)
        if name.startswith("x") and name[1:].isdigit():
            index = int(name[1:])
            if 1 <= index <= self.num_vars:
                return index - 1
        raise ParseError(
            f"Unknown variable {name!r}", token.position, set(variable_names(self.num_vars))
        )


def _evaluate(node, num_vars):
    """Evaluate to an unreduced (numerator, denominator) polynomial pair"""
    if isinstance(node, Literal):
        return (
            RationalPolynomial.constant(node.value, num_vars),
            RationalPolynomial.constant(1, num_vars),
        )
    if isinstance(node, Variable):
        return (
            RationalPolynomial.variable(node.index, num_vars),
            RationalPolynomial.constant(1, num_vars),
        )
    if isinstance(node, Neg):
        num, den = _evaluate(node.operand, num_vars)
        return -num, den
    if isinstance(node, Pow):
        num, den = _evaluate(node.base, num_vars)
        return num**node.exponent, den**node.exponent
    left_num, left_den = _evaluate(node.left, num_vars)
    right_num, right_den = _evaluate(node.right, num_vars)
    if node.op == "+":
        return left_num * right_den + right_num * left_den, left_den * right_den
    if node.op == "-":
        return left_num * right_den - right_num * left_den, left_den * right_den
    if node.op == "*":
        return left_num * right_num, left_den * right_den
    if right_num.is_zero:
        raise ParseError("Division by the zero polynomial", node.position)
    return left_num * right_den, left_den * right_num


def parse_ast(text, num_vars):
    return Parser(text, num_vars).parse()


def parse(text, num_vars):
    """
    Parse `text` as an element of Q(x1, ..., xn) in canonical form.

    Raises:
        ParseError: on syntax errors, unknown variables and division by zero
    """
    num, den = _evaluate(parse_ast(text, num_vars), num_vars)
    result = RationalFunction.from_polynomials(num, den)
    app_log.debug(f"Parsed {text!r} as {format(result)!r}")
    return result


def parse_polynomial(text, num_vars):
    """Parse `text` and require the result to be a polynomial"""
    f = parse(text, num_vars)
    if not f.is_polynomial:
        raise ParseError(f"{text!r} is not a polynomial", 0)
    return f.as_polynomial()


# -----------------------------------------------------------------------------
# printing
# -----------------------------------------------------------------------------


def _format_monomial(exps, names):
    factors = []
    for name, e in zip(names, exps):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    return "*".join(factors)


def format_polynomial(f, names: Optional[list] = None):
    """Terms in descending lex order: `x^2 - 2*x*y + 3`"""
    if f.is_zero:
        return "0"
    names = names or variable_names(f.num_vars)
    out = []
    for exps in sorted(f.terms, reverse=True):
        c = f.terms[exps]
        mono = _format_monomial(exps, names)
        size = abs(c)
        if not mono:
            body = str(size)
        elif size == 1:
            body = mono
        else:
            body = f"{size}*{mono}"
        if not out:
            out.append(f"-{body}" if c < 0 else body)
        else:
            out.append(f" - {body}" if c < 0 else f" + {body}")
    return "".join(out)


def format(f):
    """
    Canonical text of a polynomial or rational function, e.g. `(3*x + 2)/6`.

    Numerator and denominator are printed with integer coefficients; the
    output parses back to the same canonical RationalFunction.
    """
    if isinstance(f, RationalPolynomial):
        f = RationalFunction.from_polynomial(f)
    if f.is_zero:
        return "0"
    num = f.num.poly * f.scalar.numerator
    den = f.den.poly * f.scalar.denominator
    num_text = format_polynomial(num)
    if den == 1:
        return num_text
    if len(num.terms) > 1:
        num_text = f"({num_text})"
    den_text = format_polynomial(den)
    if not den.is_constant:
        den_text = f"({den_text})"
    return f"{num_text}/{den_text}"
