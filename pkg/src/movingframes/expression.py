"""Symbolic scalar expressions over named chart coordinates.

Expressions are immutable, hash-consed trees built from exact rational
constants, coordinate symbols, n-ary sums and products, rational powers and
elementary function applications.  Construction happens through smart
constructors (``add``, ``mul``, ``pow_``, ``call``) which apply a fixed,
terminating rewrite system: constant folding, flattening, additive and
multiplicative identities, like-term and like-base collection, and power
merging.  There is deliberately no general canonical-form simplification (no
trig identities, no factoring); numerical evaluation at sample points is the
ground truth everywhere downstream.

Every distinct structure exists exactly once (interning), so structural
equality is identity, and the global derivative cache makes repeated
differentiation of shared subtrees cheap.

The module also owns :class:`Chart` (coordinate names, signature, sampling
domain, excluded regions) and the deterministic samplers used by the rest of
the package.

Grammar accepted by :func:`parse_expr` (EBNF, also documented in the README)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;          (right associative, e.g. 2^3^2)
    atom    = NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" ;
    NUMBER  = digits [ "." digits ] [ ("e"|"E") ["+"|"-"] digits ] ;

Exponents must reduce to rational constants.  Implicit multiplication is a
syntax error.  Function names: sin cos tan sinh cosh tanh exp log sqrt.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expr", "Num", "Sym", "Add", "Mul", "Pow", "Call",
    "num", "sym", "add", "mul", "pow_", "call",
    "parse_expr", "diff", "simplify", "eval_at", "to_string",
    "Chart", "Exclusion", "parse_exclusion", "sample_points",
    "ExprError", "ParseError", "UndeclaredSymbolError", "EvalDomainError",
    "UnboundCoordinateError",
    "ZERO", "ONE",
]

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt")


class ExprError(ValueError):
    """Base class for expression-layer errors."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class UndeclaredSymbolError(ParseError):
    def __init__(self, name: str, position: int):
        ParseError.__init__(self, f"undeclared symbol '{name}'", position)
        self.name = name


class EvalDomainError(ExprError):
    """Evaluation hit a domain fault (log of non-positive, sqrt of negative,
    division by zero, non-integer power of a negative base, overflow)."""


class UnboundCoordinateError(ExprError):
    def __init__(self, name: str):
        super().__init__(f"coordinate '{name}' is not bound at the evaluation point")
        self.name = name


# --------------------------------------------------------------------------
# hash-consed nodes
# --------------------------------------------------------------------------

_TABLE: dict = {}
_UIDS = itertools.count()


def _intern(key, factory):
    node = _TABLE.get(key)
    if node is None:
        cand = factory()
        object.__setattr__(cand, "uid", next(_UIDS))
        # setdefault is atomic under the GIL: concurrent constructors of the
        # same structure all receive the one canonical node
        node = _TABLE.setdefault(key, cand)
    return node


class Expr:
    """Base node.  Immutable and interned; equality is identity."""

    __slots__ = ("uid",)

    # arithmetic sugar ------------------------------------------------------
    def __add__(self, other):
        return add(self, _as_expr(other))

    def __radd__(self, other):
        return add(_as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(NEG_ONE, _as_expr(other)))

    def __rsub__(self, other):
        return add(_as_expr(other), mul(NEG_ONE, self))

    def __mul__(self, other):
        return mul(self, _as_expr(other))

    def __rmul__(self, other):
        return mul(_as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(_as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(_as_expr(other), pow_(self, -1))

    def __pow__(self, e):
        return pow_(self, e)

    def __neg__(self):
        return mul(NEG_ONE, self)

    def __repr__(self):
        return to_string(self)

    def is_zero(self) -> bool:
        return self is ZERO


class Num(Expr):
    __slots__ = ("value",)

    def __new__(cls, value):
        if not isinstance(value, Fraction):
            value = Fraction(value)

        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "value", value)
            return self

        return _intern(("n", value), build)


class Sym(Expr):
    __slots__ = ("name",)

    def __new__(cls, name: str):
        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "name", name)
            return self

        return _intern(("s", name), build)


class Call(Expr):
    __slots__ = ("fn", "arg")

    def __new__(cls, fn: str, arg: Expr):
        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "fn", fn)
            object.__setattr__(self, "arg", arg)
            return self

        return _intern(("c", fn, arg.uid), build)


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __new__(cls, base: Expr, exponent: Fraction):
        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "base", base)
            object.__setattr__(self, "exponent", exponent)
            return self

        return _intern(("p", base.uid, exponent), build)


class Add(Expr):
    __slots__ = ("terms",)

    def __new__(cls, terms: tuple):
        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "terms", terms)
            return self

        return _intern(("a",) + tuple(t.uid for t in terms), build)


class Mul(Expr):
    __slots__ = ("factors",)

    def __new__(cls, factors: tuple):
        def build():
            self = object.__new__(cls)
            object.__setattr__(self, "factors", factors)
            return self

        return _intern(("m",) + tuple(f.uid for f in factors), build)


ZERO = Num(0)
ONE = Num(1)
NEG_ONE = Num(-1)


def _as_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Num(x)
    if isinstance(x, float):
        return Num(Fraction(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to Expr")


def num(value) -> Num:
    return Num(value)


def sym(name: str) -> Sym:
    return Sym(name)


def _uid(e: Expr) -> int:
    return e.uid


# --------------------------------------------------------------------------
# smart constructors
# --------------------------------------------------------------------------

def _split_coefficient(t: Expr):
    """Split a canonical term into (rational coefficient, remainder)."""
    if isinstance(t, Mul) and isinstance(t.factors[0], Num):
        rest = t.factors[1:]
        rem = rest[0] if len(rest) == 1 else Mul(rest)
        return t.factors[0].value, rem
    return Fraction(1), t


def add(*terms) -> Expr:
    """Sum with flattening, constant folding and like-term collection."""
    const = Fraction(0)
    groups: dict = {}
    stack = [_as_expr(t) for t in reversed(terms)]
    while stack:
        t = stack.pop()
        if isinstance(t, Add):
            stack.extend(reversed(t.terms))
        elif isinstance(t, Num):
            const += t.value
        else:
            coeff, rem = _split_coefficient(t)
            got = groups.get(rem)
            groups[rem] = coeff if got is None else got + coeff
    parts = []
    for rem, coeff in groups.items():
        if coeff == 0:
            continue
        parts.append(rem if coeff == 1 else mul(Num(coeff), rem))
    parts.sort(key=_uid)
    if const != 0:
        parts.insert(0, Num(const))
    if not parts:
        return ZERO
    if len(parts) == 1:
        return parts[0]
    return Add(tuple(parts))


def mul(*factors) -> Expr:
    """Product with flattening, zero absorption and like-base power merging."""
    const = Fraction(1)
    groups: dict = {}
    stack = [_as_expr(f) for f in reversed(factors)]
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.factors))
        elif isinstance(f, Num):
            const *= f.value
        else:
            if isinstance(f, Pow):
                base, exp = f.base, f.exponent
            else:
                base, exp = f, Fraction(1)
            got = groups.get(base)
            groups[base] = exp if got is None else got + exp
    if const == 0:
        return ZERO
    parts = []
    for base, exp in groups.items():
        p = pow_(base, exp)
        if isinstance(p, Num):
            const *= p.value
        elif isinstance(p, Mul):
            # a distributed power; its factors are already canonical
            for sub in p.factors:
                if isinstance(sub, Num):
                    const *= sub.value
                else:
                    parts.append(sub)
        else:
            parts.append(p)
    if const == 0:
        return ZERO
    parts.sort(key=_uid)
    if not parts:
        return Num(const)
    if const != 1:
        parts.insert(0, Num(const))
    if len(parts) == 1:
        return parts[0]
    return Mul(tuple(parts))


def _int_root(n: int, q: int):
    """Exact integer q-th root of n >= 0, or None."""
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / q))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    return None


def _fold_num_pow(base: Fraction, exp: Fraction):
    """Exact value of base**exp, or None if it stays symbolic."""
    if exp.denominator == 1:
        e = exp.numerator
        if base == 0:
            if e < 0:
                return None  # division by zero surfaces at evaluation
            return Fraction(0) if e > 0 else Fraction(1)
        return base ** e
    if base < 0:
        return None
    p, q = exp.numerator, exp.denominator
    rn = _int_root(base.numerator, q)
    rd = _int_root(base.denominator, q)
    if rn is None or rd is None:
        return None
    root = Fraction(rn, rd)
    return root ** p


def pow_(base, exponent) -> Expr:
    """Power with a rational exponent; merges nested integer powers."""
    base = _as_expr(base)
    if isinstance(exponent, Expr):
        if not isinstance(exponent, Num):
            raise ExprError("power exponent must reduce to a rational constant")
        exponent = exponent.value
    if not isinstance(exponent, Fraction):
        exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Num):
        folded = _fold_num_pow(base.value, exponent)
        if folded is not None:
            return Num(folded)
        return Pow(base, exponent)
    if isinstance(base, Pow) and exponent.denominator == 1:
        return pow_(base.base, base.exponent * exponent)
    if isinstance(base, Mul) and exponent.denominator == 1:
        return mul(*[pow_(f, exponent) for f in base.factors])
    return Pow(base, exponent)


_EXACT_CALLS = {
    ("sin", Fraction(0)): ZERO,
    ("tan", Fraction(0)): ZERO,
    ("sinh", Fraction(0)): ZERO,
    ("tanh", Fraction(0)): ZERO,
    ("cos", Fraction(0)): ONE,
    ("cosh", Fraction(0)): ONE,
    ("exp", Fraction(0)): ONE,
    ("log", Fraction(1)): ZERO,
}


def call(fn: str, arg) -> Expr:
    arg = _as_expr(arg)
    if fn == "sqrt":
        return pow_(arg, Fraction(1, 2))
    if fn not in FUNCTIONS:
        raise ExprError(f"unknown function '{fn}'")
    if isinstance(arg, Num):
        exact = _EXACT_CALLS.get((fn, arg.value))
        if exact is not None:
            return exact
    return Call(fn, arg)


# --------------------------------------------------------------------------
# simplify / diff / eval
# --------------------------------------------------------------------------

_SIMPLIFY_CACHE: dict = {}


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the smart constructors.

    Idempotent: the constructors apply a fixed local rewrite set, so a second
    pass finds nothing left to do.
    """

    def rec(x: Expr) -> Expr:
        out = _SIMPLIFY_CACHE.get(x)
        if out is not None:
            return out
        if isinstance(x, (Num, Sym)):
            out = x
        elif isinstance(x, Add):
            out = add(*[rec(t) for t in x.terms])
        elif isinstance(x, Mul):
            out = mul(*[rec(f) for f in x.factors])
        elif isinstance(x, Pow):
            out = pow_(rec(x.base), x.exponent)
        elif isinstance(x, Call):
            out = call(x.fn, rec(x.arg))
        else:  # pragma: no cover
            raise TypeError(type(x))
        _SIMPLIFY_CACHE[x] = out
        _SIMPLIFY_CACHE[out] = out
        return out

    return rec(e)


_DIFF_TABLE: dict = {
    "sin": lambda u: call("cos", u),
    "cos": lambda u: mul(NEG_ONE, call("sin", u)),
    "tan": lambda u: add(ONE, pow_(call("tan", u), 2)),
    "sinh": lambda u: call("cosh", u),
    "cosh": lambda u: call("sinh", u),
    "tanh": lambda u: add(ONE, mul(NEG_ONE, pow_(call("tanh", u), 2))),
    "exp": lambda u: call("exp", u),
    "log": lambda u: pow_(u, -1),
}

_DIFF_CACHE: dict = {}


def diff(e: Expr, coord: str, chart: "Chart | None" = None) -> Expr:
    """Symbolic partial derivative with respect to a coordinate name."""
    if chart is not None and coord not in chart.coords:
        raise UndeclaredSymbolError(coord, 0)

    def rec(x: Expr) -> Expr:
        key = (x, coord)
        out = _DIFF_CACHE.get(key)
        if out is not None:
            return out
        if isinstance(x, Num):
            out = ZERO
        elif isinstance(x, Sym):
            out = ONE if x.name == coord else ZERO
        elif isinstance(x, Add):
            out = add(*[rec(t) for t in x.terms])
        elif isinstance(x, Mul):
            pieces = []
            for i, f in enumerate(x.factors):
                df = rec(f)
                if df.is_zero():
                    continue
                pieces.append(mul(*x.factors[:i], df, *x.factors[i + 1:]))
            out = add(*pieces)
        elif isinstance(x, Pow):
            db = rec(x.base)
            if db.is_zero():
                out = ZERO
            else:
                out = mul(Num(x.exponent), pow_(x.base, x.exponent - 1), db)
        elif isinstance(x, Call):
            da = rec(x.arg)
            out = ZERO if da.is_zero() else mul(_DIFF_TABLE[x.fn](x.arg), da)
        else:  # pragma: no cover
            raise TypeError(type(x))
        _DIFF_CACHE[key] = out
        return out

    return rec(e)


def _eval_call(fn: str, v: float) -> float:
    try:
        if fn == "log":
            if v <= 0.0:
                raise EvalDomainError(f"log of non-positive value {v!r}")
            return math.log(v)
        return getattr(math, fn)(v)
    except OverflowError as exc:
        raise EvalDomainError(f"overflow in {fn}({v!r})") from exc


def eval_at(e: Expr, point: Mapping[str, float], memo: dict | None = None) -> float:
    """Evaluate to a float at a coordinate binding.

    Raises :class:`EvalDomainError` on domain faults and
    :class:`UnboundCoordinateError` when a symbol is missing from ``point``.
    An explicit ``memo`` dict may be shared by evaluations at one point so
    common subtrees are computed once.
    """
    if memo is None:
        memo = {}

    def rec(x: Expr) -> float:
        out = memo.get(x)
        if out is not None:
            return out
        if isinstance(x, Num):
            out = float(x.value)
        elif isinstance(x, Sym):
            try:
                out = float(point[x.name])
            except KeyError:
                raise UnboundCoordinateError(x.name) from None
        elif isinstance(x, Add):
            out = math.fsum(rec(t) for t in x.terms)
        elif isinstance(x, Mul):
            out = 1.0
            for f in x.factors:
                out *= rec(f)
        elif isinstance(x, Pow):
            b = rec(x.base)
            ex = x.exponent
            if ex.denominator == 1:
                if b == 0.0 and ex < 0:
                    raise EvalDomainError("division by zero")
                try:
                    out = b ** int(ex)
                except OverflowError as exc:
                    raise EvalDomainError("overflow in power") from exc
            else:
                if b < 0.0:
                    raise EvalDomainError(
                        f"non-integer power {ex} of negative base {b!r}")
                if b == 0.0 and ex < 0:
                    raise EvalDomainError("division by zero")
                try:
                    out = b ** float(ex)
                except OverflowError as exc:
                    raise EvalDomainError("overflow in power") from exc
        elif isinstance(x, Call):
            out = _eval_call(x.fn, rec(x.arg))
        else:  # pragma: no cover
            raise TypeError(type(x))
        if out != out or out in (math.inf, -math.inf):
            raise EvalDomainError("evaluation produced a non-finite value")
        memo[x] = out
        return out

    return rec(e)


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

def _frac_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def to_string(e: Expr) -> str:
    """Readable infix form (re-parseable for integer-valued constants)."""

    def prec(x: Expr) -> int:
        if isinstance(x, Add):
            return 1
        if isinstance(x, Mul):
            return 2
        if isinstance(x, Pow):
            return 3
        if isinstance(x, Num) and (x.value < 0 or x.value.denominator != 1):
            return 2
        return 9

    def wrap(x: Expr, level: int) -> str:
        s = rec(x)
        return f"({s})" if prec(x) < level else s

    def rec(x: Expr) -> str:
        if isinstance(x, Num):
            return _frac_str(x.value)
        if isinstance(x, Sym):
            return x.name
        if isinstance(x, Add):
            out = wrap(x.terms[0], 1)
            for t in x.terms[1:]:
                c, rem = _split_coefficient(t)
                if isinstance(t, Num) and t.value < 0:
                    out += f" - {_frac_str(-t.value)}"
                elif c < 0:
                    out += " - " + wrap(mul(Num(-c), rem), 2)
                else:
                    out += " + " + wrap(t, 2)
            return out
        if isinstance(x, Mul):
            return "*".join(wrap(f, 3) for f in x.factors)
        if isinstance(x, Pow):
            if x.exponent == Fraction(1, 2):
                return f"sqrt({rec(x.base)})"
            b = wrap(x.base, 4)
            if x.exponent.denominator == 1 and x.exponent > 0:
                return f"{b}^{x.exponent.numerator}"
            return f"{b}^({_frac_str(x.exponent)})"
        if isinstance(x, Call):
            return f"{x.fn}({rec(x.arg)})"
        raise TypeError(type(x))  # pragma: no cover

    return rec(e)


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?:(?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _number_value(text: str) -> Fraction:
    mantissa, exp = text, 0
    for e in ("e", "E"):
        if e in text:
            mantissa, _, tail = text.partition(e)
            exp = int(tail)
            break
    if "." in mantissa:
        whole, _, frac = mantissa.partition(".")
        value = Fraction(int(whole + frac), 10 ** len(frac))
    else:
        value = Fraction(int(mantissa))
    return value * Fraction(10) ** exp


class _Parser:
    def __init__(self, text: str, chart: "Chart"):
        self.text = text
        self.chart = chart
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.peek()
        if kind != "op" or value != op:
            raise ParseError(f"expected '{op}'", pos)
        self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, value, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {value!r}", pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                e = add(e, rhs) if value == "+" else add(e, mul(NEG_ONE, rhs))
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.unary()
                e = mul(e, rhs) if value == "*" else mul(e, pow_(rhs, -1))
            else:
                return e

    def unary(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return mul(NEG_ONE, self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self.unary()
            if not isinstance(exponent, Num):
                raise ParseError("exponent must be a rational constant", pos)
            return pow_(base, exponent.value)
        return base

    def atom(self) -> Expr:
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(_number_value(value))
        if kind == "ident":
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if value not in FUNCTIONS:
                    raise ParseError(f"unknown function '{value}'", pos)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return call(value, arg)
            if value in FUNCTIONS:
                raise ParseError(f"function '{value}' used without arguments", pos)
            if value not in self.chart.coords:
                raise UndeclaredSymbolError(value, pos)
            return Sym(value)
        if kind == "op" and value == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r}" if value else "unexpected end of input", pos)


def parse_expr(text: str, chart: "Chart") -> Expr:
    """Parse an expression string over the chart's coordinates."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, chart).parse()


# --------------------------------------------------------------------------
# charts, exclusions and sampling
# --------------------------------------------------------------------------

class Exclusion:
    """A predicate carving a region out of the sampling box (True = excluded)."""

    __slots__ = ("expr", "op", "bound", "text")
    _OPS: dict = {
        "<": lambda a, b: a < b,
        "<=": lambda a, b: a <= b,
        ">": lambda a, b: a > b,
        ">=": lambda a, b: a >= b,
    }

    def __init__(self, expr: Expr, op: str, bound: float, text: str = ""):
        if op not in self._OPS:
            raise ExprError(f"unsupported comparison '{op}'")
        self.expr = expr
        self.op = op
        self.bound = float(bound)
        self.text = text or f"{to_string(expr)} {op} {bound}"

    def excludes(self, point: Mapping[str, float]) -> bool:
        return self._OPS[self.op](eval_at(self.expr, point), self.bound)

    def __repr__(self):
        return f"Exclusion({self.text!r})"


_EXCL_RE = re.compile(r"(<=|>=|<|>)")


def parse_exclusion(text: str, chart: "Chart") -> Exclusion:
    parts = _EXCL_RE.split(text, maxsplit=1)
    if len(parts) != 3:
        raise ExprError(f"exclusion {text!r} needs one comparison operator")
    lhs, op, rhs = parts
    bound = simplify(parse_expr(rhs, chart))
    if not isinstance(bound, Num):
        raise ExprError(f"exclusion bound {rhs.strip()!r} must be constant")
    return Exclusion(parse_expr(lhs, chart), op, float(bound.value), text.strip())


class Chart:
    """Ordered coordinate names with signature, sampling box and exclusions."""

    def __init__(self, coords: Sequence[str], signature: Sequence[int] | None = None,
                 domain: Mapping[str, Sequence[float]] | None = None,
                 exclusions: Iterable[Exclusion] = (),
                 simply_connected: bool = True):
        coords = tuple(coords)
        if len(coords) < 2:
            raise ExprError("a chart needs at least two coordinates")
        if len(set(coords)) != len(coords):
            raise ExprError("coordinate names must be unique")
        for c in coords:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", c) or c in FUNCTIONS:
                raise ExprError(f"invalid coordinate name {c!r}")
        if signature is None:
            signature = (1,) * len(coords)
        signature = tuple(int(s) for s in signature)
        if len(signature) != len(coords) or any(s not in (-1, 1) for s in signature):
            raise ExprError("signature must list +1/-1 once per coordinate")
        self.coords = coords
        self.signature = signature
        box = {}
        domain = dict(domain or {})
        for c in coords:
            lo, hi = domain.pop(c, (-1.0, 1.0))
            lo, hi = float(lo), float(hi)
            if not lo < hi:
                raise ExprError(f"empty domain interval for {c!r}")
            box[c] = (lo, hi)
        if domain:
            raise ExprError(f"domain given for unknown coordinates {sorted(domain)}")
        self.domain = box
        self.exclusions = tuple(exclusions)
        # a declaration by the user, never inferred; gates the Poincare-lemma
        # step of the log-magnitude reconstruction
        self.simply_connected = bool(simply_connected)

    @property
    def n(self) -> int:
        return len(self.coords)

    def index(self, name: str) -> int:
        return self.coords.index(name)

    def admits(self, point: Mapping[str, float]) -> bool:
        for c, (lo, hi) in self.domain.items():
            if not lo <= point[c] <= hi:
                return False
        return not any(ex.excludes(point) for ex in self.exclusions)

    def point(self, values: Sequence[float]) -> dict:
        return dict(zip(self.coords, (float(v) for v in values)))

    def __eq__(self, other):
        return (isinstance(other, Chart) and other.coords == self.coords
                and other.signature == self.signature)

    def __hash__(self):
        return hash((self.coords, self.signature))

    def __repr__(self):
        sig = ",".join("+" if s > 0 else "-" for s in self.signature)
        return f"Chart({','.join(self.coords)}; {sig})"


def sample_points(chart: Chart, mode: str = "random", count: int = 50,
                  seed: int | None = None) -> list:
    """Deterministic sample points inside the chart box minus exclusions.

    ``random`` draws uniformly with numpy's seeded PCG64 generator (the seed
    is required); ``grid`` lays a regular lattice and filters it.
    """
    los = np.array([chart.domain[c][0] for c in chart.coords])
    his = np.array([chart.domain[c][1] for c in chart.coords])
    points: list = []
    if mode == "random":
        if seed is None:
            raise ExprError("random sampling requires a seed")
        rng = np.random.default_rng(int(seed))
        attempts = 0
        while len(points) < count:
            attempts += 1
            if attempts > 1000 * count:
                raise ExprError("sampling failed: exclusions reject too much of the box")
            draw = rng.uniform(los, his)
            p = chart.point(draw)
            if not any(ex.excludes(p) for ex in chart.exclusions):
                points.append(p)
        return points
    if mode == "grid":
        m = max(2, math.ceil(count ** (1.0 / chart.n)))
        axes = [np.linspace(lo, hi, m) for lo, hi in zip(los, his)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, chart.n)
        for row in grid:
            p = chart.point(row)
            if not any(ex.excludes(p) for ex in chart.exclusions):
                points.append(p)
            if len(points) >= count:
                break
        if not points:
            raise ExprError("grid sampling produced no admissible points")
        return points
    raise ExprError(f"unknown sampling mode {mode!r}")
