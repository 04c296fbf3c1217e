"""A small expression language for metric components.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := number | name | name '(' args ')' | '(' expr ')'

``integral(body, t, lo, hi)`` integrates ``body`` in ``t`` numerically and
differentiates exactly through its limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Sequence, Tuple

from ..errors import DomainError, ParseError

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "atan")


class Expr:
    __slots__ = ()

    def __add__(self, o):
        return add(self, lift(o))

    def __radd__(self, o):
        return add(lift(o), self)

    def __sub__(self, o):
        return sub(self, lift(o))

    def __rsub__(self, o):
        return sub(lift(o), self)

    def __mul__(self, o):
        return mul(self, lift(o))

    def __rmul__(self, o):
        return mul(lift(o), self)

    def __truediv__(self, o):
        return div(self, lift(o))

    def __rtruediv__(self, o):
        return div(lift(o), self)

    def __pow__(self, o):
        return power(self, lift(o))

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True)
class Num(Expr):
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Sym(Expr):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Add(Expr):
    a: Expr
    b: Expr

    def __str__(self):
        return f"({self.a} + {self.b})"


@dataclass(frozen=True)
class Sub(Expr):
    a: Expr
    b: Expr

    def __str__(self):
        return f"({self.a} - {self.b})"


@dataclass(frozen=True)
class Mul(Expr):
    a: Expr
    b: Expr

    def __str__(self):
        return f"{self.a}*{self.b}"


@dataclass(frozen=True)
class Div(Expr):
    a: Expr
    b: Expr

    def __str__(self):
        return f"{self.a}/({self.b})"


@dataclass(frozen=True)
class Pow(Expr):
    a: Expr
    b: Expr

    def __str__(self):
        return f"({self.a})^({self.b})"


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr

    def __str__(self):
        return f"-({self.a})"


@dataclass(frozen=True)
class Func(Expr):
    name: str
    a: Expr

    def __str__(self):
        return f"{self.name}({self.a})"


@dataclass(frozen=True)
class Integral(Expr):
    """int_lo^hi body d(var), evaluated by adaptive quadrature."""
    body: Expr
    var: str
    lo: Expr
    hi: Expr

    def __str__(self):
        return f"integral({self.body}, {self.var}, {self.lo}, {self.hi})"


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not an expression")
    if isinstance(x, (int, Fraction)):
        return Num(Fraction(x))
    if isinstance(x, float):
        return Num(Fraction(x))
    if isinstance(x, str):
        return parse_expr(x)
    raise TypeError(f"cannot lift {type(x).__name__} to an expression")


def num(x) -> Num:
    return Num(Fraction(x))


def _is(e, v) -> bool:
    return isinstance(e, Num) and e.value == v


# simplifying constructors keep derivative trees small

def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(b, Neg):
        return sub(a, b.a)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return a
    if _is(a, 0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if a == b:
        return ZERO
    if isinstance(b, Neg):
        return add(a, b.a)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0) or _is(b, 0):
        return ZERO
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return neg(b)
    if _is(b, -1):
        return neg(a)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(a, Neg):
        return neg(mul(a.a, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.a))
    if isinstance(b, Num) and not isinstance(a, Num):
        a, b = b, a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return ZERO
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return Num(a.value / b.value)
    if isinstance(b, Num) and b.value != 0:
        return mul(Num(1 / b.value), a)
    return Div(a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is(b, 0):
        return ONE
    if _is(b, 1):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value.denominator == 1:
        if a.value != 0 or b.value > 0:
            return Num(a.value ** int(b.value))
    return Pow(a, b)


def func(name: str, a: Expr) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name}")
    if isinstance(a, Num) and a.value == 0 and name in ("sin", "tan", "sinh", "tanh", "atan", "sqrt"):
        return ZERO
    if isinstance(a, Num) and a.value == 0 and name in ("cos", "cosh", "exp"):
        return ONE
    return Func(name, a)


def sin(a): return func("sin", lift(a))
def cos(a): return func("cos", lift(a))
def tan(a): return func("tan", lift(a))
def sinh(a): return func("sinh", lift(a))
def cosh(a): return func("cosh", lift(a))
def tanh(a): return func("tanh", lift(a))
def exp(a): return func("exp", lift(a))
def log(a): return func("log", lift(a))
def sqrt(a): return func("sqrt", lift(a))
def atan(a): return func("atan", lift(a))


def integral(body, var: str, lo, hi) -> Expr:
    return Integral(lift(body), var, lift(lo), lift(hi))


# parsing

class _Parser:
    def __init__(self, src: str, constants: Mapping[str, object]):
        self.src = src
        self.constants = constants
        self.toks = self._tokenize(src)
        self.i = 0

    def _tokenize(self, s):
        toks = []
        i = 0
        while i < len(s):
            ch = s[i]
            if ch.isspace():
                i += 1
                continue
            if ch.isdigit() or (ch == "." and i + 1 < len(s) and s[i + 1].isdigit()):
                j = i
                while j < len(s) and (s[j].isdigit() or s[j] == "."):
                    j += 1
                if j < len(s) and s[j] in "eE" and j + 1 < len(s) and (
                        s[j + 1].isdigit() or (s[j + 1] in "+-" and j + 2 < len(s) and s[j + 2].isdigit())):
                    j += 2
                    while j < len(s) and s[j].isdigit():
                        j += 1
                text = s[i:j]
                try:
                    val = Fraction(text)
                except ValueError:
                    raise ParseError(i, {"number"}, s) from None
                toks.append(("num", val, i))
                i = j
                continue
            if ch.isalpha() or ch == "_":
                j = i
                while j < len(s) and (s[j].isalnum() or s[j] == "_"):
                    j += 1
                toks.append(("name", s[i:j], i))
                i = j
                continue
            if s.startswith("**", i):
                toks.append(("op", "^", i))
                i += 2
                continue
            if ch in "+-*/^(),":
                toks.append(("op", ch, i))
                i += 1
                continue
            raise ParseError(i, {"number", "name", "operator"}, s)
        toks.append(("end", None, len(s)))
        return toks

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            raise ParseError(t[2], {op}, self.src)
        return t

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(t[2], {"+", "-", "*", "/", "^", "end of input"}, self.src)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            r = self.term()
            e = add(e, r) if op == "+" else sub(e, r)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            r = self.unary()
            e = mul(e, r) if op == "*" else div(e, r)
        return e

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return neg(self.unary())
        if t[0] == "op" and t[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return power(base, self.unary())
        return base

    def atom(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return Num(val)
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val == "integral":
                    return self._integral(pos)
                if val not in FUNCTIONS:
                    raise ParseError(pos, set(FUNCTIONS) | {"integral"}, self.src)
                self.take()
                arg = self.expr()
                self.expect(")")
                return func(val, arg)
            if val in self.constants:
                return lift(self.constants[val])
            if val in FUNCTIONS:
                raise ParseError(self.peek()[2], {"("}, self.src)
            return Sym(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(pos, {"number", "name", "("}, self.src)

    def _integral(self, pos):
        self.take()
        body = self.expr()
        self.expect(",")
        t = self.take()
        if t[0] != "name":
            raise ParseError(t[2], {"variable name"}, self.src)
        self.expect(",")
        lo = self.expr()
        self.expect(",")
        hi = self.expr()
        self.expect(")")
        return Integral(body, t[1], lo, hi)


def parse_expr(src: str, constants: Mapping[str, object] | None = None) -> Expr:
    """Parse text into an expression; named constants are inlined as numbers."""
    return _Parser(src, constants or {}).parse()


# structure

def free_symbols(e: Expr) -> set:
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Integral):
        return (free_symbols(e.body) - {e.var}) | free_symbols(e.lo) | free_symbols(e.hi)
    if isinstance(e, (Neg, Func)):
        return free_symbols(e.a)
    return free_symbols(e.a) | free_symbols(e.b)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Sym):
        return mapping.get(e.name, e)
    if isinstance(e, Num):
        return e
    if isinstance(e, Neg):
        return neg(substitute(e.a, mapping))
    if isinstance(e, Func):
        return func(e.name, substitute(e.a, mapping))
    if isinstance(e, Integral):
        inner = {k: v for k, v in mapping.items() if k != e.var}
        return Integral(substitute(e.body, inner), e.var, substitute(e.lo, mapping), substitute(e.hi, mapping))
    op = {Add: add, Sub: sub, Mul: mul, Div: div, Pow: power}[type(e)]
    return op(substitute(e.a, mapping), substitute(e.b, mapping))


def differentiate(e: Expr, var: str) -> Expr:
    """Exact derivative with respect to the variable ``var``."""
    return _diff(e, var, {})


def _diff(e: Expr, v: str, memo: Dict) -> Expr:
    key = e
    if key in memo:
        return memo[key]
    if isinstance(e, Num):
        out = ZERO
    elif isinstance(e, Sym):
        out = ONE if e.name == v else ZERO
    elif isinstance(e, Add):
        out = add(_diff(e.a, v, memo), _diff(e.b, v, memo))
    elif isinstance(e, Sub):
        out = sub(_diff(e.a, v, memo), _diff(e.b, v, memo))
    elif isinstance(e, Neg):
        out = neg(_diff(e.a, v, memo))
    elif isinstance(e, Mul):
        out = add(mul(_diff(e.a, v, memo), e.b), mul(e.a, _diff(e.b, v, memo)))
    elif isinstance(e, Div):
        da, db = _diff(e.a, v, memo), _diff(e.b, v, memo)
        if _is(db, 0):
            out = div(da, e.b)
        else:
            out = div(sub(mul(da, e.b), mul(e.a, db)), power(e.b, num(2)))
    elif isinstance(e, Pow):
        da, db = _diff(e.a, v, memo), _diff(e.b, v, memo)
        if _is(db, 0):
            if isinstance(e.b, Num):
                out = mul(mul(e.b, power(e.a, Num(e.b.value - 1))), da)
            else:
                out = mul(mul(e.b, power(e.a, sub(e.b, ONE))), da)
        else:
            out = mul(e, add(mul(db, func("log", e.a)), div(mul(e.b, da), e.a)))
    elif isinstance(e, Func):
        da = _diff(e.a, v, memo)
        out = ZERO if _is(da, 0) else mul(_func_deriv(e.name, e.a), da)
    elif isinstance(e, Integral):
        out = ZERO
        dh, dl = _diff(e.hi, v, memo), _diff(e.lo, v, memo)
        if not _is(dh, 0):
            out = add(out, mul(substitute(e.body, {e.var: e.hi}), dh))
        if not _is(dl, 0):
            out = sub(out, mul(substitute(e.body, {e.var: e.lo}), dl))
        if v in free_symbols(e.body) - {e.var}:
            out = add(out, Integral(_diff(e.body, v, {}), e.var, e.lo, e.hi))
    else:
        raise TypeError(type(e).__name__)
    memo[key] = out
    return out


def _func_deriv(name: str, a: Expr) -> Expr:
    if name == "sin":
        return func("cos", a)
    if name == "cos":
        return neg(func("sin", a))
    if name == "tan":
        return add(ONE, power(func("tan", a), num(2)))
    if name == "sinh":
        return func("cosh", a)
    if name == "cosh":
        return func("sinh", a)
    if name == "tanh":
        return sub(ONE, power(func("tanh", a), num(2)))
    if name == "exp":
        return func("exp", a)
    if name == "log":
        return div(ONE, a)
    if name == "sqrt":
        return div(num(Fraction(1, 2)), func("sqrt", a))
    if name == "atan":
        return div(ONE, add(ONE, power(a, num(2))))
    raise ValueError(name)


# evaluation: expressions are compiled to straight-line Python with
# common subexpressions shared

def _guard(fn, name):
    def g(x):
        try:
            r = fn(x)
        except (ValueError, OverflowError):
            raise DomainError(f"{name}({x}) is undefined") from None
        return r
    return g


def _log(x):
    if not x > 0:
        raise DomainError(f"log({x}) of a nonpositive value")
    return math.log(x)


def _sqrt(x):
    if x < 0:
        raise DomainError(f"sqrt({x}) of a negative value")
    return math.sqrt(x)


def _div(a, b):
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _pow(a, b):
    if a == 0 and b < 0:
        raise DomainError("zero to a negative power")
    if a < 0 and b != int(b):
        raise DomainError(f"negative base {a} to a fractional power {b}")
    try:
        r = a ** b
    except OverflowError:
        raise DomainError("overflow in power") from None
    return float(r)


def _check(x):
    if x != x or x in (math.inf, -math.inf):
        raise DomainError("non-finite value")
    return x


_RUNTIME = {
    "_sin": _guard(math.sin, "sin"), "_cos": _guard(math.cos, "cos"), "_tan": _guard(math.tan, "tan"),
    "_sinh": _guard(math.sinh, "sinh"), "_cosh": _guard(math.cosh, "cosh"),
    "_tanh": math.tanh, "_exp": _guard(math.exp, "exp"), "_log": _log, "_sqrt": _sqrt,
    "_atan": math.atan, "_div": _div, "_pow": _pow, "_check": _check,
}


class _Codegen:
    def __init__(self, args: Sequence[str]):
        self.args = list(args)
        self.names: Dict[Expr, str] = {}
        self.lines = []
        self.integrals = []

    def emit(self, e: Expr) -> str:
        if isinstance(e, Num):
            return repr(float(e.value))
        if isinstance(e, Sym):
            if e.name not in self.args:
                raise KeyError(f"unbound variable {e.name!r}")
            return f"_v[{self.args.index(e.name)}]"
        if e in self.names:
            return self.names[e]
        if isinstance(e, Neg):
            code = f"-{self.emit(e.a)}"
        elif isinstance(e, Add):
            code = f"{self.emit(e.a)} + {self.emit(e.b)}"
        elif isinstance(e, Sub):
            code = f"{self.emit(e.a)} - {self.emit(e.b)}"
        elif isinstance(e, Mul):
            code = f"{self.emit(e.a)} * {self.emit(e.b)}"
        elif isinstance(e, Div):
            code = f"_div({self.emit(e.a)}, {self.emit(e.b)})"
        elif isinstance(e, Pow):
            if isinstance(e.b, Num) and e.b.value.denominator == 1 and 0 < e.b.value <= 4:
                base = self.emit(e.a)
                code = " * ".join([base] * int(e.b.value))
            else:
                code = f"_pow({self.emit(e.a)}, {self.emit(e.b)})"
        elif isinstance(e, Func):
            code = f"_{e.name}({self.emit(e.a)})"
        elif isinstance(e, Integral):
            body = compile_exprs([e.body], [e.var] + [a for a in self.args if a != e.var])
            k = len(self.integrals)
            self.integrals.append(body)
            rest = ", ".join(f"_v[{i}]" for i, a in enumerate(self.args) if a != e.var)
            code = f"_integral({k}, {self.emit(e.lo)}, {self.emit(e.hi)}, ({rest}{',' if rest else ''}))"
        else:
            raise TypeError(type(e).__name__)
        name = f"_t{len(self.names)}"
        self.names[e] = name
        self.lines.append(f"    {name} = {code}")
        return name


def compile_exprs(exprs: Sequence[Expr], args: Sequence[str]) -> Callable:
    """Compile expressions into ``f(*values) -> tuple`` of floats.

    Raises DomainError instead of returning NaN or infinity.
    """
    from scipy.integrate import quad

    gen = _Codegen(args)
    outs = [gen.emit(e) for e in exprs]
    src = "def _f(*_v):\n" + "\n".join(gen.lines) + "\n    return (" + \
        "".join(f"_check({o}), " for o in outs) + ")\n"
    integrals = gen.integrals

    def _integral(k, lo, hi, rest):
        fn = integrals[k]
        val, _err = quad(lambda t: fn(t, *rest)[0], lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    scope = dict(_RUNTIME)
    scope["_integral"] = _integral
    exec(compile(src, "<expr>", "exec"), scope)
    return scope["_f"]


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    names = sorted(free_symbols(e))
    missing = [n for n in names if n not in env]
    if missing:
        raise KeyError(f"unbound variables {missing}")
    return compile_exprs([e], names)(*(float(env[n]) for n in names))[0]


def derivative_table(exprs: Sequence[Expr], coords: Sequence[str], order: int):
    """All partial derivatives up to ``order`` of each expression.

    Returns ``(multi_indices, table)`` where ``table[k][j]`` is the
    derivative of ``exprs[k]`` by multi-index ``multi_indices[j]``.
    """
    from .jets import multi_indices
    mis = multi_indices(len(coords), order)
    table = []
    for e in exprs:
        by = {tuple([0] * len(coords)): e}
        for mi in mis[1:]:
            # derive from the predecessor that lowers the last nonzero slot
            k = max(i for i, x in enumerate(mi) if x)
            prev = list(mi)
            prev[k] -= 1
            by[mi] = differentiate(by[tuple(prev)], coords[k])
        table.append([by[mi] for mi in mis])
    return mis, table
