"""Exact multivariate polynomials with rational coefficients.

A monomial is a sorted tuple of ``(variable, exponent)`` pairs; the
polynomial is a mapping from monomials to nonzero ``Fraction`` values.
Variables are plain strings such as ``"R1212"`` or ``"x1"``.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Callable, Dict, Iterable, Mapping, Tuple

Monomial = Tuple[Tuple[str, int], ...]

ONE_MONO: Monomial = ()


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        va, ea = a[i]
        vb, eb = b[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


def _coerce(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"Poly coefficients must be rational, got {type(c).__name__}")


class Poly:
    """Immutable exact polynomial.  Zero has an empty term table."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        if terms:
            self.terms = {m: c for m, c in terms.items() if c != 0}
        else:
            self.terms = {}

    @classmethod
    def var(cls, name: str) -> "Poly":
        return cls({((name, 1),): Fraction(1)})

    @classmethod
    def const(cls, c) -> "Poly":
        c = _coerce(c)
        return cls({ONE_MONO: c}) if c else cls()

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction]) -> "Poly":
        p = cls.__new__(cls)
        p.terms = terms
        return p

    # arithmetic

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return Poly.const(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _coerce(other)
            if not c:
                return Poly()
            return Poly._raw({m: v * c for m, v in self.terms.items()})
        if not self.terms or not other.terms:
            return Poly()
        out: Dict[Monomial, Fraction] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = mono_mul(ma, mb)
                v = out.get(m, 0) + ca * cb
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _coerce(other)
        return self * (1 / c)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    # inspection

    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def degree_in(self, names: Iterable[str]) -> int:
        names = set(names)
        return max((sum(e for v, e in m if v in names) for m in self.terms), default=0)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(e for _, e in t[0]), t[0]))

    def leading_monomial(self) -> Monomial | None:
        if not self.terms:
            return None
        return self.sorted_terms()[-1][0]

    def coefficient(self, partial: Mapping[str, int]) -> "Poly":
        """Collect the coefficient of ``prod v^e`` for the given variables.

        Terms whose exponents of those variables differ are dropped.
        """
        out: Dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            exps = dict(m)
            if all(exps.get(v, 0) == e for v, e in partial.items()):
                rest = tuple((v, e) for v, e in m if v not in partial)
                out[rest] = out.get(rest, 0) + c
        return Poly(out)

    def subs(self, mapping: Mapping[str, "Poly"]) -> "Poly":
        """Substitute polynomials for variables."""
        out = Poly()
        powcache: Dict[Tuple[str, int], Poly] = {}
        for m, c in self.terms.items():
            term = Poly.const(c)
            keep = []
            for v, e in m:
                if v in mapping:
                    key = (v, e)
                    if key not in powcache:
                        powcache[key] = mapping[v] ** e
                    term = term * powcache[key]
                else:
                    keep.append((v, e))
            if keep:
                term = term * Poly._raw({tuple(keep): Fraction(1)})
            out = out + term
        return out

    def evaluate(self, env: Mapping[str, object]):
        total = 0
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t = t * env[v] ** e
            total = total + t
        return total

    def compile(self, names: Iterable[str]) -> Callable:
        """Return ``f(*values)`` evaluating the polynomial.

        Coefficients stay exact; with Fraction arguments the result is exact.
        """
        names = list(names)
        index = {n: i for i, n in enumerate(names)}
        missing = self.variables() - set(index)
        if missing:
            raise KeyError(f"unbound variables {sorted(missing)}")
        consts = []
        parts = []
        for m, c in self.sorted_terms():
            consts.append(c)
            factors = [f"_c[{len(consts) - 1}]"]
            for v, e in m:
                a = f"_a[{index[v]}]"
                factors.extend([a] * e)
            parts.append("*".join(factors))
        body = " + ".join(parts) if parts else "0"
        src = f"def _f(*_a):\n    return {body}\n"
        scope = {"_c": consts}
        exec(compile(src, "<poly>", "exec"), scope)
        return scope["_f"]

    def __repr__(self):
        if not self.terms:
            return "0"
        pieces = []
        for m, c in self.sorted_terms():
            if m == ONE_MONO:
                pieces.append(str(c))
            elif c == 1:
                pieces.append(mono_str(m))
            elif c == -1:
                pieces.append("-" + mono_str(m))
            else:
                pieces.append(f"{c}*{mono_str(m)}")
        return " + ".join(pieces).replace("+ -", "- ")


def first_difference(a: Poly, b: Poly):
    """A monomial where ``a`` and ``b`` differ, with both coefficients."""
    d = a - b
    if d.is_zero():
        return None
    m = d.sorted_terms()[0][0]
    return m, a.terms.get(m, Fraction(0)), b.terms.get(m, Fraction(0))


def det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def det_generic(m):
    """Laplace expansion along the first row, skipping zero entries.

    Works over any commutative ring whose zero tests with ``bool``.
    """
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return det2(m)
    total = None
    for j in range(n):
        a = m[0][j]
        if isinstance(a, Poly) and a.is_zero() or (not isinstance(a, Poly) and a == 0):
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = a * det_generic(minor)
        if j % 2:
            t = -t
        total = t if total is None else total + t
    return total if total is not None else m[0][0] * 0
