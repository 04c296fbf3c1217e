"""Symbolic-method expressions and their restoration to polynomials.

A symbol is ``(family, tag, indices)``.  Symbols of one family and one
copy tag must appear in a monomial exactly in the pattern the family
prescribes (for instance two 2-index and one 1-index symbol for S); such
a group restores to a single tensor component.  Coefficients live in
Q[sqrt 2] and the radical part has to cancel after restoration.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Tuple

from ..errors import ExcessSymbols, ResidualRadical, UnpairedSymbols
from ..poly import Monomial, Poly, mono_mul, mono_str
from ..tensors import (indeterminate_alpha, indeterminate_beta,
                       indeterminate_cov_curvature, indeterminate_curvature)

Symbol = Tuple[str, str, Tuple[int, ...]]
Key = Tuple[Tuple[Symbol, ...], Monomial]
Coef = Tuple[Fraction, Fraction]

_ZERO = Fraction(0)


@dataclass(frozen=True)
class SymbolFamily:
    """Pairing rule for one family of symbols.

    ``pattern`` lists the index arity of each symbol in one restored group,
    e.g. ``(2, 2)`` for R and ``(2, 2, 1)`` for S.  ``target`` receives the
    index tuples of a group, 2-index symbols first, and returns a Poly.
    """
    name: str
    pattern: Tuple[int, ...]
    antisymmetric: bool
    target: Callable[[list], Poly]
    dim: int = 3

    @property
    def index_arity(self):
        return tuple(sorted(set(self.pattern), reverse=True))

    @property
    def pairing_order(self) -> int:
        return len(self.pattern)


def _alpha_target():
    al = indeterminate_alpha("al")
    return lambda g: al(g[0][0], g[1][0])


def _beta_target():
    be = indeterminate_beta("be")
    return lambda g: be(g[0][0], g[1][0], g[2][0])


def _curv_target(prefix):
    from ..tensors import Curvature, R_NAMES
    R = Curvature(*(Poly.var(prefix + n[1:]) for n in R_NAMES))
    return lambda g: R(g[0][0], g[0][1], g[1][0], g[1][1])


def _s_target():
    S = indeterminate_cov_curvature()
    return lambda g: S(g[0][0], g[0][1], g[1][0], g[1][1], g[2][0])


def _binary_target(prefix):
    return lambda g: Poly.var(prefix + "".join(str(x[0]) for x in sorted(g)))


FAMILIES: Dict[str, SymbolFamily] = {}


def register(family: SymbolFamily) -> SymbolFamily:
    FAMILIES[family.name] = family
    return family


register(SymbolFamily("R", (2, 2), True, _curv_target("R")))
register(SymbolFamily("S", (2, 2, 1), True, _s_target()))
register(SymbolFamily("T", (2, 2), True, _curv_target("T")))
register(SymbolFamily("alpha", (1, 1), False, _alpha_target()))
register(SymbolFamily("beta", (1, 1, 1), False, _beta_target()))
register(SymbolFamily("cubic", (1, 1, 1), False, _binary_target("a"), dim=2))
register(SymbolFamily("quartic", (1, 1, 1, 1), False, _binary_target("a"), dim=2))


def _cmul(a: Coef, b: Coef) -> Coef:
    return (a[0] * b[0] + 2 * a[1] * b[1], a[0] * b[1] + a[1] * b[0])


class SymExpr:
    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Key, Coef] | None = None):
        self.terms = {k: c for k, c in (terms or {}).items() if c[0] or c[1]}

    @classmethod
    def _raw(cls, terms):
        e = cls.__new__(cls)
        e.terms = terms
        return e

    @classmethod
    def const(cls, q=1, r=0) -> "SymExpr":
        return cls({((), ()): (Fraction(q), Fraction(r))})

    @classmethod
    def formal(cls, name: str) -> "SymExpr":
        return cls({((), ((name, 1),)): (Fraction(1), _ZERO)})

    def __add__(self, other):
        other = _lift(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            if k in out:
                o = out[k]
                v = (o[0] + c[0], o[1] + c[1])
                if v[0] or v[1]:
                    out[k] = v
                else:
                    del out[k]
            else:
                out[k] = c
        return SymExpr._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr._raw({k: (-c[0], -c[1]) for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        out: Dict[Key, Coef] = {}
        for (sa, fa), ca in self.terms.items():
            for (sb, fb), cb in other.terms.items():
                k = (tuple(sorted(sa + sb)), mono_mul(fa, fb))
                c = _cmul(ca, cb)
                if k in out:
                    o = out[k]
                    v = (o[0] + c[0], o[1] + c[1])
                    if v[0] or v[1]:
                        out[k] = v
                    else:
                        del out[k]
                elif c[0] or c[1]:
                    out[k] = c
        return SymExpr._raw(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = SymExpr.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __len__(self):
        return len(self.terms)

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (syms, f), (q, r) in sorted(self.terms.items()):
            coef = f"{q}" if not r else f"({q}+{r}*sqrt2)"
            body = "*".join(_sym_str(s) for s in syms)
            if f:
                body = (body + "*" if body else "") + mono_str(f)
            parts.append(f"{coef}*{body}" if body else coef)
        return " + ".join(parts)


def _lift(x) -> SymExpr:
    if isinstance(x, SymExpr):
        return x
    if isinstance(x, (int, Fraction)):
        return SymExpr.const(x)
    raise TypeError(f"cannot combine SymExpr with {type(x).__name__}")


def _sym_str(s: Symbol) -> str:
    fam, tag, idx = s
    t = f"^{tag}" if tag else ""
    return f"{fam}{t}_{''.join(map(str, idx))}"


def sym(family: str, tag: str, *idx: int) -> SymExpr:
    """One symbol.  Antisymmetric 2-index symbols are stored index-sorted."""
    fam = FAMILIES[family]
    if len(idx) not in fam.pattern:
        raise ValueError(f"family {family} has no {len(idx)}-index symbols")
    if any(not 1 <= i <= fam.dim for i in idx):
        raise ValueError(f"index out of range for {family}: {idx}")
    sign = 1
    if fam.antisymmetric and len(idx) == 2:
        i, j = idx
        if i == j:
            return SymExpr()
        if i > j:
            idx, sign = (j, i), -1
    return SymExpr({(((family, tag, tuple(idx)),), ()): (Fraction(sign), _ZERO)})


def vec(family: str, tag: str) -> Callable[[int], SymExpr]:
    return lambda i: sym(family, tag, i)


def wedge(u: Callable[[int], SymExpr], v: Callable[[int], SymExpr]) -> Callable[[int, int], SymExpr]:
    """(u ^ v)_ij = u_i v_j - u_j v_i for index functions u, v."""
    return lambda i, j: u(i) * v(j) - u(j) * v(i)


def formal_vec(name: str) -> Callable[[int], SymExpr]:
    return lambda i: SymExpr.formal(f"{name}{i}")


def monomial_text(syms, formal=()) -> str:
    body = "*".join(_sym_str(s) for s in syms)
    if formal:
        body = (body + "*" if body else "") + mono_str(formal)
    return body or "1"


def _restore_symbols(syms: Tuple[Symbol, ...], cache) -> Poly:
    hit = cache.get(syms)
    if hit is not None:
        return hit
    groups: Dict[Tuple[str, str], list] = {}
    for s in syms:
        groups.setdefault((s[0], s[1]), []).append(s[2])
    out = Poly.const(1)
    for (fam_name, tag), members in groups.items():
        fam = FAMILIES[fam_name]
        have = Counter(len(ix) for ix in members)
        need = Counter(fam.pattern)
        if any(have[a] > need[a] for a in have):
            raise ExcessSymbols(monomial_text(syms), f"family {fam_name} copy {tag!r}")
        if have != need:
            raise UnpairedSymbols(monomial_text(syms), f"family {fam_name} copy {tag!r}")
        members = sorted(members, key=lambda ix: -len(ix))
        out = out * fam.target(members)
    cache[syms] = out
    return out


def restore(e: SymExpr) -> Poly:
    """Map every complete symbol group to its tensor component."""
    rational: Dict[Monomial, Fraction] = {}
    radical: Dict[Monomial, Fraction] = {}
    cache: Dict = {}
    for (syms, formal), (q, r) in e.terms.items():
        base = _restore_symbols(syms, cache)
        for m, c in base.terms.items():
            mm = mono_mul(m, formal)
            if q:
                rational[mm] = rational.get(mm, 0) + q * c
            if r:
                radical[mm] = radical.get(mm, 0) + r * c
    rad = Poly(radical)
    if not rad.is_zero():
        m = rad.sorted_terms()[0][0]
        raise ResidualRadical(mono_str(m), "sqrt(2) part survives restoration")
    return Poly(rational)


def s_bianchi(tag: str = "") -> SymExpr:
    """S_12 S_3 + S_23 S_1 + S_31 S_2 (restores to zero against any S_ij)."""
    s2 = lambda i, j: sym("S", tag, i, j)
    s1 = lambda m: sym("S", tag, m)
    return s2(1, 2) * s1(3) + s2(2, 3) * s1(1) + s2(3, 1) * s1(2)


def bianchi_rewrite(e: SymExpr, tag: str = "") -> SymExpr:
    """Replace each factor pair S_12*S_3 by -(S_23*S_1 + S_31*S_2).

    Applied only on request; the restored polynomial is unchanged.
    """
    s12 = ("S", tag, (1, 2))
    s3 = ("S", tag, (3,))
    replacement = -(sym("S", tag, 2, 3) * sym("S", tag, 1) + sym("S", tag, 3, 1) * sym("S", tag, 2))
    out = SymExpr()
    for (syms, formal), c in e.terms.items():
        if s12 in syms and s3 in syms:
            rest = list(syms)
            rest.remove(s12)
            rest.remove(s3)
            rest_expr = SymExpr({(tuple(rest), formal): c})
            out = out + rest_expr * replacement
        else:
            out = out + SymExpr({(syms, formal): c})
    return out


def det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def det2(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]
