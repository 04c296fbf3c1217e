"""Classical binary and ternary invariants as a sanity test of the engine."""
from __future__ import annotations

from fractions import Fraction

from ..poly import Poly
from .symexpr import SymbolFamily, SymExpr, det3, register, restore, sym

register(SymbolFamily("quadratic", (1, 1), False,
                      lambda g: Poly.var("q" + "".join(str(x[0]) for x in sorted(g))), dim=2))
register(SymbolFamily("ternary", (1, 1, 1), False,
                      lambda g: Poly.var("t" + "".join(str(x[0]) for x in sorted(g))), dim=3))


def bracket(family: str, p: int, q: int) -> SymExpr:
    """[pq] = a1^(p) a2^(q) - a2^(p) a1^(q)."""
    a = lambda tag, i: sym(family, str(tag), i)
    return a(p, 1) * a(q, 2) - a(p, 2) * a(q, 1)


def cubic_discriminant() -> Poly:
    b = lambda p, q: bracket("cubic", p, q)
    e = SymExpr.const(Fraction(-1, 2)) * b(1, 2) ** 2 * b(3, 4) ** 2 * b(1, 3) * b(2, 4)
    return restore(e)


def quartic_catalecticant() -> Poly:
    b = lambda p, q: bracket("quartic", p, q)
    e = SymExpr.const(Fraction(1, 6)) * b(1, 2) ** 2 * b(1, 3) ** 2 * b(2, 3) ** 2
    return restore(e)


def _v(*idx):
    return Poly.var("a" + "".join(map(str, idx)))


def verify_classical_invariants() -> int:
    from .identities import assert_equal, assert_zero
    a111, a112, a122, a222 = _v(1, 1, 1), _v(1, 1, 2), _v(1, 2, 2), _v(2, 2, 2)
    disc = (a111 ** 2 * a222 ** 2 - 6 * a111 * a112 * a122 * a222 + 4 * a111 * a122 ** 3
            + 4 * a112 ** 3 * a222 - 3 * a112 ** 2 * a122 ** 2)
    assert_equal("binary cubic discriminant", cubic_discriminant(), disc)

    h = [[_v(1, 1, 1, 1), _v(1, 1, 1, 2), _v(1, 1, 2, 2)],
         [_v(1, 1, 1, 2), _v(1, 1, 2, 2), _v(1, 2, 2, 2)],
         [_v(1, 1, 2, 2), _v(1, 2, 2, 2), _v(2, 2, 2, 2)]]
    assert_equal("binary quartic catalecticant", quartic_catalecticant(), det3(h))

    b = lambda p, q: bracket("cubic", p, q)
    six = b(1, 2) * b(1, 3) * b(1, 4) * b(2, 3) * b(2, 4) * b(3, 4)
    assert_zero("product of all six cubic brackets", restore(six))

    t = lambda tag, i: sym("ternary", str(tag), i)
    d = det3([[t(1, i), t(2, i), t(3, i)] for i in (1, 2, 3)])
    assert_zero("cubed ternary determinant", restore(d ** 3))

    q = lambda tag, i: sym("quadratic", str(tag), i)
    toy = (q(1, 1) * q(2, 2) - q(1, 2) * q(2, 1)) * q(1, 1) * q(2, 1)
    assert_zero("antisymmetric bracket against symmetric pair", restore(toy))
    return 5
