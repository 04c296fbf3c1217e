from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emb3r4.errors import ExcessSymbols, UnpairedSymbols
from emb3r4.poly import Poly
from emb3r4.symbolic import (IDENTITIES, build_RS, run_identities, schwartz_zippel_check, sym)
from emb3r4.symbolic.classical import cubic_discriminant, quartic_catalecticant
from emb3r4.symbolic.identities import codazzi_control, rivertz_quadratic
from emb3r4.symbolic.symexpr import SymExpr, restore, vec
from emb3r4.tensors import indeterminate_cov_curvature, indeterminate_curvature, rivertz

R = lambda i, j: sym("R", "", i, j)
S2 = lambda i, j: sym("S", "", i, j)
S1 = lambda m: sym("S", "", m)


def test_worked_restoration():
    Rp, Sp = indeterminate_curvature(), indeterminate_cov_curvature()
    e = (R(1, 2) * S2(2, 3) - R(1, 3) * S2(1, 2)) ** 2 * S1(3)
    want = Rp.r1212 * Sp.by_name("S23233") - 2 * Rp.r1213 * Sp.by_name("S12233") + Rp.r1313 * Sp.by_name("S12123")
    assert restore(e) == want


def test_missing_partners():
    with pytest.raises(UnpairedSymbols):
        restore(R(1, 2) * S2(1, 2) * S2(1, 3) * S1(3))


def test_repeated_alpha_copy_is_rejected():
    a0 = vec("alpha", "0")
    with pytest.raises(ExcessSymbols):
        restore(a0(1) * a0(1) * a0(2) * a0(2))


def test_empty_expression():
    assert restore(SymExpr()).is_zero()


def test_antisymmetric_storage():
    assert restore(R(2, 1) * R(3, 1)) == -restore(R(1, 2) * R(3, 1))
    assert sym("R", "", 1, 1).is_zero()


def test_rs_quadratic_coefficients():
    r = rivertz(indeterminate_curvature(), indeterminate_cov_curvature())
    half = restore(build_RS()) / 2
    assert half.coefficient({"x3": 2}) == r[0]
    assert half.coefficient({"x1": 1, "x2": 1}) == -r[4]
    assert half == rivertz_quadratic(r)
    zero = {f"x{i}": Poly() for i in (1, 2, 3)}
    assert half.subs(zero).is_zero()


terms = st.sampled_from([
    R(1, 2) * R(1, 3),
    R(1, 2) * R(2, 3),
    R(2, 3) * R(1, 3),
    (R(1, 2) * S2(2, 3) - R(1, 3) * S2(1, 2)) ** 2 * S1(3),
])
coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@settings(max_examples=25, deadline=None)
@given(terms, terms, coeffs, coeffs)
def test_restore_is_linear(e1, e2, a, b):
    lhs = restore(SymExpr.const(a) * e1 + SymExpr.const(b) * e2)
    assert lhs == restore(e1) * a + restore(e2) * b


@settings(max_examples=20, deadline=None)
@given(st.permutations([R(1, 2), R(1, 3), S2(2, 3), S2(1, 2), S1(3)]))
def test_restore_is_order_independent(factors):
    e = factors[0]
    for f in factors[1:]:
        e = e * f
    assert restore(e) == restore(R(1, 2) * R(1, 3) * S2(2, 3) * S2(1, 2) * S1(3))


def test_substitution_control_stays_nonzero():
    assert all(not r.is_zero() for r in codazzi_control())


def test_classical_invariants_shape():
    assert cubic_discriminant().degree_in(["a111"]) == 2
    assert len(quartic_catalecticant().variables()) == 5


def _square_sides(coeff):
    x, y = Poly.var("x"), Poly.var("y")
    lhs = (x + y) ** 2
    rhs = x * x + coeff * x * y + y * y
    return lhs, rhs


def test_schwartz_zippel_accepts_identity():
    lhs, rhs = _square_sides(2)
    assert schwartz_zippel_check(lhs, rhs, trials=50)
    assert schwartz_zippel_check(lhs, lhs)


def test_schwartz_zippel_rejects_wrong_coefficient():
    lhs, rhs = _square_sides(Fraction(7, 4))
    assert not schwartz_zippel_check(lhs, rhs, trials=50)


@pytest.mark.parametrize("name", ["restoration-rules", "rs-coefficients", "rivertz-vanishing",
                                  "codazzi-control", "wedge-determinant", "beta-formula",
                                  "h0-correspondence", "classical-invariants"])
def test_each_identity_passes(name):
    (rec,) = run_identities([name])
    assert rec["status"] == "pass", rec
    assert rec["checks"] > 0


def test_self_test_reports_witness():
    (rec,) = run_identities(["wedge-determinant"], self_test=True)
    assert rec["status"] == "fail"
    assert rec["witness_monomial"]


def test_unknown_identity():
    with pytest.raises(KeyError):
        run_identities(["no-such-identity"])
    assert len(IDENTITIES) == 8
