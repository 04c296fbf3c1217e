from fractions import Fraction as Fr

import pytest

from emb3r4.errors import NegativeRadicand
from emb3r4.liegroup import (SimpleParams, SolvableParams, auxiliary_identity, branch, catalog_params,
                             catalog_sweep, classify_solvable, g_alpha_chart, g_alpha_cross_check,
                             g_alpha_embedding, lattice_check, simple_condition, simple_report, simple_tensors,
                             solvable_tensors)
from emb3r4.tensors import det_R_tilde, rivertz

half = Fr(1, 2)


def test_lattice_branch_test_matches_rivertz_vector():
    rec = lattice_check()
    assert rec["points"] == 7 ** 4
    assert rec["disagreements"] == 0 and rec["identity_failures"] == 0
    assert rec["rivertz_zero"] > 0


def test_heisenberg_values():
    R, _ = solvable_tensors(catalog_params("h3"))
    assert (R.r1212, R.r1313, R.r2323) == (Fr(-3, 4), Fr(1, 4), Fr(1, 4))
    assert det_R_tilde(R) == Fr(-3, 64)
    c = classify_solvable(catalog_params("h3"))
    assert not c.rivertz_ok and c.verdict.label() == "NotEmbeddable(NegativeDetR)"


def test_r31_is_hyperbolic():
    p = catalog_params("r3,1")
    assert det_R_tilde(solvable_tensors(p)[0]) == -1
    c = classify_solvable(p)
    assert c.branch == "ad_bc0" and c.verdict.label() == "NotEmbeddable(NegativeDetR)"


def test_first_branch_point():
    p = SolvableParams(1, half, half, 1)
    assert branch(p) == "ad4b2_bc"
    assert classify_solvable(p).rivertz_ok


def test_off_branch_point_has_nonzero_rivertz():
    R, S = solvable_tensors(SolvableParams(1, 1, 0, 0))
    assert any(v != 0 for v in rivertz(R, S))
    assert branch(SolvableParams(1, 1, 0, 0)) is None


def test_rprime_determinant():
    p = catalog_params("r'3,alpha", 1, half)
    assert det_R_tilde(solvable_tensors(p)[0]) == -half ** 6
    assert catalog_params("r'3,alpha", 1, 0) == SolvableParams(0, -half, half, 0)
    assert classify_solvable(catalog_params("r'3,alpha", 1, 0)).verdict.label() == "FlatChart"


def test_auxiliary_identity_sample():
    lhs, rhs = auxiliary_identity(SolvableParams(Fr(3), Fr(-1, 2), Fr(2), Fr(5, 7)))
    assert lhs == rhs


def test_catalog_matches_expectations():
    results = catalog_sweep()
    assert results and all(r.matches for r in results)
    assert {r.name for r in results} == {"R3", "h3", "r3,1", "r3", "r3,alpha", "r'3,alpha"}


def test_unknown_algebra():
    with pytest.raises(KeyError):
        catalog_params("sl2")


def test_so3_round_metric():
    R, S = simple_tensors(SimpleParams(1, 1))
    assert all(v == 0 for v in S.s)
    assert R.r1212 == R.r1313 == R.r2323 > 0
    rep = simple_report(SimpleParams(1, 1))
    assert rep["condition"] and rep["verdict"]["status"] == "Embeddable"


def test_simple_condition_fails_for_unequal_parameters():
    assert not simple_condition(SimpleParams(2, 3))


def test_simple_degenerate_example():
    rep = simple_report(SimpleParams(3, 3, 4))
    assert rep["det_R_tilde"] == 0 and not rep["gauss_solvable"] and not rep["condition"]
    assert rep["verdict"]["label"] == "Inconclusive(SingularDetR)"


@pytest.mark.parametrize("alpha", [-1, 0, half, 1, 2])
def test_g_alpha_chart_matches_frame_closed_forms(alpha):
    dR, dS = g_alpha_cross_check(alpha, (0.7, 0.3, -0.2))
    assert dR <= 1e-8 and dS <= 1e-8


@pytest.mark.parametrize("alpha", [-1, 0, half, 1])
def test_g_alpha_embedding_pullback(alpha):
    phi, info = g_alpha_embedding(alpha)
    lo, hi = info["region"]
    assert phi.verify(g_alpha_chart(alpha), lo, hi, 3) <= 1e-8


def test_g_alpha_negative_radicand():
    with pytest.raises(NegativeRadicand):
        g_alpha_embedding(1, k=1, region=((1.0, -0.1, -0.1), (1.0, 0.1, 0.1)))
