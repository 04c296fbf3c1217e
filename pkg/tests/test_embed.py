import random
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emb3r4.embed import (DEFAULT_TOL, Reason, Status, Tolerances, beta0, codazzi_from_h0, codazzi_residual,
                          gauss_solvable, h0_coeffs, h0_dependence, invert_gauss, linear_gauss_map,
                          pair_matrix_rank, solve_linear_gauss_system, solve_linear_gauss_system_direct, verdict)
from emb3r4.errors import NonPositiveDet
from emb3r4.oracle import random_alpha, random_beta, random_non_codazzi
from emb3r4.tensors import (FORM3_KEYS, Curvature, Form3, SymForm2, SymForm3, det_A, derived_gauss_S, gauss_R,
                            make_cov_curvature, zero_cov_curvature)

seeds = st.integers(0, 2 ** 32 - 1)


def test_invert_unit_sphere():
    assert invert_gauss(Curvature.from_values([1, 0, 0, 1, 0, 1])) == SymForm2.identity()


def test_invert_diagonal():
    assert invert_gauss(gauss_R(SymForm2.diag(1, 2, 3))) == SymForm2.diag(1, 2, 3)


def test_invert_rejects_zero_determinant():
    with pytest.raises(NonPositiveDet):
        invert_gauss(Curvature.from_values([4, 0, 0, 4, 0, 0]))


def test_invert_falls_back_to_floats_for_irrational_root():
    alpha = invert_gauss(Curvature.from_values([2, 0, 0, 1, 0, 1]))
    assert isinstance(alpha.a11, float)
    assert abs(gauss_R(alpha).r1212 - 2) < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_invert_roundtrip(seed):
    alpha = random_alpha(random.Random(seed))
    assert invert_gauss(gauss_R(alpha)) == alpha


def test_gauss_solvability_by_rank():
    assert gauss_solvable(Curvature.from_values([1, 0, 0, 1, 0, 1]))
    assert not gauss_solvable(Curvature.from_values([4, 0, 0, 4, 0, 0]))
    assert gauss_solvable(gauss_R(SymForm2.diag(1, 1, 0)))
    assert pair_matrix_rank(gauss_R(SymForm2.diag(1, 1, 0))) == 1
    assert gauss_solvable(Curvature.from_values([0] * 6))
    assert not gauss_solvable(Curvature.from_values([-1, 0, 0, -1, 0, -1]))


def test_linear_system_zero():
    g = solve_linear_gauss_system(SymForm2.identity(), Curvature.from_values([0] * 6))
    assert all(v == 0 for v in g.components())


def test_linear_system_recovers_gamma():
    gamma = SymForm2.diag(1, 1, 0)
    T = linear_gauss_map(gamma, SymForm2.identity())
    assert solve_linear_gauss_system(SymForm2.identity(), T) == gamma


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_linear_system_two_solvers_agree(seed):
    rng = random.Random(seed)
    alpha, gamma = random_alpha(rng), random_alpha(rng)
    T = linear_gauss_map(gamma, alpha)
    assert solve_linear_gauss_system(alpha, T) == gamma
    assert solve_linear_gauss_system_direct(alpha, T) == gamma


def test_beta0_zero_S():
    b = beta0(SymForm2.identity(), zero_cov_curvature())
    assert all(v == 0 for v in b.components())


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_beta0_roundtrip(seed):
    rng = random.Random(seed)
    alpha, beta = random_alpha(rng), random_beta(rng)
    b0 = beta0(alpha, derived_gauss_S(alpha, beta))
    assert b0.components() == Form3.from_symmetric(beta).components()
    assert codazzi_residual(b0) == 0


def test_beta0_generic_S_breaks_last_slot_symmetry():
    rng = random.Random(7)
    hits = 0
    for _ in range(20):
        alpha = random_alpha(rng)
        S = make_cov_curvature([Fr(rng.randint(-3, 3), rng.randint(1, 5)) for _ in range(18)], "project")
        hits += codazzi_residual(beta0(alpha, S)) > 0
    assert hits >= 18


def test_h0_zero_for_zero_S():
    h = h0_coeffs(SymForm2.identity(), zero_cov_curvature())
    assert all(v == 0 for v in h.components())


def test_codazzi_residual_values():
    assert codazzi_residual(Form3.from_symmetric(SymForm3.from_values(range(10)))) == 0
    raw = {k: Fr(0) for k in FORM3_KEYS}
    raw[(1, 2, 3)] = Fr(1)
    assert codazzi_residual(Form3(raw)) == 1


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_h0_predicts_codazzi_defect(seed):
    rng = random.Random(seed)
    alpha, bf = random_alpha(rng), random_non_codazzi(rng)
    S = derived_gauss_S(alpha, bf, "project")
    h = h0_coeffs(alpha, S)
    assert h0_dependence(alpha, h) == 0
    b0 = beta0(alpha, S)
    pred = codazzi_from_h0(alpha, h, det_A(alpha))
    for (i, p, q), v in pred.items():
        assert b0(i, p, q) - b0(i, q, p) == v


def test_h0_with_codazzi_beta_vanishes():
    rng = random.Random(3)
    alpha, beta = random_alpha(rng), random_beta(rng)
    h = h0_coeffs(alpha, derived_gauss_S(alpha, beta))
    assert all(v == 0 for v in h.components())


def test_verdict_sphere():
    v = verdict(Curvature.from_values([1, 0, 0, 1, 0, 1]), zero_cov_curvature())
    assert v.status == Status.EMBEDDABLE and v.alpha == SymForm2.identity()


def test_verdict_hyperbolic_space():
    R = Curvature.from_values([-1, 0, 0, -1, 0, -1])
    v = verdict(R, zero_cov_curvature())
    assert (v.status, v.reason) == (Status.NOT_EMBEDDABLE, Reason.NEGATIVE_DET_R)
    shifted = verdict(R, zero_cov_curvature(), c=-1)
    assert shifted.status == Status.EMBEDDABLE and shifted.label() == "FlatChart"


def test_verdict_singular():
    v = verdict(Curvature.from_values([4, 0, 0, 4, 0, 0]), zero_cov_curvature())
    assert v.label() == "Inconclusive(SingularDetR)"


def test_verdict_rivertz_violation_exact_and_float():
    R = gauss_R(SymForm2.identity())
    S = make_cov_curvature({"S12131": 1}, "project")
    assert verdict(R, S).label() == "NotEmbeddable(RivertzViolation)"
    Sf = type(S)(tuple(float(v) for v in S.s))
    assert verdict(R.map(float), Sf).label() == "NotEmbeddable(RivertzViolation)"


def test_verdict_float_noise_floor():
    R = Curvature.from_values([1.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    S = make_cov_curvature([1e-13] + [0.0] * 17, "project")
    v = verdict(R, S, s_floor=1e-10)
    assert v.status == Status.EMBEDDABLE and v.diagnostics["S_below_noise_floor"]


def test_tolerances_replace_and_validate():
    t = DEFAULT_TOL.replace(tau_nd=1e-6, tau_flat=None)
    assert t.tau_nd == 1e-6 and t.tau_flat == DEFAULT_TOL.tau_flat
    with pytest.raises(ValueError):
        Tolerances(tau_nd=0)


def test_verdict_json_is_serializable():
    import json
    v = verdict(gauss_R(SymForm2.diag(1, 2, 3)), zero_cov_curvature())
    assert json.loads(json.dumps(v.to_json()))["status"] == "Embeddable"
