"""Acceptance criteria 1-8, each run at its stated tolerance.

Every test records one PASS/FAIL line, printed in the pytest terminal summary.
"""
import math
import random
import time
from fractions import Fraction as Fr
from pathlib import Path

import numpy as np

from emb3r4.embed import DEFAULT_TOL, Status
from emb3r4.geometry import load_metric_config, scan
from emb3r4.geometry.chart import evaluate_point, grid_points
from emb3r4.liegroup import (SimpleParams, catalog_params, catalog_sweep, g_alpha_chart, g_alpha_cross_check,
                             g_alpha_embedding, lattice_check, simple_report, solvable_tensors)
from emb3r4.oracle import negative_symbolic, random_alpha, random_beta, run_negative, run_roundtrip
from emb3r4.symbolic import IDENTITIES, run_identities
from emb3r4.tensors import det_A, det_R_tilde, rivertz
from emb3r4.warped import (AFFINE_BASE, WarpedType1, WarpedType2, affine_base_linear_family, affine_base_solution,
                           double_helix_embedding, hessian_identity, monge_ampere_residual,
                           rotational_base_solution, rotational_embedding, type1_check, type1_det_formula,
                           type1_embedding, type1_rivertz_formula, type1_tensors, type2_check, type2_tensors)

CONFIGS = str(Path(__file__).resolve().parent.parent / "configs") + "/"


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_exact_identity_suite(criterion):
    t0 = time.perf_counter()
    records = run_identities()
    wall = time.perf_counter() - t0
    checks = {rec["identity_name"]: rec["status"] == "pass" for rec in records}
    checks["all identities ran"] = len(records) == len(IDENTITIES)
    checks["wall time <= 60 s"] = wall <= 60
    assert criterion(1, checks, f"{len(records)} identities, {wall:.1f} s")


def test_randomized_exact_oracle(criterion):
    rng = random.Random(42)
    samples = []
    for _ in range(200):
        samples.append(random_alpha(rng))
        samples.append(random_beta(rng))
    entries = [v for s in samples for v in s.components()]
    in_range = all(abs(v.numerator) <= 3 and v.denominator <= 8 for v in entries)
    positive = all(det_A(a) > 0 for a in samples[::2])
    rec = run_roundtrip(42, 1000)
    checks = {"generator entries p/q with |p| <= 3, q <= 8": in_range,
              "generated alpha has det > 0": positive,
              "1000 trials without failure": rec["failures"] == 0 and rec["trials"] == 1000,
              "runtime <= 30 s": rec["wall_time_s"] <= 30}
    assert criterion(2, checks, f"{rec['wall_time_s']:.1f} s")


def test_negative_control(criterion):
    rec = run_negative(42, 1000)
    sym = negative_symbolic()
    checks = {"substituted polynomials nonzero": sym["passed"],
              "exact Rivertz vector nonzero in >= 99%": rec["exact_nonzero_fraction"] >= 0.99,
              "float Rivertz vector nonzero in >= 99%": rec["float_nonzero_fraction"] >= 0.99}
    assert criterion(3, checks, f"exact {rec['exact_nonzero_fraction']:.3f}, "
                                f"float {rec['float_nonzero_fraction']:.3f}")


def test_geometry_calibration(criterion):
    sphere = load_metric_config(CONFIGS + "sphere.json")
    reports, _ = scan(sphere["chart"], sphere["lo"], sphere["hi"], 5)
    diag = [r.verdict.diagnostics for r in reports]
    hyp = load_metric_config(CONFIGS + "hyperbolic.json")
    hyp_reports, _ = scan(hyp["chart"], hyp["lo"], hyp["hi"], 5)
    shifted, _ = scan(hyp["chart"], hyp["lo"], hyp["hi"], 5, c=-1)
    gauss = max(d["gauss_residual"] for d in diag)
    s_norm = max(d["S_norm"] for d in diag)
    checks = {"sphere Embeddable everywhere": all(r.verdict.label() == "Embeddable" for r in reports),
              "sphere Gauss residual <= 1e-9": gauss <= 1e-9,
              "sphere S-norm <= 1e-8": s_norm <= 1e-8,
              "hyperbolic NotEmbeddable(NegativeDetR) everywhere":
                  all(r.verdict.label() == "NotEmbeddable(NegativeDetR)" for r in hyp_reports),
              "hyperbolic with c = -1 Embeddable everywhere":
                  all(r.verdict.status == Status.EMBEDDABLE for r in shifted)}
    assert criterion(4, checks, f"gauss {gauss:.1e}, S {s_norm:.1e}, 125 points per chart")


def test_warped_type1(criterion):
    w = WarpedType1.round_fiber("sin(x1/2)")
    lo, hi = [math.pi / 2 - 0.3, 0.6, 0.1], [math.pi / 2 + 0.3, 1.2, 0.8]
    pts, summary = type1_check(w, lo, hi, 3)
    det_gap = r_gap = 0.0
    for _i, p in grid_points(lo, hi, 3):
        R, S = w.chart().point_data(p)[:2]
        det_gap = max(det_gap, _rel(det_R_tilde(R), type1_det_formula(w, p)))
        r = rivertz(R, S)
        r3, r5 = type1_rivertz_formula(w, p)
        scale = R.norm() ** 2 * max(S.norm(), 1.0)
        r_gap = max(r_gap, abs(r[2] - r3) / scale, abs(r[4] - r5) / scale)
    # a fiber of nonconstant curvature, where r3 and r5 do not vanish
    wv = WarpedType1.from_strings("1 + x1^2/4", "1 + x2^2", "x2*x3/5", "2 + x3^2")
    pv = (0.6, 0.3, 0.4)
    Rv, Sv = wv.chart().point_data(pv)[:2]
    rv = rivertz(Rv, Sv)
    f3, f5 = type1_rivertz_formula(wv, pv)
    varying = abs(f3) > 1e-6 and _rel(rv[2], f3) <= 1e-8 and _rel(rv[4], f5) <= 1e-8
    phi = type1_embedding(w, 1, lo, hi)
    pull = phi.pullback_residual(w.chart(), lo, hi, 9)
    flat = WarpedType1.from_strings("3*x1 + 1")
    helix = double_helix_embedding(3, 1).pullback_residual(flat.chart(), [0.1, -0.2, -0.2], [0.5, 0.2, 0.2], 9)
    checks = {"round fiber Embeddable": summary["statuses"] == ["Embeddable"]
                  and all(p.general == "Embeddable" for p in pts),
              "det R~ matches closed form within 1e-9": det_gap <= 1e-9,
              "r3, r5 match closed form (constant K)": r_gap <= 1e-9,
              "r3, r5 match closed form (varying K)": varying,
              "pullback residual <= 1e-9 on 9^3 grid": pull <= 1e-9,
              "flat fiber immersion pullback <= 1e-9": helix <= 1e-9}
    assert criterion(5, checks, f"det gap {det_gap:.1e}, pullback {pull:.1e}, helix {helix:.1e}")


def test_warped_type2(criterion):
    w = affine_base_solution()
    c = float(AFFINE_BASE["c"])
    box_lo, box_hi = [-0.1, -0.1, 0], [0.1, 0.1, 1]
    ma = max(abs(monge_ampere_residual(w, c, p)) for _i, p in grid_points(box_lo, box_hi, 5))
    q = w.quantities((0, 0, 0))
    margin = c - q["f1"] ** 2 / q["E"] - q["f2"] ** 2
    _, s = type2_check(w, box_lo, box_hi, 3, c=1)
    lin = affine_base_linear_family()
    lin_res = max(abs(monge_ampere_residual(lin, 1, p)) for _i, p in grid_points(box_lo, box_hi, 3))
    ql = lin.quantities((0, 0, 0))
    _, sl = type2_check(lin, box_lo, box_hi, 3, c=1)
    A = 0.1
    rot = rotational_base_solution(1, A)
    hess = max(_rel(*hessian_identity(rot, A, p)) for p in ((0.2, 0.1, 0), (0.5, -0.3, 0), (0.7, 0.2, 0)))
    lo, hi = [0.1, -0.5, -0.5], [0.6, 0.5, 0.5]
    wr, phi = rotational_embedding("1", "cos(x1)^2", A, lo, hi)
    pull = phi.pullback_residual(wr.chart(), lo, hi, 9)
    checks = {"Monge-Ampere residual <= 1e-8 near origin": ma <= 1e-8,
              "inequality margin > 0 at origin": margin > 0,
              "closed-form solution Embeddable": s["statuses"] == ["Embeddable"],
              "linear family residual ~ 0": lin_res <= 1e-10,
              "linear family fails the inequality gate":
                  ql["f1"] ** 2 / ql["E"] + ql["f2"] ** 2 >= 1 and sl["statuses"] == ["NotEmbeddable"],
              "Hessian identity within 1e-9 relative": hess <= 1e-9,
              "c = 1, F = 0 embedding pullback <= 1e-9": pull <= 1e-9}
    assert criterion(6, checks, f"MA {ma:.1e}, margin {margin:.3f}, hessian {hess:.1e}, pullback {pull:.1e}")


def test_lie_classification(criterion):
    lat = lattice_check()
    cat = catalog_sweep()
    det = lambda name, lam=0, alpha=0: det_R_tilde(solvable_tensors(catalog_params(name, lam, alpha))[0])
    so3 = simple_report(SimpleParams(3, 3, 4))
    pulls = {}
    for alpha in (-1, 0, Fr(1, 2), 1):
        phi, info = g_alpha_embedding(alpha)
        lo, hi = info["region"]
        pulls[alpha] = phi.pullback_residual(g_alpha_chart(alpha), lo, hi, 9)
    checks = {"lattice has 2401 points": lat["points"] == 2401,
              "branch test <=> rivertz == 0": lat["disagreements"] == 0,
              "catalog outcomes reproduced": all(r.matches for r in cat),
              "h3 and r3,1 have det R~ < 0": det("h3") < 0 and det("r3,1") < 0,
              "r'3,alpha at lambda = 1 has det R~ = -alpha^6":
                  all(det("r'3,alpha", 1, a) == -Fr(a) ** 6 for a in (Fr(1, 2), 1, 2, 3)),
              "so(3) example R1212 = R1313 = 4": so3["R"][0] == 4 and so3["R"][3] == 4,
              "so(3) example det R~ = 0, Gauss unsolvable": so3["det_R_tilde"] == 0 and not so3["gauss_solvable"],
              "G_alpha pullback <= 1e-9": max(pulls.values()) <= 1e-9}
    assert criterion(7, checks, f"{len(cat)} catalog entries, G_alpha pullback {max(pulls.values()):.1e}")


def _closed_vs_chart(w, p, **kw):
    R, S = w.chart(**kw).point_data(p)[:2]
    Rc, Sc = (type1_tensors if isinstance(w, WarpedType1) else type2_tensors)(w, p)
    scale = max(Rc.norm(), Sc.norm(), 1.0)
    dR = max(abs(a - b) for a, b in zip(R.components(), Rc.components())) / scale
    dS = max(abs(a - b) for a, b in zip(S.s, Sc.s)) / scale
    return max(dR, dS)


def _corpus():
    """(name, chart, points, ambient c) for every chart in the test corpus."""
    out = []
    for name in ("sphere", "hyperbolic", "graph", "graph_perturbed"):
        cfg = load_metric_config(CONFIGS + name + ".json")
        pts = [p for _i, p in grid_points(cfg["lo"], cfg["hi"], 2)]
        out.append((name, cfg["chart"], pts, 0))
    hyp = out[1]
    out.append(("hyperbolic, c = -1", hyp[1], hyp[2], -1))
    out.append(("type 1 round fiber", WarpedType1.round_fiber("sin(x1/2)").chart(),
                [(1.4, 0.8, 0.3), (1.7, 1.1, 0.6)], 0))
    out.append(("type 1 steep", WarpedType1.round_fiber("2*x1").chart(), [(1.0, 0.9, 0.3)], 0))
    out.append(("type 2 affine base", affine_base_solution().chart(), [(0.05, -0.03, 0.2), (-0.05, 0.05, 0.5)], 1))
    out.append(("type 2 linear family", affine_base_linear_family().chart(), [(0.0, 0.0, 0.3)], 1))
    for alpha in (-1, Fr(1, 2), 1):
        out.append((f"G_alpha {alpha}", g_alpha_chart(alpha), [(0.7, 0.3, -0.2)], 0))
    return out


def test_cross_pipeline_agreement(criterion):
    warped = [(WarpedType1.round_fiber("sin(x1/2)"), (1.4, 0.8, 0.3)),
              (WarpedType1.round_fiber("1 + x1^2/4"), (1.2, 0.9, 0.4)),
              (WarpedType1.from_strings("1 + x1^2/4", "1 + x2^2", "x2*x3/5", "2 + x3^2"), (0.6, 0.3, 0.4)),
              (affine_base_solution(), (0.05, -0.03, 0.2)),
              (WarpedType2.from_strings("1 + x1^2 + x2/3", "1 + x2^2/2", "x1/7", "2 + sin(x1)"), (0.2, 0.3, 0.1))]
    exact = max(_closed_vs_chart(w, p) for w, p in warped)
    fd = max(_closed_vs_chart(w, p, derivative_mode="fd") for w, p in warped)
    for alpha in (-1, 0, Fr(1, 2), 1, 2):
        exact = max(exact, *g_alpha_cross_check(alpha, (0.7, 0.3, -0.2)))
        fd = max(fd, *g_alpha_cross_check(alpha, (0.7, 0.3, -0.2), derivative_mode="fd"))
    P = np.array([[1, 1, 0], [0, 2, 0], [1, 0, 1]], float)
    shift = np.array([0.1, 0.0, -0.2])
    Pinv = np.linalg.inv(P)
    changed = []
    for name, chart, pts, c in _corpus():
        moved = chart.reparametrize(P.tolist(), shift.tolist())
        for x in pts:
            y = tuple(Pinv @ (np.array(x, float) - shift))
            a = evaluate_point(chart, (0,), tuple(x), DEFAULT_TOL, c)
            b = evaluate_point(moved, (0,), y, DEFAULT_TOL, c)
            if a.error or b.error or a.verdict.status != b.verdict.status:
                changed.append(name)
    checks = {"closed forms vs exact-AST tensors within 1e-8": exact <= 1e-8,
              "closed forms vs finite-difference tensors within 1e-4": fd <= 1e-4,
              "affine reparametrization preserves every verdict status": not changed}
    detail = f"exact {exact:.1e}, fd {fd:.1e}"
    if changed:
        detail += ", changed: " + ", ".join(sorted(set(changed)))
    assert criterion(8, checks, detail)
