import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emb3r4.embed import DEFAULT_TOL, Status
from emb3r4.errors import ConfigError, DomainError, ParseError, SingularMetric
from emb3r4.geometry import (MetricChart, aggregate, differentiate, euclidean_chart, evaluate, exit_code,
                             hyperbolic_chart, load_metric_config, parse_expr, scan, sphere_chart)
from emb3r4.geometry.chart import evaluate_point
from emb3r4.geometry.expr import Div, Num, Pow, Sym
from emb3r4.liegroup import g_alpha_chart
from emb3r4.tensors import det_R_tilde

# parsing and differentiation


def test_parse_shape():
    assert parse_expr("1/x1^2") == Div(Num(1), Pow(Sym("x1"), Num(2)))


def test_parse_with_constant():
    e = parse_expr("cos(a*x1)^2", {"a": 2})
    assert math.isclose(evaluate(e, {"x1": 0.3}), math.cos(0.6) ** 2)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_expr("x1 + * 2")
    assert exc.value.position == 5


def test_unknown_function():
    with pytest.raises(ParseError):
        parse_expr("foo(x1)")


def test_derivatives():
    assert evaluate(differentiate(parse_expr("x1^2"), "x1"), {"x1": 3.0}) == 6.0
    assert differentiate(parse_expr("x1"), "x2") == Num(0)
    e = parse_expr("cos(a*x1)^2", {"a": 2})
    d3 = differentiate(differentiate(differentiate(e, "x1"), "x1"), "x1")
    assert abs(evaluate(d3, {"x1": 0.0})) < 1e-12
    x, h = 0.4, 1e-3
    f = lambda t: math.cos(2 * t) ** 2
    fd = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h ** 3)
    assert math.isclose(evaluate(d3, {"x1": x}), fd, rel_tol=1e-5)


def test_domain_error():
    with pytest.raises(DomainError):
        evaluate(parse_expr("log(x1)"), {"x1": -1.0})


funcs = st.sampled_from(["sin", "cos", "exp", "tanh", "atan"])


@settings(max_examples=30, deadline=None)
@given(funcs, funcs, st.floats(-1, 1))
def test_derivative_matches_central_difference(f1, f2, x):
    e = parse_expr(f"{f1}(x1)*{f2}(2*x1) + x1^3")
    d = evaluate(differentiate(e, "x1"), {"x1": x})
    h = 1e-5
    fd = (evaluate(e, {"x1": x + h}) - evaluate(e, {"x1": x - h})) / (2 * h)
    assert math.isclose(d, fd, rel_tol=1e-6, abs_tol=1e-8)


# Christoffel symbols and curvature


def test_euclidean_is_flat():
    ch = euclidean_chart()
    p = (0.3, -0.2, 0.5)
    assert np.all(ch.christoffel(p) == 0)
    assert all(v == 0 for v in ch.riemann(p).components())
    S, _ = ch.cov_deriv_R(p)
    assert all(v == 0 for v in S.s)


def test_affine_base_christoffel():
    a, b = 0.3, 0.5
    ch = MetricChart.from_strings({"g11": "1 + 2*a*x1 + 2*b*x2", "g22": "1", "g33": "1"}, {"a": "3/10", "b": "1/2"})
    p = (0.1, 0.2, 0.0)
    E = 1 + 2 * a * p[0] + 2 * b * p[1]
    G = ch.christoffel(p)
    assert math.isclose(G[0, 0, 0], a / E)
    assert math.isclose(G[1, 0, 0], -b)
    assert math.isclose(G[0, 0, 1], b / E)
    for k, i, j in ((1, 0, 1), (0, 1, 1), (1, 1, 1)):
        assert abs(G[k, i, j]) < 1e-15


def test_hyperbolic_christoffel():
    G = hyperbolic_chart().christoffel((1.0, 0.0, 0.0))
    want = np.zeros((3, 3, 3))
    want[0, 0, 0] = -1
    want[0, 1, 1] = want[0, 2, 2] = 1
    want[1, 0, 1] = want[1, 1, 0] = want[2, 0, 2] = want[2, 2, 0] = -1
    assert np.allclose(G, want, atol=1e-14)


def test_sphere_curvature_sign():
    p = (0.7, 1.1, 0.4)
    R = sphere_chart().riemann(p)
    s = math.sin(p[0]) ** 2
    assert math.isclose(R.r1212, s, rel_tol=1e-12)
    assert math.isclose(R.r2323, s * s * math.sin(p[1]) ** 2, rel_tol=1e-12)
    assert sphere_chart(convention="negated").riemann(p).r1212 < 0


@pytest.mark.parametrize("chart", [sphere_chart(), sphere_chart(radius=2), hyperbolic_chart()])
def test_constant_curvature_is_symmetric(chart):
    S, bres = chart.cov_deriv_R((0.9, 0.8, 0.3))
    assert S.norm() <= 1e-8 and bres <= 1e-8


def test_singular_metric():
    ch = MetricChart.from_strings({"g11": "x1", "g22": "1", "g33": "1"})
    with pytest.raises(SingularMetric):
        ch.riemann((-1.0, 0.0, 0.0))


def test_fd_matches_exact():
    p = (0.25, 0.3, 0.35)
    comps = {"g11": "1 + x1^2", "g12": "2*x1*x2", "g13": "3*x1*x3 + sin(x2)/5",
             "g22": "1 + 4*x2^2", "g23": "6*x2*x3", "g33": "1 + 9*x3^2"}
    ex = MetricChart.from_strings(comps)
    fd = MetricChart.from_strings(comps, derivative_mode="fd")
    Re, Se, _, _ = ex.point_data(p)
    Rf, Sf, _, _ = fd.point_data(p)
    assert max(abs(a - b) for a, b in zip(Re.components(), Rf.components())) <= 1e-4 * Re.norm()
    assert max(abs(a - b) for a, b in zip(Se.s, Sf.s)) <= 1e-4 * Se.norm()


P_affine = [[1, 1, 0], [0, 2, 0], [1, 0, 1]]


def test_reparametrization_preserves_verdicts():
    base = MetricChart.from_strings({"g11": "1 + x1^2", "g12": "2*x1*x2", "g13": "3*x1*x3",
                                     "g22": "1 + 4*x2^2", "g23": "6*x2*x3", "g33": "1 + 9*x3^2"})
    moved = base.reparametrize(P_affine, [0.1, 0.0, -0.2])
    Pm = np.array(P_affine, float)
    for y in ((0.1, 0.1, 0.3), (0.05, 0.2, 0.4)):
        x = Pm @ np.array(y) + np.array([0.1, 0.0, -0.2])
        Ry = moved.riemann(y)
        Rx = base.riemann(tuple(x))
        # the pair determinant scales by det(P)^4
        assert math.isclose(det_R_tilde(Ry), np.linalg.det(Pm) ** 4 * det_R_tilde(Rx), rel_tol=1e-9)
        a = evaluate_point(base, (0,), tuple(x), DEFAULT_TOL, 0).verdict.label()
        b = evaluate_point(moved, (0,), y, DEFAULT_TOL, 0).verdict.label()
        assert a == b


# scanning


def test_scan_euclidean_is_flat_chart():
    reports, agg = scan(euclidean_chart(), [0, 0, 0], [1, 1, 1], 2)
    assert agg["summary"] == "flat_chart" and exit_code(agg) == 0
    assert all(r.verdict.label() == "FlatChart" for r in reports)


def test_scan_sphere_5_cubed():
    reports, agg = scan(sphere_chart(), [0.4, 0.4, 0.0], [1.2, 1.2, 1.0], 5)
    assert agg["labels"] == {"Embeddable": 125}
    assert [r.index for r in reports] == sorted(r.index for r in reports)


def test_scan_g_alpha_one_is_hyperbolic():
    _, agg = scan(g_alpha_chart(1), [0.5, -0.2, -0.2], [1.0, 0.2, 0.2], 3)
    assert agg["labels"] == {"NotEmbeddable(NegativeDetR)": 27}
    assert exit_code(agg) == 2


def test_scan_records_errors_per_point():
    ch = MetricChart.from_strings({"g11": "x1", "g22": "1", "g33": "1"})
    reports, agg = scan(ch, [-1, 0, 0], [1, 1, 1], 3)
    # x1 = -1 and x1 = 0 are both outside the positive-definite region
    assert agg["errors"] == 18 and exit_code(agg) == 1
    assert any(r.error and "SingularMetric" in r.error for r in reports)


def test_thread_count_does_not_change_results(monkeypatch):
    runs = []
    for n in ("1", "4"):
        monkeypatch.setenv("EMB3R4_THREADS", n)
        reports, _ = scan(sphere_chart(), [0.4, 0.4, 0.0], [1.2, 1.2, 1.0], 3)
        runs.append([r.to_json() for r in reports])
    assert runs[0] == runs[1]


def test_aggregate_counts():
    _, agg = scan(MetricChart.from_strings({"g11": "1", "g22": "1", "g33": "1 + x1^2"}), [0, 0, 0], [1, 1, 1], 2)
    assert agg["points"] == 8
    assert set(aggregate([])) >= {"summary", "labels"}


# config loading


def test_config_roundtrip():
    cfg = load_metric_config('{"g": {"g11": "r^2", "g22": "r^2*sin(x1)^2", "g33": "r^2*sin(x1)^2*sin(x2)^2"},'
                             ' "constants": {"r": 2}, "grid": 2, "ambient_c": "1/4",'
                             ' "region": {"min": [0.5, 0.5, 0], "max": [1, 1, 1]}}', is_text=True)
    assert cfg["grid"] == 2 and cfg["lo"] == [0.5, 0.5, 0.0]
    assert math.isclose(cfg["chart"].metric((0.5, 0.5, 0.0))[0, 0], 4.0)


@pytest.mark.parametrize("text, fragment", [
    ('{"g": {"g11": "1",}}', "line 1"),
    ('{"coords": ["x1"], "g": {"g11": "1"}}', "three coordinates"),
    ('{"g": {"g11": "1 +"}}', "metric component"),
    ('{"g": {"gxy": "1"}}', "metric component"),
    ('{"x": 1}', "'g'"),
    ('{"g": {"g11": "1"}, "region": {"min": [0, 0], "max": [1, 1, 1]}}', "three entries"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError) as exc:
        load_metric_config(text, is_text=True)
    assert fragment in str(exc.value)


def test_config_multiline_error_position():
    with pytest.raises(ConfigError) as exc:
        load_metric_config('{\n "g": {\n  "g11": 1\n  "g22": 2}}', is_text=True)
    assert "line 4" in str(exc.value)


def test_status_enum_values():
    assert Status.EMBEDDABLE.value == "Embeddable"
