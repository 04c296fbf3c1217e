"""Standard test charts."""
from __future__ import annotations

from .chart import MetricChart


def sphere_chart(radius=1, **kw) -> MetricChart:
    """Round 3-sphere in hyperspherical coordinates (x1, x2, x3) = (psi, theta, phi)."""
    r2 = f"({radius})^2"
    return MetricChart.from_strings({
        "g11": r2,
        "g22": f"{r2}*sin(x1)^2",
        "g33": f"{r2}*sin(x1)^2*sin(x2)^2",
    }, **kw)


def hyperbolic_chart(**kw) -> MetricChart:
    """Upper half-space model, sectional curvature -1 (x1 > 0)."""
    return MetricChart.from_strings({"g11": "1/x1^2", "g22": "1/x1^2", "g33": "1/x1^2"}, **kw)


def euclidean_chart(**kw) -> MetricChart:
    return MetricChart.from_strings({"g11": "1", "g22": "1", "g33": "1"}, **kw)
