"""Metric charts given by closed-form expressions, and pointwise curvature."""
from .expr import Expr, differentiate, evaluate, parse_expr
from .chart import MetricChart, PointReport, aggregate, exit_code, load_metric_config, scan
from .charts import euclidean_chart, hyperbolic_chart, sphere_chart

__all__ = ["Expr", "differentiate", "evaluate", "parse_expr", "MetricChart", "PointReport",
           "aggregate", "exit_code", "load_metric_config", "scan", "euclidean_chart",
           "hyperbolic_chart", "sphere_chart"]
