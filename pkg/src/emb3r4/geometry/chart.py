"""Metric charts, pointwise curvature and grid scans."""
from __future__ import annotations

import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..embed import DEFAULT_TOL, Status, Tolerances, Verdict, verdict
from ..errors import ConfigError, DomainError, Emb3r4Error, SingularMetric
from ..tensors import (PAIRS, S_KEYS, AmbientCurvature, CovCurvature, Curvature, SymForm2, bianchi_sums,
                       make_cov_curvature)
from .expr import Expr, compile_exprs, derivative_table, lift, parse_expr, substitute
from .jets import JetSpace, curvature_from_metric_jet, multi_indices

COMPONENTS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
S_NOISE_EXACT = 1e-10
S_NOISE_FD = 1e-5
THIRD_ORDER_STEP_FACTOR = 10.0
# "standard" is R_ijkl = -g(R(X_i,X_j)X_k,X_l), positive on the round sphere
CONVENTION_ALIASES = {"paper": "standard"}
COMPONENT_NAMES = ("g11", "g12", "g13", "g22", "g23", "g33")


@dataclass
class MetricChart:
    """Metric g_ij(x) on a coordinate chart.

    ``derivative_mode`` is ``"exact"`` (differentiate the expressions) or
    ``"fd"`` (central differences on g with one Richardson step).
    ``convention`` only affects reported tensors: ``"negated"`` flips the
    sign of R and S on output, decisions always use the internal sign.
    """
    g: Dict[Tuple[int, int], Expr]
    coords: Tuple[str, ...] = ("x1", "x2", "x3")
    derivative_mode: str = "exact"
    fd_step: float = 1e-3
    coordinate_scale: float = 1.0
    convention: str = "standard"
    _fn: object = field(default=None, init=False, repr=False)
    _raw_fn: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = len(self.coords)
        full = {}
        for i in range(n):
            for j in range(i, n):
                e = self.g.get((i, j), self.g.get((j, i)))
                if e is None:
                    e = lift(1 if i == j else 0)
                full[(i, j)] = lift(e)
        self.g = full
        if self.derivative_mode not in ("exact", "fd"):
            raise ValueError(f"unknown derivative mode {self.derivative_mode!r}")
        self.convention = CONVENTION_ALIASES.get(self.convention, self.convention)
        if self.convention not in ("standard", "negated"):
            raise ValueError(f"unknown convention {self.convention!r}")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def from_strings(cls, comps: Mapping[str, str], constants: Mapping[str, object] | None = None,
                     coords: Sequence[str] = ("x1", "x2", "x3"), **kw) -> "MetricChart":
        g = {}
        for name, src in comps.items():
            if len(name) != 3 or name[0] != "g" or not name[1:].isdigit():
                raise ConfigError(f"bad metric component name {name!r}")
            i, j = int(name[1]) - 1, int(name[2]) - 1
            g[(min(i, j), max(i, j))] = parse_expr(str(src), constants)
        return cls(g, tuple(coords), **kw)

    def _components(self):
        n = self.dim
        return [(i, j) for i in range(n) for j in range(i, n)]

    def _exact_fn(self):
        if self._fn is None:
            comps = [self.g[k] for k in self._components()]
            mis, table = derivative_table(comps, self.coords, 3)
            flat = [e for row in table for e in row]
            self._fn = (mis, compile_exprs(flat, self.coords))
        return self._fn

    def _value_fn(self):
        if self._raw_fn is None:
            self._raw_fn = compile_exprs([self.g[k] for k in self._components()], self.coords)
        return self._raw_fn

    def metric(self, p) -> np.ndarray:
        vals = self._value_fn()(*map(float, p))
        return self._assemble(np.array(vals)[:, None])[..., 0]

    def _assemble(self, rows: np.ndarray) -> np.ndarray:
        n = self.dim
        G = np.zeros((n, n, rows.shape[-1]))
        for r, (i, j) in enumerate(self._components()):
            G[i, j] = rows[r]
            G[j, i] = rows[r]
        return G

    def metric_derivatives(self, p) -> np.ndarray:
        """Partial derivatives of g up to third order, shape (n, n, N)."""
        if self.derivative_mode == "exact":
            mis, fn = self._exact_fn()
            vals = np.array(fn(*map(float, p))).reshape(len(self._components()), len(mis))
            return self._assemble(vals)
        return self._assemble(self._fd_derivatives(p))

    def _fd_derivatives(self, p) -> np.ndarray:
        n = self.dim
        mis = multi_indices(n, 3)
        fn = self._value_fn()
        h0 = self.fd_step * self.coordinate_scale

        def table(h):
            offs = (-2, -1, 0, 1, 2)
            samples = {}
            for off in itertools.product(offs, repeat=n):
                if sum(1 for o in off if o) > 3:
                    continue
                pt = [float(p[i]) + h * off[i] for i in range(n)]
                samples[off] = np.array(fn(*pt))
            w = {0: {0: 1.0},
                 1: {-2: 1 / 12, -1: -8 / 12, 1: 8 / 12, 2: -1 / 12},
                 2: {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12},
                 3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5}}
            out = np.zeros((len(self._components()), len(mis)))
            for col, mi in enumerate(mis):
                acc = 0.0
                for combo in itertools.product(*(w[k].items() for k in mi)):
                    off = tuple(c[0] for c in combo)
                    coef = np.prod([c[1] for c in combo])
                    acc = acc + coef * samples[off]
                out[:, col] = acc / h ** sum(mi)
            return out

        orders = np.array([sum(mi) for mi in mis])
        low = (16 * table(h0 / 2) - table(h0)) / 15
        # third differences lose eps/h^3 to rounding, so they use a wider step
        h3 = THIRD_ORDER_STEP_FACTOR * h0
        high = (4 * table(h3 / 2) - table(h3)) / 3
        return np.where(orders == 3, high, low)

    def tensors(self, p):
        """Pointwise curvature data in the internal sign convention."""
        D = self.metric_derivatives(p)
        g0 = D[..., 0]
        n = self.dim
        for k in range(1, n + 1):
            if not np.linalg.det(g0[:k, :k]) > 0:
                raise SingularMetric(f"metric not positive definite at {tuple(p)}")
        js = JetSpace(n, 3)
        return curvature_from_metric_jet(js, js.from_derivatives(D))

    def christoffel(self, p) -> np.ndarray:
        """Gamma^k_ij as an array indexed [k, i, j] (0-based)."""
        return self.tensors(p)["gamma"]

    def riemann(self, p) -> Curvature:
        t = self.tensors(p)
        return _curvature_from_array(t["R"], self.convention)

    def cov_deriv_R(self, p, mode: Optional[str] = None):
        """(S, bianchi_residual); Strict for exact derivatives, Project otherwise."""
        t = self.tensors(p)
        return _cov_from_array(t, mode or ("strict" if self.derivative_mode == "exact" else "project"),
                               self.convention)

    def point_data(self, p, mode: Optional[str] = None):
        t = self.tensors(p)
        R = _curvature_from_array(t["R"], "standard")
        S, bres = _cov_from_array(t, mode or ("strict" if self.derivative_mode == "exact" else "project"), "standard")
        return R, S, bres, t

    def s_noise_floor(self, t) -> float:
        """Magnitude below which a computed S is indistinguishable from zero."""
        rel = S_NOISE_EXACT if self.derivative_mode == "exact" else S_NOISE_FD
        return rel * t["term_scale"]

    def reparametrize(self, P, shift) -> "MetricChart":
        """Chart in coordinates y with x = P y + shift (same coordinate names)."""
        n = self.dim
        P = [[lift(P[i][j]) for j in range(n)] for i in range(n)]
        sub = {}
        for i, name in enumerate(self.coords):
            e = lift(shift[i])
            for j, other in enumerate(self.coords):
                e = e + P[i][j] * parse_expr(other)
            sub[name] = e
        moved = {k: substitute(v, sub) for k, v in self.g.items()}
        full = lambda a, b: moved[(min(a, b), max(a, b))]
        g = {}
        for i in range(n):
            for j in range(i, n):
                e = lift(0)
                for a in range(n):
                    for b in range(n):
                        e = e + P[a][i] * full(a, b) * P[b][j]
                g[(i, j)] = e
        return MetricChart(g, self.coords, self.derivative_mode, self.fd_step, self.coordinate_scale,
                           self.convention)


def _curvature_from_array(R: np.ndarray, convention: str) -> Curvature:
    sign = -1.0 if convention == "negated" else 1.0
    vals = []
    for p in range(3):
        for q in range(p, 3):
            i, j = PAIRS[p]
            k, l = PAIRS[q]
            vals.append(sign * float(R[i - 1, j - 1, k - 1, l - 1]))
    return Curvature(*vals)


def _cov_from_array(t, mode: str, convention: str):
    S = t["S"]
    raw = []
    for p, q, m in S_KEYS:
        i, j = PAIRS[p]
        k, l = PAIRS[q]
        raw.append(float(S[i - 1, j - 1, k - 1, l - 1, m - 1]))
    scale = t["term_scale"]
    bres = max(abs(b) for b in bianchi_sums(raw))
    if mode == "project":
        ref = max(max(abs(v) for v in raw), scale)
        if bres > 1e-5 * ref:
            from ..errors import BianchiViolation
            raise BianchiViolation("all", bres)
        cov = make_cov_curvature(raw, "project")
    else:
        cov = make_cov_curvature(raw, "strict", scale=scale)
    if convention == "negated":
        cov = CovCurvature(tuple(-v for v in cov.s))
    return cov, bres


@dataclass
class PointReport:
    index: Tuple[int, ...]
    point: Tuple[float, ...]
    R: Optional[Curvature] = None
    S: Optional[CovCurvature] = None
    verdict: Optional[Verdict] = None
    bianchi_residual: Optional[float] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        d = {"record": "point", "index": list(self.index), "point": list(self.point)}
        if self.error:
            d["error"] = self.error
            return d
        d["R"] = [float(v) + 0.0 for v in self.R.components()]
        d["S"] = [float(v) + 0.0 for v in self.S.s]
        d["bianchi_residual"] = self.bianchi_residual
        d["verdict"] = self.verdict.to_json()
        return d


def grid_points(lo: Sequence[float], hi: Sequence[float], n: int):
    axes = [np.linspace(a, b, n) if n > 1 else np.array([(a + b) / 2]) for a, b in zip(lo, hi)]
    for idx in itertools.product(range(n), repeat=len(lo)):
        yield idx, tuple(float(axes[k][i]) for k, i in enumerate(idx))


def _threads() -> int:
    env = os.environ.get("EMB3R4_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def evaluate_point(chart: MetricChart, idx, pt, tol: Tolerances, c) -> PointReport:
    try:
        R, S, bres, t = chart.point_data(pt)
        scale = float(np.max(np.abs(t["g"])))
        v = verdict(R, S, tol, c, scale=scale, s_floor=chart.s_noise_floor(t),
                    metric=SymForm2.from_matrix(np.asarray(t["g"]).tolist()))
        if chart.convention == "negated":
            R = R.map(lambda x: -x)
            S = CovCurvature(tuple(-x for x in S.s))
        return PointReport(idx, pt, R, S, v, bres)
    except (Emb3r4Error, ArithmeticError, np.linalg.LinAlgError) as exc:
        return PointReport(idx, pt, error=f"{type(exc).__name__}: {exc}")


def scan(chart: MetricChart, lo: Sequence[float], hi: Sequence[float], n: int,
         tol: Tolerances = DEFAULT_TOL, c=0) -> Tuple[List[PointReport], dict]:
    """Evaluate the verdict on an n^3 grid; per-point errors are recorded, not raised."""
    pts = list(grid_points(lo, hi, n))
    chart._exact_fn() if chart.derivative_mode == "exact" else chart._value_fn()
    workers = _threads()
    if workers > 1 and len(pts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(lambda ip: evaluate_point(chart, ip[0], ip[1], tol, c), pts))
    else:
        reports = [evaluate_point(chart, i, p, tol, c) for i, p in pts]
    reports.sort(key=lambda r: r.index)
    return reports, aggregate(reports)


def aggregate(reports: Sequence[PointReport]) -> dict:
    labels: Dict[str, int] = {}
    errors = 0
    for r in reports:
        if r.error:
            errors += 1
            continue
        labels[r.verdict.label()] = labels.get(r.verdict.label(), 0) + 1
    ok = [r for r in reports if not r.error]
    statuses = {r.verdict.status for r in ok}
    flat = bool(ok) and all(r.verdict.flat for r in ok)
    if not ok:
        summary = "errors_only"
    elif flat:
        summary = "flat_chart"
    elif statuses == {Status.EMBEDDABLE}:
        summary = "all_embeddable"
    elif statuses == {Status.NOT_EMBEDDABLE}:
        summary = "all_not"
    elif statuses == {Status.INCONCLUSIVE}:
        summary = "all_inconclusive"
    else:
        summary = "mixed"
    inconclusive = sum(1 for r in ok if r.verdict.status == Status.INCONCLUSIVE)
    return {"record": "aggregate", "summary": summary, "points": len(reports), "errors": errors,
            "labels": dict(sorted(labels.items())),
            "inconclusive_fraction": inconclusive / len(reports) if reports else 0.0,
            "assumptions": ["the scanned region is taken to lie in a simply connected neighborhood"]}


def exit_code(agg: dict) -> int:
    """0 all embeddable (flat counts), 2 any not embeddable, 3 inconclusive present, 1 errors."""
    labels = agg["labels"]
    if any(k.startswith("NotEmbeddable") for k in labels):
        return 2
    if any(k.startswith("Inconclusive") for k in labels):
        return 3
    if agg["errors"] or not labels:
        return 1
    return 0


# config files

def _parse_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what}: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def load_metric_config(path_or_text: str, is_text: bool = False) -> dict:
    text = path_or_text if is_text else open(path_or_text, encoding="utf-8").read()
    cfg = _parse_json(text, "metric config" if is_text else path_or_text)
    if not isinstance(cfg, dict) or "g" not in cfg:
        raise ConfigError("metric config needs a 'g' object")
    coords = tuple(cfg.get("coords", ("x1", "x2", "x3")))
    if len(coords) != 3:
        raise ConfigError("exactly three coordinates are required")
    constants = cfg.get("constants", {})
    try:
        chart = MetricChart.from_strings(dict(cfg["g"]), constants, coords,
                                         derivative_mode=cfg.get("derivative_mode", "exact"),
                                         fd_step=float(cfg.get("fd_step", 1e-3)),
                                         convention=cfg.get("convention", "standard"))
    except Emb3r4Error as exc:
        raise ConfigError(f"metric component: {exc}") from None
    region = cfg.get("region", {})
    out = {"chart": chart,
           "lo": [float(v) for v in region.get("min", [0, 0, 0])],
           "hi": [float(v) for v in region.get("max", [1, 1, 1])],
           "grid": int(cfg.get("grid", 3)),
           "ambient_c": cfg.get("ambient_c", 0),
           "tolerances": DEFAULT_TOL.replace(**cfg.get("tolerances", {}))}
    if len(out["lo"]) != 3 or len(out["hi"]) != 3:
        raise ConfigError("region min/max need three entries")
    return out
