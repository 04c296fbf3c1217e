"""Warped products with a one- or two-dimensional base.

Type 1 is dx1^2 + f(x1)^2 (E dx2^2 + 2F dx2 dx3 + G dx3^2), Type 2 is
E dx1^2 + 2F dx1 dx2 + G dx2^2 + f(x1, x2)^2 dx3^2.  Curvature and its
covariant derivative come from closed forms in f, the fiber or base
curvature K and the Hessian of f; explicit embeddings are checked by
pulling back the Euclidean metric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .embed import DEFAULT_TOL, Status, Tolerances, verdict
from .errors import (DomainError, NegativeRadicand, PullbackMismatch, SpeedExceeded,
                     ZeroBaseCurvature)
from .geometry.chart import MetricChart, grid_points
from .geometry.expr import (Expr, compile_exprs, cos, differentiate, integral, lift, parse_expr,
                            sin, sqrt, substitute)
from .tensors import CovCurvature, Curvature, det_R_tilde, make_cov_curvature, rivertz

X1, X2, X3 = parse_expr("x1"), parse_expr("x2"), parse_expr("x3")
COORDS = ("x1", "x2", "x3")
TAU_PULLBACK = 1e-9


def _e(x, constants=None) -> Expr:
    if isinstance(x, str):
        return parse_expr(x, constants)
    return lift(x)


def gaussian_curvature(E: Expr, F: Expr, G: Expr, u: str, v: str) -> Expr:
    """Gaussian curvature of E du^2 + 2F du dv + G dv^2 (Brioschi formula)."""
    d = differentiate
    Eu, Ev, Fu, Fv, Gu, Gv = d(E, u), d(E, v), d(F, u), d(F, v), d(G, u), d(G, v)
    Evv, Fuv, Guu = d(Ev, v), d(Fu, v), d(Gu, u)
    half = lift(Fraction(1, 2))
    m1 = [[-half * Evv + Fuv - half * Guu, half * Eu, Fu - half * Ev],
          [Fv - half * Gu, E, F],
          [half * Gv, F, G]]
    m2 = [[lift(0), half * Ev, half * Gu],
          [half * Ev, E, F],
          [half * Gu, F, G]]
    delta = E * G - F * F
    return (_det3(m1) - _det3(m2)) / (delta * delta)


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def base_christoffel(E: Expr, F: Expr, G: Expr, u: str, v: str) -> Dict[Tuple[int, int, int], Expr]:
    """Gamma^k_ij of a two-dimensional metric, keyed (k, i, j) with i <= j."""
    d = differentiate
    E1, E2, F1, F2, G1, G2 = d(E, u), d(E, v), d(F, u), d(F, v), d(G, u), d(G, v)
    two_delta = 2 * (E * G - F * F)
    return {
        (1, 1, 1): (G * E1 - 2 * F * F1 + F * E2) / two_delta,
        (2, 1, 1): -(F * E1 - 2 * E * F1 + E * E2) / two_delta,
        (1, 1, 2): -(F * G1 - G * E2) / two_delta,
        (2, 1, 2): (E * G1 - F * E2) / two_delta,
        (1, 2, 2): -(G * G1 - 2 * G * F2 + F * G2) / two_delta,
        (2, 2, 2): (F * G1 - 2 * F * F2 + E * G2) / two_delta,
    }


@dataclass
class EmbeddingMap:
    """phi: chart -> R^N given by closed-form components."""
    components: List[Expr]
    coords: Tuple[str, ...] = COORDS
    note: str = ""
    _jac: object = field(default=None, init=False, repr=False)

    @property
    def target_dim(self) -> int:
        return len(self.components)

    def _jacobian_fn(self):
        if self._jac is None:
            exprs = [differentiate(c, x) for c in self.components for x in self.coords]
            self._jac = compile_exprs(exprs, self.coords)
        return self._jac

    def jacobian(self, p) -> np.ndarray:
        vals = self._jacobian_fn()(*map(float, p))
        return np.array(vals).reshape(self.target_dim, len(self.coords))

    def __call__(self, p) -> np.ndarray:
        return np.array(compile_exprs(self.components, self.coords)(*map(float, p)))

    def pullback(self, p) -> np.ndarray:
        J = self.jacobian(p)
        return J.T @ J

    def pullback_residual(self, chart: MetricChart, lo, hi, n: int = 9) -> float:
        """max over the grid of |dphi^T dphi - g|_inf / |g|_inf."""
        worst = 0.0
        for _idx, p in grid_points(lo, hi, n):
            g = chart.metric(p)
            worst = max(worst, float(np.max(np.abs(self.pullback(p) - g)) / np.max(np.abs(g))))
        return worst

    def verify(self, chart: MetricChart, lo, hi, n: int = 9, tol: float = TAU_PULLBACK) -> float:
        res = self.pullback_residual(chart, lo, hi, n)
        if res > tol:
            raise PullbackMismatch(f"pullback residual {res:.3g} exceeds {tol:g}")
        return res


# Type 1: one-dimensional base

@dataclass
class WarpedType1:
    f: Expr
    E: Expr
    F: Expr
    G: Expr

    @classmethod
    def from_strings(cls, f: str, E="1", F="0", G="1", constants=None) -> "WarpedType1":
        return cls(_e(f, constants), _e(E, constants), _e(F, constants), _e(G, constants))

    @classmethod
    def round_fiber(cls, f, r=1, constants=None) -> "WarpedType1":
        """Fiber is the radius-r sphere r^2 (dx2^2 + sin^2 x2 dx3^2)."""
        r2 = lift(r) * lift(r)
        return cls(_e(f, constants), r2, lift(0), r2 * sin(X2) ** 2)

    def chart(self, **kw) -> MetricChart:
        f2 = self.f * self.f
        return MetricChart({(0, 0): lift(1), (1, 1): f2 * self.E, (1, 2): f2 * self.F,
                            (2, 2): f2 * self.G}, COORDS, **kw)

    def _fn(self):
        if not hasattr(self, "_compiled"):
            f1 = differentiate(self.f, "x1")
            f2 = differentiate(f1, "x1")
            f3 = differentiate(f2, "x1")
            K = gaussian_curvature(self.E, self.F, self.G, "x2", "x3")
            exprs = [self.f, f1, f2, f3, self.E, self.F, self.G, K,
                     differentiate(K, "x2"), differentiate(K, "x3")]
            self._compiled = compile_exprs(exprs, COORDS)
        return self._compiled

    def quantities(self, p) -> dict:
        v = self._fn()(*map(float, p))
        keys = ("f", "f1", "f2", "f3", "E", "F", "G", "K", "K_2", "K_3")
        q = dict(zip(keys, v))
        q["Delta"] = q["E"] * q["G"] - q["F"] ** 2
        return q


def type1_tensors(w: WarpedType1, p) -> Tuple[Curvature, CovCurvature]:
    q = w.quantities(p)
    f, f1, f2, f3, E, F, G, K, D = (q[k] for k in ("f", "f1", "f2", "f3", "E", "F", "G", "K", "Delta"))
    R = Curvature(-f * f2 * E, -f * f2 * F, 0.0, -f * f2 * G, 0.0, f * f * (K - f1 * f1) * D)
    lead = f1 * f2 - f * f3
    s13232 = f * f1 * (f1 * f1 - f * f2 - K) * D
    s = {"S12121": lead * E, "S12131": lead * F, "S13131": lead * G,
         "S13232": s13232, "S12233": -s13232, "S23231": 2 * s13232,
         # fiber S^F_{2323m} = K_m Delta since the fiber metric is parallel
         "S23232": f * f * q["K_2"] * D, "S23233": f * f * q["K_3"] * D}
    return R, make_cov_curvature(s, "strict", scale=max(abs(v) for v in s.values()) or 1.0)


def type1_det_formula(w: WarpedType1, p) -> float:
    q = w.quantities(p)
    return q["f"] ** 4 * q["f2"] ** 2 * (q["K"] - q["f1"] ** 2) * q["Delta"] ** 2


def type1_rivertz_formula(w: WarpedType1, p) -> Tuple[float, float]:
    """(r3, r5) as -f^4 f''^2 S^F_{2323m} Delta for m = 2, 3."""
    q = w.quantities(p)
    k = -q["f"] ** 4 * q["f2"] ** 2 * q["Delta"]
    return k * q["K_2"] * q["Delta"], k * q["K_3"] * q["Delta"]


@dataclass
class Type1Point:
    point: Tuple[float, ...]
    status: Status
    rule: str
    margin: float
    general: Optional[str] = None

    def to_json(self) -> dict:
        return {"record": "point", "point": list(self.point), "status": self.status.value,
                "rule": self.rule, "margin": self.margin, "general_verdict": self.general}


def type1_check(w: WarpedType1, lo, hi, n: int = 5, tol: Tolerances = DEFAULT_TOL,
                zero_tol: float = 1e-10) -> Tuple[List[Type1Point], dict]:
    """Apply the warped Type-1 criterion pointwise; the general verdict is reported alongside.

    Nonflat fiber: embeddable iff the fiber has constant K (S^F = 0) and
    K > f'^2; K = f'^2 is the boundary and left inconclusive.  Flat fiber:
    embeddable iff f'' vanishes on the whole region (f affine).
    """
    pts = list(grid_points(lo, hi, n))
    qs = [w.quantities(p) for _i, p in pts]
    fiber_flat = all(abs(q["K"]) <= zero_tol and abs(q["K_2"]) <= zero_tol and abs(q["K_3"]) <= zero_tol
                     for q in qs)
    affine = all(abs(q["f2"]) <= zero_tol for q in qs)
    chart = w.chart()
    out = []
    for (_i, p), q in zip(pts, qs):
        margin = q["K"] - q["f1"] ** 2
        if fiber_flat:
            status = Status.EMBEDDABLE if affine else Status.NOT_EMBEDDABLE
            rule = "flat fiber, f affine" if affine else "flat fiber, f not affine"
        elif abs(q["K_2"]) > zero_tol or abs(q["K_3"]) > zero_tol:
            if abs(q["f2"]) > zero_tol:
                status, rule = Status.NOT_EMBEDDABLE, "fiber curvature not constant"
            else:
                status, rule = Status.INCONCLUSIVE, "fiber curvature not constant where f''=0"
        elif margin > zero_tol:
            status, rule = Status.EMBEDDABLE, "K > f'^2"
        elif margin < -zero_tol:
            if abs(q["f2"]) > zero_tol:
                status, rule = Status.NOT_EMBEDDABLE, "K < f'^2"
            else:
                status, rule = Status.INCONCLUSIVE, "K < f'^2 where f''=0"
        else:
            status, rule = Status.INCONCLUSIVE, "K = f'^2"
        try:
            R, S, _b, t = chart.point_data(p)
            g = verdict(R, S, tol, 0, scale=float(np.max(np.abs(t["g"]))), s_floor=chart.s_noise_floor(t))
            general = g.label()
        except Exception as exc:  # recorded, not raised
            general = f"error: {type(exc).__name__}"
        out.append(Type1Point(p, status, rule, margin, general))
    summary = {"record": "aggregate", "fiber_flat": fiber_flat, "f_affine": affine,
               "K_fiber": qs[0]["K"] if qs else None,
               "statuses": sorted({r.status.value for r in out})}
    return out, summary


def type1_embedding(w: WarpedType1, r, lo, hi, n: int = 9, x1_base: Optional[float] = None,
                    fiber_map: Optional[Sequence[Expr]] = None) -> EmbeddingMap:
    """(p(x1), f a, f b, f c) with p' = sqrt(1 - r^2 f'^2).

    The fiber is taken to be the radius-r sphere patch; ``fiber_map``
    (a, b, c) defaults to the spherical-coordinate parametrization that
    matches ``WarpedType1.round_fiber``.
    """
    r = lift(r)
    f1 = differentiate(w.f, "x1")
    speed = compile_exprs([(r * f1) ** 2], COORDS)
    for _i, p in grid_points(lo, hi, n):
        v = speed(*p)[0]
        if v >= 1:
            raise SpeedExceeded(f"r^2 f'^2 = {v:.6g} >= 1 at x1 = {p[0]:.6g}")
    if fiber_map is None:
        fiber_map = (r * sin(X2) * cos(X3), r * sin(X2) * sin(X3), r * cos(X2))
    base = lo[0] if x1_base is None else x1_base
    body = substitute(sqrt(1 - (r * f1) ** 2), {"x1": parse_expr("t")})
    p_expr = integral(body, "t", base, X1)
    comps = [p_expr] + [w.f * c for c in fiber_map]
    return EmbeddingMap(comps, COORDS, note="radial profile by quadrature")


def double_helix_embedding(p, q, k=None) -> EmbeddingMap:
    """Immersion of dx1^2 + (p x1 + q)^2 (dx2^2 + dx3^2) into R^4 for p != 0.

    k, l are chosen with p^2 (k^2 + l^2) = 1; l = k by default.
    """
    p, q = Fraction(p), Fraction(q)
    if p == 0:
        raise ValueError("p = 0 is the flat case")
    f = lift(p) * X1 + lift(q)
    if k is None:
        k = 1 / (abs(float(p)) * math.sqrt(2))
    l2 = 1 / float(p) ** 2 - float(k) ** 2
    if l2 <= 0:
        raise ValueError("need p^2 k^2 < 1")
    k, l = lift(k), lift(math.sqrt(l2))
    comps = [k * f * cos(X2 / k), k * f * sin(X2 / k), l * f * cos(X3 / l), l * f * sin(X3 / l)]
    return EmbeddingMap(comps, COORDS, note="immersion; injective only while |x2| < pi k, |x3| < pi l")


# Type 2: two-dimensional base

@dataclass
class WarpedType2:
    E: Expr
    F: Expr
    G: Expr
    f: Expr

    @classmethod
    def from_strings(cls, f: str, E="1", F="0", G="1", constants=None) -> "WarpedType2":
        return cls(_e(E, constants), _e(F, constants), _e(G, constants), _e(f, constants))

    def chart(self, **kw) -> MetricChart:
        return MetricChart({(0, 0): self.E, (0, 1): self.F, (1, 1): self.G, (2, 2): self.f * self.f},
                           COORDS, **kw)

    def hessian(self) -> Dict[Tuple[int, int], Expr]:
        gam = base_christoffel(self.E, self.F, self.G, "x1", "x2")
        fi = {1: differentiate(self.f, "x1"), 2: differentiate(self.f, "x2")}
        H = {}
        for i, j in ((1, 1), (1, 2), (2, 2)):
            fij = differentiate(fi[i], f"x{j}")
            H[(i, j)] = fij - gam[(1, i, j)] * fi[1] - gam[(2, i, j)] * fi[2]
        return H

    def _fn(self):
        if not hasattr(self, "_compiled"):
            gam = base_christoffel(self.E, self.F, self.G, "x1", "x2")
            H = self.hessian()
            K = gaussian_curvature(self.E, self.F, self.G, "x1", "x2")
            names, exprs = [], []

            def put(name, e):
                names.append(name)
                exprs.append(e)
            put("f", self.f)
            put("f1", differentiate(self.f, "x1"))
            put("f2", differentiate(self.f, "x2"))
            for nm, e in (("E", self.E), ("F", self.F), ("G", self.G), ("K", K)):
                put(nm, e)
            put("K1", differentiate(K, "x1"))
            put("K2", differentiate(K, "x2"))
            for (k, i, j), e in gam.items():
                put(f"Gam{k}{i}{j}", e)
            for (i, j), e in H.items():
                put(f"H{i}{j}", e)
                for m in (1, 2):
                    put(f"dH{i}{j}_{m}", differentiate(e, f"x{m}"))
            self._names = names
            self._compiled = compile_exprs(exprs, COORDS)
        return self._compiled

    def quantities(self, p) -> dict:
        """f, f_i, E, F, G, K, K_i, Gamma^k_ij, H_ij and H_ijk = (nabla_k H)_ij at p."""
        v = self._fn()(*map(float, p))
        q = dict(zip(self._names, v))
        q["Delta"] = q["E"] * q["G"] - q["F"] ** 2
        gam = lambda k, i, j: q[f"Gam{k}{min(i, j)}{max(i, j)}"]
        H = lambda i, j: q[f"H{min(i, j)}{max(i, j)}"]
        for i, j in ((1, 1), (1, 2), (2, 2)):
            for k in (1, 2):
                val = q[f"dH{i}{j}_{k}"]
                for a in (1, 2):
                    val -= gam(a, k, i) * H(a, j) + gam(a, k, j) * H(i, a)
                q[f"H{i}{j}{k}"] = val
        return q


def _type2_from_quantities(q) -> Tuple[Curvature, CovCurvature]:
    f, f1, f2, E, F, G, K, D = (q[k] for k in ("f", "f1", "f2", "E", "F", "G", "K", "Delta"))
    H11, H12, H22 = q["H11"], q["H12"], q["H22"]
    R = Curvature(K * D, 0.0, 0.0, -f * H11, -f * H12, -f * H22)
    s = {"S12121": q["K1"] * D, "S12122": q["K2"] * D,
         "S12133": f2 * H11 - f1 * H12 - f * (f1 * F - f2 * E) * K,
         "S12233": f2 * H12 - f1 * H22 - f * (f1 * G - f2 * F) * K,
         "S13131": f1 * H11 - f * q["H111"], "S13132": f2 * H11 - f * q["H112"],
         "S13231": f1 * H12 - f * q["H121"], "S13232": f2 * H12 - f * q["H122"],
         "S23231": f1 * H22 - f * q["H221"], "S23232": f2 * H22 - f * q["H222"]}
    return R, make_cov_curvature(s, "strict", scale=max(abs(v) for v in s.values()) or 1.0)


def type2_tensors(w: WarpedType2, p) -> Tuple[Curvature, CovCurvature]:
    return _type2_from_quantities(w.quantities(p))


def ma_parts(q) -> Tuple[float, float, float]:
    """(H11 H22 - H12^2, f1^2 G - 2 f1 f2 F + f2^2 E, K Delta)."""
    hdet = q["H11"] * q["H22"] - q["H12"] ** 2
    quad = q["f1"] ** 2 * q["G"] - 2 * q["f1"] * q["f2"] * q["F"] + q["f2"] ** 2 * q["E"]
    return hdet, quad, q["K"] * q["Delta"]


def monge_ampere_residual(w: WarpedType2, c, p) -> float:
    q = w.quantities(p)
    if q["K"] == 0:
        raise ZeroBaseCurvature(f"K = 0 at {tuple(p)}")
    hdet, quad, kd = ma_parts(q)
    return hdet + q["K"] * quad - float(c) * kd


def ma_ratio(w: WarpedType2, p) -> float:
    q = w.quantities(p)
    if q["K"] == 0:
        raise ZeroBaseCurvature(f"K = 0 at {tuple(p)}")
    hdet, quad, kd = ma_parts(q)
    return (hdet + q["K"] * quad) / kd


def ratio_derivative_identity(w: WarpedType2, p, h: float = 1e-4) -> Tuple[float, float, float, float]:
    """(d ratio/dx1, -r2/(f^2 K^2 Delta^2), d ratio/dx2, -r3/(f^2 K^2 Delta^2)) at p."""
    q = w.quantities(p)
    R, S = _type2_from_quantities(q)
    r = rivertz(R, S)
    den = q["f"] ** 2 * q["K"] ** 2 * q["Delta"] ** 2
    out = []
    for m in (0, 1):
        a = list(p)
        b = list(p)
        a[m] += h
        b[m] -= h
        a2, b2 = list(p), list(p)
        a2[m] += 2 * h
        b2[m] -= 2 * h
        d = (8 * (ma_ratio(w, a) - ma_ratio(w, b)) - (ma_ratio(w, a2) - ma_ratio(w, b2))) / (12 * h)
        out += [d, -float(r[1 + m]) / den]
    return tuple(out)


def estimate_c(w: WarpedType2, lo, hi, n: int = 5) -> Tuple[float, float]:
    """Grid mean and standard deviation of the Monge-Ampere ratio."""
    vals = [ma_ratio(w, p) for _i, p in grid_points(lo, hi, n)]
    return float(np.mean(vals)), float(np.std(vals))


@dataclass
class Type2Point:
    point: Tuple[float, ...]
    status: Status
    rule: str
    residual: float
    inequality: float
    margin: float
    general: Optional[str] = None

    def to_json(self) -> dict:
        return {"record": "point", "point": list(self.point), "status": self.status.value,
                "rule": self.rule, "ma_residual": self.residual, "inequality": self.inequality,
                "margin": self.margin, "general_verdict": self.general}


C_CONSTANCY = 1e-6


def type2_check(w: WarpedType2, lo, hi, n: int = 5, c=None, ma_tol: float = 1e-8,
                tol: Tolerances = DEFAULT_TOL, zero_tol: float = 1e-12) -> Tuple[List[Type2Point], dict]:
    """Warped Type-2 criterion on a grid: MA equation with a constant c and (H11H22 - H12^2)K > 0.

    ``margin`` is c - (f1^2 G - 2 f1 f2 F + f2^2 E)/Delta; with the MA
    equation holding it has the sign of the inequality.
    """
    pts = list(grid_points(lo, hi, n))
    qs = [w.quantities(p) for _i, p in pts]
    for (_i, p), q in zip(pts, qs):
        if abs(q["K"]) <= zero_tol:
            raise ZeroBaseCurvature(f"K = 0 at {p}")
    ratios = [(ma_parts(q)[0] + q["K"] * ma_parts(q)[1]) / ma_parts(q)[2] for q in qs]
    c_mean, c_std = float(np.mean(ratios)), float(np.std(ratios))
    c_used = c_mean if c is None else float(c)
    constant = c_std <= C_CONSTANCY * max(abs(c_mean), 1.0)
    chart = w.chart()
    out = []
    for (_i, p), q in zip(pts, qs):
        hdet, quad, kd = ma_parts(q)
        res = hdet + q["K"] * quad - c_used * kd
        ineq = hdet * q["K"]
        margin = c_used - quad / q["Delta"]
        ma_ok = abs(res) <= ma_tol * max(1.0, abs(kd)) and (c is not None or constant)
        scale_ineq = max(abs(hdet), abs(q["K"]) * abs(quad), 1e-300) * abs(q["K"])
        if not ma_ok:
            status, rule = Status.NOT_EMBEDDABLE, "Monge-Ampere condition fails"
        elif ineq > zero_tol * scale_ineq and c_used > 0:
            status, rule = Status.EMBEDDABLE, "MA holds and (H11H22-H12^2)K > 0"
        elif ineq < -zero_tol * scale_ineq:
            status, rule = Status.NOT_EMBEDDABLE, "(H11H22-H12^2)K < 0"
        else:
            status, rule = Status.INCONCLUSIVE, "(H11H22-H12^2)K = 0"
        try:
            R, S, _b, t = chart.point_data(p)
            g = verdict(R, S, tol, 0, scale=float(np.max(np.abs(t["g"]))), s_floor=chart.s_noise_floor(t))
            general = g.label()
        except Exception as exc:
            general = f"error: {type(exc).__name__}"
        out.append(Type2Point(p, status, rule, res, ineq, margin, general))
    center = tuple((a + b) / 2 for a, b in zip(lo, hi))
    summary = {"record": "aggregate", "c_estimate": c_mean, "c_stddev": c_std, "c_used": c_used,
               "c_constant": constant,
               "inequality_margin": min(r.margin for r in out),
               "center": list(center),
               "statuses": sorted({r.status.value for r in out})}
    return out, summary


# closed-form Type-2 families

AFFINE_BASE = {"a": Fraction(3, 10), "b": Fraction(1, 2), "c": Fraction(1), "d": Fraction(1, 2)}


def affine_base_solution(a=AFFINE_BASE["a"], b=AFFINE_BASE["b"], c=AFFINE_BASE["c"], d=AFFINE_BASE["d"]) -> WarpedType2:
    """Base E = 1 + 2a x1 + 2b x2, G = 1 with the closed-form solution f."""
    a, b, c, d = map(lift, (a, b, c, d))
    t = parse_expr("t")
    body = sqrt((c * t + d) / (a * a + b * b * (t + 1)))
    f = lift(Fraction(1, 2)) * integral(body, "t", -d / c, 2 * a * X1 + 2 * b * X2)
    return WarpedType2(1 + 2 * a * X1 + 2 * b * X2, lift(0), lift(1), f)


def affine_base_linear_family(phi: str = "1 + 3/10*sin(x1)", a=AFFINE_BASE["a"], b=AFFINE_BASE["b"],
                      c=AFFINE_BASE["c"]) -> WarpedType2:
    """f = phi(x1) + k x2 with k^2 = c: solves the MA equation, violates the inequality."""
    a, b = lift(a), lift(b)
    k = sqrt(lift(c))
    return WarpedType2(1 + 2 * a * X1 + 2 * b * X2, lift(0), lift(1), parse_expr(phi) + k * X2)


def affine_base_psi_family(psi: str = "1 + x1", a=AFFINE_BASE["a"], b=AFFINE_BASE["b"], c=AFFINE_BASE["c"]) -> WarpedType2:
    """f = phi(x1) + psi(x1) x2 with phi' fixed by the MA equation."""
    a, b, c = lift(a), lift(b), lift(c)
    psi_e = parse_expr(psi)
    dpsi = differentiate(psi_e, "x1")
    t = parse_expr("t")
    dphi = ((1 + 2 * a * X1) * dpsi ** 2 - b * b * (psi_e ** 2 - c)) / (2 * b * dpsi)
    phi = lift(1) + integral(substitute(dphi, {"x1": t}), "t", 0, X1)
    return WarpedType2(1 + 2 * a * X1 + 2 * b * X2, lift(0), lift(1), phi + psi_e * X2)


def rotational_base_solution(a=1, A=Fraction(1, 10), base=0) -> WarpedType2:
    """E = 1, G = cos^2(a x1), c = 1, f' = sqrt(1 - 4 A a^2 sin^2(a x1))."""
    a, A = lift(a), lift(A)
    t = parse_expr("t")
    f = integral(sqrt(1 - 4 * A * a * a * sin(a * t) ** 2), "t", base, X1)
    return WarpedType2(lift(1), lift(0), cos(a * X1) ** 2, f)


def hessian_identity(w: WarpedType2, A, p) -> Tuple[float, float]:
    """(H11 H22 - H12^2, A G'^2 K) at p."""
    q = w.quantities(p)
    Gp = compile_exprs([differentiate(w.G, "x1")], COORDS)(*p)[0]
    return q["H11"] * q["H22"] - q["H12"] ** 2, float(A) * Gp ** 2 * q["K"]


def rotational_embedding(E, G, A, lo, hi, n: int = 9, base: Optional[float] = None) -> Tuple[WarpedType2, EmbeddingMap]:
    """c = 1, F = 0: f' = sqrt((E G - A G'^2)/G) and the explicit map into R^4.

    The x2, x3 box is clamped to less than one period of the map.
    """
    E, G, A = _e(E), _e(G), lift(A)
    if not float(A.value if hasattr(A, "value") else A) > 0:
        raise ValueError("A must be positive")
    Gp = differentiate(G, "x1")
    radicand = (E * G - A * Gp * Gp) / G
    rad = compile_exprs([radicand], COORDS)
    for _i, p in grid_points(lo, hi, n):
        v = rad(*p)[0]
        if v < 0:
            raise NegativeRadicand(f"f'^2 = {v:.6g} < 0 at x1 = {p[0]:.6g}")
    t = parse_expr("t")
    x1_base = lo[0] if base is None else base
    f = integral(sqrt(substitute(radicand, {"x1": t})), "t", x1_base, X1)
    w = WarpedType2(E, lift(0), G, f)
    sA = sqrt(A)
    comps = [2 * sqrt(A * G) * cos(X2 / (2 * sA)), 2 * sqrt(A * G) * sin(X2 / (2 * sA)),
             f * cos(X3), f * sin(X3)]
    return w, EmbeddingMap(comps, COORDS, note="x2, x3 restricted to less than one period")


def injective_box(lo, hi, periods: Sequence[Optional[float]]):
    """Clamp each axis with a known period to a span just under that period."""
    lo, hi = list(lo), list(hi)
    for k, per in enumerate(periods):
        if per is not None and hi[k] - lo[k] >= per:
            mid = (lo[k] + hi[k]) / 2
            lo[k], hi[k] = mid - 0.49 * per, mid + 0.49 * per
    return lo, hi
