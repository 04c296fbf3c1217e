"""Left-invariant metrics on three-dimensional Lie groups.

In an orthonormal left-invariant frame the connection coefficients,
R and S are constants, so everything here is exact for rational
structure constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Tuple

import numpy as np

from .embed import DEFAULT_TOL, Tolerances, Verdict, gauss_solvable, verdict
from .errors import InternalInconsistency, NegativeRadicand
from .geometry.chart import MetricChart, grid_points
from .geometry.expr import Expr, cos, integral, lift, parse_expr, sin, sqrt
from .tensors import (PAIRS, S_KEYS, S_NAMES, CovCurvature, Curvature, as_scalar, det_R_tilde, is_float,
                      make_cov_curvature, rivertz, transform_cov_curvature, transform_curvature)
from .warped import EmbeddingMap

Brackets = Dict[Tuple[int, int], Tuple]  # (i, j) with i < j -> coefficients of [e_i, e_j]


def _z(x):
    return x * 0


def connection(brackets: Brackets):
    """nabla_{e_i} e_j = sum_k G[i][j][k] e_k from the Koszul formula (orthonormal frame)."""
    def br(i, j, k):
        if i == j:
            return 0
        if i < j:
            return brackets.get((i, j), (0, 0, 0))[k]
        return -brackets.get((j, i), (0, 0, 0))[k]
    G = [[[None] * 3 for _ in range(3)] for _ in range(3)]
    for i, j, k in product(range(3), repeat=3):
        G[i][j][k] = as_scalar(br(i, j, k) - br(j, k, i) + br(k, i, j)) / 2
    return G


def frame_tensors(brackets: Brackets) -> Tuple[Curvature, CovCurvature]:
    """R_ijkl = -g(R(e_i, e_j) e_k, e_l) and S = nabla R for a left-invariant frame."""
    G = connection(brackets)
    zero = _z(G[0][0][0])

    def br(i, j, k):
        if i == j:
            return zero
        if i < j:
            return as_scalar(brackets.get((i, j), (0, 0, 0))[k])
        return -as_scalar(brackets.get((j, i), (0, 0, 0))[k])

    def curv(i, j, k, l):
        # R(e_i, e_j) e_k = nabla_i nabla_j e_k - nabla_j nabla_i e_k - nabla_[e_i, e_j] e_k
        tot = zero
        for a in range(3):
            tot += G[j][k][a] * G[i][a][l] - G[i][k][a] * G[j][a][l] - br(i, j, a) * G[a][k][l]
        return -tot

    Rfull = {}
    for i, j, k, l in product(range(3), repeat=4):
        Rfull[(i, j, k, l)] = curv(i, j, k, l)
    R = Curvature.from_values([Rfull[(PAIRS[p][0] - 1, PAIRS[p][1] - 1, PAIRS[q][0] - 1, PAIRS[q][1] - 1)]
                               for p in range(3) for q in range(p, 3)])
    raw = []
    for p, q, m in S_KEYS:
        i, j = PAIRS[p][0] - 1, PAIRS[p][1] - 1
        k, l = PAIRS[q][0] - 1, PAIRS[q][1] - 1
        m -= 1
        tot = zero
        for a in range(3):
            tot += (G[m][i][a] * Rfull[(a, j, k, l)] + G[m][j][a] * Rfull[(i, a, k, l)]
                    + G[m][k][a] * Rfull[(i, j, a, l)] + G[m][l][a] * Rfull[(i, j, k, a)])
        raw.append(-tot)
    return R, make_cov_curvature(raw, "strict")


@dataclass(frozen=True)
class SolvableParams:
    """[e1,e2] = a e2 + 2b e3, [e1,e3] = 2c e2 + d e3, [e2,e3] = 0."""
    a: object
    b: object
    c: object
    d: object

    def __post_init__(self):
        for k in "abcd":
            object.__setattr__(self, k, as_scalar(getattr(self, k)))

    def brackets(self) -> Brackets:
        z = _z(self.a)
        return {(0, 1): (z, self.a, 2 * self.b), (0, 2): (z, 2 * self.c, self.d), (1, 2): (z, z, z)}


def solvable_tensors(p: SolvableParams) -> Tuple[Curvature, CovCurvature]:
    a, b, c, d = p.a, p.b, p.c, p.d
    R1212 = -a * a - (b + c) * (3 * b - c)
    R1213 = -2 * (a * c + b * d)
    R1313 = (b + c) * (b - 3 * c) - d * d
    R2323 = (b + c) ** 2 - a * d
    z = _z(a)
    R = Curvature(R1212, R1213, z, R1313, z, R2323)
    s = {
        "S12121": -2 * (b - c) * R1213,
        "S12131": (b - c) * (R1212 - R1313),
        "S12232": (b + c) * R1212 - a * R1213 - (b + c) * R2323,
        "S12233": d * R1212 - (b + c) * R1213 - d * R2323,
        "S13131": 2 * (b - c) * R1213,
        "S13232": (b + c) * R1213 - a * R1313 + a * R2323,
        "S13233": d * R1213 - (b + c) * R1313 + (b + c) * R2323,
    }
    raw = {k: z for k in S_NAMES}
    raw.update(s)
    return R, make_cov_curvature(raw, "strict")


def branch(p: SolvableParams, band: float = 1e-12) -> Optional[str]:
    """Which of the two algebraic conditions for vanishing Rivertz polynomials holds."""
    a, b, c, d = p.a, p.b, p.c, p.d
    if any(is_float(v) for v in (a, b, c, d)):
        eq = lambda x, y: abs(float(x) - float(y)) <= band
    else:
        eq = lambda x, y: x == y
    if eq(a * d, 4 * b * b) and eq(b, c):
        return "ad4b2_bc"
    if eq(a, d) and eq(b + c, 0):
        return "ad_bc0"
    return None


def auxiliary_identity(p: SolvableParams) -> Tuple[object, object]:
    """Both sides of R1212 R1313 - R1213^2 + (b-c)^2 (a+d)^2 = {ad - (b+c)^2}{ad + (3b-c)(b-3c)}."""
    a, b, c, d = p.a, p.b, p.c, p.d
    R, _ = solvable_tensors(p)
    lhs = R.r1212 * R.r1313 - R.r1213 ** 2 + (b - c) ** 2 * (a + d) ** 2
    rhs = (a * d - (b + c) ** 2) * (a * d + (3 * b - c) * (b - 3 * c))
    return lhs, rhs


@dataclass
class Classification:
    params: SolvableParams
    rivertz_ok: bool
    branch: Optional[str]
    rivertz: tuple
    verdict: Verdict

    def to_json(self) -> dict:
        p = self.params
        return {"record": "classify", "a": _j(p.a), "b": _j(p.b), "c": _j(p.c), "d": _j(p.d),
                "rivertz_ok": self.rivertz_ok, "branch": self.branch or "none",
                "rivertz": [_j(v) for v in self.rivertz], "verdict": self.verdict.to_json()}


def _j(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return v


def classify_solvable(p: SolvableParams, tol: Tolerances = DEFAULT_TOL, band: float = 1e-12) -> Classification:
    R, S = solvable_tensors(p)
    r = rivertz(R, S)
    exact = not any(is_float(v) for v in r)
    riv_zero = all(v == 0 for v in r) if exact else max(abs(float(v)) for v in r) <= band
    br = branch(p, band)
    if riv_zero != (br is not None):
        raise InternalInconsistency(f"branch test {br} disagrees with the Rivertz vector {r} at {p}")
    return Classification(p, riv_zero, br, tuple(r), verdict(R, S, tol))


def lattice(values=(-2, -1, Fraction(-1, 2), 0, Fraction(1, 2), 1, 2)):
    for a, b, c, d in product(values, repeat=4):
        yield SolvableParams(a, b, c, d)


def lattice_check(values=(-2, -1, Fraction(-1, 2), 0, Fraction(1, 2), 1, 2)) -> dict:
    """Branch test against the Rivertz vector, and the auxiliary identity, over a lattice."""
    points = disagreements = identity_failures = ok = 0
    for p in lattice(values):
        points += 1
        R, S = solvable_tensors(p)
        riv_zero = all(v == 0 for v in rivertz(R, S))
        if riv_zero != (branch(p) is not None):
            disagreements += 1
        ok += riv_zero
        lhs, rhs = auxiliary_identity(p)
        identity_failures += lhs != rhs
    return {"record": "lattice", "points": points, "rivertz_zero": ok,
            "disagreements": disagreements, "identity_failures": identity_failures}


# named solvable algebras

def catalog_params(name: str, lam=0, alpha=0) -> SolvableParams:
    lam, alpha = as_scalar(lam), as_scalar(alpha)
    if name == "R3":
        return SolvableParams(0, 0, 0, 0)
    if name == "h3":
        return SolvableParams(0, Fraction(1, 2), 0, 0)
    if name == "r3,1":
        return SolvableParams(1, 0, 0, 1)
    if name == "r3":
        return SolvableParams(1, lam, 0, 1)
    if name == "r3,alpha":
        return SolvableParams(1, lam * (alpha - 1), 0, alpha)
    if name == "r'3,alpha":
        return SolvableParams(alpha, -lam / 2, 1 / (2 * lam), alpha)
    raise KeyError(name)


@dataclass
class CatalogResult:
    name: str
    lam: object
    alpha: object
    classification: Classification
    expected_rivertz_ok: bool
    expected: str
    annotation: str = ""

    @property
    def matches(self) -> bool:
        return self.classification.rivertz_ok == self.expected_rivertz_ok and (
            self.expected == "any" or self.classification.verdict.label() == self.expected)

    def to_json(self) -> dict:
        d = self.classification.to_json()
        d.update({"record": "catalog", "algebra": self.name, "lambda": _j(self.lam), "alpha": _j(self.alpha),
                  "expected_rivertz_ok": self.expected_rivertz_ok, "expected_verdict": self.expected,
                  "annotation": self.annotation, "matches": self.matches})
        return d


def _catalog_grid():
    half = Fraction(1, 2)
    yield "R3", 0, 0
    yield "h3", 0, 0
    yield "r3,1", 0, 0
    for lam in (half, 1, 2, 3):
        yield "r3", lam, 0
    for alpha in (-1, -half, 0, half):
        for lam in (-2, -1, 0, half, 1, 2):
            yield "r3,alpha", lam, alpha
    for alpha in (0, half, 1, 2):
        for lam in (1, Fraction(3, 2), 2, 3):
            yield "r'3,alpha", lam, alpha


def _expectation(name, lam, alpha) -> Tuple[bool, str, str]:
    if name == "R3":
        return True, "FlatChart", "abelian, flat"
    if name in ("h3", "r3,1"):
        return False if name == "h3" else True, "NotEmbeddable(NegativeDetR)", "det R~ < 0"
    if name == "r3,alpha" and lam == 0 and alpha == 0:
        return True, "Inconclusive(SingularDetR)", "embeds as the product RH^2 x R in R^3 x R (det R~ = 0)"
    if name == "r'3,alpha" and lam == 1:
        if alpha == 0:
            return True, "FlatChart", "flat"
        return True, "NotEmbeddable(NegativeDetR)", "det R~ = -alpha^6"
    return False, "any", ""


def catalog_sweep(tol: Tolerances = DEFAULT_TOL) -> List[CatalogResult]:
    out = []
    for name, lam, alpha in _catalog_grid():
        c = classify_solvable(catalog_params(name, lam, alpha), tol)
        ok, expected, note = _expectation(name, as_scalar(lam), as_scalar(alpha))
        if expected == "any" and not c.rivertz_ok:
            note = "Rivertz polynomials do not vanish"
        out.append(CatalogResult(name, as_scalar(lam), as_scalar(alpha), c, ok, expected, note))
    return out


# simple algebras: [e2,e3] = mu1 e1, [e3,e1] = mu2 e2, [e1,e2] = mu3 e3

@dataclass(frozen=True)
class SimpleParams:
    lambda2: object
    lambda3: object
    mu1: object = 1

    def __post_init__(self):
        for k in ("lambda2", "lambda3", "mu1"):
            object.__setattr__(self, k, as_scalar(getattr(self, k)))

    def brackets(self) -> Brackets:
        z = _z(self.lambda2)
        # [e3, e1] = lambda2 e2  =>  [e1, e3] = -lambda2 e2
        return {(0, 1): (z, z, self.lambda3), (0, 2): (z, -self.lambda2, z), (1, 2): (self.mu1, z, z)}


def simple_tensors(p: SimpleParams) -> Tuple[Curvature, CovCurvature]:
    return frame_tensors(p.brackets())


def simple_products(p: SimpleParams):
    R, S = simple_tensors(p)
    s = S.named()
    return (R.r2323 * s["S12131"], -R.r1313 * s["S12232"], R.r1212 * s["S13233"])


def simple_condition(p: SimpleParams) -> bool:
    x, y, z = simple_products(p)
    if any(is_float(v) for v in (x, y, z)):
        scale = max(abs(x), abs(y), abs(z), 1e-300)
        return abs(x - y) <= 1e-12 * scale and abs(y - z) <= 1e-12 * scale
    return x == y == z


def simple_report(p: SimpleParams, tol: Tolerances = DEFAULT_TOL) -> dict:
    R, S = simple_tensors(p)
    v = verdict(R, S, tol)
    return {"record": "simple", "lambda2": _j(p.lambda2), "lambda3": _j(p.lambda3), "mu1": _j(p.mu1),
            "R": [_j(x) for x in R.components()], "det_R_tilde": _j(det_R_tilde(R)),
            "condition": simple_condition(p), "gauss_solvable": gauss_solvable(R),
            "rivertz": [_j(x) for x in rivertz(R, S)], "verdict": v.to_json()}


# the group G_alpha and its map into R^5

def g_alpha_chart(alpha, **kw) -> MetricChart:
    """(1/x^2){dx^2 + (x dy - y dx)^2 + (x dz - alpha z dx)^2} in (x, y, z) = (x1, x2, x3)."""
    al = lift(as_scalar(alpha))
    x, y, z = parse_expr("x1"), parse_expr("x2"), parse_expr("x3")
    g = {(0, 0): (1 + y * y + al * al * z * z) / (x * x), (0, 1): -y / x, (0, 2): -al * z / x,
         (1, 1): lift(1), (2, 2): lift(1), (1, 2): lift(0)}
    return MetricChart(g, ("x1", "x2", "x3"), **kw)


def g_alpha_frame(alpha, p) -> List[List[float]]:
    """Columns are e1 = -x d/dx - y d/dy - alpha z d/dz, e2 = d/dy, e3 = d/dz at p."""
    x, y, z = map(float, p)
    al = float(alpha)
    return [[-x, 0.0, 0.0], [-y, 1.0, 0.0], [-al * z, 0.0, 1.0]]


def g_alpha_cross_check(alpha, p, **kw) -> Tuple[float, float]:
    """Relative gaps between the chart tensors moved to the frame and the closed forms."""
    chart = g_alpha_chart(alpha, **kw)
    R, S, _b, _t = chart.point_data(p, mode="project")
    P = g_alpha_frame(alpha, p)
    Rf = transform_curvature(R, P)
    Sf = transform_cov_curvature(S, P, "project")
    R0, S0 = solvable_tensors(SolvableParams(1, 0, 0, alpha))
    R0 = R0.map(float)
    S0 = [float(v) for v in S0.s]
    dR = max(abs(u - v) for u, v in zip(Rf.components(), R0.components())) / max(R0.norm(), 1.0)
    dS = max(abs(u - v) for u, v in zip(Sf.s, S0)) / max(max(abs(v) for v in S0), 1.0)
    return dR, dS


def g_alpha_radicand(alpha, k, x: float) -> float:
    al = float(alpha)
    return 1 - k * k * x * x - al * al * x ** (2 * al)


def find_k(alpha, xs=None) -> Tuple[float, float]:
    """Largest k (by bisection) for which 1 - k^2 x^2 - alpha^2 x^(2 alpha) is positive somewhere.

    Returns (k, x_best) with k half of that bound and x_best maximizing the radicand.
    """
    if xs is None:
        xs = np.logspace(-4, 4, 2001)
    best = lambda k: max((g_alpha_radicand(alpha, k, x), x) for x in xs)
    if best(0.0)[0] <= 0:
        raise NegativeRadicand(f"no x > 0 with a positive radicand for alpha = {alpha}")
    lo, hi = 0.0, 1.0
    while best(hi)[0] > 0:
        hi *= 2
    for _ in range(80):
        mid = (lo + hi) / 2
        if best(mid)[0] > 0:
            lo = mid
        else:
            hi = mid
    k = lo / 2
    return k, best(k)[1]


def g_alpha_interval(alpha, k, x_center: float, width: float = 0.2) -> Tuple[float, float]:
    """An interval around x_center, shrunk until the radicand is positive on it."""
    lo, hi = x_center * (1 - width), x_center * (1 + width)
    for _ in range(60):
        xs = np.linspace(lo, hi, 33)
        if all(g_alpha_radicand(alpha, k, x) > 0 for x in xs):
            return lo, hi
        lo, hi = x_center - (x_center - lo) / 2, x_center + (hi - x_center) / 2
    raise NegativeRadicand(f"radicand not positive near x = {x_center}")


def g_alpha_embedding(alpha, k=None, region=None, n: int = 9) -> Tuple[EmbeddingMap, dict]:
    """phi = (f(x), k x cos(y/(kx)), k x sin(y/(kx)), x^a cos(z/x^a), x^a sin(z/x^a)).

    ``region`` is ((x_lo, y_lo, z_lo), (x_hi, y_hi, z_hi)); when omitted the
    x interval is chosen around the maximum of the radicand.
    """
    al = as_scalar(alpha)
    xc = None
    if k is None and al >= 0:
        k = 0.5
        if region is None and all(g_alpha_radicand(al, k, x) > 0 for x in np.linspace(0.3, 0.8, 33)):
            region = ((0.3, -0.2, -0.2), (0.8, 0.2, 0.2))
    elif k is None:
        k, xc = find_k(al)
    k = float(k)
    if region is None:
        if xc is None:
            xs = np.logspace(-4, 4, 2001)
            xc = max(xs, key=lambda x: g_alpha_radicand(al, k, x))
        x_lo, x_hi = g_alpha_interval(al, k, xc)
        region = ((x_lo, -0.2, -0.2), (x_hi, 0.2, 0.2))
    lo, hi = region
    for _i, p in grid_points(lo, hi, n):
        if g_alpha_radicand(al, k, p[0]) <= 0:
            raise NegativeRadicand(f"1 - k^2 x^2 - alpha^2 x^(2 alpha) <= 0 at x = {p[0]:.6g}")
    kk, A = lift(k), lift(al)
    x, y, z, t = (parse_expr(s) for s in ("x1", "x2", "x3", "t"))
    body = sqrt(1 - kk * kk * t * t - A * A * t ** (2 * A)) / t
    f = integral(body, "t", lo[0], x)
    xa = x ** A
    comps = [f, kk * x * cos(y / (kk * x)), kk * x * sin(y / (kk * x)), xa * cos(z / xa), xa * sin(z / xa)]
    info = {"alpha": _j(al), "k": k, "region": [[float(v) for v in lo], [float(v) for v in hi]]}
    return EmbeddingMap(comps, ("x1", "x2", "x3"), note="immersion into R^5"), info
