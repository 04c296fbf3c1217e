"""Pointwise embeddability decision for curvature data (R, S).

Pipeline: optional constant-curvature shift, sign of det(R~), the six
Rivertz polynomials, then reconstruction of alpha and beta0 = nabla alpha
with a Codazzi check that has to agree with the Rivertz test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import GaussResidual, InternalInconsistency, NonPositiveDet, SingularAlpha
from .tensors import (FORM3_KEYS, PAIRS, AmbientCurvature, CovCurvature, Curvature, Form3, SymForm2,
                      SymForm3, as_scalar, det_A, det_R_tilde, gauss_R, is_float, rivertz,
                      shift_constant_curvature)


@dataclass(frozen=True)
class Tolerances:
    tau_nd: float = 1e-8
    tau_rivertz: float = 1e-7
    tau_gauss: float = 1e-9
    tau_codazzi: float = 1e-6
    tau_flat: float = 1e-10
    # how far beyond the conditioning-scaled band the Rivertz and Codazzi
    # tests may disagree before it counts as an internal error
    consistency: float = 1e3

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive, got {v}")

    def replace(self, **kw) -> "Tolerances":
        d = dict(self.__dict__)
        d.update({k: v for k, v in kw.items() if v is not None})
        return Tolerances(**d)


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class H0Coeffs:
    h1212: object
    h1213: object
    h1223: object
    h1313: object
    h1323: object
    h2323: object

    def components(self):
        return (self.h1212, self.h1213, self.h1223, self.h1313, self.h1323, self.h2323)

    def as_curvature(self) -> Curvature:
        """View with curvature-like index symmetries, h_ijkl = -h_jikl = h_klij."""
        return Curvature(*self.components())


def h0_coeffs(alpha0: SymForm2, S: CovCurvature) -> H0Coeffs:
    a11, a12, a13, a22, a23, a33 = alpha0.components()
    s = S.named()
    S12121, S12122, S12123 = s["S12121"], s["S12122"], s["S12123"]
    S12131, S12132, S12133 = s["S12131"], s["S12132"], s["S12133"]
    S12231, S12232, S12233 = s["S12231"], s["S12232"], s["S12233"]
    S13131, S13132, S13133 = s["S13131"], s["S13132"], s["S13133"]
    S13231, S13232, S13233 = s["S13231"], s["S13232"], s["S13233"]
    S23231, S23232, S23233 = s["S23231"], s["S23232"], s["S23233"]
    half = Fraction(1, 2)
    if any(is_float(v) for v in (a11, S12121)):
        half = 0.5

    h1212 = (a11 * S12232 - a12 * S12132 - a12 * S12231 + a13 * S12122
             + a22 * S12131 - a23 * S12121)
    h1213 = half * (a11 * S13232 + a11 * S12233 - a12 * S12133 - a12 * S13132 - a12 * S13231
                    + a13 * S12123 + a13 * S12132 - a13 * S12231 + a22 * S13131 - a33 * S12121)
    h1223 = half * (a11 * S23232 + a12 * S12233 - a12 * S13232 - a12 * S23231 + a22 * S13231
                    - a22 * S12133 + a23 * S12123 + a23 * S12132 - a23 * S12231 - a33 * S12122)
    h1313 = (a11 * S13233 - a12 * S13133 - a13 * S13231 + a13 * S12133
             + a23 * S13131 - a33 * S12131)
    h1323 = half * (a11 * S23233 + a13 * S12233 - a13 * S13232 - a13 * S23231 - a22 * S13133
                    + a23 * S12133 + a23 * S13132 + a23 * S13231 - a33 * S12231 - a33 * S12132)
    h2323 = (a12 * S23233 - a13 * S23232 - a22 * S13233 + a23 * S13232
             + a23 * S12233 - a33 * S12232)
    return H0Coeffs(h1212, h1213, h1223, h1313, h1323, h2323)


def h0_dependence(alpha0: SymForm2, h: H0Coeffs):
    a = alpha0
    return (a.a33 * h.h1212 - 2 * a.a23 * h.h1213 + 2 * a.a13 * h.h1223
            + a.a22 * h.h1313 - 2 * a.a12 * h.h1323 + a.a11 * h.h2323)


def _frobenius(R: Curvature) -> float:
    # full 81-entry tensor norm: each independent slot appears 4 (diagonal pair) or 8 times
    diag = (R.r1212, R.r1313, R.r2323)
    off = (R.r1213, R.r1223, R.r1323)
    return math.sqrt(4 * sum(float(v) ** 2 for v in diag) + 8 * sum(float(v) ** 2 for v in off))


def _exact_sqrt(q: Fraction) -> Optional[Fraction]:
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


_CYC = {1: (2, 3), 2: (3, 1), 3: (1, 2)}


def gauss_residual(R: Curvature, alpha: SymForm2):
    G = gauss_R(alpha)
    return max(abs(a - b) for a, b in zip(R.components(), G.components()))


def invert_gauss(R: Curvature, tol: Tolerances = DEFAULT_TOL) -> SymForm2:
    """alpha with gauss_R(alpha) == R and det(alpha) > 0.

    alpha_ip = det[[R_ijpq, R_ijpr], [R_ikpq, R_ikpr]] / sqrt(det R~) for
    cyclic (i,j,k), (p,q,r).  Exact inputs stay exact when det R~ is a
    rational square and fall back to floats otherwise.
    """
    d = det_R_tilde(R)
    exact = not any(is_float(v) for v in R.components())
    if exact:
        if d <= 0:
            raise NonPositiveDet(f"det R~ = {d} is not positive")
        root = _exact_sqrt(Fraction(d))
        if root is None:
            R = R.map(float)
            d = float(d)
            root = math.sqrt(d)
            exact = False
    else:
        if not d > tol.tau_nd * _frobenius(R) ** 3:
            raise NonPositiveDet(f"det R~ = {d} below the nondegeneracy band")
        root = math.sqrt(d)
    minors = {}
    for i in (1, 2, 3):
        j, k = _CYC[i]
        for p in (1, 2, 3):
            q, r = _CYC[p]
            minors[(i, p)] = R(i, j, p, q) * R(i, k, p, r) - R(i, j, p, r) * R(i, k, p, q)
    alpha = SymForm2(*(minors[(i, p)] / root for i, p in ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))))
    if det_A(alpha) < 0:
        alpha = -alpha
    res = gauss_residual(R, alpha)
    if exact:
        if res != 0:
            raise GaussResidual(res)
    elif res > tol.tau_gauss * max(R.norm(), 1e-300):
        raise GaussResidual(float(res))
    return alpha


def pair_matrix_rank(R: Curvature, tol: float = 1e-12) -> int:
    """Rank of the 3x3 matrix of R over the pairs (12, 13, 23)."""
    A, B, C, D, E, F = R.components()
    M = [[A, B, C], [B, D, E], [C, E, F]]
    if not any(is_float(v) for v in R.components()):
        M = [[Fraction(v) for v in row] for row in M]
        rank = 0
        rows = [r[:] for r in M]
        for col in range(3):
            piv = next((r for r in range(rank, 3) if rows[r][col] != 0), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            for r in range(3):
                if r != rank and rows[r][col] != 0:
                    f = rows[r][col] / rows[rank][col]
                    rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
            rank += 1
        return rank
    sv = np.linalg.svd(np.array(M, dtype=float), compute_uv=False)
    return int(np.sum(sv > tol * max(sv[0], 1e-300)))


def gauss_solvable(R: Curvature, tol: float = 1e-12) -> bool:
    """Whether some symmetric alpha satisfies the Gauss equation for R.

    The pair matrix of gauss_R(alpha) is the second compound of alpha, whose
    rank is 3, 1 or 0 for rank alpha 3, 2, <= 1; every bivector in three
    dimensions is decomposable, so each of these ranks is attained, rank 3
    exactly when det R~ > 0.
    """
    rank = pair_matrix_rank(R, tol)
    if rank == 3:
        return det_R_tilde(R) > 0
    return rank in (0, 1)


_ALPHA_VARS = ("al11", "al12", "al13", "al22", "al23", "al33")
_T_VARS = ("T1212", "T1213", "T1223", "T1313", "T1323", "T2323")
_GAMMA_KEYS = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))


@lru_cache(maxsize=1)
def _compiled_gamma():
    """Compiled restored numerators N_ij(alpha, T) of the Gauss-linear solve."""
    from .symbolic.identities import gamma_numerators
    nums = gamma_numerators("T")
    names = _ALPHA_VARS + _T_VARS
    return tuple((nums[k][0] - nums[k][1]).compile(names) for k in _GAMMA_KEYS)


def linear_gauss_map(gamma: SymForm2, alpha: SymForm2) -> Curvature:
    vals = []
    for p in range(3):
        for q in range(p, 3):
            i, j = PAIRS[p]
            k, l = PAIRS[q]
            vals.append(gamma(i, k) * alpha(j, l) + alpha(i, k) * gamma(j, l)
                        - gamma(i, l) * alpha(j, k) - alpha(i, l) * gamma(j, k))
    return Curvature(*vals)


def solve_linear_gauss_system(alpha0: SymForm2, T: Curvature, tol: Tolerances = DEFAULT_TOL) -> SymForm2:
    """Unique gamma with linear_gauss_map(gamma, alpha0) == T, by the closed form N / 2|A0|."""
    A = det_A(alpha0)
    floats = is_float(A) or any(is_float(v) for v in T.components())
    if A == 0 or (floats and abs(A) <= tol.tau_nd * max(alpha0.norm(), 1e-300) ** 3):
        raise SingularAlpha(f"det(alpha0) = {A}")
    args = alpha0.components() + T.components()
    two_a = 2 * A
    gamma = SymForm2(*(f(*args) / two_a for f in _compiled_gamma()))
    res = max(abs(a - b) for a, b in zip(linear_gauss_map(gamma, alpha0).components(), T.components()))
    if floats:
        if res > tol.tau_gauss * max(T.norm(), alpha0.norm() * gamma.norm(), 1e-300):
            raise InternalInconsistency(f"linear Gauss solve residual {res}")
    elif res != 0:
        raise InternalInconsistency(f"linear Gauss solve residual {res}")
    return gamma


def _system_rows(alpha0: SymForm2):
    a = alpha0
    z = a.a11 * 0
    return [[a.a22, -2 * a.a12, z, a.a11, z, z],
            [a.a23, -a.a13, -a.a12, z, a.a11, z],
            [z, a.a23, -a.a22, -a.a13, a.a12, z],
            [a.a33, z, -2 * a.a13, z, z, a.a11],
            [z, a.a33, -a.a23, z, -a.a13, a.a12],
            [z, z, z, a.a33, -2 * a.a23, a.a22]]


def _exact_solve(M, b):
    n = len(M)
    A = [list(row) + [v] for row, v in zip(M, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise SingularAlpha("singular Gauss-linear system")
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / pv
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] / A[i][i] for i in range(n)]


def solve_linear_gauss_system_direct(alpha0: SymForm2, T: Curvature) -> SymForm2:
    """Same solve by elimination on the 6x6 system (independent route)."""
    M = _system_rows(alpha0)
    b = list(T.components())
    if any(is_float(v) for v in alpha0.components() + T.components()):
        x = np.linalg.solve(np.array(M, dtype=float), np.array(b, dtype=float))
        return SymForm2(*(float(v) for v in x))
    return SymForm2(*_exact_solve([[as_scalar(v) for v in row] for row in M], [as_scalar(v) for v in b]))


def beta0(alpha0: SymForm2, S: CovCurvature, tol: Tolerances = DEFAULT_TOL) -> Form3:
    """beta0_ijm from the closed form, one Gauss-linear solve per m.

    The elimination route is computed too and must agree.  The last slot
    is left unsymmetrized since its symmetry is the Codazzi property.
    """
    out = {}
    floats = any(is_float(v) for v in alpha0.components() + S.s)
    for m in (1, 2, 3):
        T = S.slice_m(m)
        g = solve_linear_gauss_system(alpha0, T, tol)
        g2 = solve_linear_gauss_system_direct(alpha0, T)
        gap = max(abs(x - y) for x, y in zip(g.components(), g2.components()))
        if floats:
            if gap > 1e3 * tol.tau_gauss * max(g.norm(), 1e-300):
                raise InternalInconsistency(f"closed-form and elimination beta0 differ by {gap}")
        elif gap != 0:
            raise InternalInconsistency(f"closed-form and elimination beta0 differ by {gap}")
        for (i, j) in _GAMMA_KEYS:
            out[(i, j, m)] = g(i, j)
    return Form3(out)


def codazzi_residual(beta: Form3):
    """max |b_ipq - b_iqp|; zero iff the last two slots are symmetric."""
    return max(abs(beta(i, p, q) - beta(i, q, p)) for i in (1, 2, 3) for p in (1, 2, 3) for q in (1, 2, 3))


def codazzi_from_h0(alpha0: SymForm2, h: H0Coeffs, A0):
    """Predicted b_ipq - b_iqp = -(a_i1 h_23pq - a_i2 h_13pq + a_i3 h_12pq) / |A0|."""
    H = h.as_curvature()
    out = {}
    for i in (1, 2, 3):
        for p in (1, 2, 3):
            for q in (1, 2, 3):
                out[(i, p, q)] = -(alpha0(i, 1) * H(2, 3, p, q) - alpha0(i, 2) * H(1, 3, p, q)
                                   + alpha0(i, 3) * H(1, 2, p, q)) / A0
    return out


class Status(str, Enum):
    EMBEDDABLE = "Embeddable"
    NOT_EMBEDDABLE = "NotEmbeddable"
    INCONCLUSIVE = "Inconclusive"


class Reason(str, Enum):
    NEGATIVE_DET_R = "NegativeDetR"
    RIVERTZ_VIOLATION = "RivertzViolation"
    CODAZZI_VIOLATION = "CodazziViolation"
    SINGULAR_DET_R = "SingularDetR"
    FLAT = "Flat"


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: Optional[Reason] = None
    diagnostics: dict = field(default_factory=dict)
    alpha: Optional[SymForm2] = None
    beta: Optional[SymForm3] = None

    @property
    def flat(self) -> bool:
        return self.reason == Reason.FLAT

    def label(self) -> str:
        if self.reason is None:
            return self.status.value
        if self.reason == Reason.FLAT:
            return "FlatChart"
        return f"{self.status.value}({self.reason.value})"

    def to_json(self) -> dict:
        d = {"status": self.status.value, "reason": self.reason.value if self.reason else None,
             "label": self.label(),
             "diagnostics": {k: _jsonable(v) for k, v in self.diagnostics.items()}}
        if self.alpha is not None:
            d["alpha"] = [_jsonable(v) for v in self.alpha.components()]
        if self.beta is not None:
            d["beta"] = [_jsonable(v) for v in self.beta.components()]
        return d


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v.numerator)
    if isinstance(v, float):
        return v + 0.0
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    return float(v) + 0.0


def verdict(R: Curvature, S: CovCurvature, tol: Tolerances = DEFAULT_TOL,
            c: AmbientCurvature | object = 0, scale: float = 1.0, s_floor: float = 0.0,
            metric: Optional[SymForm2] = None) -> Verdict:
    """Embeddability of (R, S) at one point into the space form of curvature c.

    ``scale`` is the metric scale used by the flatness band.  Float S with
    norm at or below ``s_floor`` (the noise level of the derivative
    pipeline) is treated as exactly zero.  ``metric`` is g at the point
    when R is given in a coordinate basis; without it the basis is orthonormal.
    """
    Rb = shift_constant_curvature(R, c if isinstance(c, AmbientCurvature) else AmbientCurvature(as_scalar(c)),
                                  metric)
    exact = not any(is_float(v) for v in Rb.components() + S.s)
    nR, nS = Rb.norm(), S.norm()
    d = det_R_tilde(Rb)
    diag = {"det_R_tilde": d, "R_norm": nR, "S_norm": nS}
    if not exact and s_floor > 0 and nS <= s_floor:
        S = CovCurvature((0.0,) * len(S.s))
        nS = 0.0
        diag["S_below_noise_floor"] = True

    flat = (nR == 0 and nS == 0) if exact else (nR <= tol.tau_flat * scale ** 2 and nS <= tol.tau_flat * scale ** 2)
    if flat:
        z = Rb.r1212 * 0 + 0
        return Verdict(Status.EMBEDDABLE, Reason.FLAT, diag,
                       alpha=SymForm2(z, z, z, z, z, z), beta=SymForm3({k: z for k in _SYM3}))

    band = 0 if exact else tol.tau_nd * nR ** 3
    if d < -band:
        return Verdict(Status.NOT_EMBEDDABLE, Reason.NEGATIVE_DET_R, diag)
    if abs(d) <= band:
        return Verdict(Status.INCONCLUSIVE, Reason.SINGULAR_DET_R, diag)

    r = rivertz(Rb, S)
    rn = max(abs(v) for v in r)
    if exact:
        riv_rel = rn
        riv_ok = rn == 0
    else:
        riv_rel = float(rn) / (nR * nR * nS) if nS > 0 else 0.0
        riv_ok = riv_rel <= tol.tau_rivertz
    diag["rivertz_norm"] = riv_rel

    alpha = invert_gauss(Rb, tol)
    exact = exact and not is_float(alpha.a11)
    diag["gauss_residual"] = gauss_residual(Rb, alpha)
    A0 = det_A(alpha)
    b0 = beta0(alpha, S if exact else _float_cov(S), tol)
    cres = codazzi_residual(b0)
    bn = b0.norm()
    cod_rel = cres if exact else (float(cres) / bn if bn > 0 else 0.0)
    cod_ok = cres == 0 if exact else cod_rel <= tol.tau_codazzi
    diag["codazzi_residual"] = cod_rel

    # the Codazzi defect is predicted exactly by h0; checks the reconstruction
    h = h0_coeffs(alpha, S if exact else _float_cov(S))
    pred = codazzi_from_h0(alpha, h, A0)
    gap = max(abs((b0(i, p, q) - b0(i, q, p)) - v) for (i, p, q), v in pred.items())
    diag["h0_codazzi_gap"] = gap
    kappa = float(alpha.norm()) ** 3 / abs(float(A0))
    diag["conditioning"] = kappa

    if exact:
        if gap != 0 or riv_ok != cod_ok:
            raise InternalInconsistency(
                f"Rivertz test {'passes' if riv_ok else 'fails'} but Codazzi residual is {cres}")
    else:
        allowance = tol.consistency * max(1.0, kappa) ** 2
        if gap > allowance * tol.tau_codazzi * max(bn, 1e-300):
            raise InternalInconsistency(f"h0 prediction of the Codazzi defect is off by {gap}")
        if riv_ok and not cod_ok and cod_rel > tol.tau_codazzi * allowance:
            raise InternalInconsistency(
                f"Rivertz test passes (rel {riv_rel:.3g}) but Codazzi residual is {cod_rel:.3g}")
        if not riv_ok and cod_ok and riv_rel > tol.tau_rivertz * allowance and cod_rel == 0.0:
            raise InternalInconsistency(
                f"Rivertz test fails (rel {riv_rel:.3g}) but Codazzi residual vanishes")

    if not riv_ok:
        return Verdict(Status.NOT_EMBEDDABLE, Reason.RIVERTZ_VIOLATION, diag, alpha=alpha)
    if not cod_ok:
        return Verdict(Status.NOT_EMBEDDABLE, Reason.CODAZZI_VIOLATION, diag, alpha=alpha)
    return Verdict(Status.EMBEDDABLE, None, diag, alpha=alpha, beta=b0.symmetrized())


def _float_cov(S: CovCurvature) -> CovCurvature:
    return CovCurvature(tuple(float(v) for v in S.s))


_SYM3 = tuple((i, j, k) for i in (1, 2, 3) for j in range(i, 4) for k in range(j, 4))
