"""Value types for alpha, beta, R and S = nabla R in dimension three.

Only independent components are stored; accessors rebuild signs.
Every routine here works over Fraction, float, or Poly scalars since it
only uses ring operations (division appears only in Bianchi projection).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .errors import BianchiViolation

PAIRS: Tuple[Tuple[int, int], ...] = ((1, 2), (1, 3), (2, 3))
PAIR_NAMES = ("12", "13", "23")

R_NAMES = ("R1212", "R1213", "R1223", "R1313", "R1323", "R2323")
_R_FIELDS = ("r1212", "r1213", "r1223", "r1313", "r1323", "r2323")
_R_SLOT = {(0, 0): 0, (0, 1): 1, (0, 2): 2, (1, 1): 3, (1, 2): 4, (2, 2): 5}

# 18 raw slots of S, keyed by (pair p <= pair q, m)
S_KEYS: Tuple[Tuple[int, int, int], ...] = tuple(
    (p, q, m) for p in range(3) for q in range(p, 3) for m in (1, 2, 3))
S_NAMES = tuple(f"S{PAIR_NAMES[p]}{PAIR_NAMES[q]}{m}" for p, q, m in S_KEYS)
_S_SLOT = {k: n for n, k in enumerate(S_KEYS)}

# per pair P the cyclic sum is s[P,12,3] + s[P,23,1] - s[P,13,2]
_BIANCHI_SLOTS = tuple(
    ((tuple(sorted((P, 0))), 3, 1), (tuple(sorted((P, 2))), 1, 1), (tuple(sorted((P, 1))), 2, -1))
    for P in range(3))

TAU_BIANCHI = 1e-8


def is_float(x) -> bool:
    return isinstance(x, float)


def as_scalar(x):
    """Promote ints to Fraction so exact inputs stay exact under division."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    return x


def pair_index(i: int, j: int):
    """Return (pair slot, sign) for the antisymmetric pair (i, j), or None if i == j."""
    if i == j:
        return None
    if i < j:
        return PAIRS.index((i, j)), 1
    return PAIRS.index((j, i)), -1


def _zero_like(x):
    return x * 0


def _abs_max(values) -> float:
    return max((abs(float(v)) for v in values), default=0.0)


@dataclass(frozen=True)
class SymForm2:
    a11: object
    a12: object
    a13: object
    a22: object
    a23: object
    a33: object

    @classmethod
    def from_matrix(cls, m) -> "SymForm2":
        return cls(*(as_scalar(m[i][j]) for i, j in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))))

    @classmethod
    def identity(cls, one=Fraction(1)) -> "SymForm2":
        z = one * 0
        return cls(one, z, z, one, z, one)

    @classmethod
    def diag(cls, d1, d2, d3) -> "SymForm2":
        d1, d2, d3 = as_scalar(d1), as_scalar(d2), as_scalar(d3)
        z = d1 * 0
        return cls(d1, z, z, d2, z, d3)

    def __call__(self, i: int, j: int):
        if i > j:
            i, j = j, i
        return getattr(self, f"a{i}{j}")

    def matrix(self):
        return [[self(i, j) for j in (1, 2, 3)] for i in (1, 2, 3)]

    def components(self):
        return (self.a11, self.a12, self.a13, self.a22, self.a23, self.a33)

    def map(self, f) -> "SymForm2":
        return SymForm2(*(f(c) for c in self.components()))

    def __neg__(self):
        return self.map(lambda c: -c)

    def norm(self) -> float:
        return _abs_max(self.components())


SYM3_KEYS = tuple(itertools.combinations_with_replacement((1, 2, 3), 3))


@dataclass(frozen=True)
class SymForm3:
    """Fully symmetric 3-tensor; ``b`` maps sorted index triples to values."""
    b: Mapping[Tuple[int, int, int], object]

    @classmethod
    def from_values(cls, values: Sequence) -> "SymForm3":
        return cls(dict(zip(SYM3_KEYS, (as_scalar(v) for v in values))))

    @classmethod
    def zero(cls, zero=Fraction(0)) -> "SymForm3":
        return cls({k: zero for k in SYM3_KEYS})

    def __call__(self, i: int, j: int, k: int):
        return self.b[tuple(sorted((i, j, k)))]

    def components(self):
        return tuple(self.b[k] for k in SYM3_KEYS)

    def norm(self) -> float:
        return _abs_max(self.components())

    def __eq__(self, other):
        return isinstance(other, SymForm3) and self.components() == other.components()

    def __hash__(self):
        return hash(self.components())


FORM3_KEYS = tuple((i, j, m) for i in (1, 2, 3) for j in range(i, 4) for m in (1, 2, 3))


@dataclass(frozen=True)
class Form3:
    """3-tensor symmetric in its first two slots only.

    Holds beta0 before the Codazzi symmetry of the last slot is known.
    """
    b: Mapping[Tuple[int, int, int], object]

    def __call__(self, i: int, j: int, m: int):
        if i > j:
            i, j = j, i
        return self.b[(i, j, m)]

    def components(self):
        return tuple(self.b[k] for k in FORM3_KEYS)

    def norm(self) -> float:
        return _abs_max(self.components())

    def symmetrized(self) -> SymForm3:
        out = {}
        for key in SYM3_KEYS:
            perms = set(itertools.permutations(key))
            total = sum((self(*p) for p in perms), _zero_like(self.b[(1, 1, 1)]))
            out[key] = total / len(perms)
        return SymForm3(out)

    @classmethod
    def from_symmetric(cls, beta: SymForm3) -> "Form3":
        return cls({k: beta(*k) for k in FORM3_KEYS})


@dataclass(frozen=True)
class Curvature:
    r1212: object
    r1213: object
    r1223: object
    r1313: object
    r1323: object
    r2323: object

    @classmethod
    def from_values(cls, values: Sequence) -> "Curvature":
        return cls(*(as_scalar(v) for v in values))

    @classmethod
    def from_mapping(cls, m: Mapping[str, object], zero=Fraction(0)) -> "Curvature":
        return cls(*(as_scalar(m.get(n, zero)) for n in R_NAMES))

    def components(self):
        return (self.r1212, self.r1213, self.r1223, self.r1313, self.r1323, self.r2323)

    def pair_value(self, p: int, q: int):
        if p > q:
            p, q = q, p
        return self.components()[_R_SLOT[(p, q)]]

    def __call__(self, i: int, j: int, k: int, l: int):
        a = pair_index(i, j)
        b = pair_index(k, l)
        if a is None or b is None:
            return _zero_like(self.r1212)
        v = self.pair_value(a[0], b[0])
        return v if a[1] * b[1] > 0 else -v

    def pair_matrix(self):
        return [[self.pair_value(p, q) for q in range(3)] for p in range(3)]

    def map(self, f) -> "Curvature":
        return Curvature(*(f(c) for c in self.components()))

    def norm(self) -> float:
        return _abs_max(self.components())


@dataclass(frozen=True)
class CovCurvature:
    """S = nabla R, 18 raw pair-symmetric slots obeying the second Bianchi identity.

    Build through :func:`make_cov_curvature`, which validates or projects.
    """
    s: Tuple

    def raw(self, p: int, q: int, m: int):
        if p > q:
            p, q = q, p
        return self.s[_S_SLOT[(p, q, m)]]

    def __call__(self, i: int, j: int, k: int, l: int, m: int):
        a = pair_index(i, j)
        b = pair_index(k, l)
        if a is None or b is None:
            return _zero_like(self.s[0])
        v = self.raw(a[0], b[0], m)
        return v if a[1] * b[1] > 0 else -v

    def by_name(self, name: str):
        return self.s[S_NAMES.index(name)]

    def named(self) -> dict:
        return dict(zip(S_NAMES, self.s))

    def slice_m(self, m: int) -> Curvature:
        """The curvature-shaped tensor T_ijkl = S_ijklm for fixed m."""
        return Curvature(*(self.raw(p, q, m) for (p, q) in _R_SLOT))

    def norm(self) -> float:
        return _abs_max(self.s)

    def bianchi_sums(self):
        return bianchi_sums(self.s)


def bianchi_sums(raw: Sequence):
    out = []
    for slots in _BIANCHI_SLOTS:
        total = None
        for (p, q), m, sign in slots:
            v = raw[_S_SLOT[(p, q, m)]]
            v = v if sign > 0 else -v
            total = v if total is None else total + v
        out.append(total)
    return out


def _raw_from(raw) -> list:
    if isinstance(raw, Mapping):
        zero = Fraction(0)
        if raw and isinstance(next(iter(raw)), str):
            unknown = set(raw) - set(S_NAMES)
            if unknown:
                raise KeyError(f"unknown S components {sorted(unknown)}")
            return [as_scalar(raw.get(n, zero)) for n in S_NAMES]
        return [as_scalar(raw.get(k, zero)) for k in S_KEYS]
    vals = [as_scalar(v) for v in raw]
    if len(vals) != 18:
        raise ValueError("CovCurvature needs 18 raw values")
    return vals


def _is_zero(v) -> bool:
    if hasattr(v, "is_zero"):
        return v.is_zero()
    return v == 0


def make_cov_curvature(raw, mode: str = "strict", scale: float | None = None) -> CovCurvature:
    """Validate (``strict``) or repair (``project``) the second Bianchi identity.

    ``raw`` is a sequence in ``S_KEYS`` order, or a mapping keyed by
    ``S_NAMES`` strings or ``S_KEYS`` tuples (missing entries are zero).
    Float tolerance is ``1e-8 * max(|S|_inf, scale)``.
    """
    vals = _raw_from(raw)
    sums = bianchi_sums(vals)
    if mode == "strict":
        floats = any(is_float(v) for v in vals)
        if floats:
            ref = max(_abs_max(vals), scale or 0.0)
            for P, b in enumerate(sums):
                if abs(b) > TAU_BIANCHI * ref:
                    raise BianchiViolation(PAIR_NAMES[P], float(b))
        else:
            for P, b in enumerate(sums):
                if not _is_zero(b):
                    raise BianchiViolation(PAIR_NAMES[P], b)
        return CovCurvature(tuple(vals))
    if mode == "project":
        vals = list(vals)
        for slots, b in zip(_BIANCHI_SLOTS, sums):
            if _is_zero(b):
                continue
            third = b / 3
            for (p, q), m, sign in slots:
                n = _S_SLOT[(p, q, m)]
                vals[n] = vals[n] - third if sign > 0 else vals[n] + third
        return CovCurvature(tuple(vals))
    raise ValueError(f"unknown mode {mode!r}")


def zero_cov_curvature(zero=Fraction(0)) -> CovCurvature:
    return CovCurvature(tuple(zero for _ in S_KEYS))


@dataclass(frozen=True)
class AmbientCurvature:
    c: object = Fraction(0)


def gauss_R(alpha: SymForm2) -> Curvature:
    a = alpha
    vals = []
    for (p, q) in _R_SLOT:
        i, j = PAIRS[p]
        k, l = PAIRS[q]
        vals.append(a(i, k) * a(j, l) - a(i, l) * a(j, k))
    return Curvature(*vals)


def derived_gauss_S(alpha: SymForm2, beta, mode: str = "strict") -> CovCurvature:
    """S_ijklm = b_ikm a_jl + a_ik b_jlm - b_ilm a_jk - a_il b_jkm.

    ``beta`` may be a SymForm3 or a Form3 (first two slots symmetric).
    """
    a, b = alpha, beta
    vals = []
    for p, q, m in S_KEYS:
        i, j = PAIRS[p]
        k, l = PAIRS[q]
        vals.append(b(i, k, m) * a(j, l) + a(i, k) * b(j, l, m)
                    - b(i, l, m) * a(j, k) - a(i, l) * b(j, k, m))
    return make_cov_curvature(vals, mode)


def det_A(alpha: SymForm2):
    a = alpha
    return (a.a11 * (a.a22 * a.a33 - a.a23 * a.a23)
            - a.a12 * (a.a12 * a.a33 - a.a23 * a.a13)
            + a.a13 * (a.a12 * a.a23 - a.a22 * a.a13))


def det_R_tilde(R: Curvature):
    A, B, C, D, E, F = R.components()
    # [[A,B,C],[B,D,E],[C,E,F]]
    return A * (D * F - E * E) - B * (B * F - E * C) + C * (B * E - D * C)


def shift_constant_curvature(R: Curvature, c: AmbientCurvature | object,
                             g: Optional[SymForm2] = None) -> Curvature:
    """R - c (g_ik g_jl - g_il g_jk); with g omitted the basis is orthonormal."""
    cv = c.c if isinstance(c, AmbientCurvature) else c
    cv = as_scalar(cv)
    if g is None:
        return Curvature(R.r1212 - cv, R.r1213, R.r1223, R.r1313 - cv, R.r1323, R.r2323 - cv)
    if cv == 0:
        return R
    G = gauss_R(g)
    return Curvature(*(r - cv * q for r, q in zip(R.components(), G.components())))


def rivertz(R: Curvature, S: CovCurvature):
    """The six Rivertz polynomials, written out term by term."""
    R1212, R1213, R1223, R1313, R1323, R2323 = R.components()
    s = S.named()
    S12121, S12122, S12123 = s["S12121"], s["S12122"], s["S12123"]
    S12131, S12132, S12133 = s["S12131"], s["S12132"], s["S12133"]
    S12231, S12232, S12233 = s["S12231"], s["S12232"], s["S12233"]
    S13131, S13132, S13133 = s["S13131"], s["S13132"], s["S13133"]
    S13231, S13232, S13233 = s["S13231"], s["S13232"], s["S13233"]
    S23231, S23232, S23233 = s["S23231"], s["S23232"], s["S23233"]

    m11 = R1313 * R2323 - R1323 * R1323
    m12 = R1213 * R2323 - R1223 * R1323
    m13 = R1213 * R1323 - R1223 * R1313
    m22 = R1212 * R2323 - R1223 * R1223
    m23 = R1212 * R1323 - R1213 * R1223
    m33 = R1212 * R1313 - R1213 * R1213

    r1 = (m12 * S12121 - m13 * S12122 - m22 * S12131
          + m23 * S12132 + m23 * S12231 - m33 * S12232)
    r2 = (m11 * S12121 - 2 * m13 * S12123 - m33 * S12233
          - m22 * S13131 + 2 * m23 * S13132 - m33 * S13232)
    r3 = (m11 * S12122 - 2 * m12 * S12123 + m22 * S12133
          - m22 * S13231 + 2 * m23 * S23231 - m33 * S23232)
    r4 = (m11 * S12131 - m13 * S12133 - m12 * S13131
          + m23 * S13133 + m13 * S13231 - m33 * S13233)
    r5 = (m11 * S12132 + m11 * S12231 - 2 * m12 * S13132
          + m22 * S13133 + 2 * m13 * S23231 - m33 * S23233)
    r6 = (m11 * S12232 - m12 * S12233 - m12 * S13232
          + m22 * S13233 + m13 * S23232 - m23 * S23233)
    return (r1, r2, r3, r4, r5, r6)


def _square_coeff(R, S, i, j, k):
    d1 = [[R(i, j, j, k), R(i, j, k, i), S(i, j, j, k, j)],
          [R(j, k, j, k), R(j, k, k, i), S(j, k, j, k, j)],
          [R(k, i, j, k), R(k, i, k, i), S(k, i, j, k, j)]]
    d2 = [[R(i, j, i, j), R(i, j, j, k), S(i, j, j, k, k)],
          [R(j, k, i, j), R(j, k, j, k), S(j, k, j, k, k)],
          [R(k, i, i, j), R(k, i, j, k), S(k, i, j, k, k)]]
    return _det3(d1) - _det3(d2)


def _mixed_coeff(R, S, i, j, k):
    e1 = [[R(i, j, j, k), R(i, j, k, i), S(i, j, k, i, j)],
          [R(j, k, j, k), R(j, k, k, i), S(j, k, k, i, j)],
          [R(k, i, j, k), R(k, i, k, i), S(k, i, k, i, j)]]
    e2 = [[R(i, j, i, j), R(i, j, j, k), S(i, j, k, i, k)],
          [R(j, k, i, j), R(j, k, j, k), S(j, k, k, i, k)],
          [R(k, i, i, j), R(k, i, j, k), S(k, i, k, i, k)]]
    e3 = [[R(i, j, k, i), R(i, j, i, j), S(i, j, j, k, k)],
          [R(j, k, k, i), R(j, k, i, j), S(j, k, j, k, k)],
          [R(k, i, k, i), R(k, i, i, j), S(k, i, j, k, k)]]
    e4 = [[R(i, j, j, k), R(i, j, k, i), S(i, j, j, k, i)],
          [R(j, k, j, k), R(j, k, k, i), S(j, k, j, k, i)],
          [R(k, i, j, k), R(k, i, k, i), S(k, i, j, k, i)]]
    return _det3(e1) - _det3(e2) + _det3(e3) - _det3(e4)


def _mixed_coeff_modified(R, S, i, j, k):
    f1 = [[R(i, j, j, k), R(i, j, k, i), S(i, j, k, i, j) - S(i, j, j, k, i)],
          [R(j, k, j, k), R(j, k, k, i), -2 * S(j, k, j, k, i)],
          [R(k, i, j, k), R(k, i, k, i), 2 * S(k, i, k, i, j)]]
    g1 = R(i, j, i, j) * R(k, i, k, i) - R(i, j, k, i) * R(k, i, i, j)
    g2 = R(i, j, i, j) * R(j, k, j, k) - R(i, j, j, k) * R(j, k, i, j)
    return _det3(f1) + g1 * S(j, k, j, k, k) - g2 * S(k, i, k, i, k)


def _det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def rivertz_determinantal(R: Curvature, S: CovCurvature, modified: bool = False):
    """Second, independently written evaluator of r1..r6.

    Reads each r_i off the coefficients of half the RS quadratic written
    as differences of 3x3 determinants over cyclic index triples.  With
    ``modified`` the mixed coefficients use the Bianchi-adjusted form.
    """
    mixed = _mixed_coeff_modified if modified else _mixed_coeff
    r6 = _square_coeff(R, S, 1, 2, 3)
    r4 = _square_coeff(R, S, 2, 3, 1)
    r1 = _square_coeff(R, S, 3, 1, 2)
    r5 = -mixed(R, S, 1, 2, 3)
    r2 = -mixed(R, S, 2, 3, 1)
    r3 = mixed(R, S, 3, 1, 2)
    return (r1, r2, r3, r4, r5, r6)


# basis change helpers (tensorial transformation by a 3x3 matrix P)

def transform_alpha(alpha: SymForm2, P) -> SymForm2:
    m = [[sum((P[a][i] * alpha(a + 1, b + 1) * P[b][j] for a in range(3) for b in range(3)),
              _zero_like(alpha.a11)) for j in range(3)] for i in range(3)]
    return SymForm2.from_matrix(m)


def transform_beta(beta: SymForm3, P) -> SymForm3:
    out = {}
    z = _zero_like(beta.b[(1, 1, 1)])
    for key in SYM3_KEYS:
        i, j, k = (x - 1 for x in key)
        out[key] = sum((P[a][i] * P[b][j] * P[c][k] * beta(a + 1, b + 1, c + 1)
                        for a in range(3) for b in range(3) for c in range(3)), z)
    return SymForm3(out)


def transform_curvature(R: Curvature, P) -> Curvature:
    z = _zero_like(R.r1212)
    vals = []
    for (p, q) in _R_SLOT:
        i, j = PAIRS[p]
        k, l = PAIRS[q]
        tot = z
        for a, b, c, d in itertools.product(range(3), repeat=4):
            coef = P[a][i - 1] * P[b][j - 1] * P[c][k - 1] * P[d][l - 1]
            if coef:
                tot = tot + coef * R(a + 1, b + 1, c + 1, d + 1)
        vals.append(tot)
    return Curvature(*vals)


def transform_cov_curvature(S: CovCurvature, P, mode: str = "strict") -> CovCurvature:
    z = _zero_like(S.s[0])
    vals = []
    for p, q, m in S_KEYS:
        i, j = PAIRS[p]
        k, l = PAIRS[q]
        tot = z
        for a, b, c, d, e in itertools.product(range(3), repeat=5):
            coef = P[a][i - 1] * P[b][j - 1] * P[c][k - 1] * P[d][l - 1] * P[e][m - 1]
            if coef:
                tot = tot + coef * S(a + 1, b + 1, c + 1, d + 1, e + 1)
        vals.append(tot)
    return make_cov_curvature(vals, mode)


def indeterminate_curvature(prefix: str = "") -> Curvature:
    from .poly import Poly
    return Curvature(*(Poly.var(prefix + n) for n in R_NAMES))


# Bianchi elimination for the indeterminate S: one slot per cyclic equation
S_ELIMINATED = ("S12123", "S13231", "S13232")
S_FREE = tuple(n for n in S_NAMES if n not in S_ELIMINATED)


def indeterminate_cov_curvature() -> CovCurvature:
    """S with 15 free indeterminates; the 3 eliminated slots are rewritten by Bianchi."""
    from .poly import Poly
    v = {n: Poly.var(n) for n in S_FREE}
    # pair 12: S12123 + S12231 - S12132 = 0
    v["S12123"] = v["S12132"] - v["S12231"]
    # pair 13: S12133 + S13231 - S13132 = 0
    v["S13231"] = v["S13132"] - v["S12133"]
    # pair 23: S12233 + S23231 - S13232 = 0
    v["S13232"] = v["S12233"] + v["S23231"]
    return make_cov_curvature([v[n] for n in S_NAMES], "strict")


def indeterminate_alpha(prefix: str = "al") -> SymForm2:
    from .poly import Poly
    return SymForm2(*(Poly.var(f"{prefix}{i}{j}") for i, j in ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))))


def indeterminate_beta(prefix: str = "be") -> SymForm3:
    from .poly import Poly
    return SymForm3({k: Poly.var(prefix + "".join(map(str, k))) for k in SYM3_KEYS})


def indeterminate_form3(prefix: str = "bf") -> Form3:
    from .poly import Poly
    return Form3({k: Poly.var(prefix + "".join(map(str, k))) for k in FORM3_KEYS})


def vector_norm(values: Iterable) -> float:
    return _abs_max(values)
