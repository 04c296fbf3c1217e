"""Exact verification of the polynomial identities behind the embedding test.

Each ``verify_*`` function raises :class:`IdentityFailed` with a witness
monomial on the first mismatch and otherwise returns the number of
polynomial equalities it checked.  :func:`run_identities` wraps them into
JSON-ready reports.
"""
from __future__ import annotations

import contextvars
import random
import time
from fractions import Fraction
from typing import Callable, Dict, List

from ..errors import ExcessSymbols, IdentityFailed, InternalInconsistency, RestorationError
from ..poly import Poly, first_difference, mono_str
from ..tensors import (PAIRS, R_NAMES, Curvature, CovCurvature, S_NAMES, SymForm2, det_A, derived_gauss_S,
                       gauss_R, indeterminate_alpha, indeterminate_beta, indeterminate_cov_curvature,
                       indeterminate_curvature, indeterminate_form3, rivertz, rivertz_determinantal)
from .symexpr import (SymExpr, bianchi_rewrite, det2, det3, formal_vec, restore, sym, vec, wedge)

# name of the identity whose expected side gets one coefficient flipped (harness self-test)
_MUTATE: contextvars.ContextVar = contextvars.ContextVar("mutate", default=None)
_CURRENT: contextvars.ContextVar = contextvars.ContextVar("current", default=None)

SQRT2_INV = SymExpr.const(0, Fraction(1, 2))


def schwartz_zippel_check(a: Poly, b: Poly, trials: int = 6, seed: int = 0,
                          prime: int = 2 ** 61 - 1) -> bool:
    """Randomized identity test: compare a and b at random points mod a prime."""
    rng = random.Random(seed)
    names = sorted(a.variables() | b.variables())
    fa = a.compile(names)
    fb = b.compile(names)
    for _ in range(trials):
        pt = [rng.randrange(prime) for _ in names]
        va, vb = fa(*pt), fb(*pt)
        da = va.numerator * pow(va.denominator, -1, prime) % prime if isinstance(va, Fraction) else va % prime
        db = vb.numerator * pow(vb.denominator, -1, prime) % prime if isinstance(vb, Fraction) else vb % prime
        if da != db:
            return False
    return True


def _mutated(p: Poly) -> Poly:
    if p.is_zero():
        return Poly.const(1)
    m, c = p.sorted_terms()[0]
    return p - Poly({m: 2 * c})


def assert_equal(label: str, lhs: Poly, rhs: Poly, randomized: bool = True) -> None:
    """Exact equality, cross-checked by a randomized evaluation test."""
    if _MUTATE.get() is not None and _MUTATE.get() == _CURRENT.get():
        rhs = _mutated(rhs)
        _MUTATE.set("done")
    exact = lhs == rhs
    if randomized and (lhs.terms or rhs.terms):
        sz = schwartz_zippel_check(lhs, rhs)
        if sz != exact:
            raise InternalInconsistency(
                f"{label}: exact comparison says {exact} but randomized test says {sz}")
    if not exact:
        m, a, b = first_difference(lhs, rhs)
        raise IdentityFailed(label, f"{mono_str(m)}: {a} != {b}")


def assert_zero(label: str, p: Poly) -> None:
    assert_equal(label, p, Poly())


def assert_nonzero(label: str, p: Poly) -> None:
    if _MUTATE.get() is not None and _MUTATE.get() == _CURRENT.get():
        p = Poly()
        _MUTATE.set("done")
    if p.is_zero():
        raise IdentityFailed(label, "polynomial vanished identically")


# shared indeterminates

def _R():
    return indeterminate_curvature()


def _S():
    return indeterminate_cov_curvature()


def _x(i):
    return Poly.var(f"x{i}")


def build_RS(R: Callable = None, Rbar: Callable = None, S2: Callable = None,
             S1: Callable = None) -> SymExpr:
    """The RS quadratic in the formal variables x1, x2, x3.

    Product of det(R, Rbar, S) and det(R, Rbar, x^S) over the pair rows
    12, 13, 23 times (x1 S23 - x2 S13 + x3 S12).  The symbol providers
    can be replaced to substitute other symbols for R, Rbar and S.
    """
    R = R or (lambda i, j: sym("R", "", i, j))
    Rbar = Rbar or (lambda i, j: sym("R", "bar", i, j))
    S2 = S2 or (lambda i, j: sym("S", "", i, j))
    S1 = S1 or (lambda m: sym("S", "", m))
    x = formal_vec("x")
    xs = lambda i, j: x(i) * S1(j) - x(j) * S1(i)
    d1 = det3([[R(i, j), Rbar(i, j), S2(i, j)] for i, j in PAIRS])
    d2 = det3([[R(i, j), Rbar(i, j), xs(i, j)] for i, j in PAIRS])
    lin = x(1) * S2(2, 3) - x(2) * S2(1, 3) + x(3) * S2(1, 2)
    return d1 * d2 * lin


def rivertz_quadratic(r) -> Poly:
    r1, r2, r3, r4, r5, r6 = r
    x1, x2, x3 = _x(1), _x(2), _x(3)
    return (r1 * x3 * x3 - r2 * x2 * x3 + r3 * x1 * x3
            + r4 * x2 * x2 - r5 * x1 * x2 + r6 * x1 * x1)


def verify_restoration_rules() -> int:
    R = lambda i, j: sym("R", "", i, j)
    S2 = lambda i, j: sym("S", "", i, j)
    S1 = lambda m: sym("S", "", m)
    Rp, Sp = _R(), _S()
    e = (R(1, 2) * S2(2, 3) - R(1, 3) * S2(1, 2)) ** 2 * S1(3)
    expected = Rp.r1212 * Sp.by_name("S23233") - 2 * Rp.r1213 * Sp.by_name("S12233") \
        + Rp.r1313 * Sp.by_name("S12123")
    assert_equal("worked restoration", restore(e), expected)
    count = 1
    for bad, kind in ((R(1, 2) * S2(1, 2) * S2(1, 3) * S1(3), "unpaired"),
                      (R(1, 2) * R(2, 3) * S2(1, 2) * S2(1, 3), "unpaired"),
                      (R(1, 2) * R(1, 3) * sym("R", "bar", 2, 3), "unpaired"),
                      (R(1, 2) * R(2, 3) * S2(1, 2) * S2(1, 3) * S2(2, 3) * S1(1), "excess")):
        try:
            restore(bad)
        except RestorationError as exc:
            if (kind == "excess") != isinstance(exc, ExcessSymbols):
                raise IdentityFailed("restoration rules", f"{bad}: wrong error {type(exc).__name__}")
        else:
            raise IdentityFailed("restoration rules", f"{bad} restored without error")
        count += 1
    # the Bianchi rewrite is optional and never changes the restored value
    rs = build_RS()
    assert_equal("Bianchi rewrite invariance", restore(bianchi_rewrite(rs)), restore(rs))
    return count + 1


def verify_rs_coefficients() -> int:
    """Half the restored RS quadratic carries r1..r6 as its coefficients.

    Also compares the transcribed r_i with the determinantal forms, both
    as written and in their Bianchi-modified variant.
    """
    R, S = _R(), _S()
    r = rivertz(R, S)
    half = restore(build_RS()) / 2
    assert_equal("RS quadratic", half, rivertz_quadratic(r))
    coeffs = {"x3^2": ({"x3": 2}, r[0]), "x2x3": ({"x2": 1, "x3": 1}, -r[1]),
              "x1x3": ({"x1": 1, "x3": 1}, r[2]), "x2^2": ({"x2": 2}, r[3]),
              "x1x2": ({"x1": 1, "x2": 1}, -r[4]), "x1^2": ({"x1": 2}, r[5])}
    for name, (mono, want) in coeffs.items():
        assert_equal(f"RS coefficient of {name}", half.coefficient(mono), want)
    det_forms = rivertz_determinantal(R, S)
    mod_forms = rivertz_determinantal(R, S, modified=True)
    for i in range(6):
        assert_equal(f"r{i + 1} determinantal form", det_forms[i], r[i])
        assert_equal(f"r{i + 1} modified determinantal form", mod_forms[i], r[i])
    # without Bianchi normalization the modified mixed forms differ from the
    # plain ones by Bianchi multiples only
    free = CovCurvature(tuple(Poly.var(n) for n in S_NAMES))
    plain = rivertz_determinantal(R, free)
    mod = rivertz_determinantal(R, free, modified=True)
    subs = {n: Sp for n, Sp in zip(S_NAMES, S.s)}
    for i in (1, 2, 4):
        diff = plain[i] - mod[i]
        assert_nonzero(f"r{i + 1} modification uses Bianchi", diff)
        assert_zero(f"r{i + 1} modification is a Bianchi multiple", diff.subs(subs))
    return 1 + 6 + 12 + 3


def gauss_substitution():
    al, be = indeterminate_alpha(), indeterminate_beta()
    return al, be, gauss_R(al), derived_gauss_S(al, be)


def verify_rivertz_vanishing() -> int:
    """r_i vanish identically once R, S come from the (derived) Gauss equations.

    Checked twice: by direct substitution into the transcribed polynomials,
    and inside the symbol calculus with R = (1/sqrt2) a1^a2,
    Rbar = (1/sqrt2) a3^a4, S_ij = (a5^b)_ij, S_m = b_m.
    """
    al, be, R, S = gauss_substitution()
    for i, ri in enumerate(rivertz(R, S)):
        assert_zero(f"r{i + 1} under Gauss substitution", ri)
    a = [None] + [vec("alpha", str(t)) for t in range(1, 6)]
    b = vec("beta", "")
    rs = build_RS(R=lambda i, j: SQRT2_INV * wedge(a[1], a[2])(i, j),
                  Rbar=lambda i, j: SQRT2_INV * wedge(a[3], a[4])(i, j),
                  S2=lambda i, j: wedge(a[5], b)(i, j),
                  S1=b)
    assert_zero("RS under symbolic Gauss substitution", restore(rs))
    return 7


def codazzi_control():
    """r_i with beta free in its last slot (Bianchi restored by projection)."""
    al = indeterminate_alpha()
    bf = indeterminate_form3()
    R = gauss_R(al)
    S = derived_gauss_S(al, bf, mode="project")
    return rivertz(R, S)


def verify_codazzi_control() -> int:
    for i, ri in enumerate(codazzi_control()):
        assert_nonzero(f"r{i + 1} without Codazzi symmetry", ri)
    return 6


def verify_wedge_determinant() -> int:
    """det(a1^a2, a3^a4, x^y) det(a1^a2, a3^a4, z^w) = 8|A| det(a,x,y) det(a,z,w)."""
    a = [None] + [vec("alpha", str(t)) for t in range(1, 5)]
    a0 = vec("alpha", "0")
    x, y, z, w = (formal_vec(n) for n in "xyzw")
    w12, w34 = wedge(a[1], a[2]), wedge(a[3], a[4])
    lhs = (det3([[w12(i, j), w34(i, j), wedge(x, y)(i, j)] for i, j in PAIRS])
           * det3([[w12(i, j), w34(i, j), wedge(z, w)(i, j)] for i, j in PAIRS]))
    rhs = (det3([[a0(i), x(i), y(i)] for i in (1, 2, 3)])
           * det3([[a0(i), z(i), w(i)] for i in (1, 2, 3)]))
    detA = det_A(indeterminate_alpha())
    assert_equal("wedge determinant identity", restore(lhs), 8 * detA * restore(rhs))
    return 1


def linear_gauss_map(gamma: SymForm2, alpha: SymForm2) -> Curvature:
    """T_ijkl = g_ik a_jl + a_ik g_jl - g_il a_jk - a_il g_jk."""
    vals = []
    for p in range(3):
        for q in range(p, 3):
            i, j = PAIRS[p]
            k, l = PAIRS[q]
            vals.append(gamma(i, k) * alpha(j, l) + alpha(i, k) * gamma(j, l)
                        - gamma(i, l) * alpha(j, k) - alpha(i, l) * gamma(j, k))
    return Curvature(*vals)


def gamma_numerators(fam: str = "T", m: int | None = None) -> Dict:
    """Restored numerators N_ij of the Gauss-linear solve (gamma = N / 2|A0|).

    ``fam`` picks the right-hand side symbols: ``T`` for a curvature-like
    tensor, ``S`` for S_{..m} (then each term carries S_m).
    """
    a0, a0b = vec("alpha", "0"), vec("alpha", "0bar")
    T = lambda i, j: sym(fam, "", i, j)
    tail = sym(fam, "", m) if fam == "S" else SymExpr.const(1)
    al = indeterminate_alpha()
    lin = a0b(1) * T(2, 3) - a0b(2) * T(1, 3) + a0b(3) * T(1, 2)
    sq = restore(lin * lin * tail)
    D = {i: det3([[a0(r), a0b(r), T(r, i)] for r in (1, 2, 3)]) for i in (1, 2, 3)}
    out = {}
    for i in (1, 2, 3):
        for j in range(i, 4):
            g1 = restore(D[i] * D[j] * tail)
            g2 = al(i, j) * sq
            out[(i, j)] = (g1, g2)
    return out


def system_matrix(alpha: SymForm2):
    """6x6 matrix of the Gauss-linear map, columns g11 g12 g13 g22 g23 g33."""
    names = ("g11", "g12", "g13", "g22", "g23", "g33")
    gam = SymForm2(*(Poly.var(n) for n in names))
    T = linear_gauss_map(gam, alpha)
    return [[row.coefficient({n: 1}) for n in names] for row in T.components()]


def transcribed_system_matrix(a: SymForm2):
    z = a.a11 * 0
    return [[a.a22, -2 * a.a12, z, a.a11, z, z],
            [a.a23, -a.a13, -a.a12, z, a.a11, z],
            [z, a.a23, -a.a22, -a.a13, a.a12, z],
            [a.a33, z, -2 * a.a13, z, z, a.a11],
            [z, a.a33, -a.a23, z, -a.a13, a.a12],
            [z, z, z, a.a33, -2 * a.a23, a.a22]]


def verify_beta_formula() -> int:
    from ..poly import det_generic
    al = indeterminate_alpha()
    A = det_A(al)
    a = al
    T = Curvature(*(Poly.var("T" + n[1:]) for n in R_NAMES))
    M = system_matrix(al)
    Mt = transcribed_system_matrix(al)
    count = 0
    for r in range(6):
        for c in range(6):
            assert_equal(f"system matrix entry ({r + 1},{c + 1})", M[r][c], Mt[r][c], randomized=False)
            count += 1
    assert_equal("system determinant", det_generic(M), -2 * A * A)
    nums = gamma_numerators("T")
    g1_12, g2_12 = nums[(1, 2)]
    want1 = 2 * ((a.a11 * a.a22 - a.a12 * a.a12) * T.r1323 + (a.a13 * a.a22 - a.a12 * a.a23) * T.r1213
                 + (a.a12 * a.a13 - a.a11 * a.a23) * T.r1223 + (a.a12 * a.a33 - a.a13 * a.a23) * T.r1212)
    want2 = a.a12 * (a.a11 * T.r2323 - 2 * a.a12 * T.r1323 + 2 * a.a13 * T.r1223 + a.a22 * T.r1313
                     - 2 * a.a23 * T.r1213 + a.a33 * T.r1212)
    assert_equal("gamma1_12 restored", g1_12, want1)
    assert_equal("gamma2_12 restored", g2_12, want2)
    N = SymForm2(*(nums[k][0] - nums[k][1] for k in ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))))
    image = linear_gauss_map(N, al)
    for name, got, want in zip(R_NAMES, image.components(), T.components()):
        assert_equal(f"linear solve reproduces T{name[1:]}", got, 2 * A * want)
    zero_T = {v: Poly() for v in ("T1212", "T1213", "T1223", "T1313", "T1323", "T2323")}
    for k in N.components():
        assert_zero("T = 0 gives gamma = 0", k.subs(zero_T))
    # the same restoration with S_{..m} in place of T, carrying S_m
    S = _S()
    for m in (1, 2, 3):
        sn = gamma_numerators("S", m)
        sub = {"T" + n[1:]: v for n, v in zip(R_NAMES, S.slice_m(m).components())}
        for k, (g1, g2) in sn.items():
            want = (nums[k][0] - nums[k][1]).subs(sub)
            assert_equal(f"beta numerator N_{k[0]}{k[1]}{m}", g1 - g2, want)
            count += 1
    # normalizing constants used alongside the solve
    a0, a0b, a0bb = vec("alpha", "0"), vec("alpha", "0bar"), vec("alpha", "0bbar")
    d = det3([[a0(i), a0b(i), a0bb(i)] for i in (1, 2, 3)])
    assert_equal("det(a0, a0bar, a0bbar)^2", restore(d * d), 6 * A)
    two = det2([[a0(1), a0b(1)], [a0(2), a0b(2)]])
    assert_equal("2x2 symbol determinant squared", restore(two * two), 2 * (a.a11 * a.a22 - a.a12 * a.a12))
    try:
        restore(a0(1) * a0(1) * a0(2) * a0(2))
    except ExcessSymbols:
        pass
    else:
        raise IdentityFailed("repeated copy rejection", "a0_1 a0_1 a0_2 a0_2 restored")
    return count + 1 + 2 + 6 + 6 + 3


def beta0_numerators() -> Dict:
    """N_ijm with beta0_ijm = N_ijm / (2|A0|), as Polys in (alpha, S)."""
    out = {}
    for m in (1, 2, 3):
        for k, (g1, g2) in gamma_numerators("S", m).items():
            out[(k[0], k[1], m)] = g1 - g2
    return out


def h0_symbolic() -> Poly:
    """Restored H0(x) = det(x, a0, S) (x1 S23 - x2 S13 + x3 S12)(a0_1 S23 - a0_2 S13 + a0_3 S12)."""
    a0 = vec("alpha", "0")
    x = formal_vec("x")
    S2 = lambda i, j: sym("S", "", i, j)
    S1 = lambda m: sym("S", "", m)
    d = det3([[x(i), a0(i), S1(i)] for i in (1, 2, 3)])
    lx = x(1) * S2(2, 3) - x(2) * S2(1, 3) + x(3) * S2(1, 2)
    la = a0(1) * S2(2, 3) - a0(2) * S2(1, 3) + a0(3) * S2(1, 2)
    return restore(d * lx * la)


def verify_h0_correspondence() -> int:
    """h0 coefficients, their proportionality to r_i and the Codazzi identity."""
    from ..embed import h0_coeffs
    al = indeterminate_alpha()
    S = _S()
    A = det_A(al)
    h = h0_coeffs(al, S)
    hq = rivertz_quadratic((h.h1212, 2 * h.h1213, 2 * h.h1223, h.h1313, 2 * h.h1323, h.h2323))
    assert_equal("H0 restored vs transcribed h0", h0_symbolic(), hq)
    r = rivertz(gauss_R(al), S)
    factors = (1, 2, 2, 1, 2, 1)
    for i, (ri, hi, f) in enumerate(zip(r, h.components(), factors)):
        assert_equal(f"r{i + 1} = -{f}|A0| h", ri, -f * A * hi)
    a = al
    dep = (a.a33 * h.h1212 - 2 * a.a23 * h.h1213 + 2 * a.a13 * h.h1223
           + a.a22 * h.h1313 - 2 * a.a12 * h.h1323 + a.a11 * h.h2323)
    assert_zero("dependence among h0", dep)
    N = beta0_numerators()
    H = h.as_curvature()
    n = 0
    for i in (1, 2, 3):
        for p in (1, 2, 3):
            for q in range(p + 1, 4):
                lhs = _N(N, i, p, q) - _N(N, i, q, p)
                rhs = -2 * (a(i, 1) * H(2, 3, p, q) - a(i, 2) * H(1, 3, p, q) + a(i, 3) * H(1, 2, p, q))
                assert_equal(f"Codazzi defect ({i},{p},{q})", lhs, rhs)
                n += 1
    return 1 + 6 + 1 + n


def _N(N, i, j, m):
    return N[(min(i, j), max(i, j), m)]


IDENTITIES: Dict[str, Callable[[], int]] = {}


def _register():
    from .classical import verify_classical_invariants
    IDENTITIES.update({
        "restoration-rules": verify_restoration_rules,
        "rs-coefficients": verify_rs_coefficients,
        "rivertz-vanishing": verify_rivertz_vanishing,
        "codazzi-control": verify_codazzi_control,
        "wedge-determinant": verify_wedge_determinant,
        "beta-formula": verify_beta_formula,
        "h0-correspondence": verify_h0_correspondence,
        "classical-invariants": verify_classical_invariants,
    })


def run_identities(only: List[str] | None = None, self_test: bool = False) -> List[dict]:
    """Run the identity suite and return one report record per identity.

    With ``self_test`` the first checked equality of each identity has one
    coefficient of its expected side flipped, so every record must fail.
    """
    if not IDENTITIES:
        _register()
    names = list(IDENTITIES) if not only else list(only)
    unknown = [n for n in names if n not in IDENTITIES]
    if unknown:
        raise KeyError(f"unknown identities {unknown}; known: {sorted(IDENTITIES)}")
    reports = []
    for name in names:
        t0 = time.perf_counter()
        tok_c = _CURRENT.set(name)
        tok_m = _MUTATE.set(name if self_test else None)
        rec = {"identity_name": name, "status": "pass", "witness_monomial": None}
        try:
            rec["checks"] = IDENTITIES[name]()
        except IdentityFailed as exc:
            rec.update(status="fail", witness_monomial=str(exc.witness), detail=str(exc.which))
        finally:
            _CURRENT.reset(tok_c)
            _MUTATE.reset(tok_m)
        rec["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 1)
        reports.append(rec)
    return reports
