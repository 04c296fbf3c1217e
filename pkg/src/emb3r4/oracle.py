"""Seeded randomized suites over exact rationals.

``roundtrip`` draws (alpha, beta) with beta fully symmetric, so the pair
(gauss_R(alpha), derived_gauss_S(alpha, beta)) is the Gauss data of an
actual hypersurface and every downstream quantity is predicted exactly.
``negative`` breaks the symmetry of beta in its last slot and expects the
Rivertz vector to detect it.
"""
from __future__ import annotations

import json
import random
import time
from fractions import Fraction
from typing import Iterable, List, Optional

from .embed import (DEFAULT_TOL, Status, beta0, codazzi_residual, h0_coeffs, h0_dependence, invert_gauss,
                    verdict)
from .tensors import (FORM3_KEYS, SYM3_KEYS, Form3, SymForm2, SymForm3, det_A, det_R_tilde,
                      derived_gauss_S, gauss_R, rivertz, rivertz_determinantal)

H0_FACTORS = (1, 2, 2, 1, 2, 1)


def random_rational(rng: random.Random, pmax: int = 3, qmax: int = 8) -> Fraction:
    return Fraction(rng.randint(-pmax, pmax), rng.randint(1, qmax))


def random_alpha(rng: random.Random) -> SymForm2:
    """Random symmetric alpha with det > 0."""
    while True:
        a = SymForm2(*(random_rational(rng) for _ in range(6)))
        d = det_A(a)
        if d != 0:
            return a if d > 0 else -a


def random_beta(rng: random.Random) -> SymForm3:
    return SymForm3.from_values([random_rational(rng) for _ in SYM3_KEYS])


def random_non_codazzi(rng: random.Random) -> Form3:
    """Symmetric in the first two slots only, with the last-slot symmetry broken."""
    while True:
        b = Form3({k: random_rational(rng) for k in FORM3_KEYS})
        if codazzi_residual(b) != 0:
            return b


def _s(x) -> str:
    return str(x)


def roundtrip_trial(alpha: SymForm2, beta: SymForm3) -> List[str]:
    """Names of the failed checks (empty when the trial passes)."""
    fails = []
    R = gauss_R(alpha)
    S = derived_gauss_S(alpha, beta, "strict")
    r = rivertz(R, S)
    if any(v != 0 for v in r):
        fails.append("rivertz_zero")
    if tuple(rivertz_determinantal(R, S)) != tuple(r):
        fails.append("rivertz_determinantal")
    A = det_A(alpha)
    if det_R_tilde(R) != A * A:
        fails.append("det_R_tilde_square")
    try:
        if invert_gauss(R) != alpha:
            fails.append("invert_gauss_roundtrip")
    except Exception as exc:
        fails.append(f"invert_gauss_raised:{type(exc).__name__}")
    try:
        b0 = beta0(alpha, S)
        if b0.components() != Form3.from_symmetric(beta).components():
            fails.append("beta0_roundtrip")
        if codazzi_residual(b0) != 0:
            fails.append("codazzi_residual_zero")
    except Exception as exc:
        fails.append(f"beta0_raised:{type(exc).__name__}")
    h = h0_coeffs(alpha, S)
    if any(v != 0 for v in h.components()):
        fails.append("h0_zero")
    if h0_dependence(alpha, h) != 0:
        fails.append("h0_dependence")
    v = verdict(R, S)
    if v.status != Status.EMBEDDABLE:
        fails.append(f"verdict:{v.label()}")
    return fails


def negative_trial(alpha: SymForm2, beta: Form3) -> dict:
    """Exact and float Rivertz vectors for a non-Codazzi beta, plus the h0 scaling cross-check."""
    R = gauss_R(alpha)
    S = derived_gauss_S(alpha, beta, "project")
    r = rivertz(R, S)
    exact_nonzero = any(v != 0 for v in r)
    Rf, Sf = R.map(float), type(S)(tuple(float(v) for v in S.s))
    rf = rivertz(Rf, Sf)
    nS = Sf.norm()
    rel = max(abs(v) for v in rf) / (Rf.norm() ** 2 * nS) if nS > 0 else 0.0
    A = det_A(alpha)
    h = h0_coeffs(alpha, S)
    scaling_ok = all(ri == -f * A * hi for ri, f, hi in zip(r, H0_FACTORS, h.components()))
    return {"exact_nonzero": exact_nonzero, "float_relative": rel,
            "float_nonzero": rel > DEFAULT_TOL.tau_rivertz, "h0_scaling": scaling_ok,
            "dependence_zero": h0_dependence(alpha, h) == 0}


def _dump(path: Optional[str], record: dict) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1)


def run_roundtrip(seed: int, trials: int, dump: Optional[str] = None) -> dict:
    rng = random.Random(seed)
    t0 = time.perf_counter()
    failures = 0
    first = None
    for k in range(trials):
        alpha, beta = random_alpha(rng), random_beta(rng)
        fails = roundtrip_trial(alpha, beta)
        if fails:
            failures += 1
            if first is None:
                first = {"suite": "roundtrip", "seed": seed, "trial": k, "failed": fails,
                         "alpha": [_s(v) for v in alpha.components()],
                         "beta": [_s(v) for v in beta.components()]}
                _dump(dump, first)
    return {"record": "oracle", "suite": "roundtrip", "seed": seed, "trials": trials,
            "failures": failures, "passed": failures == 0, "first_failure": first,
            "wall_time_s": round(time.perf_counter() - t0, 3)}


def run_negative(seed: int, trials: int, dump: Optional[str] = None, required: float = 0.99) -> dict:
    rng = random.Random(seed)
    t0 = time.perf_counter()
    exact = floats = scaling = dependence = 0
    first = None
    for k in range(trials):
        alpha, beta = random_alpha(rng), random_non_codazzi(rng)
        res = negative_trial(alpha, beta)
        exact += res["exact_nonzero"]
        floats += res["float_nonzero"]
        scaling += res["h0_scaling"]
        dependence += res["dependence_zero"]
        if first is None and not (res["exact_nonzero"] and res["float_nonzero"] and res["h0_scaling"]):
            first = {"suite": "negative", "seed": seed, "trial": k, "result": res,
                     "alpha": [_s(v) for v in alpha.components()],
                     "beta": [_s(v) for v in beta.components()]}
            _dump(dump, first)
    n = max(trials, 1)
    passed = trials == 0 or (exact / n >= required and floats / n >= required and scaling == trials)
    return {"record": "oracle", "suite": "negative", "seed": seed, "trials": trials,
            "exact_nonzero_fraction": exact / n, "float_nonzero_fraction": floats / n,
            "h0_scaling_holds": scaling, "dependence_zero": dependence,
            "required_fraction": required, "passed": passed, "first_failure": first,
            "wall_time_s": round(time.perf_counter() - t0, 3)}


def replay(path: str) -> dict:
    """Re-run a dumped trial from its recorded inputs."""
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    alpha = SymForm2(*(Fraction(v) for v in rec["alpha"]))
    if rec["suite"] == "roundtrip":
        beta = SymForm3.from_values([Fraction(v) for v in rec["beta"]])
        fails = roundtrip_trial(alpha, beta)
        return {"record": "replay", "suite": "roundtrip", "trial": rec.get("trial"), "failed": fails,
                "passed": not fails}
    beta = Form3(dict(zip(FORM3_KEYS, (Fraction(v) for v in rec["beta"]))))
    res = negative_trial(alpha, beta)
    return {"record": "replay", "suite": "negative", "trial": rec.get("trial"), "result": res,
            "passed": res["exact_nonzero"] and res["float_nonzero"]}


def negative_symbolic() -> dict:
    """The Rivertz polynomials after substituting a non-Codazzi beta stay nonzero polynomials."""
    from .tensors import indeterminate_alpha, indeterminate_form3
    al = indeterminate_alpha("al")
    bf = indeterminate_form3("bf")
    r = rivertz(gauss_R(al), derived_gauss_S(al, bf, "project"))
    out = []
    for i, poly in enumerate(r, 1):
        terms = sorted(poly.terms.items()) if not poly.is_zero() else []
        out.append({"index": i, "nonzero": bool(terms), "terms": len(terms)})
    return {"record": "negative_symbolic", "polynomials": out, "passed": all(o["nonzero"] for o in out)}
