"""Truncated Taylor jets in n variables and curvature computed on them.

A jet of order K stores Taylor coefficients (derivative / multi-index
factorial) for every multi-index of total degree <= K in the last axis of
a numpy array.  Products truncate at K; differentiation lowers the valid
order by one, so the curvature pipeline starts from third-order metric
jets to reach first-order R and pointwise S.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def multi_indices(n: int, order: int):
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(n), deg):
            mi = [0] * n
            for c in combo:
                mi[c] += 1
            out.append(tuple(mi))
    return tuple(out)


@lru_cache(maxsize=None)
def _tables(n: int, order: int):
    mis = multi_indices(n, order)
    index = {m: i for i, m in enumerate(mis)}
    N = len(mis)
    prod = np.zeros((N, N, N))
    for a, ma in enumerate(mis):
        for b, mb in enumerate(mis):
            mc = tuple(x + y for x, y in zip(ma, mb))
            if mc in index:
                prod[a, b, index[mc]] = 1.0
    deriv = np.zeros((n, N, N))
    for i in range(n):
        for a, ma in enumerate(mis):
            up = list(ma)
            up[i] += 1
            up = tuple(up)
            if up in index:
                deriv[i, index[up], a] = ma[i] + 1
    fact = np.array([math.prod(math.factorial(x) for x in m) for m in mis], dtype=float)
    return mis, index, prod, deriv, fact


class JetSpace:
    def __init__(self, n: int, order: int):
        self.n = n
        self.order = order
        self.mis, self.index, self._prod, self._deriv, self.fact = _tables(n, order)
        self.N = len(self.mis)

    def from_derivatives(self, values: np.ndarray) -> np.ndarray:
        """Derivative values (last axis over multi-indices) to Taylor coefficients."""
        return np.asarray(values, dtype=float) / self.fact

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("...a,...b,abc->...c", a, b, self._prod)

    def d(self, a: np.ndarray, i: int) -> np.ndarray:
        return a @ self._deriv[i]

    def const(self, a: np.ndarray) -> np.ndarray:
        return a[..., 0]

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Matrix product of jet-valued matrices (shapes (n,m,N) and (m,k,N))."""
        return np.einsum("ija,jkb,abc->ikc", A, B, self._prod)

    def inv(self, G: np.ndarray) -> np.ndarray:
        """Inverse of a jet-valued square matrix via the Neumann series."""
        G0 = G[..., 0]
        G0inv = np.linalg.inv(G0)
        delta = G.copy()
        delta[..., 0] = 0.0
        E = -np.einsum("ij,jka->ika", G0inv, delta)  # -G0^-1 * delta
        base = np.zeros_like(G)
        base[..., 0] = G0inv
        out = base.copy()
        term = base
        for _ in range(self.order):
            term = self.matmul(E, term)
            out = out + term
        return out


def curvature_from_metric_jet(js: JetSpace, g: np.ndarray):
    """Christoffel symbols, R_ijkl and S_ijklm from a third-order metric jet.

    ``g`` has shape (n, n, N).  R follows R_ijkl = -g(R(X_i,X_j)X_k, X_l)
    with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].  Returns a dict with
    pointwise arrays ``gamma`` (k,i,j), ``R`` (i,j,k,l), ``S`` (i,j,k,l,m)
    and ``term_scale``, the magnitude of the summands forming S.
    """
    n = js.n
    dg = np.stack([js.d(g, i) for i in range(n)])  # dg[c, i, j] = d_c g_ij
    # first kind: Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    G1 = 0.5 * (np.einsum("ijl...->lij...", dg) + np.einsum("jil...->lij...", dg) - dg)
    ginv = js.inv(g)
    Gam = np.einsum("kla,lijb,abc->kijc", ginv, G1, js._prod)  # Gam[k,i,j] = Gamma^k_ij
    dGam = np.stack([js.d(Gam, c) for c in range(n)])  # dGam[c,a,i,j]
    # R^a_{bcd} = d_c Gam^a_{db} - d_d Gam^a_{cb} + Gam^a_{ce} Gam^e_{db} - Gam^a_{de} Gam^e_{cb}
    t1 = np.einsum("cadb...->abcd...", dGam)
    t2 = np.einsum("dacb...->abcd...", dGam)
    quad = np.einsum("acex,edby,xyz->abcdz", Gam, Gam, js._prod)
    Rup = t1 - t2 + quad - np.einsum("abcd...->abdc...", quad)
    # R_ijkl = -g_la R^a_{kij}
    R = -np.einsum("lax,akijy,xyz->ijklz", g, Rup, js._prod)
    Gam0 = Gam[..., 0]
    R0 = R[..., 0]
    dR = np.stack([js.d(R, m)[..., 0] for m in range(n)], axis=-1)  # dR[i,j,k,l,m]
    c1 = np.einsum("ami,ajkl->ijklm", Gam0, R0)
    c2 = np.einsum("amj,iakl->ijklm", Gam0, R0)
    c3 = np.einsum("amk,ijal->ijklm", Gam0, R0)
    c4 = np.einsum("aml,ijka->ijklm", Gam0, R0)
    S = dR - c1 - c2 - c3 - c4
    scale = max(float(np.max(np.abs(x))) for x in (dR, c1, c2, c3, c4))
    return {"gamma": Gam0, "R": R0, "S": S, "term_scale": scale, "g": g[..., 0]}
