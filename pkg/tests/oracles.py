"""Independent reference computations used by the tests.

Everything here is brute force or goes through sympy over Z/Q, sharing no
code with the package."""
from __future__ import annotations

import itertools
from math import comb

import numpy as np
import sympy


def vp(x: int, p: int) -> int:
    x = abs(int(x))
    assert x != 0
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _polydivmod_fp(a, b, p):
    a = [c % p for c in a]
    inv = pow(b[-1], -1, p)
    q = [0] * max(len(a) - len(b) + 1, 1)
    for d in range(len(a) - 1, len(b) - 2, -1):
        c = a[d] * inv % p
        q[d - len(b) + 1] = c
        for i, bi in enumerate(b):
            a[d - len(b) + 1 + i] = (a[d - len(b) + 1 + i] - c * bi) % p
    rem = a[:len(b) - 1]
    while rem and rem[-1] == 0:
        rem.pop()
    return q, rem


def monic_polys(p, d):
    for low in itertools.product(range(p), repeat=d):
        yield list(low) + [1]


def factor_fp_exhaustive(f, p):
    """Monic irreducible factors (with multiplicity) by trial division over all monic polynomials."""
    f = [c % p for c in f]
    out = []
    d = 1
    while len(f) - 1 >= 2 * d:
        for g in monic_polys(p, d):
            while True:
                q, r = _polydivmod_fp(f, g, p)
                if r:
                    break
                out.append(g)
                f = q
        d += 1
    if len(f) > 1:
        out.append(f)
    return out


def omega_coeffs(p, kappa, n):
    P = p ** (n - kappa)
    return [0] + [comb(P, k) for k in range(1, P + 1)]


def smith_p_exps(relations, p):
    """p-parts of the invariant factors of Z^r / column span, via sympy over ZZ."""
    from sympy.matrices.normalforms import smith_normal_form
    M = sympy.Matrix(np.asarray(relations, dtype=object).tolist())
    S = smith_normal_form(M, domain=sympy.ZZ)
    d = [abs(int(S[i, i])) for i in range(min(S.shape))]
    assert all(x != 0 for x in d)
    return sorted((vp(x, p) for x in d if vp(x, p) > 0), reverse=True)


def resultant_vp(f, p, kappa, n):
    """v_p |Z_p[T]/(f, omega_n)| for monic f with rational coefficients (low degree first)."""
    T = sympy.Symbol("T")
    F = sympy.Poly(list(reversed([sympy.Rational(c) for c in f])), T)
    w = sympy.Poly(list(reversed(omega_coeffs(p, kappa, n))), T)
    r = sympy.Rational(sympy.resultant(F, w))
    return vp(r.p, p) - (vp(r.q, p) if r.q != 1 else 0)


def group_elements(exps, p):
    return [np.array(v, dtype=object) for v in itertools.product(*[range(p ** e) for e in exps])]


def elem_log_order(v, exps, p):
    best = 0
    for x, e in zip(v, exps):
        x = int(x) % p ** e
        if x:
            best = max(best, e - vp(x, p))
    return best


def apply(M, v, exps, p):
    w = np.asarray(M, dtype=object).dot(np.asarray(v, dtype=object))
    return np.array([int(a) % p ** e for a, e in zip(w, exps)], dtype=object)


def span(gens, exps, p):
    """Closure under addition of a set of vectors (brute force)."""
    key = lambda v: tuple(int(a) % p ** e for a, e in zip(v, exps))
    S = {key([0] * len(exps))}
    frontier = list(S)
    gens = [key(g) for g in gens]
    while frontier:
        nxt = []
        for s in frontier:
            for g in gens:
                t = key([a + b for a, b in zip(s, g)])
                if t not in S:
                    S.add(t)
                    nxt.append(t)
        frontier = nxt
    return S
