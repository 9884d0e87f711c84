"""Linear algebra over Z/p^N built on the Smith elimination kernel."""
from __future__ import annotations

from typing import List, Optional

import numpy as np

from . import _kernels


def vp(x: int, p: int, cap: Optional[int] = None) -> int:
    """p-adic valuation of an integer; 0 maps to ``cap`` (must be given)."""
    x = int(x)
    if x == 0:
        if cap is None:
            raise ValueError("valuation of 0 needs a cap")
        return cap
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v if cap is None else min(v, cap)


def snf(A, p: int, N: int):
    return _kernels.snf_mod(A, p, N)


def matmul(A, B, m: int):
    return _kernels.matmul_mod(A, B, m)


def matvec(A, x, m: int):
    x = np.asarray(x, dtype=object).reshape(-1, 1)
    return np.asarray(_kernels.matmul_mod(A, x, m)).reshape(-1)


def solve(A, b, p: int, N: int):
    """One solution x of A x = b mod p^N, or None."""
    m = p ** N
    A = np.asarray(A, dtype=object)
    r, c = A.shape
    b = np.asarray(b, dtype=object).reshape(-1)
    d, U, _, V = snf(A, p, N)
    ub = matvec(U, b, m) if r else np.zeros(0, dtype=object)
    y = [0] * c
    for i in range(r):
        bi = int(ub[i]) % m
        if i < len(d):
            di = int(d[i])
            if bi % di:
                return None
            y[i] = bi // di
        elif bi:
            return None
    if c == 0:
        return np.zeros(0, dtype=object)
    return np.array([int(v) for v in matvec(V, y, m)], dtype=object)


def kernel(A, p: int, N: int) -> List[np.ndarray]:
    """Generators of {x : A x = 0 mod p^N}."""
    m = p ** N
    A = np.asarray(A, dtype=object)
    r, c = A.shape
    d, _, _, V = snf(A, p, N)
    gens = []
    for i in range(c):
        col = np.array([int(v) for v in np.asarray(V)[:, i]], dtype=object)
        if i < len(d):
            v = vp(int(d[i]), p)
            if v == 0:
                continue
            col = (col * p ** (N - v)) % m
        gens.append(col)
    return gens


def image_log_size(A, p: int, N: int) -> int:
    """log_p of the size of the column span of A in (Z/p^N)^r."""
    d, _, _, _ = snf(A, p, N)
    return sum(N - vp(int(x), p) for x in d)


def rank_mod_p(A, p: int) -> int:
    d, _, _, _ = snf(np.asarray(A, dtype=object) % p, p, 1)
    return len(d)
