"""Hot kernels: Smith elimination over Z/p^N, batched truncated polynomial
products, modular matrix products and element orders.

Each kernel has a numba ``@njit`` version working on int64 arrays and a
numpy version which also runs on ``dtype=object`` arrays (arbitrary size
moduli). The numba path is used when numba imports, the modulus fits
comfortably in int64 (products below 2**63) and ``IWALAB_KERNELS`` is not
set to ``numpy``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False

INT64_SAFE = 1 << 31


def _backend_from_env() -> str:
    name = os.environ.get("IWALAB_KERNELS", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        name = "numba"
    if name == "numba" and not HAVE_NUMBA:
        name = "numpy"
    return name


BACKEND = _backend_from_env()


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return nb.njit(*args, **kwargs)
    return lambda f: f


def set_backend(name: str) -> str:
    """Switch backend at runtime (used by the benchmark); returns the old one."""
    global BACKEND
    old = BACKEND
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    BACKEND = name
    return old


def _as_array(A, m):
    """int64 array when safe, otherwise an object array of python ints."""
    if m < INT64_SAFE:
        A = np.asarray(A)
        if A.dtype == object:
            return (A % m).astype(np.int64)
        return A.astype(np.int64) % m
    out = np.empty(np.shape(A), dtype=object)
    flat = np.asarray(A, dtype=object).ravel()
    out.ravel()[:] = [int(v) % m for v in flat]
    return out


def _eye(n, like):
    if like.dtype == object:
        E = np.zeros((n, n), dtype=object)
        E[:] = 0
        for i in range(n):
            E[i, i] = 1
        return E
    return np.eye(n, dtype=np.int64)


# ---------------------------------------------------------------- numpy

def _vp_array(A, p, N):
    """Elementwise p-adic valuation capped at N (zero entries get N)."""
    out = np.full(A.shape, N, dtype=np.int64)
    work = A.copy()
    nz = work != 0
    v = 0
    while v < N and nz.any():
        divisible = nz & (work % p == 0)
        out[nz & ~divisible] = v
        nz = divisible
        work = np.where(divisible, work // p, work)
        v += 1
    return out


def snf_numpy(A, p: int, N: int):
    m = p ** N
    A = _as_array(A, m)
    r, c = A.shape
    U = _eye(r, A)
    Ui = _eye(r, A)
    V = _eye(c, A)
    diag = []
    k = 0
    while k < min(r, c):
        sub = A[k:, k:]
        if not (sub != 0).any():
            break
        vals = _vp_array(sub, p, N)
        i, j = np.unravel_index(int(np.argmin(vals)), vals.shape)
        i += k
        j += k
        v = int(vals[i - k, j - k])
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            U[[k, i], :] = U[[i, k], :]
            Ui[:, [k, i]] = Ui[:, [i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            V[:, [k, j]] = V[:, [j, k]]
        pv = p ** v
        u = int(A[k, k]) // pv
        uinv = pow(u, -1, m)
        A[k, :] = (A[k, :] * uinv) % m
        U[k, :] = (U[k, :] * uinv) % m
        Ui[:, k] = (Ui[:, k] * u) % m
        f = A[:, k] // pv
        f[k] = 0
        if (f != 0).any():
            A[:] = (A - np.outer(f, A[k, :]) % m) % m
            U[:] = (U - np.outer(f, U[k, :]) % m) % m
            Ui[:, k] = (Ui[:, k] + ((Ui * f) % m).sum(axis=1)) % m
        g = A[k, :] // pv
        g[k] = 0
        if (g != 0).any():
            A[k, :] = np.where(np.arange(c) == k, A[k, :], 0)
            V[:] = (V - np.outer(V[:, k], g) % m) % m
        diag.append(pv)
        k += 1
    return diag, U, Ui, V


def polymulmod_numpy(a, b, w, m: int):
    """Rows of a times rows of b modulo the monic w (low degree first) and m."""
    a = _as_array(a, m)
    b = _as_array(b, m)
    w = _as_array(w, m)
    k, P = a.shape
    prod = np.zeros((k, 2 * P - 1), dtype=a.dtype)
    for i in range(P):
        prod[:, i:i + P] = (prod[:, i:i + P] + (a[:, i:i + 1] * b) % m) % m
    for d in range(2 * P - 2, P - 1, -1):
        c = prod[:, d:d + 1]
        prod[:, d - P:d] = (prod[:, d - P:d] - (c * w[:P]) % m) % m
        prod[:, d] = 0
    return prod[:, :P]


def matmul_numpy(A, B, m: int):
    A = _as_array(A, m)
    B = _as_array(B, m)
    if A.dtype != object and A.shape[1] * (m - 1) ** 2 < (1 << 63):
        return (A @ B) % m
    return (A.astype(object) @ B.astype(object)) % m


def orders_numpy(X, exps, p: int):
    """log_p of the order of each row of X in the group with these exponents."""
    X = np.asarray(X)
    exps = np.asarray(exps, dtype=np.int64)
    if X.shape[1] == 0:
        return np.zeros(X.shape[0], dtype=np.int64)
    top = int(exps.max())
    vals = _vp_array(X % (p ** top), p, top)
    orders = np.where(X % (p ** exps) == 0, 0, exps - vals)
    return orders.max(axis=1)


# ---------------------------------------------------------------- numba

@njit(cache=True)
def _modinv_nb(a, m):
    t, newt = 0, 1
    r, newr = m, a % m
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += m
    return t


@njit(cache=True)
def _snf_nb(A, p, N, m):
    r, c = A.shape
    U = np.eye(r, dtype=np.int64)
    Ui = np.eye(r, dtype=np.int64)
    V = np.eye(c, dtype=np.int64)
    diag = np.zeros(min(r, c), dtype=np.int64)
    k = 0
    while k < min(r, c):
        best = N
        bi = -1
        bj = -1
        for i in range(k, r):
            for j in range(k, c):
                x = A[i, j]
                if x != 0:
                    v = 0
                    while x % p == 0:
                        x //= p
                        v += 1
                    if v < best:
                        best = v
                        bi = i
                        bj = j
            if best == 0:
                break
        if bi < 0:
            break
        if bi != k:
            for j in range(c):
                A[k, j], A[bi, j] = A[bi, j], A[k, j]
            for j in range(r):
                U[k, j], U[bi, j] = U[bi, j], U[k, j]
                Ui[j, k], Ui[j, bi] = Ui[j, bi], Ui[j, k]
        if bj != k:
            for i in range(r):
                A[i, k], A[i, bj] = A[i, bj], A[i, k]
            for i in range(c):
                V[i, k], V[i, bj] = V[i, bj], V[i, k]
        pv = 1
        for _ in range(best):
            pv *= p
        u = A[k, k] // pv
        uinv = _modinv_nb(u, m)
        for j in range(c):
            A[k, j] = (A[k, j] * uinv) % m
        for j in range(r):
            U[k, j] = (U[k, j] * uinv) % m
            Ui[j, k] = (Ui[j, k] * u) % m
        for i in range(r):
            if i == k or A[i, k] == 0:
                continue
            f = A[i, k] // pv
            for j in range(c):
                A[i, j] = (A[i, j] - (f * A[k, j]) % m) % m
            for j in range(r):
                U[i, j] = (U[i, j] - (f * U[k, j]) % m) % m
                Ui[j, k] = (Ui[j, k] + (f * Ui[j, i]) % m) % m
        for j in range(c):
            if j == k or A[k, j] == 0:
                continue
            g = A[k, j] // pv
            A[k, j] = 0
            for i in range(c):
                V[i, j] = (V[i, j] - (g * V[i, k]) % m) % m
        diag[k] = pv
        k += 1
    return diag[:k], U, Ui, V


@njit(cache=True)
def _polymulmod_nb(a, b, w, m):
    k, P = a.shape
    out = np.zeros((k, P), dtype=np.int64)
    prod = np.zeros(2 * P - 1, dtype=np.int64)
    for row in range(k):
        for d in range(2 * P - 1):
            prod[d] = 0
        for i in range(P):
            ai = a[row, i]
            if ai == 0:
                continue
            for j in range(P):
                prod[i + j] = (prod[i + j] + ai * b[row, j]) % m
        for d in range(2 * P - 2, P - 1, -1):
            cf = prod[d]
            if cf != 0:
                for i in range(P):
                    prod[d - P + i] = (prod[d - P + i] - (cf * w[i]) % m) % m
            prod[d] = 0
        for i in range(P):
            out[row, i] = prod[i]
    return out


@njit(cache=True)
def _matmul_nb(A, B, m):
    r, s = A.shape
    c = B.shape[1]
    out = np.zeros((r, c), dtype=np.int64)
    for i in range(r):
        for t in range(s):
            a = A[i, t]
            if a == 0:
                continue
            for j in range(c):
                out[i, j] = (out[i, j] + a * B[t, j]) % m
    return out


@njit(cache=True)
def _orders_nb(X, exps, p):
    k, r = X.shape
    out = np.zeros(k, dtype=np.int64)
    for row in range(k):
        best = 0
        for i in range(r):
            pe = 1
            for _ in range(exps[i]):
                pe *= p
            x = X[row, i] % pe
            if x == 0:
                continue
            v = 0
            while x % p == 0:
                x //= p
                v += 1
            o = exps[i] - v
            if o > best:
                best = o
        out[row] = best
    return out


def snf_numba(A, p: int, N: int):
    m = p ** N
    A = np.ascontiguousarray(_as_array(A, m), dtype=np.int64)
    diag, U, Ui, V = _snf_nb(A, p, N, m)
    return [int(d) for d in diag], U, Ui, V


# ---------------------------------------------------------------- dispatch

def _use_numba(m: int) -> bool:
    return BACKEND == "numba" and m < INT64_SAFE


def snf_mod(A, p: int, N: int):
    """U A V = diag(d) mod p^N with U, V invertible; returns (d, U, U^-1, V).

    ``d`` lists the nonzero pivots p^v in order; rows/columns beyond
    ``len(d)`` of the reduced matrix vanish mod p^N.
    """
    A = np.asarray(A, dtype=object)
    if A.ndim != 2 or 0 in A.shape:
        r = A.shape[0] if A.ndim == 2 else 0
        c = A.shape[1] if A.ndim == 2 else 0
        m = p ** N
        like = np.zeros(0, dtype=np.int64 if m < INT64_SAFE else object)
        return [], _eye(r, like), _eye(r, like), _eye(c, like)
    if _use_numba(p ** N):
        return snf_numba(A, p, N)
    return snf_numpy(A, p, N)


def polymulmod(a, b, w, m: int):
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if _use_numba(m):
        return _polymulmod_nb(np.ascontiguousarray(_as_array(a, m)), np.ascontiguousarray(_as_array(b, m)),
                              np.ascontiguousarray(_as_array(w, m)), m)
    return polymulmod_numpy(a, b, w, m)


def matmul_mod(A, B, m: int):
    # BLAS-backed int64 matmul wins whenever the unreduced sums cannot overflow
    if _use_numba(m) and np.shape(A)[1] * (m - 1) ** 2 >= (1 << 63):
        return _matmul_nb(np.ascontiguousarray(_as_array(A, m)), np.ascontiguousarray(_as_array(B, m)), m)
    return matmul_numpy(A, B, m)


def element_orders(X, exps, p: int):
    exps = np.asarray(exps, dtype=np.int64)
    top = int(exps.max()) if exps.size else 0
    if _use_numba(p ** max(top, 1)) and np.asarray(X).dtype != object:
        return _orders_nb(np.ascontiguousarray(np.asarray(X, dtype=np.int64)), exps, p)
    return orders_numpy(X, exps, p)
