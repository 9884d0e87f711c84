"""Truncated Iwasawa algebra: omega_n, norm elements, the involution
T -> T* = (q - T)/(T + 1) with q = p^(kappa+1), and ideal arithmetic in
Lambda_{n,N} = Z/p^N[T]/(omega_n).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels, linalg
from .errors import (BadLevels, InconsistentParameters, InputError, LevelBelowKappa,
                     NoSolutionAtPrecision, NotDistinguished, PrecisionTooLow)
from .padic import PadicInt, Valuation, padd, pdivmod, pmul, psub, ptrim
from .linalg import vp


@lru_cache(maxsize=64)
def _binom_row(P: int) -> Tuple[int, ...]:
    return tuple(comb(P, k) for k in range(P + 1))


def _binom_poly(P: int) -> List[int]:
    return list(_binom_row(P))


@dataclass(frozen=True)
class LambdaElem:
    """An element of Z_p[T] with exact integer coefficients (low degree first)."""

    p: int
    kappa: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        if self.kappa < 0:
            raise InputError("kappa must be >= 0")
        object.__setattr__(self, "coeffs", tuple(ptrim([int(c) for c in self.coeffs])))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _check(self, other):
        if (self.p, self.kappa) != (other.p, other.kappa):
            raise InconsistentParameters("mixed (p, kappa)")

    def __mul__(self, other: "LambdaElem") -> "LambdaElem":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return LambdaElem(self.p, self.kappa, ())
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return LambdaElem(self.p, self.kappa, out)

    def __add__(self, other: "LambdaElem") -> "LambdaElem":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return LambdaElem(self.p, self.kappa, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return LambdaElem(self.p, self.kappa, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def is_distinguished(self) -> bool:
        c = self.coeffs
        return bool(c) and c[-1] == 1 and all(x % self.p == 0 for x in c[:-1])

    def to_json(self):
        return {"p": self.p, "kappa": self.kappa, "coeffs": list(self.coeffs)}


def _level_size(p: int, kappa: int, n: int) -> int:
    if n < kappa:
        raise LevelBelowKappa(f"level {n} below kappa={kappa}")
    return p ** (n - kappa)


def omega(p: int, kappa: int, n: int) -> LambdaElem:
    P = _level_size(p, kappa, n)
    c = _binom_poly(P)
    c[0] = 0
    return LambdaElem(p, kappa, c)


def norm_elem(p: int, kappa: int, m: int, n: int) -> LambdaElem:
    """N_{m,n} = omega_m / omega_n (exact)."""
    if not m > n:
        raise BadLevels(f"need m > n, got m={m}, n={n}")
    _level_size(p, kappa, n)
    wm, wn = omega(p, kappa, m), omega(p, kappa, n)
    # exact division of integer polynomials by a monic divisor
    a = list(wm.coeffs)
    b = list(wn.coeffs)
    # omega_n = T * (monic), strip the common factor T first
    a, b = a[1:], b[1:]
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for d in range(len(a) - 1, db - 1, -1):
        c = a[d]
        q[d - db] = c
        if c:
            for i in range(db + 1):
                a[d - db + i] -= c * b[i]
    if any(a[:db]):
        raise ArithmeticError("omega_n does not divide omega_m")
    return LambdaElem(p, kappa, q)


def duality_exponent(p: int, kappa: int, n: int) -> int:
    """e = v_p((q+1)^(p^(n-kappa)) - 1): the p-precision to which T* is defined on Lambda_n."""
    P = _level_size(p, kappa, n)
    q = p ** (kappa + 1)
    return vp((q + 1) ** P - 1, p)


@dataclass(frozen=True)
class LambdaQuot:
    """An element of Lambda_{n,N}; ``truncated`` records a forced precision drop."""

    p: int
    kappa: int
    n: int
    N: int
    coeffs: Tuple[int, ...]
    truncated: bool = field(default=False, compare=False)

    def __post_init__(self):
        P = _level_size(self.p, self.kappa, self.n)
        if self.N < 1:
            raise InputError("precision must be >= 1")
        m = self.p ** self.N
        c = [int(x) for x in self.coeffs]
        if len(c) > P:
            c = pdivmod(c, list(omega(self.p, self.kappa, self.n).coeffs), m)[1]
        c = [x % m for x in c] + [0] * (P - len(c))
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def P(self) -> int:
        return len(self.coeffs)

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    @classmethod
    def from_coeffs(cls, p, kappa, n, N, coeffs, truncated=False) -> "LambdaQuot":
        return cls(p, kappa, n, N, tuple(coeffs), truncated)

    @classmethod
    def from_elem(cls, f: LambdaElem, n: int, N: int) -> "LambdaQuot":
        return cls(f.p, f.kappa, n, N, f.coeffs)

    @classmethod
    def const(cls, p, kappa, n, N, c: int) -> "LambdaQuot":
        return cls(p, kappa, n, N, (c,))

    @classmethod
    def gen(cls, p, kappa, n, N) -> "LambdaQuot":
        return cls(p, kappa, n, N, (0, 1))

    def like(self, coeffs, N=None, truncated=None) -> "LambdaQuot":
        return LambdaQuot(self.p, self.kappa, self.n, self.N if N is None else N, tuple(coeffs),
                          self.truncated if truncated is None else truncated)

    def _align(self, other):
        if isinstance(other, int):
            return self, self.const(self.p, self.kappa, self.n, self.N, other)
        if (self.p, self.kappa, self.n) != (other.p, other.kappa, other.n):
            raise InconsistentParameters("mixed (p, kappa, n)")
        if self.N == other.N:
            return self, other
        N = min(self.N, other.N)
        return self.reduce(N), other.reduce(N)

    def reduce(self, N: int) -> "LambdaQuot":
        if N >= self.N:
            return self
        return self.like(self.coeffs, N=N, truncated=True)

    def __add__(self, other):
        a, b = self._align(other)
        return a.like([x + y for x, y in zip(a.coeffs, b.coeffs)], truncated=a.truncated or b.truncated)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return a.like([x - y for x, y in zip(a.coeffs, b.coeffs)], truncated=a.truncated or b.truncated)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return self.like([-x for x in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, int):
            return self.like([x * other for x in self.coeffs])
        a, b = self._align(other)
        w = omega_reducer(a.p, a.kappa, a.n)
        out = _kernels.polymulmod([a.coeffs], [b.coeffs], w, a.modulus)[0]
        return a.like([int(x) for x in out], truncated=a.truncated or b.truncated)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.const(self.p, self.kappa, self.n, self.N, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_unit(self) -> bool:
        # Lambda_{n,N} is local with maximal ideal (p, T)
        return self.coeffs[0] % self.p != 0

    def inverse(self) -> "LambdaQuot":
        if not self.is_unit():
            raise ArithmeticError("not a unit of Lambda_{n,N}")
        # Newton iteration y <- y (2 - x y), starting from the constant inverse
        y = self.const(self.p, self.kappa, self.n, self.N, pow(self.coeffs[0], -1, self.p))
        one = self.const(self.p, self.kappa, self.n, self.N, 1)
        for _ in range(2 * (self.N + self.P).bit_length() + 2):
            y = y * (2 - self * y)
            if self * y == one:
                return y
        raise ArithmeticError("inverse iteration did not converge")

    def __eq__(self, other):
        if isinstance(other, LambdaQuot):
            return (self.p, self.kappa, self.n, self.N, self.coeffs) == (other.p, other.kappa, other.n, other.N, other.coeffs)
        if isinstance(other, int):
            return self == self.const(self.p, self.kappa, self.n, self.N, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.kappa, self.n, self.N, self.coeffs))

    def poly(self) -> List[int]:
        return ptrim(list(self.coeffs))

    def to_json(self):
        return {"p": self.p, "kappa": self.kappa, "n": self.n, "N": self.N, "coeffs": list(self.coeffs),
                "truncated": self.truncated}


def omega_reducer(p: int, kappa: int, n: int) -> np.ndarray:
    """Low coefficients of the monic omega_n, the reduction rule used by the kernels."""
    P = _level_size(p, kappa, n)
    return np.array(_binom_poly(P)[:P] + [1], dtype=object) - np.array([1] + [0] * P, dtype=object)


def mult_matrix(x: LambdaQuot) -> np.ndarray:
    """Matrix of multiplication by x on the basis 1, T, ..., T^(P-1)."""
    P = x.P
    basis = np.eye(P, dtype=object)
    w = omega_reducer(x.p, x.kappa, x.n)
    cols = _kernels.polymulmod(np.array([x.coeffs] * P, dtype=object), basis, w, x.modulus)
    return np.asarray(cols, dtype=object).T.copy()


def tstar(p: int, kappa: int, n: int, N: int) -> LambdaQuot:
    """T* = (q - T)(T + 1)^(P - 1) in Lambda_{n,N}, using (T+1)^P = 1 there."""
    P = _level_size(p, kappa, n)
    q = p ** (kappa + 1)
    tp1 = LambdaQuot(p, kappa, n, N, (1, 1))
    return LambdaQuot(p, kappa, n, N, (q, -1)) * tp1 ** (P - 1)


def star(f, n: int, N: int, p: Optional[int] = None, kappa: Optional[int] = None) -> LambdaQuot:
    """Image of a genuine polynomial f(T) under T -> T* in Lambda_{n,N}.

    This is the ring map Z_p[T] -> Lambda_{n,N}; it is defined at every N.
    """
    if isinstance(f, LambdaElem):
        p, kappa, coeffs = f.p, f.kappa, list(f.coeffs)
    elif isinstance(f, LambdaQuot):
        p, kappa, coeffs = f.p, f.kappa, list(f.coeffs)
    else:
        coeffs = [int(c) for c in f]
    ts = tstar(p, kappa, n, N)
    acc = LambdaQuot.const(p, kappa, n, N, 0)
    for c in reversed(coeffs):
        acc = acc * ts + c
    return acc


def involution(x: LambdaQuot) -> LambdaQuot:
    """The automorphism T -> T* of Lambda_n at precision min(N, e).

    T* is only a ring endomorphism of Lambda/(omega_n, p^N) when
    p^N divides omega_n(T*) = (q+1)^P - 1, i.e. N <= e. Above e the result
    is truncated to p^e and flagged.
    """
    e = duality_exponent(x.p, x.kappa, x.n)
    Ne = min(x.N, e)
    y = star(list(x.coeffs), x.n, Ne, x.p, x.kappa)
    return y.like(y.coeffs, truncated=x.truncated or Ne < x.N)


@dataclass
class DualityReport:
    t: LambdaQuot
    e: int
    c: PadicInt
    identity_holds: bool
    lifted_identity_holds: bool

    def to_json(self):
        return {"t": list(self.t.coeffs), "e": self.e, "c": self.c.residue, "c_precision": self.c.N,
                "identity_holds": self.identity_holds, "lifted_identity_holds": self.lifted_identity_holds}


def check_omega_duality(p: int, kappa: int, n: int, N: int) -> DualityReport:
    """omega_n + t omega_n* = (q+1)^P - 1 = p^e c with t = (T+1)^P.

    The identity is asserted in Lambda_{n,N} and, where t and omega_n are
    not yet trivial, in Lambda_{n+2,N}.
    """
    if n <= kappa:
        raise LevelBelowKappa("duality check needs n > kappa")
    P = _level_size(p, kappa, n)
    q = p ** (kappa + 1)
    total = (q + 1) ** P - 1
    e = vp(total, p)
    if N <= e:
        raise PrecisionTooLow(f"N={N} must exceed e={e}")
    c = PadicInt(p, N - e, total // p ** e)
    w = omega(p, kappa, n)
    results = []
    for level in (n, n + 2):
        t = LambdaQuot(p, kappa, level, N, (1, 1)) ** P
        lhs = LambdaQuot.from_elem(w, level, N) + t * star(w, level, N)
        results.append((t, lhs == LambdaQuot.const(p, kappa, level, N, total)))
    t_n = results[0][0]
    return DualityReport(t_n, e, c, results[0][1], results[1][1])


def ideal_p_content(f: LambdaElem, n: int, N: int) -> Valuation:
    """Least c with p^c in (f, omega_n) + p^N, via the multiplication lattice of f in Lambda_{n,N}."""
    if not f.is_distinguished():
        raise NotDistinguished("f must be monic with non-leading coefficients divisible by p")
    x = LambdaQuot.from_elem(f, n, N)
    M = mult_matrix(x)
    P = x.P
    for c in range(N):
        target = [f.p ** c] + [0] * (P - 1)
        if linalg.solve(M, target, f.p, N) is not None:
            return Valuation(c)
    return Valuation(N, capped=True)


@dataclass
class AnglesReport:
    m: int
    l: int
    lprime: int
    membership: bool
    binomial_valuations: List[int]
    a: Optional[LambdaQuot] = None
    b: Optional[LambdaQuot] = None
    a_is_unit: Optional[bool] = None

    def to_json(self):
        return {"m": self.m, "l": self.l, "l_prime": self.lprime, "membership": self.membership,
                "binomial_valuations": self.binomial_valuations,
                "a": None if self.a is None else list(self.a.coeffs),
                "b": None if self.b is None else list(self.b.coeffs), "a_is_unit": self.a_is_unit}


def angles_membership(p: int, kappa: int, m: int) -> AnglesReport:
    """omega_m lies in (p^l', T^(p^(l'+1))): v_p(C(p^l, k)) >= l' for 0 < k < p^(l'+1)."""
    if m <= kappa:
        raise LevelBelowKappa("need m > kappa")
    l = m - kappa
    lp = l // 2
    P = p ** l
    vals = [vp(comb(P, k), p) for k in range(1, min(p ** (lp + 1), P + 1))]
    return AnglesReport(m, l, lp, all(v >= lp for v in vals), vals)


def angles_decompose(p: int, kappa: int, m: int, N: int, require_unit: bool = True) -> AnglesReport:
    """Solve N_m* = a p^l' + b N_{kappa+l'+1} in Lambda_{m,N}, N_j = omega_j / T.

    With ``require_unit`` a solution with a(0) a unit is demanded; when the
    affine solution set has none, NoSolutionAtPrecision is raised.
    """
    rep = angles_membership(p, kappa, m)
    lp = rep.lprime
    target = star(norm_elem(p, kappa, m, kappa) if m > kappa else LambdaElem(p, kappa, (1,)), m, N)
    nb = LambdaQuot.from_elem(norm_elem(p, kappa, kappa + lp + 1, kappa), m, N)
    P = target.P
    A = np.concatenate([np.eye(P, dtype=object) * p ** lp, mult_matrix(nb)], axis=1)
    x0 = linalg.solve(A, list(target.coeffs), p, N)
    if x0 is None:
        raise NoSolutionAtPrecision("N_m* not in (p^l', N_{l'+1}) at this precision")
    sol = x0
    if require_unit and int(x0[0]) % p == 0:
        sol = None
        for g in linalg.kernel(A, p, N):
            if int(g[0]) % p:
                sol = (x0 + g) % p ** N
                break
        if sol is None:
            raise NoSolutionAtPrecision("every solution has a(0) divisible by p; no unit a exists")
    a = LambdaQuot(p, kappa, m, N, tuple(int(v) for v in sol[:P]))
    b = LambdaQuot(p, kappa, m, N, tuple(int(v) for v in sol[P:]))
    assert a * p ** lp + b * nb == target
    rep.a, rep.b, rep.a_is_unit = a, b, a.is_unit()
    return rep


@dataclass
class NormExpansion:
    p: int
    norm: List[int]
    h: List[int]
    h3: List[int]
    first_ok: bool
    second_ok: bool
    h3_unit: bool

    def to_json(self):
        return dict(self.__dict__)


def norm_expansion_check(p: int) -> NormExpansion:
    """N = ((theta+1)^p - 1)/theta = p + theta h(theta) = p h3(theta) + theta^(p-1), over Z."""
    if p < 2:
        raise InputError("p must be >= 2")
    norm = [comb(p, k) for k in range(1, p + 1)]
    h = [comb(p, k) for k in range(2, p + 1)]
    h3 = [comb(p, k) // p for k in range(1, p)]
    first = [p] + h
    second = [p * c for c in h3] + [0] * (p - len(h3))
    second[p - 1] += 1
    return NormExpansion(p, norm, h, h3, first == norm, second == norm, h3[0] % p != 0)


# ------------------------------------------------------------------ congruence systems

@dataclass
class Constraint:
    """sum_k coeffs[k] * x_k - rhs  lies in (or, with member=False, outside) the ideal."""

    coeffs: Sequence[Sequence[int]]
    rhs: Sequence[int] = ()
    ideal: Sequence[Sequence[int]] = ()
    member: bool = True


@dataclass
class SystemSolution:
    solvable: bool
    assignment: Dict[str, List[int]]
    verdict: str

    def to_json(self):
        return {"solvable": self.solvable, "assignment": self.assignment, "verdict": self.verdict}


class _Ring:
    """Coefficient bookkeeping for Z/p^N[T] (degree-bounded) or Lambda_{level,N}."""

    def __init__(self, p, kappa, N, level, width):
        self.p, self.kappa, self.N, self.level = p, kappa, N, level
        self.m = p ** N
        self.width = width

    def reduce(self, poly):
        poly = [int(c) % self.m for c in poly]
        if self.level is not None:
            poly = pdivmod(poly, list(omega(self.p, self.kappa, self.level).coeffs), self.m)[1]
        if len(ptrim(poly)) > self.width:
            raise InputError("polynomial exceeds the working degree bound")
        return ptrim(poly) + [0] * (self.width - len(ptrim(poly)))

    def mul_matrix(self, c, in_width):
        cols = []
        for j in range(in_width):
            cols.append(self.reduce(pmul([0] * j + [1], [int(v) for v in c], self.m)))
        if not cols:
            return np.zeros((self.width, 0), dtype=object)
        return np.array(cols, dtype=object).T


def _member(ring, t, gens, mult_width):
    if not gens:
        return not any(int(v) % ring.m for v in t)
    A = np.concatenate([ring.mul_matrix(g, mult_width) for g in gens], axis=1)
    return linalg.solve(A, t, ring.p, ring.N) is not None


def solve_congruence_system(constraints: Sequence[Constraint], names: Sequence[str], degree_bound: int, N: int,
                            p: int, kappa: int = 0, level: Optional[int] = None, seed: int = 0,
                            search: int = 200) -> SystemSolution:
    """Find polynomials x_k (degree <= degree_bound) satisfying every constraint mod p^N.

    Membership constraints are linear and solved exactly; non-membership
    constraints are checked on candidates from the affine solution space.
    """
    nvars = len(names)
    if any(len(c.coeffs) != nvars for c in constraints):
        raise InconsistentParameters("each constraint needs one coefficient per unknown")
    if not constraints:
        return SystemSolution(True, {k: [] for k in names}, "empty system")
    if level is not None:
        width = _level_size(p, kappa, level)
        dvar = min(degree_bound + 1, width)
        mult_width = width
    else:
        maxdeg = max([len(ptrim(x)) for c in constraints for x in list(c.coeffs) + [c.rhs] + list(c.ideal)] + [1])
        dvar = degree_bound + 1
        mult_width = dvar + maxdeg
        width = mult_width + maxdeg
    ring = _Ring(p, kappa, N, level, width)
    m = ring.m

    blocks, rhs = [], []
    n_mult = 0
    for c in constraints:
        if c.member:
            n_mult += len(c.ideal) * mult_width
    col = 0
    for c in constraints:
        if not c.member:
            continue
        left = [ring.mul_matrix(x, dvar) for x in c.coeffs]
        right = np.zeros((width, n_mult), dtype=object)
        for g in c.ideal:
            right[:, col:col + mult_width] = -ring.mul_matrix(g, mult_width) % m
            col += mult_width
        blocks.append(np.concatenate(left + [right], axis=1) if left or n_mult else np.zeros((width, 0), dtype=object))
        rhs.extend(ring.reduce(c.rhs))
    nunk = nvars * dvar
    if blocks:
        A = np.concatenate(blocks, axis=0)
        x0 = linalg.solve(A, rhs, p, N) if A.shape[1] else (None if any(v % m for v in rhs) else np.zeros(0, dtype=object))
        if x0 is None:
            return SystemSolution(False, {}, "Unsolvable: membership constraints inconsistent at these bounds")
        kern = linalg.kernel(A, p, N) if A.shape[1] else []
    else:
        x0 = np.zeros(nunk, dtype=object)
        kern = [np.eye(nunk, dtype=object)[i] for i in range(nunk)]

    def check(x):
        for c in constraints:
            if c.member:
                continue
            t = [0] * width
            for k in range(nvars):
                t = [(a + b) % m for a, b in zip(t, ring.reduce(pmul([int(v) for v in c.coeffs[k]], [int(v) for v in x[k * dvar:(k + 1) * dvar]], m)))]
            t = [(a - b) % m for a, b in zip(t, ring.reduce(c.rhs))]
            if _member(ring, t, list(c.ideal), mult_width):
                return False
        return True

    rng = random.Random(seed)
    candidates = [x0] + [(x0 + g) % m for g in kern]
    tried = 0
    while tried < search + len(candidates):
        if tried < len(candidates):
            x = candidates[tried]
        elif kern:
            x = x0.copy()
            for g in kern:
                x = (x + rng.randrange(m) * g) % m
        else:
            break
        tried += 1
        if check(x):
            assignment = {name: ptrim([int(v) for v in x[k * dvar:(k + 1) * dvar]]) for k, name in enumerate(names)}
            return SystemSolution(True, assignment, "solved")
    return SystemSolution(False, {}, "Unsolvable: no candidate met the non-membership constraints at these bounds")
