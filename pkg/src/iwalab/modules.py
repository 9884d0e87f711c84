"""Torsion Lambda-modules given by elementary decompositions, their level
quotients M_n = M / omega_n M, growth fitting, Fukuda checks, z-invariants,
shift maps, Weierstrass splitting and Iwasawa duals."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from . import _kernels, linalg
from .errors import (HasMuPart, InfiniteQuotient, InputError, InsufficientLevels, KappaTooSmall, LevelBelowKappa,
                     NoStableSuffix, NotDistinguished, TooLarge)
from .iwasawa import LambdaElem, norm_elem, omega
from .linalg import vp
from .padic import is_prime
from .pgroups import FinAbPGroup, PGroupHom, p_rank_of_span, verify_lemma_ab

Coeff = Union[int, Fraction]


# ------------------------------------------------------------------ polynomials with p-integral rational coefficients

def _fpoly(coeffs) -> Tuple[Fraction, ...]:
    out = [Fraction(c) if not isinstance(c, str) else Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _fmul(a, b) -> Tuple[Fraction, ...]:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _fpoly(out)


def _fpow(a, k: int):
    r = (Fraction(1),)
    for _ in range(k):
        r = _fmul(r, a)
    return r


def _frem(a, b):
    """Exact remainder of a by the monic b."""
    a = list(a)
    db = len(b) - 1
    for d in range(len(a) - 1, db - 1, -1):
        c = a[d]
        if c:
            for i in range(db + 1):
                a[d - db + i] -= c * b[i]
    return _fpoly(a[:db])


def _to_mod(a, p: int, m: int) -> List[int]:
    out = []
    for c in a:
        c = Fraction(c)
        if c.denominator % p == 0:
            raise InputError(f"coefficient {c} is not p-integral")
        out.append(c.numerator * pow(c.denominator, -1, m) % m)
    return out


def _is_p_integral(c: Fraction, p: int) -> bool:
    return Fraction(c).denominator % p != 0


def _cyclotomic_shift(p: int, j: int) -> Tuple[Fraction, ...]:
    """Phi_{p^j}(T + 1) as a monic integer polynomial (Phi_1(T+1) = T)."""
    X = sympy.Symbol("X")
    poly = sympy.Poly(sympy.cyclotomic_poly(p ** j, X).subs(X, X + 1), X)
    return _fpoly(reversed([int(c) for c in poly.all_coeffs()]))


def _fstr(c: Fraction):
    return int(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ------------------------------------------------------------------ summands and modules

@dataclass(frozen=True)
class MuPart:
    mu: int

    def to_json(self):
        return {"mu": self.mu}


@dataclass(frozen=True)
class WeierstrassPart:
    f: Tuple[Fraction, ...]
    k: int = 1

    @property
    def F(self) -> Tuple[Fraction, ...]:
        return _fpow(self.f, self.k)

    @property
    def degree(self) -> int:
        return (len(self.f) - 1) * self.k

    def to_json(self):
        return {"f": [_fstr(c) for c in self.f], "k": self.k}


@dataclass(frozen=True)
class FinitePart:
    """Lambda/(f^k, p^cap): a finite summand (extension beyond the elementary list)."""

    f: Tuple[Fraction, ...]
    k: int
    cap: int

    @property
    def F(self) -> Tuple[Fraction, ...]:
        return _fpow(self.f, self.k)

    @property
    def degree(self) -> int:
        return (len(self.f) - 1) * self.k

    def to_json(self):
        return {"f": [_fstr(c) for c in self.f], "k": self.k, "cap": self.cap}


Summand = Union[MuPart, WeierstrassPart, FinitePart]


def check_distinguished(f: Sequence[Coeff], p: int) -> Tuple[Fraction, ...]:
    f = _fpoly(f)
    if len(f) < 2:
        raise NotDistinguished("f must have degree >= 1")
    if f[-1] != 1:
        raise NotDistinguished(f"f is not monic: leading coefficient {f[-1]}")
    for c in f[:-1]:
        if not _is_p_integral(c, p) or c.numerator % p:
            raise NotDistinguished(f"coefficient {c} is not divisible by {p}")
    return f


def omega_factor(f: Sequence[Fraction], p: int) -> Optional[int]:
    """Smallest j with Phi_{p^j}(T+1) | f (so f shares a factor with every omega_n, n - kappa >= j), else None."""
    d = len(f) - 1
    j = 0
    while (p - 1) * p ** (j - 1) <= d if j else True:
        if not _frem(f, _cyclotomic_shift(p, j)):
            return j
        j += 1
    return None


@dataclass(frozen=True)
class ElemLambdaModule:
    p: int
    kappa: int
    summands: Tuple[Summand, ...] = ()

    def __post_init__(self):
        if not is_prime(self.p):
            raise InputError(f"{self.p} is not prime")
        if self.kappa < 0:
            raise InputError("kappa must be >= 0")
        out = []
        for s in self.summands:
            if isinstance(s, MuPart):
                if s.mu < 1:
                    raise InputError("mu must be >= 1")
                out.append(s)
                continue
            f = check_distinguished(s.f, self.p)
            if s.k < 1:
                raise InputError("k must be >= 1")
            if isinstance(s, FinitePart):
                if s.cap < 1:
                    raise InputError("cap must be >= 1")
                out.append(FinitePart(f, s.k, s.cap))
                continue
            j = omega_factor(f, self.p)
            if j is not None:
                raise InfiniteQuotient(
                    f"f = {[_fstr(c) for c in f]} is divisible by Phi_{self.p}^{j}(T+1), a factor of omega_n for "
                    f"n >= kappa + {j}: M/omega_n M is infinite (the T-part; pass to the A' variant)")
            out.append(WeierstrassPart(f, s.k))
        object.__setattr__(self, "summands", tuple(out))

    @property
    def mu(self) -> int:
        return sum(s.mu for s in self.summands if isinstance(s, MuPart))

    @property
    def lam(self) -> int:
        return sum(s.degree for s in self.summands if isinstance(s, WeierstrassPart))

    @property
    def has_mu(self) -> bool:
        return any(isinstance(s, (MuPart, FinitePart)) for s in self.summands)

    def is_zero(self) -> bool:
        return not self.summands

    def to_json(self):
        return {"p": self.p, "kappa": self.kappa, "summands": [s.to_json() for s in self.summands]}

    @classmethod
    def from_json(cls, data) -> "ElemLambdaModule":
        try:
            p, kappa = int(data["p"]), int(data.get("kappa", 0))
            summands = []
            for s in data.get("summands", []):
                if "mu" in s:
                    summands.append(MuPart(int(s["mu"])))
                elif "cap" in s:
                    summands.append(FinitePart(_fpoly(s["f"]), int(s.get("k", 1)), int(s["cap"])))
                else:
                    summands.append(WeierstrassPart(_fpoly(s["f"]), int(s.get("k", 1))))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad module description: {exc}") from exc
        return cls(p, kappa, tuple(summands))

    @classmethod
    def build(cls, p: int, kappa: int = 0, mu: Sequence[int] = (), f: Sequence[Sequence[Coeff]] = (),
              k: Optional[Sequence[int]] = None) -> "ElemLambdaModule":
        ks = list(k) if k is not None else [1] * len(f)
        return cls(p, kappa, tuple([MuPart(int(m)) for m in mu] + [WeierstrassPart(_fpoly(g), kk) for g, kk in zip(f, ks)]))


def random_module(p: int, rng: np.random.Generator, max_mu: int = 2, max_lambda: int = 4,
                  kappa: Optional[int] = None) -> ElemLambdaModule:
    kappa = int(rng.integers(0, 2)) if kappa is None else kappa
    summands: List[Summand] = []
    mu = int(rng.integers(0, max_mu + 1))
    while mu:
        m = int(rng.integers(1, mu + 1))
        summands.append(MuPart(m))
        mu -= m
    lam = int(rng.integers(0, max_lambda + 1))
    while lam:
        d = int(rng.integers(1, lam + 1))
        k = 1
        if d >= 2 and d % 2 == 0 and rng.random() < 0.3:
            k, d = 2, d // 2
        while True:
            low = [int(p * rng.integers(-p, p + 1)) for _ in range(d)]
            f = _fpoly(low + [1])
            if omega_factor(f, p) is None:
                break
        summands.append(WeierstrassPart(f, k))
        lam -= d * k
    return ElemLambdaModule(p, kappa, tuple(summands))


# ------------------------------------------------------------------ ambient lattices and level quotients

def _companion(g: Sequence[int], m: int) -> np.ndarray:
    d = len(g) - 1
    C = np.zeros((d, d), dtype=object)
    for i in range(d - 1):
        C[i + 1, i] = 1
    for i in range(d):
        C[i, d - 1] = (-int(g[i])) % m
    return C


def _mat_pow(A: np.ndarray, e: int, m: int) -> np.ndarray:
    d = A.shape[0]
    R = np.eye(d, dtype=object)
    B = A % m
    while e:
        if e & 1:
            R = np.asarray(_kernels.matmul_mod(R, B, m), dtype=object)
        B = np.asarray(_kernels.matmul_mod(B, B, m), dtype=object)
        e >>= 1
    return R


def _omega_and_norm(C: np.ndarray, p: int, j: int, m: int):
    """omega(C) = (C+I)^(p^j) - I and N(C) = sum_{i<p} (C+I)^(i p^j) mod m."""
    d = C.shape[0]
    I = np.eye(d, dtype=object)
    B = _mat_pow(C + I, p ** j, m)
    om = (B - I) % m
    N = np.zeros((d, d), dtype=object)
    Bi = I
    for _ in range(p):
        N = (N + Bi) % m
        Bi = np.asarray(_kernels.matmul_mod(Bi, B, m), dtype=object)
    return om, N


def _reduce_basis(p, kappa, n_from, n_to) -> np.ndarray:
    """Matrix of T^i mod omega_{n_to} for i < P(n_from), exact integers."""
    w = list(omega(p, kappa, n_to).coeffs)
    Pf, Pt = p ** (n_from - kappa), p ** (n_to - kappa)
    R = np.zeros((Pt, Pf), dtype=object)
    for i in range(Pf):
        r = _frem(tuple([0] * i + [1]), w) if i >= Pt else tuple(Fraction(x) for x in [0] * i + [1])
        for a, c in enumerate(r):
            R[a, i] = int(c)
    return R


def _mult_basis(poly: Sequence[int], rows: int, cols: int) -> np.ndarray:
    # multiplication by poly on T^i, no reduction (degrees stay below rows)
    M = np.zeros((rows, cols), dtype=object)
    for i in range(cols):
        for a, c in enumerate(poly):
            if c:
                M[i + a, i] = c
    return M


def _block_diag(blocks: List[np.ndarray]) -> np.ndarray:
    r = sum(b.shape[0] for b in blocks)
    c = sum(b.shape[1] for b in blocks)
    out = np.zeros((r, c), dtype=object)
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


@dataclass
class LevelQuotient:
    n: int
    K: int
    group: FinAbPGroup
    coord: np.ndarray       # rows: ambient -> group coordinates
    section: np.ndarray     # columns: group generators as ambient vectors
    T: PGroupHom
    dims: List[int]         # ambient dimension per summand

    def to_json(self):
        return {"n": self.n, "exponents": list(self.group.exps), "v_p_order": self.group.log_order,
                "p_rank": self.group.rank, "T": [[int(x) for x in row] for row in self.T.matrix]}


class Tower:
    """Level quotients M_n for n in [kappa, n_max] with projection M_{n+1} -> M_n
    (reduction) and lift M_n -> M_{n+1} (multiplication by N_{n+1,n}), all computed
    over Z/p^K for a common K chosen adaptively."""

    def __init__(self, M: ElemLambdaModule, n_max: int, K: Optional[int] = None):
        if n_max < M.kappa:
            raise LevelBelowKappa(f"level {n_max} below kappa={M.kappa}")
        self.M = M
        self.p = M.p
        self.kappa = M.kappa
        self.n_max = n_max
        K = K or 4
        while True:
            try:
                self._build(K)
                break
            except _NeedPrecision:
                K *= 2

    # ambient data per summand and level
    def _ambient(self, s: Summand, n: int, m: int):
        p, kappa = self.p, self.kappa
        j = n - kappa
        if isinstance(s, MuPart):
            P = p ** j
            w = list(omega(p, kappa, n).coeffs)
            return {"dim": P, "T": _companion(w, m), "rel": np.eye(P, dtype=object) * (p ** s.mu % m)}
        Fm = _to_mod(s.F, p, m)
        C = _companion(Fm, m)
        om, _ = _omega_and_norm(C, p, j, m)
        rel = om
        if isinstance(s, FinitePart):
            rel = np.concatenate([om, np.eye(C.shape[0], dtype=object) * (p ** s.cap % m)], axis=1)
        return {"dim": C.shape[0], "T": C, "rel": rel, "C": C}

    def _build(self, K: int):
        self.K = K
        p, m = self.p, self.p ** K
        self.levels: Dict[int, LevelQuotient] = {}
        self._amb: Dict[int, list] = {}
        for n in range(self.kappa, self.n_max + 1):
            amb = [self._ambient(s, n, m) for s in self.M.summands]
            self._amb[n] = amb
            dims = [a["dim"] for a in amb]
            D = sum(dims)
            if D == 0:
                G = FinAbPGroup(p, ())
                z = np.zeros((0, 0), dtype=object)
                self.levels[n] = LevelQuotient(n, K, G, z, z, PGroupHom(G, G, z), dims)
                continue
            R = _block_diag([a["rel"] for a in amb])
            d, U, Ui, _ = linalg.snf(R, p, K)
            if len(d) < D:
                raise _NeedPrecision
            vs = [vp(int(x), p) for x in d]
            order = sorted((i for i in range(D) if vs[i] > 0), key=lambda i: -vs[i])
            exps = tuple(vs[i] for i in order)
            G = FinAbPGroup(p, exps)
            U = np.asarray(U, dtype=object)
            Ui = np.asarray(Ui, dtype=object)
            coord = U[order, :] if order else np.zeros((0, D), dtype=object)
            section = Ui[:, order] if order else np.zeros((D, 0), dtype=object)
            Tamb = _block_diag([a["T"] for a in amb])
            lq = LevelQuotient(n, K, G, coord, section, None, dims)
            lq.T = self._induce(lq, Tamb, lq)
            self.levels[n] = lq

    def _induce(self, src: LevelQuotient, A: np.ndarray, dst: LevelQuotient) -> PGroupHom:
        m = self.p ** self.K
        if src.group.rank == 0 or dst.group.rank == 0:
            return PGroupHom(src.group, dst.group, np.zeros((dst.group.rank, src.group.rank), dtype=object))
        X = np.asarray(_kernels.matmul_mod(A, src.section, m), dtype=object)
        Y = np.asarray(_kernels.matmul_mod(dst.coord, X, m), dtype=object)
        return PGroupHom(src.group, dst.group, Y)

    def level(self, n: int) -> LevelQuotient:
        if n not in self.levels:
            raise InputError(f"level {n} outside [{self.kappa}, {self.n_max}]")
        return self.levels[n]

    def group(self, n: int) -> FinAbPGroup:
        return self.level(n).group

    def _ambient_map(self, n: int, kind: str) -> np.ndarray:
        p, kappa, m = self.p, self.kappa, self.p ** self.K
        blocks = []
        for s, a_lo, a_hi in zip(self.M.summands, self._amb[n], self._amb[n + 1]):
            if isinstance(s, MuPart):
                if kind == "proj":
                    blocks.append(_reduce_basis(p, kappa, n + 1, n) % m)
                else:
                    Nc = list(norm_elem(p, kappa, n + 1, n).coeffs)
                    blocks.append(_mult_basis(Nc, a_hi["dim"], a_lo["dim"]) % m)
            else:
                d = a_lo["dim"]
                if kind == "proj":
                    blocks.append(np.eye(d, dtype=object))
                else:
                    _, Nm = _omega_and_norm(a_lo["C"], p, n - kappa, m)
                    blocks.append(Nm)
        if not blocks:
            return np.zeros((0, 0), dtype=object)
        return _block_diag(blocks)

    def projection(self, n: int) -> PGroupHom:
        """M_{n+1} -> M_n."""
        return self._induce(self.level(n + 1), self._ambient_map(n, "proj"), self.level(n))

    def lift(self, n: int) -> PGroupHom:
        """iota: M_n -> M_{n+1}, multiplication by N_{n+1,n}."""
        return self._induce(self.level(n), self._ambient_map(n, "lift"), self.level(n + 1))

    def lift_between(self, n: int, m: int) -> PGroupHom:
        h = None
        for j in range(n, m):
            h = self.lift(j) if h is None else self.lift(j).compose(h)
        return h

    def poly_action(self, n: int, poly: Sequence[Coeff]) -> PGroupHom:
        """The endomorphism g(T) of M_n (p-integral rational coefficients)."""
        lq = self.level(n)
        G = lq.group
        c = _to_mod(_fpoly(poly), self.p, self.p ** self.K)
        acc = PGroupHom(G, G, np.zeros((G.rank, G.rank), dtype=object))
        for a in reversed(c):
            acc = PGroupHom(G, G, lq.T.compose(acc).matrix + np.eye(G.rank, dtype=object) * a)
        return acc

    def ambient_vector(self, n: int, comps: Sequence[Sequence[Coeff]]) -> np.ndarray:
        """Ambient coordinates at level n of the element (g_1, ..., g_s) of M (one polynomial per summand)."""
        p, kappa, m = self.p, self.kappa, self.p ** self.K
        out = []
        for s, g in zip(self.M.summands, comps):
            g = _fpoly(g)
            if isinstance(s, MuPart):
                r = _frem(g, omega(p, kappa, n).coeffs) if len(g) > p ** (n - kappa) else g
                v = _to_mod(r, p, m)
                out.extend(v + [0] * (p ** (n - kappa) - len(v)))
            else:
                r = _frem(tuple(Fraction(x) for x in _to_mod(g, p, m)), tuple(Fraction(x) for x in _to_mod(s.F, p, m)))
                v = [int(x) % m for x in r]
                out.extend(v + [0] * (s.degree - len(v)))
        return np.array(out, dtype=object)

    def element(self, n: int, comps) -> np.ndarray:
        lq = self.level(n)
        if lq.group.rank == 0:
            return np.zeros(0, dtype=object)
        v = np.asarray(_kernels.matmul_mod(lq.coord, self.ambient_vector(n, comps).reshape(-1, 1), self.p ** self.K),
                       dtype=object).reshape(-1)
        return lq.group.reduce(v)


class _NeedPrecision(Exception):
    pass


def level_quotient(M: ElemLambdaModule, n: int, N: Optional[int] = None) -> LevelQuotient:
    """M_n = M / omega_n M with the matrix of T; N is a starting precision, raised automatically."""
    return Tower(M, n, K=N).level(n)


def log_size(M: ElemLambdaModule, n: int) -> Tuple[int, int]:
    """(v_p |M_n|, p-rank of M_n) without building the mu-part matrices."""
    p, kappa = M.p, M.kappa
    if n < kappa:
        raise LevelBelowKappa(f"level {n} below kappa={kappa}")
    j = n - kappa
    total, rank = 0, 0
    for s in M.summands:
        if isinstance(s, MuPart):
            total += s.mu * p ** j
            rank += p ** j
            continue
        K = 4
        while True:
            m = p ** K
            C = _companion(_to_mod(s.F, p, m), m)
            om, _ = _omega_and_norm(C, p, j, m)
            rel = om
            if isinstance(s, FinitePart):
                rel = np.concatenate([om, np.eye(C.shape[0], dtype=object) * (p ** s.cap % m)], axis=1)
            d, _, _, _ = linalg.snf(rel, p, K)
            if len(d) == C.shape[0]:
                break
            K *= 2
        vs = [vp(int(x), p) for x in d]
        total += sum(vs)
        rank += sum(1 for v in vs if v > 0)
    return total, rank


# ------------------------------------------------------------------ growth law

@dataclass
class GrowthReport:
    mu: int
    lam: int
    nu: int
    levels: List[int]
    log_sizes: List[int]
    residuals: List[int]
    stable_from: int
    expected: Tuple[int, int]

    @property
    def matches(self) -> bool:
        return (self.mu, self.lam) == self.expected

    def to_json(self):
        return {"mu": self.mu, "lambda": self.lam, "nu": self.nu, "levels": self.levels, "v_p_orders": self.log_sizes,
                "residuals": self.residuals, "stable_from": self.stable_from, "expected": list(self.expected),
                "matches": self.matches}


def _fit3(js, vs, p):
    A = sympy.Matrix([[p ** j, j, 1] for j in js])
    sol = A.LUsolve(sympy.Matrix(vs))
    return [sympy.Rational(x) for x in sol]


def growth_stats(M: ElemLambdaModule, levels: Optional[Sequence[int]] = None, min_suffix: int = 4) -> GrowthReport:
    """Fit v_p|M_n| = mu p^(n-kappa) + lambda (n-kappa) + nu on the largest exactly fitting suffix."""
    if levels is None:
        levels = list(range(M.kappa, M.kappa + 9))
    levels = sorted(int(n) for n in levels)
    if len(levels) < min_suffix:
        raise NoStableSuffix(f"need at least {min_suffix} levels")
    sizes = [log_size(M, n)[0] for n in levels]
    js = [n - M.kappa for n in levels]
    sol = _fit3(js[-3:], sizes[-3:], M.p)
    if not all(x.q == 1 for x in sol):
        raise NoStableSuffix("no integral fit on the last three levels")
    mu, lam, nu = (int(x) for x in sol)
    model = [mu * M.p ** j + lam * j + nu for j in js]
    res = [v - w for v, w in zip(sizes, model)]
    start = len(levels) - 1
    while start > 0 and res[start - 1] == 0:
        start -= 1
    if len(levels) - start < min_suffix:
        raise NoStableSuffix(f"zero-residual suffix has length {len(levels) - start} < {min_suffix}")
    return GrowthReport(mu, lam, nu, levels, sizes, res, levels[start], (M.mu, M.lam))


# ------------------------------------------------------------------ Fukuda checks

@dataclass
class TransitionReport:
    n: int
    rank_preserving: bool
    iota_image_is_pB: bool
    identity_holds: bool
    identity_asserted: bool
    iota_injective: bool
    injective_asserted: bool
    lemma_ab_hypotheses: bool
    lemma_ab_violated: bool
    elements_checked: int
    exhaustive: bool
    witness: Optional[List[int]] = None

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class FukudaReport:
    levels: List[int]
    log_sizes: List[int]
    ranks: List[int]
    point1: List[Tuple[int, bool]]      # (n, holds) for transitions with |M_n| = |M_{n+1}|
    point2: List[Tuple[int, bool]]      # (n, holds) for transitions with equal p-ranks
    lambda_le_R: Optional[bool]
    transitions: List[TransitionReport]

    @property
    def violations(self) -> List[str]:
        v = [f"point1@{n}" for n, ok in self.point1 if not ok]
        v += [f"point2@{n}" for n, ok in self.point2 if not ok]
        if self.lambda_le_R is False:
            v.append("lambda<=R")
        for t in self.transitions:
            if t.identity_asserted and not t.identity_holds:
                v.append(f"ordinc@{t.n}")
            if t.injective_asserted and not t.iota_injective:
                v.append(f"injective@{t.n}")
        return v

    @property
    def ok(self) -> bool:
        return not self.violations

    def rows(self) -> List[Dict[str, object]]:
        out = []
        by_n = {t.n: t for t in self.transitions}
        for n, v, r in zip(self.levels, self.log_sizes, self.ranks):
            t = by_n.get(n)
            verdict = "-" if t is None else ("ok" if not (t.identity_asserted and not t.identity_holds) and
                                             not (t.injective_asserted and not t.iota_injective) else "VIOLATION")
            if t is not None and not t.identity_asserted:
                verdict += " (ordinc not asserted)" if verdict == "ok" else ""
            out.append({"n": n, "v_p_order": v, "p_rank": r, "verdict": verdict})
        return out

    def to_json(self):
        return {"levels": self.levels, "v_p_orders": self.log_sizes, "p_ranks": self.ranks, "point1": self.point1,
                "point2": self.point2, "lambda_le_R": self.lambda_le_R,
                "transitions": [t.to_json() for t in self.transitions], "violations": self.violations}


def fukuda_check(M: ElemLambdaModule, n_levels: int = 4, exhaustive_limit: int = 3 ** 6, samples: int = 500,
                 seed: int = 0, tower: Optional[Tower] = None) -> FukudaReport:
    """Points 1-3 at levels kappa .. kappa + n_levels - 1.

    The identity p x = iota(N x) is asserted where its proof applies: the
    transition satisfies the hypotheses of the order lemma (equal p-ranks,
    iota rank preserving, ...), iota(M_n) = p M_{n+1} and p is odd. Elsewhere
    it is reported only."""
    p, kappa = M.p, M.kappa
    top = kappa + n_levels - 1
    tw = tower or Tower(M, top)
    levels = list(range(kappa, top + 1))
    sizes = [tw.group(n).log_order for n in levels]
    ranks = [tw.group(n).rank for n in levels]
    point1, point2 = [], []
    for i in range(len(levels) - 1):
        if sizes[i] == sizes[i + 1]:
            point1.append((levels[i], all(s == sizes[i] for s in sizes[i:])))
        if ranks[i] == ranks[i + 1]:
            point2.append((levels[i], all(r == ranks[i] for r in ranks[i:])))
    lam_le_R = None
    if point2 and M.mu == 0 and not M.has_mu:
        R = ranks[levels.index(point2[0][0])]
        lam_le_R = M.lam <= R
    rng = np.random.default_rng(seed)
    trans = []
    for i, n in enumerate(levels[:-1]):
        A, B = tw.group(n), tw.group(n + 1)
        Nmap, iota = tw.projection(n), tw.lift(n)
        rank_pres = p_rank_of_span(B, iota.matrix) == A.rank
        pB = B.generators() * p
        img_pB = B.span_contains(pB, iota.matrix) and B.subgroup_log_size(iota.matrix) == B.subgroup_log_size(pB)
        # p x = iota(N x): linear, so generators decide it; elements are checked as well
        comp = iota.compose(Nmap)
        gens_ok = all(B.is_zero(comp(g) - p * g) for g in B.generators())
        exhaustive = B.order <= exhaustive_limit
        X = B.elements(limit=exhaustive_limit) if exhaustive else B.random_elements(samples, rng)
        lhs = B.reduce_rows(np.asarray(X, dtype=object) * p)
        rhs = comp.apply_rows(X)
        diff = [j for j in range(len(X)) if any(int(a) != int(b) for a, b in zip(lhs[j], rhs[j]))]
        holds = gens_ok and not diff
        witness = [int(v) for v in X[diff[0]]] if diff else None
        inj = iota.is_injective()
        inj_asserted = (not M.has_mu and ranks[i] == ranks[i + 1] == M.lam)
        lab = verify_lemma_ab(A, B, Nmap, iota, exhaustive_limit=exhaustive_limit, samples=samples, seed=seed)
        asserted = lab.hypotheses_hold and img_pB and p % 2 == 1
        trans.append(TransitionReport(n, rank_pres, img_pB, holds, asserted, inj,
                                      inj_asserted, lab.hypotheses_hold, lab.violated, int(len(X)), exhaustive,
                                      witness))
    return FukudaReport(levels, sizes, ranks, point1, point2, lam_le_R, trans)


# ------------------------------------------------------------------ tower elements and z

class TowerElement:
    """Norm-coherent x_n in M_n over a range of levels."""

    def __init__(self, tower: Tower, values: Dict[int, Sequence[int]], comps=None):
        self.tower = tower
        self.values = {int(n): tower.group(int(n)).reduce(v) if tower.group(int(n)).rank else np.zeros(0, dtype=object)
                       for n, v in values.items()}
        self.comps = comps
        ns = sorted(self.values)
        for a, b in zip(ns, ns[1:]):
            if b == a + 1:
                img = tower.projection(a)(self.values[b])
                if not tower.group(a).is_zero(img - self.values[a]):
                    raise InputError(f"not norm-coherent between levels {a} and {b}")

    @classmethod
    def from_global(cls, tower: Tower, comps: Sequence[Sequence[Coeff]], levels: Optional[Sequence[int]] = None):
        levels = list(levels) if levels is not None else sorted(tower.levels)
        if len(comps) != len(tower.M.summands):
            raise InputError("one polynomial per summand")
        return cls(tower, {n: tower.element(n, comps) for n in levels}, [_fpoly(c) for c in comps])

    @classmethod
    def generator(cls, tower: Tower, i: int, scale: int = 1):
        comps = [[0] for _ in tower.M.summands]
        comps[i] = [scale]
        return cls.from_global(tower, comps)

    def __add__(self, other: "TowerElement") -> "TowerElement":
        ns = sorted(set(self.values) & set(other.values))
        comps = None
        if self.comps is not None and other.comps is not None:
            comps = [tuple(a + b for a, b in zip(x + (Fraction(0),) * (len(y) - len(x)),
                                                   y + (Fraction(0),) * (len(x) - len(y)))) for x, y in
                     zip(self.comps, other.comps)]
        return TowerElement(self.tower, {n: self.values[n] + other.values[n] for n in ns}, comps)

    def scale(self, c: int) -> "TowerElement":
        comps = [tuple(c * a for a in x) for x in self.comps] if self.comps is not None else None
        return TowerElement(self.tower, {n: v * c for n, v in self.values.items()}, comps)

    def log_orders(self) -> Dict[int, int]:
        return {n: self.tower.group(n).log_order_of(v) for n, v in sorted(self.values.items())}

    def is_torsion(self) -> Optional[bool]:
        """Exact Z_p-torsion test from global coordinates (Weierstrass components vanish)."""
        if self.comps is None:
            return None
        for s, g in zip(self.tower.M.summands, self.comps):
            if isinstance(s, WeierstrassPart) and (_frem(g, s.F) if len(g) > s.degree else any(g)):
                return False
        return True


@dataclass
class ZReport:
    value: Union[int, str]
    method: str
    values: Dict[int, int]

    def to_json(self):
        return {"z": self.value, "method": self.method, "v_p_ord_minus_level": self.values}


def z_invariant(x: TowerElement) -> ZReport:
    """Stabilized v_p(ord x_n) - (n + 1 - kappa), or "-inf" for torsion elements."""
    kappa = x.tower.kappa
    orders = x.log_orders()
    vals = {n: o - (n + 1 - kappa) for n, o in orders.items()}
    tors = x.is_torsion()
    if tors:
        return ZReport("-inf", "global coordinates", vals)
    ns = sorted(vals)
    if len(ns) < 2:
        raise InsufficientLevels("need at least two levels")
    a, b = ns[-2], ns[-1]
    if vals[a] == vals[b]:
        return ZReport(vals[b], "exact" if tors is False else "stabilized", vals)
    if tors is None and orders[a] == orders[b]:
        return ZReport("-inf", "bounded orders (heuristic)", vals)
    raise InsufficientLevels(f"no two consecutive equal values among {vals}")


# ------------------------------------------------------------------ shift maps

@dataclass
class ShiftReport:
    k: int
    delay: int
    sigma: Dict[int, List[int]]
    iota_K: Dict[int, List[int]]
    kills_torsion: bool
    sigma_image_growth: List[int]
    sigma_torsion_free: bool

    def to_json(self):
        return dict(self.__dict__)


def shift_maps(x: TowerElement, k: int, delay: Optional[int] = None) -> ShiftReport:
    """sigma = multiplication by p^k, iota_K: level m -> lift of x_{m - delay}."""
    tw = x.tower
    M = tw.M
    need = max([s.mu for s in M.summands if isinstance(s, MuPart)] +
               [s.cap for s in M.summands if isinstance(s, FinitePart)] + [0])
    if k < need:
        raise KappaTooSmall(f"p^{k} does not annihilate the mu-part (needs k >= {need})")
    delay = k if delay is None else delay
    p = tw.p
    sigma = {n: [int(a) for a in tw.group(n).reduce(v * p ** k)] for n, v in x.values.items()}
    iota_K = {}
    for m in sorted(x.values):
        src = m - delay
        if src in x.values:
            v = x.values[src] if delay == 0 else tw.lift_between(src, m)(x.values[src])
            iota_K[m] = [int(a) for a in v]
    # sigma kills every torsion summand
    kills = True
    for i, s in enumerate(M.summands):
        if not isinstance(s, WeierstrassPart):
            g = TowerElement.generator(tw, i)
            kills &= all(tw.group(n).is_zero(v * p ** k) for n, v in g.values.items())
    ns = sorted(tw.levels)[-2:]
    growth = [tw.group(n).subgroup_log_size(tw.group(n).generators() * p ** k) for n in ns]
    tf = len(growth) == 2 and growth[1] - growth[0] == M.lam
    return ShiftReport(k, delay, sigma, iota_K, kills, growth, tf)


# ------------------------------------------------------------------ Weierstrass components

@dataclass
class SplitReport:
    components: List[ElemLambdaModule]
    groups: List[List[int]]
    trivial_intersections: Dict[int, bool]

    def to_json(self):
        return {"components": [c.to_json() for c in self.components], "groups": self.groups,
                "trivial_intersections": {str(k): v for k, v in self.trivial_intersections.items()}}


def _coprime_over_Q(f, g) -> bool:
    T = sympy.Symbol("T")
    a = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in f])), T)
    b = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in g])), T)
    return sympy.gcd(a, b).degree() == 0


def weierstrass_split(M: ElemLambdaModule, levels: Optional[Sequence[int]] = None) -> SplitReport:
    """Group summands into classes of pairwise coprime characteristic factors and
    certify that the images X^(F/f_j) meet trivially at two levels."""
    if M.has_mu:
        raise HasMuPart("Weierstrass splitting needs a module without mu-part")
    S = list(M.summands)
    if not S:
        return SplitReport([], [], {})
    parent = list(range(len(S)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            if not _coprime_over_Q(S[i].f, S[j].f):
                parent[find(i)] = find(j)
    classes: Dict[int, List[int]] = {}
    for i in range(len(S)):
        classes.setdefault(find(i), []).append(i)
    groups = sorted(classes.values())
    comps = [ElemLambdaModule(M.p, M.kappa, tuple(S[i] for i in g)) for g in groups]
    levels = list(levels) if levels is not None else [M.kappa + 1, M.kappa + 2]
    tw = Tower(M, max(levels))
    Fj = []
    for g in groups:
        f = (Fraction(1),)
        for i in g:
            f = _fmul(f, S[i].F)
        Fj.append(f)
    Ftot = (Fraction(1),)
    for f in Fj:
        Ftot = _fmul(Ftot, f)
    cert = {}
    for n in levels:
        G = tw.group(n)
        imgs = []
        for f in Fj:
            cof = _fdiv_exact(Ftot, f)
            imgs.append(tw.poly_action(n, cof).matrix)
        ok = True
        for a in range(len(imgs)):
            for b in range(a + 1, len(imgs)):
                sa, sb = G.subgroup_log_size(imgs[a]), G.subgroup_log_size(imgs[b])
                sab = G.subgroup_log_size(np.concatenate([imgs[a], imgs[b]], axis=1))
                ok &= sab == sa + sb
        cert[n] = ok
    return SplitReport(comps, groups, cert)


def _fdiv_exact(a, b):
    a = list(a)
    db = len(b) - 1
    q = [Fraction(0)] * (len(a) - db)
    for d in range(len(a) - 1, db - 1, -1):
        c = a[d] / b[-1]
        q[d - db] = c
        for i in range(db + 1):
            a[d - db + i] -= c * b[i]
    if any(a[:db]):
        raise ArithmeticError("not an exact division")
    return _fpoly(q)


# ------------------------------------------------------------------ Iwasawa dual

def star_poly(f: Sequence[Coeff], p: int, kappa: int) -> Tuple[Fraction, ...]:
    """f* = F / lc(F), F = (T+1)^d f((q - T)/(T + 1)); distinguished when f is."""
    f = _fpoly(f)
    d = len(f) - 1
    q = p ** (kappa + 1)
    F = (Fraction(0),)
    for i, c in enumerate(f):
        term = _fmul(_fpow((Fraction(q), Fraction(-1)), i), _fpow((Fraction(1), Fraction(1)), d - i))
        term = tuple(c * t for t in term)
        n = max(len(F), len(term))
        F = _fpoly([(F[j] if j < len(F) else 0) + (term[j] if j < len(term) else 0) for j in range(n)])
    lc = F[-1]
    if not _is_p_integral(1 / lc, p):
        raise ArithmeticError("leading coefficient of F is not a p-unit")
    return _fpoly([c / lc for c in F])


def iwasawa_dual(M: ElemLambdaModule) -> ElemLambdaModule:
    out: List[Summand] = []
    for s in M.summands:
        if isinstance(s, MuPart):
            out.append(s)
        elif isinstance(s, FinitePart):
            out.append(FinitePart(star_poly(s.f, M.p, M.kappa), s.k, s.cap))
        else:
            out.append(WeierstrassPart(star_poly(s.f, M.p, M.kappa), s.k))
    return ElemLambdaModule(M.p, M.kappa, tuple(out))


def resultant_log_size(M: ElemLambdaModule, n: int) -> int:
    """v_p |M_n| from exact resultants Res(F, omega_n), the evaluation oracle."""
    T = sympy.Symbol("T")
    w = sympy.Poly(list(reversed(omega(M.p, M.kappa, n).coeffs)), T)
    total = 0
    for s in M.summands:
        if isinstance(s, MuPart):
            total += s.mu * M.p ** (n - M.kappa)
            continue
        F = sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in s.F])), T)
        r = sympy.Rational(sympy.resultant(F, w))
        v = vp(int(r.p), M.p) - vp(int(r.q), M.p)
        if isinstance(s, FinitePart):
            raise InputError("resultant oracle covers mu and Weierstrass summands only")
        total += v
    return total


# ------------------------------------------------------------------ Lemma unt*

@dataclass
class UntStarReport:
    equal: bool
    lhs_log_size: int
    rhs_log_size: int
    quotient_log_size: int
    mu_n_log_size: int
    exhaustive: bool
    exhaustive_equal: Optional[bool]
    exponent: int
    corrected_exponent: int
    corrected_equal: bool

    def to_json(self):
        return dict(self.__dict__)


def _mat_poly(G: FinAbPGroup, Tm: np.ndarray, coeffs: Sequence[int]) -> np.ndarray:
    m = G.p ** G.E
    acc = np.zeros((G.rank, G.rank), dtype=object)
    for c in reversed(list(coeffs)):
        acc = (np.asarray(_kernels.matmul_mod(Tm, acc, m), dtype=object) + np.eye(G.rank, dtype=object) * c) % m
    return acc


def _preimage(G: FinAbPGroup, A: np.ndarray, target_gens: np.ndarray, extra_rows: Optional[np.ndarray] = None):
    """Generators of {x in G : A x in span(target_gens)} (and extra_rows x = 0 if given)."""
    r = G.rank
    E = G.E
    m = G.p ** E
    scale = np.array([G.p ** (E - e) for e in G.exps], dtype=object).reshape(-1, 1)
    k = target_gens.shape[1]
    top = np.concatenate([A % m, -target_gens % m], axis=1) * scale % m
    blocks = [top]
    if extra_rows is not None:
        blocks.append(np.concatenate([extra_rows % m, np.zeros((r, k), dtype=object)], axis=1) * scale % m)
    Z = np.concatenate(blocks, axis=0)
    gens = linalg.kernel(Z, G.p, E)
    if not gens:
        return np.zeros((r, 0), dtype=object)
    return np.stack([G.reduce(g[:r]) for g in gens], axis=1)


def _unt_star_compare(G: FinAbPGroup, Ts: np.ndarray, Ns: np.ndarray, P: int):
    PX = G.generators() * P
    lhs = np.concatenate([_preimage(G, Ts, PX), PX], axis=1)
    mu_n = _preimage(G, Ts, PX, extra_rows=np.eye(G.rank, dtype=object) * P)
    rhs = np.concatenate([Ns, mu_n, PX], axis=1)
    ls, rs = G.subgroup_log_size(lhs), G.subgroup_log_size(rhs)
    equal = ls == rs == G.subgroup_log_size(np.concatenate([lhs, rhs], axis=1))
    return bool(equal), ls, rs, G.subgroup_log_size(PX), G.subgroup_log_size(mu_n)


def unt_star_sides(G: FinAbPGroup, T: PGroupHom, p: int, kappa: int, n: int, exhaustive_limit: int = 3 ** 6,
                   require_exhaustive: bool = False) -> UntStarReport:
    """Both sides of X_{n,T*}/X^P = (X^{N_n^*} mu_n X^P)/X^P, P = p^(n-kappa), as subgroups of X_n.

    Also reports the same comparison with P replaced by p^e, e = v_p((q+1)^P - 1),
    the exponent for which T* N_n^* = omega_n^* is p^e times a unit on X_n."""
    if G.p != p:
        raise InputError("group over a different prime")
    if n < kappa:
        raise LevelBelowKappa(f"level {n} below kappa={kappa}")
    P = p ** (n - kappa)
    q = p ** (kappa + 1)
    e = vp((q + 1) ** P - 1, p)
    if G.rank == 0:
        return UntStarReport(True, 0, 0, 0, 0, True, True, n - kappa, e, True)
    if require_exhaustive and G.order > exhaustive_limit:
        raise TooLarge(f"|X| = {G.order} exceeds {exhaustive_limit}")
    Tm = T.matrix
    w = list(omega(p, kappa, n).coeffs)
    if any(int(x) for x in G.reduce_rows(_mat_poly(G, Tm, w).T).reshape(-1)):
        raise InputError("omega_n does not annihilate X: not a Lambda_n-module")
    m = p ** G.E
    # T* = (q - T)(T + 1)^(P - 1) on X_n, N_n^* = N_n(T*) with N_n = omega_n / T
    tp = [comb(P - 1, i) for i in range(P)]
    Ts = np.asarray(_kernels.matmul_mod(_mat_poly(G, Tm, [q, -1]), _mat_poly(G, Tm, tp), m), dtype=object)
    Ts = G.reduce_rows(Ts.T).T
    Ns = G.reduce_rows(_mat_poly(G, Ts, w[1:]).T).T
    equal, ls, rs, ps, mus = _unt_star_compare(G, Ts, Ns, P)
    c_equal = _unt_star_compare(G, Ts, Ns, p ** e)[0]
    exhaustive = G.order <= exhaustive_limit
    ex_equal = _unt_star_exhaustive(G, Ts, Ns, P) if exhaustive else None
    return UntStarReport(equal, ls - ps, rs - ps, G.log_order - ps, mus, exhaustive, ex_equal, n - kappa, e, c_equal)


def _unt_star_exhaustive(G: FinAbPGroup, Ts: np.ndarray, Ns: np.ndarray, P: int) -> bool:
    # brute force over all elements, independent of the kernel computations
    X = G.elements()
    key = lambda v: tuple(int(a) for a in v)
    PXset = {key(v) for v in G.reduce_rows(X * P)}
    TsX = G.reduce_rows(np.asarray(_kernels.matmul_mod(X, Ts.T, G.p ** G.E)))
    lhs = {key(X[i]) for i in range(len(X)) if key(TsX[i]) in PXset}
    mu = [X[i] for i in range(len(X)) if key(TsX[i]) in PXset and not any(int(a) for a in G.reduce(X[i] * P))]
    NsX = G.reduce_rows(np.asarray(_kernels.matmul_mod(X, Ns.T, G.p ** G.E)))
    # span of N_n^* X + mu_n + P X, closed under addition
    gens = {key(v) for v in NsX} | {key(v) for v in mu} | PXset
    span = {key(G.zero())}
    frontier = list(span)
    gens = [np.array(g, dtype=object) for g in gens]
    while frontier:
        nxt = []
        for s in frontier:
            for g in gens:
                t = key(G.reduce(np.array(s, dtype=object) + g))
                if t not in span:
                    span.add(t)
                    nxt.append(t)
        frontier = nxt
    return lhs == span
