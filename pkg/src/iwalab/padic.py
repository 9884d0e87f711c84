"""Capped-precision p-adic integers and polynomials, Hensel lifting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from sympy import ZZ
from sympy.polys import galoistools as gt

from .errors import InputError, NonUnit, NotSquarefreeModP


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


class Valuation(int):
    """An integer valuation; ``capped`` marks the value N meaning "at least N"."""

    capped: bool

    def __new__(cls, value: int, capped: bool = False):
        obj = super().__new__(cls, value)
        obj.capped = capped
        return obj

    def __repr__(self):
        return f">={int(self)}" if self.capped else str(int(self))

    __str__ = __repr__


@dataclass(frozen=True)
class PadicInt:
    p: int
    N: int
    residue: int
    truncated: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise InputError("precision must be >= 1")
        object.__setattr__(self, "residue", int(self.residue) % self.p ** self.N)

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    def _coerce(self, other):
        if isinstance(other, PadicInt):
            if other.p != self.p:
                raise InputError("mixed primes")
            N = min(self.N, other.N)
            return other.residue, N, N != self.N or N != other.N
        return int(other), self.N, False

    def _make(self, value, N, trunc):
        return PadicInt(self.p, N, value, trunc or self.truncated)

    def __add__(self, other):
        v, N, t = self._coerce(other)
        return self._make(self.residue + v, N, t)

    __radd__ = __add__

    def __sub__(self, other):
        v, N, t = self._coerce(other)
        return self._make(self.residue - v, N, t)

    def __rsub__(self, other):
        v, N, t = self._coerce(other)
        return self._make(v - self.residue, N, t)

    def __mul__(self, other):
        v, N, t = self._coerce(other)
        return self._make(self.residue * v, N, t)

    __rmul__ = __mul__

    def __neg__(self):
        return self._make(-self.residue, self.N, False)

    def __pow__(self, e: int):
        if e < 0:
            return padic_inv(self) ** (-e)
        return self._make(pow(self.residue, e, self.modulus), self.N, False)

    def __int__(self):
        return self.residue

    def __eq__(self, other):
        if isinstance(other, PadicInt):
            return (self.p, self.N, self.residue) == (other.p, other.N, other.residue)
        if isinstance(other, int):
            return self.residue == other % self.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.N, self.residue))


def padic_val(x: PadicInt) -> Valuation:
    if x.residue == 0:
        return Valuation(x.N, capped=True)
    r, v = x.residue, 0
    while r % x.p == 0:
        r //= x.p
        v += 1
    return Valuation(v)


def padic_inv(x: PadicInt) -> PadicInt:
    if x.residue % x.p == 0:
        raise NonUnit(f"{x.residue} is not a unit mod {x.p}")
    return PadicInt(x.p, x.N, pow(x.residue, -1, x.modulus), x.truncated)


# ------------------------------------------------------------------ polynomials
# Plain coefficient lists, low degree first, entries reduced mod m.

def ptrim(a: Sequence[int]) -> List[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def padd(a, b, m: int) -> List[int]:
    n = max(len(a), len(b))
    return ptrim([((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % m for i in range(n)])


def psub(a, b, m: int) -> List[int]:
    n = max(len(a), len(b))
    return ptrim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % m for i in range(n)])


def pmul(a, b, m: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ptrim([c % m for c in out])


def pdivmod(a, b, m: int) -> Tuple[List[int], List[int]]:
    """Division by a polynomial whose leading coefficient is a unit mod m."""
    b = ptrim([c % m for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = [c % m for c in a]
    inv = pow(b[-1], -1, m)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 1)
    for d in range(len(a) - 1, db - 1, -1):
        c = a[d] * inv % m
        if c:
            q[d - db] = c
            for i in range(db + 1):
                a[d - db + i] = (a[d - db + i] - c * b[i]) % m
    return ptrim(q), ptrim(a[:db])


def pmod(a, b, m: int) -> List[int]:
    return pdivmod(a, b, m)[1]


def _to_gf(a: Sequence[int], p: int):
    return gt.gf_from_int_poly(list(reversed(ptrim([int(c) % p for c in a]))), p)


def _from_gf(a) -> List[int]:
    return [int(c) for c in reversed(a)]


@dataclass(frozen=True)
class PadicPoly:
    p: int
    N: int
    coeffs: Tuple[int, ...]

    def __post_init__(self):
        m = self.p ** self.N
        object.__setattr__(self, "coeffs", tuple(ptrim([int(c) % m for c in self.coeffs])))

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> PadicInt:
        return PadicInt(self.p, self.N, self.coeffs[i] if i < len(self.coeffs) else 0)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __mul__(self, other: "PadicPoly") -> "PadicPoly":
        N = min(self.N, other.N)
        return PadicPoly(self.p, N, pmul(self.coeffs, other.coeffs, self.p ** N))

    def __add__(self, other: "PadicPoly") -> "PadicPoly":
        N = min(self.N, other.N)
        return PadicPoly(self.p, N, padd(self.coeffs, other.coeffs, self.p ** N))

    def __sub__(self, other: "PadicPoly") -> "PadicPoly":
        N = min(self.N, other.N)
        return PadicPoly(self.p, N, psub(self.coeffs, other.coeffs, self.p ** N))

    def reduce(self, N: int) -> "PadicPoly":
        return PadicPoly(self.p, min(N, self.N), self.coeffs)

    def to_json(self):
        return {"p": self.p, "N": self.N, "coeffs": list(self.coeffs)}


def _hensel_step(f, g, h, s, t, m):
    """Quadratic lift of f = g h, s g + t h = 1 from modulus m to m^2."""
    M = m * m
    e = psub(f, pmul(g, h, M), M)
    q, r = pdivmod(pmul(s, e, M), h, M)
    g2 = padd(padd(g, pmul(t, e, M), M), pmul(q, g, M), M)
    h2 = padd(h, r, M)
    b = psub(padd(pmul(s, g2, M), pmul(t, h2, M), M), [1], M)
    c, d = pdivmod(pmul(s, b, M), h2, M)
    s2 = psub(s, d, M)
    t2 = psub(psub(t, pmul(t, b, M), M), pmul(c, g2, M), M)
    return g2, h2, s2, t2


def _lift_split(f, factors_mod_p, p, N):
    if len(factors_mod_p) == 1:
        return [f]
    half = len(factors_mod_p) // 2
    left, right = factors_mod_p[:half], factors_mod_p[half:]
    g = [1]
    for a in left:
        g = pmul(g, a, p)
    h = [1]
    for a in right:
        h = pmul(h, a, p)
    s_gf, t_gf, one = gt.gf_gcdex(_to_gf(g, p), _to_gf(h, p), p, ZZ)
    s, t = _from_gf(s_gf), _from_gf(t_gf)
    m = p
    while m < p ** N:
        g, h, s, t = _hensel_step(f, g, h, s, t, m)
        m *= m
    M = p ** N
    g = [c % M for c in g]
    h = [c % M for c in h]
    return _lift_split(g, left, p, N) + _lift_split(h, right, p, N)


def factor_mod_p(f: Sequence[int], p: int) -> List[List[int]]:
    """Monic irreducible factors of a monic squarefree polynomial over F_p."""
    lc, facs = gt.gf_factor_sqf(_to_gf(f, p), p, ZZ)
    return sorted((_from_gf(a) for a in facs), key=lambda a: (len(a), a))


def hensel_factor(f: PadicPoly) -> List[PadicPoly]:
    if not f.is_monic():
        raise InputError("hensel_factor needs a monic polynomial")
    p = f.p
    fb = _to_gf(f.coeffs, p)
    if gt.gf_degree(gt.gf_gcd(fb, gt.gf_diff(fb, p, ZZ), p, ZZ)) > 0:
        raise NotSquarefreeModP("reduction mod p has a repeated factor")
    if f.degree == 0:
        return []
    facs = factor_mod_p(f.coeffs, p)
    lifted = _lift_split(list(f.coeffs), facs, p, f.N)
    return [PadicPoly(p, f.N, a) for a in lifted]


@dataclass(frozen=True)
class CompletionReport:
    g: int
    degrees: Tuple[int, ...]
    factors: Tuple[PadicPoly, ...]

    def to_json(self):
        return {"g": self.g, "degrees": list(self.degrees), "factors": [list(a.coeffs) for a in self.factors]}


def split_completions(f: PadicPoly) -> CompletionReport:
    facs = hensel_factor(f)
    return CompletionReport(len(facs), tuple(sorted(a.degree for a in facs)), tuple(facs))
