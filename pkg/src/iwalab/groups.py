"""Finite groups by multiplication table, semidirect presentations and
cyclotomic-type characters."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, ModulusMismatch, NoConsistentTwist, NoPresentation


@dataclass(frozen=True, eq=False)
class SemidirectPresentation:
    """Gamma_n x| G0 with Gamma_n = <tau> cyclic of order P and
    g tau g^-1 = tau^action[g]. Elements are pairs (e, g) meaning tau^e g,
    indexed as e * |G0| + g."""

    P: int
    base: "FiniteGroup"
    action: Tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) % self.P for x in self.action)
        if len(a) != self.base.order:
            raise InputError("one action exponent per element of G0")
        object.__setattr__(self, "action", a)
        if any(np.gcd(x, self.P) != 1 for x in a):
            raise InputError("action exponents must be units mod P")
        t = self.base.table
        for g in range(self.base.order):
            for h in range(self.base.order):
                if a[int(t[g, h])] != a[g] * a[h] % self.P:
                    raise InputError("action is not a homomorphism G0 -> (Z/P)^*")

    def index(self, e: int, g: int) -> int:
        return (e % self.P) * self.base.order + g

    def split(self, i: int) -> Tuple[int, int]:
        return divmod(int(i), self.base.order)

    def mul(self, x: Tuple[int, int], y: Tuple[int, int]) -> Tuple[int, int]:
        (e, g), (f, h) = x, y
        return (e + self.action[g] * f) % self.P, int(self.base.table[g, h])

    def group(self) -> "FiniteGroup":
        m = self.base.order
        n = self.P * m
        tab = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            x = self.split(i)
            for j in range(n):
                e, g = self.mul(x, self.split(j))
                tab[i, j] = e * m + g
        return FiniteGroup(tab, presentation=self)


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: np.ndarray
    presentation: Optional[SemidirectPresentation] = None
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise InputError("multiplication table must be a non-empty square array")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise InputError("table entries out of range")
        for row in t:
            if len(set(row.tolist())) != n:
                raise InputError("table rows are not permutations")
        for col in t.T:
            if len(set(col.tolist())) != n:
                raise InputError("table columns are not permutations")
        ids = [i for i in range(n) if np.array_equal(t[i], np.arange(n)) and np.array_equal(t[:, i], np.arange(n))]
        if not ids:
            raise InputError("no identity element")
        # associativity, all triples at once
        if not np.array_equal(_assoc_left(t), _assoc_right(t)):
            raise InputError("table is not associative")
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "_identity", ids[0])
        inv = np.argmax(t == ids[0], axis=1)
        object.__setattr__(self, "_inverse", inv)

    @property
    def order(self) -> int:
        return self.table.shape[0]

    @property
    def identity(self) -> int:
        return self._identity

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self._inverse[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        r = self.identity
        for _ in range(k):
            r = self.mul(r, a)
        return r

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def cyclic_generator(self) -> Optional[int]:
        for a in range(self.order):
            if self.element_order(a) == self.order:
                return a
        return None

    def is_cyclic(self) -> bool:
        return self.cyclic_generator() is not None

    def conjugacy_classes(self) -> List[List[int]]:
        seen, classes = set(), []
        for a in range(self.order):
            if a in seen:
                continue
            cl = sorted({self.mul(self.mul(g, a), self.inv(g)) for g in range(self.order)})
            seen.update(cl)
            classes.append(cl)
        return classes

    # constructors

    @classmethod
    def cyclic(cls, m: int) -> "FiniteGroup":
        if m < 1:
            raise InputError("cyclic group order must be >= 1")
        i = np.arange(m)
        return cls((i[:, None] + i[None, :]) % m)

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls.cyclic(1)

    @classmethod
    def abelian(cls, orders: Sequence[int]) -> "FiniteGroup":
        G = cls.trivial()
        for m in orders:
            G = G.product(cls.cyclic(int(m)))
        return G

    @classmethod
    def from_permutations(cls, perms: Sequence[Sequence[int]]) -> "FiniteGroup":
        """Group generated by permutations (composition: (ab)(i) = a(b(i)))."""
        gens = [tuple(int(x) for x in p) for p in perms]
        if not gens:
            return cls.trivial()
        ident = tuple(range(len(gens[0])))
        elems = [ident]
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple(g[x[i]] for i in range(len(x)))
                    if y not in seen:
                        seen.add(y)
                        elems.append(y)
                        nxt.append(y)
            frontier = nxt
        pos = {e: k for k, e in enumerate(elems)}
        tab = np.array([[pos[tuple(a[b[i]] for i in range(len(b)))] for b in elems] for a in elems], dtype=np.int64)
        return cls(tab)

    @classmethod
    def symmetric(cls, k: int) -> "FiniteGroup":
        if k < 2:
            return cls.trivial()
        return cls.from_permutations([tuple([1, 0] + list(range(2, k))), tuple(list(range(1, k)) + [0])])

    @classmethod
    def dihedral(cls, m: int) -> "FiniteGroup":
        r = tuple((i + 1) % m for i in range(m))
        s = tuple((-i) % m for i in range(m))
        return cls.from_permutations([r, s])

    @classmethod
    def semidirect(cls, P: int, base: "FiniteGroup", action: Sequence[int]) -> "FiniteGroup":
        return SemidirectPresentation(P, base, tuple(action)).group()

    def product(self, other: "FiniteGroup") -> "FiniteGroup":
        m = other.order
        n = self.order * m
        a = np.arange(n)
        i, j = a // m, a % m
        tab = self.table[i[:, None], i[None, :]] * m + other.table[j[:, None], j[None, :]]
        return FiniteGroup(tab)

    @classmethod
    def from_file(cls, path) -> "FiniteGroup":
        lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
        if not lines or not lines[0].startswith("order="):
            raise InputError("group file must start with a header line 'order=<n>'")
        n = int(lines[0].split("=", 1)[1])
        rows = [[int(x) for x in ln.replace(",", " ").split()] for ln in lines[1:]]
        if len(rows) != n or any(len(r) != n for r in rows):
            raise InputError(f"expected a {n}x{n} table")
        return cls(np.array(rows, dtype=np.int64))

    def to_text(self) -> str:
        return "\n".join([f"order={self.order}"] + [" ".join(str(int(x)) for x in row) for row in self.table]) + "\n"


def _assoc_left(t: np.ndarray) -> np.ndarray:
    # (a b) c  -> t[t[a, b], c]
    return t[t]


def _assoc_right(t: np.ndarray) -> np.ndarray:
    # a (b c) -> t[a, t[b, c]]
    n = t.shape[0]
    return t[np.arange(n)[:, None, None], t[None, :, :]]


# ------------------------------------------------------------------ word reduction

def _token(tok) -> Tuple[str, int]:
    if isinstance(tok, (tuple, list)) and len(tok) == 2 and tok[0] in ("t", "g"):
        return tok[0], int(tok[1])
    if isinstance(tok, str):
        if tok.startswith("t"):
            return "t", int(tok[1:] or 1)
        if tok.startswith("g"):
            return "g", int(tok[1:])
    raise InputError(f"bad word token {tok!r}; use ('t', k), ('g', i), 't<k>' or 'g<i>'")


def word_normal_form(pres: Optional[SemidirectPresentation], word: Sequence, order: str = "left") -> Tuple[int, int]:
    """Reduce a word in tau-powers and G0-elements to (e, g) meaning tau^e g.

    ``order="left"`` folds from the left, ``"right"`` from the right; the two
    agree by associativity, which the confluence tests check."""
    if pres is None:
        raise NoPresentation("word reduction needs a semidirect presentation")
    items = []
    for tok in word:
        kind, v = _token(tok)
        if kind == "t":
            items.append((v % pres.P, pres.base.identity))
        else:
            if not 0 <= v < pres.base.order:
                raise InputError(f"G0 index {v} out of range")
            items.append((0, v))
    ident = (0, pres.base.identity)
    if order == "left":
        acc = ident
        for x in items:
            acc = pres.mul(acc, x)
        return acc
    acc = ident
    for x in reversed(items):
        acc = pres.mul(x, acc)
    return acc


# ------------------------------------------------------------------ characters

@dataclass(frozen=True, eq=False)
class CycloCharacter:
    """A homomorphism G -> (Z/p^(n+1))^*."""

    group: FiniteGroup
    p: int
    n: int
    values: Tuple[int, ...]

    def __post_init__(self):
        m = self.modulus
        vals = tuple(int(v) % m for v in self.values)
        if len(vals) != self.group.order:
            raise InputError("one character value per group element")
        if any(v % self.p == 0 for v in vals):
            raise InputError("character values must be units")
        t = self.group.table
        for a in range(self.group.order):
            for b in range(self.group.order):
                if vals[int(t[a, b])] != vals[a] * vals[b] % m:
                    raise InputError("character is not multiplicative")
        object.__setattr__(self, "values", vals)

    @property
    def modulus(self) -> int:
        return self.p ** (self.n + 1)

    def __call__(self, g: int) -> int:
        return self.values[g]

    def reduce_to(self, N: int) -> Tuple[int, ...]:
        if N > self.n + 1:
            raise ModulusMismatch(f"character known mod p^{self.n + 1}, precision {N} requested")
        m = self.p ** N
        return tuple(v % m for v in self.values)

    @classmethod
    def trivial(cls, G: FiniteGroup, p: int, n: int) -> "CycloCharacter":
        return cls(G, p, n, tuple([1] * G.order))

    @classmethod
    def from_generator(cls, G: FiniteGroup, p: int, n: int, value: int) -> "CycloCharacter":
        """Cyclic G: the character sending the (first) generator to ``value``."""
        g = G.cyclic_generator()
        if g is None:
            raise InputError("from_generator needs a cyclic group")
        m = p ** (n + 1)
        vals = [0] * G.order
        x, v = G.identity, 1
        for _ in range(G.order):
            vals[x] = v
            x, v = G.mul(x, g), v * value % m
        return cls(G, p, n, tuple(vals))

    @classmethod
    def teichmuller(cls, G: FiniteGroup, p: int, n: int) -> "CycloCharacter":
        """Cyclic G of order dividing p-1 (or 2 for p=2): generator -> a
        primitive root of unity of order |G| in Z/p^(n+1)."""
        m = p ** (n + 1)
        k = G.order
        for a in range(1, p ** (n + 1)):
            if a % p == 0:
                continue
            w = pow(a, p ** n, m)
            if _mult_order(w, m) == k:
                return cls.from_generator(G, p, n, w)
        raise InputError(f"no root of unity of order {k} mod {p}^{n + 1}")

    @classmethod
    def cyclotomic(cls, pres: SemidirectPresentation, p: int, kappa: int, n: int,
                   base: Optional["CycloCharacter"] = None) -> "CycloCharacter":
        """chi(tau^e g) = (1 + p^(kappa+1))^e chi0(g) on Gamma_n x| G0."""
        G = pres.group()
        m = p ** (n + 1)
        c = 1 + p ** (kappa + 1)
        bad = [g for g in range(pres.base.order) if pres.P > 1 and (pow(c, pres.action[g], m) - c) % m]
        if bad:
            raise NoConsistentTwist(f"chi(tau) = {c} cannot satisfy chi(g tau g^-1) = chi(tau) for g = {bad[0]}")
        chi0 = base.values if base is not None else tuple([1] * pres.base.order)
        vals = []
        for i in range(G.order):
            e, g = pres.split(i)
            vals.append(pow(c, e, m) * chi0[g] % m)
        return cls(G, p, n, tuple(vals))

    def to_json(self):
        return {str(i): v for i, v in enumerate(self.values)}

    @classmethod
    def from_json(cls, G: FiniteGroup, p: int, n: int, data) -> "CycloCharacter":
        if isinstance(data, dict):
            vals = [int(data[str(i)]) if str(i) in data else int(data[i]) for i in range(G.order)]
        else:
            vals = [int(v) for v in data]
        return cls(G, p, n, tuple(vals))


def _mult_order(a: int, m: int) -> int:
    k, x = 1, a % m
    while x != 1:
        x = x * a % m
        k += 1
    return k
