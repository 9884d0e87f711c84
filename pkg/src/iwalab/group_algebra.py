"""Idempotent calculus in Z/p^N[G], the Leopoldt reflection and the twisted
ring Lambda_n[G0] with tau-words."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .errors import (InputError, ModulusMismatch, NoConsistentTwist, NonAbelianWithoutCandidates, NotCyclic,
                     NotIdempotent, PDividesOrder, SearchExhausted)
from .groups import CycloCharacter, FiniteGroup, SemidirectPresentation, word_normal_form
from .iwasawa import LambdaQuot, duality_exponent, involution
from .padic import PadicPoly, hensel_factor, padic_inv, pdivmod, pmod, pmul, psub
from .pgroups import FinAbPGroup, PGroupHom


class GroupAlgebraElem:
    """sum_g a_g g in Z/p^N[G]; coefficients indexed by group element."""

    __slots__ = ("group", "p", "N", "coeffs")

    def __init__(self, group: FiniteGroup, p: int, N: int, coeffs):
        if N < 1:
            raise InputError("precision must be >= 1")
        m = p ** N
        c = np.array([int(x) % m for x in coeffs], dtype=object)
        if len(c) != group.order:
            raise InputError("one coefficient per group element")
        self.group, self.p, self.N, self.coeffs = group, p, N, c

    @property
    def modulus(self) -> int:
        return self.p ** self.N

    @classmethod
    def zero(cls, G, p, N) -> "GroupAlgebraElem":
        return cls(G, p, N, [0] * G.order)

    @classmethod
    def one(cls, G, p, N) -> "GroupAlgebraElem":
        return cls.basis(G, p, N, G.identity)

    @classmethod
    def basis(cls, G, p, N, g: int, c: int = 1) -> "GroupAlgebraElem":
        v = [0] * G.order
        v[g] = c
        return cls(G, p, N, v)

    @classmethod
    def random(cls, G, p, N, rng: np.random.Generator) -> "GroupAlgebraElem":
        return cls(G, p, N, [int(x) for x in rng.integers(0, p ** N, size=G.order)])

    @classmethod
    def from_rational(cls, G, p, N, numerators, denominator: int) -> "GroupAlgebraElem":
        """(1/d) sum n_g g, cancelling common p-powers; PDividesOrder if p stays in d."""
        nums = [int(x) for x in numerators]
        d = int(denominator)
        while d % p == 0:
            if any(x % p for x in nums):
                raise PDividesOrder(f"denominator {denominator} keeps a factor {p}")
            nums = [x // p for x in nums]
            d //= p
        inv = pow(d, -1, p ** N)
        return cls(G, p, N, [x * inv for x in nums])

    def _check(self, other: "GroupAlgebraElem"):
        if other.group is not self.group or other.p != self.p:
            raise InputError("elements of different group algebras")

    def like(self, coeffs, N=None) -> "GroupAlgebraElem":
        return GroupAlgebraElem(self.group, self.p, self.N if N is None else N, coeffs)

    def __add__(self, other):
        if isinstance(other, int):
            other = GroupAlgebraElem.one(self.group, self.p, self.N) * other
        self._check(other)
        N = min(self.N, other.N)
        return self.like(self.coeffs + other.coeffs, N)

    __radd__ = __add__

    def __neg__(self):
        return self.like(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return self.like(self.coeffs * other)
        self._check(other)
        N = min(self.N, other.N)
        m = self.p ** N
        t = self.group.table
        out = np.zeros(self.group.order, dtype=object)
        b = other.coeffs
        for i, a in enumerate(self.coeffs):
            if a:
                np.add.at(out, t[i], a * b)
        return self.like(out % m, N)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        r = GroupAlgebraElem.one(self.group, self.p, self.N)
        x = self
        while e:
            if e & 1:
                r = r * x
            x = x * x
            e >>= 1
        return r

    def __eq__(self, other):
        if isinstance(other, GroupAlgebraElem):
            return (other.group is self.group and self.N == other.N
                    and all(int(a) == int(b) for a, b in zip(self.coeffs, other.coeffs)))
        if isinstance(other, int):
            return self == GroupAlgebraElem.one(self.group, self.p, self.N) * other
        return NotImplemented

    def __hash__(self):
        return hash((id(self.group), self.N, tuple(int(x) for x in self.coeffs)))

    def __repr__(self):
        terms = [f"{int(c)}*g{i}" for i, c in enumerate(self.coeffs) if c]
        return f"GroupAlgebraElem(p={self.p}, N={self.N}, {' + '.join(terms) or '0'})"

    def is_zero(self) -> bool:
        return not any(int(x) for x in self.coeffs)

    def reduce(self, N: int) -> "GroupAlgebraElem":
        return self.like(self.coeffs, min(N, self.N))

    def augmentation(self) -> int:
        return int(sum(self.coeffs)) % self.modulus

    def right_matrix(self) -> np.ndarray:
        """Matrix of x -> x * self on the basis of group elements."""
        n = self.group.order
        M = np.zeros((n, n), dtype=object)
        t = self.group.table
        for j in range(n):
            for k, a in enumerate(self.coeffs):
                if a:
                    M[t[j, k], j] += a
        return M % self.modulus

    def left_matrix(self) -> np.ndarray:
        """Matrix of x -> self * x."""
        n = self.group.order
        M = np.zeros((n, n), dtype=object)
        t = self.group.table
        for j in range(n):
            for k, a in enumerate(self.coeffs):
                if a:
                    M[t[k, j], j] += a
        return M % self.modulus

    def is_unit(self) -> bool:
        return linalg.rank_mod_p(self.left_matrix(), self.p) == self.group.order

    def inverse(self) -> "GroupAlgebraElem":
        e = np.zeros(self.group.order, dtype=object)
        e[self.group.identity] = 1
        x = linalg.solve(self.left_matrix(), e, self.p, self.N)
        if x is None or not self.is_unit():
            raise ArithmeticError("not a unit of the group algebra")
        return self.like(x)

    def is_idempotent(self) -> bool:
        return self * self == self

    def is_central(self) -> bool:
        G = self.group
        return all(GroupAlgebraElem.basis(G, self.p, self.N, g) * self == self * GroupAlgebraElem.basis(G, self.p, self.N, g)
                   for g in range(G.order))

    def act(self, action: Sequence[PGroupHom], x) -> np.ndarray:
        """self . x for a module given by one homomorphism per group element."""
        X = action[0].codomain
        acc = X.zero()
        for g, a in enumerate(self.coeffs):
            if a:
                acc = acc + int(a) * action[g](x)
        return X.reduce(acc)

    def to_json(self):
        return {"p": self.p, "N": self.N, "coeffs": [int(c) for c in self.coeffs]}


def _require_idempotent(*xs: GroupAlgebraElem):
    for x in xs:
        if not x.is_idempotent():
            raise NotIdempotent(f"{x!r} is not idempotent mod p^{x.N}")


# ------------------------------------------------------------------ central idempotents

def _lift_idempotent(e: GroupAlgebraElem, N: int) -> GroupAlgebraElem:
    """Lift an idempotent of a commutative subalgebra mod p to mod p^N (e <- 3e^2 - 2e^3)."""
    e = GroupAlgebraElem(e.group, e.p, N, e.coeffs)
    for _ in range(2 * N.bit_length() + 4):
        e2 = e * e
        if e2 == e:
            return e
        e = e2 * 3 - e2 * e * 2
    raise ArithmeticError("idempotent lift did not converge")


def _cyclic_route(G: FiniteGroup, p: int, N: int) -> List[GroupAlgebraElem]:
    # idempotents of Z/p^N[X]/(X^m - 1) from the Hensel factors of X^m - 1
    m = G.order
    g = G.cyclic_generator()
    M = p ** N
    F = [-1] + [0] * (m - 1) + [1]
    factors = hensel_factor(PadicPoly(p, N, F))
    powers = [G.identity]
    for _ in range(m - 1):
        powers.append(G.mul(powers[-1], g))
    out = []
    for f in factors:
        h = pdivmod(F, list(f.coeffs), M)[0]
        s = _inverse_mod(h, list(f.coeffs), p, N)
        e = pmod(pmul(s, h, M), F, M)
        coeffs = [0] * m
        for k, c in enumerate(e):
            coeffs[powers[k]] = c
        out.append(GroupAlgebraElem(G, p, N, coeffs))
    return out


def _inverse_mod(h, f, p: int, N: int):
    """Inverse of h modulo the monic f over Z/p^N (h a unit mod (p, f))."""
    from sympy import ZZ
    from sympy.polys import galoistools as gt
    from .padic import _from_gf, _to_gf

    s_gf, _, g = gt.gf_gcdex(_to_gf(h, p), _to_gf(f, p), p, ZZ)
    if gt.gf_degree(g) != 0:
        raise ArithmeticError("not invertible modulo f")
    s = _from_gf(gt.gf_mul_ground(s_gf, pow(int(g[0]), -1, p), p, ZZ))
    M = p ** N
    hr = pmod(h, f, M)
    for _ in range(N.bit_length() + 2):
        # s <- s (2 - h s)
        s = pmod(pmul(s, psub([2], pmod(pmul(hr, s, M), f, M), M), M), f, M)
    return s


def center_basis(G: FiniteGroup) -> List[List[int]]:
    return G.conjugacy_classes()


def _center_route(G: FiniteGroup, p: int, N: int) -> List[GroupAlgebraElem]:
    # Berlekamp on the center mod p: B = ker(Frobenius - 1) is F_p^k, split it
    # with e (1 - (b - c)^(p-1)), then lift each idempotent.
    classes = center_basis(G)
    k = len(classes)
    sums = [GroupAlgebraElem(G, p, 1, [1 if g in cl else 0 for g in range(G.order)]) for cl in classes]
    Fr = np.zeros((k, k), dtype=object)
    for j, s in enumerate(sums):
        sp = s ** p
        for i, cl in enumerate(classes):
            Fr[i, j] = int(sp.coeffs[cl[0]])
    A = (Fr - np.eye(k, dtype=object)) % p
    kern = linalg.kernel(A, p, 1)
    fixed = []
    for v in kern:
        c = np.zeros(G.order, dtype=object)
        for i, cl in enumerate(classes):
            for g in cl:
                c[g] = int(v[i])
        fixed.append(GroupAlgebraElem(G, p, 1, c))
    idems = [GroupAlgebraElem.one(G, p, 1)]
    for b in fixed:
        nxt = []
        for e in idems:
            for c in range(p):
                f = e * (1 - (b - c) ** (p - 1))
                if not f.is_zero():
                    nxt.append(f)
        idems = nxt
    if len(idems) != len(kern):
        raise ArithmeticError("center splitting produced an unexpected number of idempotents")
    lifted = [_lift_idempotent(e, N) for e in idems]
    return sorted(lifted, key=lambda e: [int(x) for x in e.coeffs])


def verify_idempotent_system(idems: Sequence[GroupAlgebraElem]) -> Dict[str, bool]:
    if not idems:
        raise InputError("empty idempotent list")
    G, p, N = idems[0].group, idems[0].p, idems[0].N
    one = GroupAlgebraElem.one(G, p, N)
    total = GroupAlgebraElem.zero(G, p, N)
    for e in idems:
        total = total + e
    return {
        "idempotent": all(e.is_idempotent() for e in idems),
        "orthogonal": all((a * b).is_zero() for i, a in enumerate(idems) for j, b in enumerate(idems) if i != j),
        "complete": total == one,
        "central": all(e.is_central() for e in idems),
        "nonzero": all(not e.is_zero() for e in idems),
    }


def central_idempotents(G: FiniteGroup, p: int, N: int, candidates: Optional[Sequence] = None,
                        use_center: bool = False) -> List[GroupAlgebraElem]:
    """Primitive central idempotents of Z/p^N[G].

    Cyclic G with p not dividing |G| goes through the factorization of X^m - 1;
    other abelian groups (and any G with ``use_center``) through the center.
    Non-abelian G otherwise needs ``candidates``, which are verified."""
    if candidates is not None:
        idems = []
        for c in candidates:
            if isinstance(c, GroupAlgebraElem):
                idems.append(c.reduce(N))
            elif isinstance(c, dict):
                idems.append(GroupAlgebraElem.from_rational(G, p, N, c["coeffs"], c.get("denominator", 1)))
            else:
                idems.append(GroupAlgebraElem(G, p, N, c))
        checks = verify_idempotent_system(idems)
        if not all(checks.values()):
            bad = [k for k, v in checks.items() if not v]
            raise NotIdempotent(f"candidate system fails: {', '.join(bad)}")
        return idems
    if G.order == 1:
        return [GroupAlgebraElem.one(G, p, N)]
    if G.is_cyclic() and G.order % p:
        return _cyclic_route(G, p, N)
    if G.is_abelian() or use_center:
        return _center_route(G, p, N)
    raise NonAbelianWithoutCandidates("non-abelian group: supply candidates or use_center=True")


# ------------------------------------------------------------------ ranks, congruence, isomorphism

def idem_rank(alpha: GroupAlgebraElem) -> int:
    """dim alpha Q_p[G]; equals the rank mod p of right multiplication by alpha."""
    _require_idempotent(alpha)
    return linalg.rank_mod_p(alpha.left_matrix(), alpha.p)


@dataclass
class CongruenceVerdict:
    congruent: bool
    nu: GroupAlgebraElem
    conditions: Dict[str, bool]
    mutual_membership: bool

    def to_json(self):
        return {"congruent": self.congruent, "nu": self.nu.to_json(), "conditions": self.conditions,
                "mutual_membership": self.mutual_membership}


def idem_congruent(alpha: GroupAlgebraElem, beta: GroupAlgebraElem) -> CongruenceVerdict:
    """alpha Z[G] = beta Z[G] iff nu = alpha - beta has nu^2 = 0, nu alpha = 0, alpha nu = nu."""
    _require_idempotent(alpha, beta)
    nu = alpha - beta
    cond = {"nu_squared_zero": (nu * nu).is_zero(), "nu_alpha_zero": (nu * alpha).is_zero(),
            "alpha_nu_is_nu": alpha * nu == nu}
    # beta in alpha R and alpha in beta R
    mutual = alpha * beta == beta and beta * alpha == alpha
    return CongruenceVerdict(all(cond.values()), nu, cond, mutual)


def congruent_partner(alpha: GroupAlgebraElem, x: GroupAlgebraElem) -> GroupAlgebraElem:
    """beta = alpha - nu with nu = alpha x (1 - alpha); beta is idempotent and congruent to alpha."""
    _require_idempotent(alpha)
    nu = alpha * x * (1 - alpha)
    return alpha - nu


@dataclass
class IsomorphismVerdict:
    isomorphic: bool
    witness: Optional[GroupAlgebraElem]
    method: str
    profile_alpha: List[int]
    profile_beta: List[int]

    def to_json(self):
        return {"isomorphic": self.isomorphic, "witness": self.witness.to_json() if self.witness is not None else None,
                "method": self.method, "profile_alpha": self.profile_alpha, "profile_beta": self.profile_beta}


def _conjugating_unit(alpha, beta, u) -> Optional[GroupAlgebraElem]:
    # gamma = u alpha u^-1; w = beta gamma + (1 - beta)(1 - gamma) satisfies w gamma = beta w
    if not u.is_unit():
        return None
    gamma = u * alpha * u.inverse()
    w = beta * gamma + (1 - beta) * (1 - gamma)
    if not w.is_unit():
        return None
    v = w * u
    return v if v * alpha * v.inverse() == beta else None


def idem_isomorphic(alpha: GroupAlgebraElem, beta: GroupAlgebraElem, seed: int = 0, tries: int = 2000,
                    exhaustive_limit: int = 10 ** 5) -> IsomorphismVerdict:
    _require_idempotent(alpha, beta)
    G, p, N = alpha.group, alpha.p, alpha.N
    one = GroupAlgebraElem.one(G, p, N)
    if alpha == beta:
        return IsomorphismVerdict(True, one, "equal", [], [])
    cents = central_idempotents(G, p, N, use_center=True)
    pa = [idem_rank(e * alpha) for e in cents]
    pb = [idem_rank(e * beta) for e in cents]
    if G.is_abelian():
        # commutative: u alpha u^-1 = alpha, so only alpha = beta is isomorphic
        return IsomorphismVerdict(False, None, "central components", pa, pb)
    if pa != pb:
        return IsomorphismVerdict(False, None, "component ranks", pa, pb)
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        v = _conjugating_unit(alpha, beta, GroupAlgebraElem.random(G, p, N, rng))
        if v is not None:
            return IsomorphismVerdict(True, v, "random unit search", pa, pb)
    if p ** G.order <= exhaustive_limit:
        for coeffs in itertools.product(range(p), repeat=G.order):
            v = _conjugating_unit(alpha, beta, GroupAlgebraElem(G, p, N, coeffs))
            if v is not None:
                return IsomorphismVerdict(True, v, "exhaustive mod p", pa, pb)
    raise SearchExhausted("equal component ranks but no conjugating unit found within the search bound")


# ------------------------------------------------------------------ annihilators and supports

@dataclass
class AnnihilatorReport:
    top: GroupAlgebraElem
    bot: GroupAlgebraElem
    annihilating: List[int]
    components: List[GroupAlgebraElem]

    def to_json(self):
        return {"alpha_top": self.top.to_json(), "alpha_bot": self.bot.to_json(),
                "annihilating_components": self.annihilating, "n_components": len(self.components)}


def _check_action(G: FiniteGroup, action: Sequence[PGroupHom]):
    if len(action) != G.order:
        raise InputError("one module map per group element")
    for g in range(G.order):
        for h in range(G.order):
            if not action[g].compose(action[h]).equals(action[G.mul(g, h)]):
                raise InputError("module maps do not form a group action")


def orbit_span_contains(X: FinAbPGroup, action: Sequence[PGroupHom], x, targets) -> bool:
    orbit = np.stack([X.reduce(a(x)) for a in action], axis=1)
    return X.span_contains(orbit, targets)


def annihilator_and_support(G: FiniteGroup, X: FinAbPGroup, action: Sequence, x) -> AnnihilatorReport:
    action = [a if isinstance(a, PGroupHom) else PGroupHom(X, X, a) for a in action]
    _check_action(G, action)
    p = X.p
    N = max(X.E, 1)
    if not G.is_abelian() and not orbit_span_contains(X, action, x, X.generators()):
        raise NotCyclic("non-commutative action and x does not generate X")
    cents = central_idempotents(G, p, N, use_center=True)
    ann = [i for i, e in enumerate(cents) if X.is_zero(e.act(action, x))]
    top = GroupAlgebraElem.zero(G, p, N)
    for i in ann:
        top = top + cents[i]
    return AnnihilatorReport(top, GroupAlgebraElem.one(G, p, N) - top, ann, cents)


@dataclass
class QuasicyclicReport:
    confirmed: bool
    q: int
    adjusted_generator: Optional[List[int]]
    candidate_works: bool
    search_generator: Optional[List[int]]
    searched: bool

    def to_json(self):
        return dict(self.__dict__)


def _divide(X: FinAbPGroup, v, e: int):
    # some y with p^e y = v, or None
    if e == 0:
        return X.reduce(v)
    A = X.embed_matrix(np.eye(X.rank, dtype=object) * X.p ** e)
    y = linalg.solve(A, X.embed_matrix(np.asarray(v, dtype=object).reshape(-1, 1)).reshape(-1), X.p, X.E)
    return None if y is None else X.reduce(y)


def quasicyclic_gap(G: FiniteGroup, X: FinAbPGroup, action: Sequence, x, exhaustive_limit: int = 3 ** 8
                    ) -> QuasicyclicReport:
    """Is qX inside the Z[G]-span of the adjusted generator, q = p^v_p(|G|)?

    The adjusted generator follows the lemma: x_i' = q e_i x over the central
    primitive idempotents e_i, x_i = e_i y_i with p^k y_i = x_i' and k maximal,
    x = sum x_i. When that fails, X is searched for any generator that works."""
    action = [a if isinstance(a, PGroupHom) else PGroupHom(X, X, a) for a in action]
    _check_action(G, action)
    p = X.p
    q = 1
    while G.order % (q * p) == 0:
        q *= p
    if X.rank == 0:
        return QuasicyclicReport(True, q, [], True, [], False)
    targets = X.generators() * q
    N = X.E
    cents = central_idempotents(G, p, N, use_center=True)
    adj = X.zero()
    for e in cents:
        xi = X.reduce(e.act(action, x) * q)
        if X.is_zero(xi):
            continue
        k = 0
        while k + 1 <= N and _divide(X, xi, k + 1) is not None:
            k += 1
        y = _divide(X, xi, k)
        adj = X.reduce(adj + e.act(action, y))
    confirmed = orbit_span_contains(X, action, adj, targets)
    cand = orbit_span_contains(X, action, x, targets)
    found, searched = None, False
    if not confirmed and X.order <= exhaustive_limit:
        searched = True
        for v in X.elements(limit=exhaustive_limit):
            if orbit_span_contains(X, action, v, targets):
                found = [int(t) for t in v]
                break
    return QuasicyclicReport(confirmed, q, [int(t) for t in adj], cand, found, searched)


def canonic_representative(alpha: GroupAlgebraElem) -> Tuple[List[int], GroupAlgebraElem]:
    """Abelian G: the central primitive idempotents below alpha, in the fixed
    ordering of central_idempotents, and their sum."""
    _require_idempotent(alpha)
    G = alpha.group
    if not G.is_abelian():
        raise InputError("canonic representatives are only realized for abelian groups")
    cents = central_idempotents(G, alpha.p, alpha.N)
    idx = [i for i, e in enumerate(cents) if e * alpha == e]
    s = GroupAlgebraElem.zero(G, alpha.p, alpha.N)
    for i in idx:
        s = s + cents[i]
    return idx, s


# ------------------------------------------------------------------ reflection

def leopoldt_reflect(alpha: GroupAlgebraElem, chi: CycloCharacter) -> GroupAlgebraElem:
    """alpha' = sum a_s chi(s) s^-1."""
    if chi.group is not alpha.group:
        raise InputError("character of a different group")
    if chi.p != alpha.p:
        raise ModulusMismatch("character and algebra over different primes")
    vals = chi.reduce_to(alpha.N)
    G = alpha.group
    out = [0] * G.order
    for s, a in enumerate(alpha.coeffs):
        out[G.inv(s)] = int(a) * vals[s]
    return alpha.like(out)


def multiplicativity(reflect, x, y) -> Dict[str, bool]:
    """Which convention (xy)' satisfies: anti (y'x') and/or auto (x'y')."""
    r = reflect(x * y)
    return {"anti": r == reflect(y) * reflect(x), "auto": r == reflect(x) * reflect(y)}


# ------------------------------------------------------------------ twisted ring Lambda_n[G0]

@dataclass(frozen=True, eq=False)
class TwistedRing:
    """Lambda_{n,N}[G0] with g a = c_g(a) g, c_g(T) = (T+1)^a(g) - 1, tau = T + 1."""

    pres: SemidirectPresentation
    p: int
    kappa: int
    n: int
    N: int

    def __post_init__(self):
        if self.pres.P != self.p ** (self.n - self.kappa):
            raise InputError(f"presentation has |Gamma_n| = {self.pres.P}, expected p^(n-kappa) = {self.p ** (self.n - self.kappa)}")

    @property
    def base(self) -> FiniteGroup:
        return self.pres.base

    def lam(self, coeffs, N=None) -> LambdaQuot:
        return LambdaQuot(self.p, self.kappa, self.n, self.N if N is None else N, tuple(coeffs))

    def tau_power(self, e: int, N=None) -> LambdaQuot:
        return self.lam((1, 1), N) ** (e % self.pres.P)

    def act(self, g: int, a: LambdaQuot) -> LambdaQuot:
        """c_g(a): T -> (T+1)^a(g) - 1."""
        k = self.pres.action[g]
        if k == 1:
            return a
        u = self.lam((1, 1), a.N) ** k - 1
        acc = self.lam((0,), a.N)
        for c in reversed(a.coeffs):
            acc = acc * u + c
        return acc.like(acc.coeffs, truncated=a.truncated)

    def elem(self, terms: Dict[int, LambdaQuot]) -> "TwistedRingElem":
        return TwistedRingElem(self, dict(terms))

    def one(self) -> "TwistedRingElem":
        return self.elem({self.base.identity: self.lam((1,))})

    def from_word(self, word: Sequence, order: str = "left") -> "TwistedRingElem":
        e, g = word_normal_form(self.pres, word, order)
        return self.elem({g: self.tau_power(e)})

    def random(self, rng: np.random.Generator, density: float = 0.6) -> "TwistedRingElem":
        P = self.pres.P
        terms = {}
        for g in range(self.base.order):
            if rng.random() < density:
                terms[g] = self.lam([int(x) for x in rng.integers(0, self.p ** self.N, size=P)])
        return self.elem(terms)


class TwistedRingElem:
    """sum_g a_g x| g, stored in the normal form tau^e g (coefficients in Lambda_n)."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: TwistedRing, terms: Dict[int, LambdaQuot]):
        self.ring = ring
        self.terms = {int(g): a for g, a in terms.items() if any(a.coeffs)}

    @property
    def N(self) -> int:
        return min((a.N for a in self.terms.values()), default=self.ring.N)

    @property
    def truncated(self) -> bool:
        return any(a.truncated for a in self.terms.values())

    def coeff(self, g: int) -> LambdaQuot:
        return self.terms.get(g, self.ring.lam((0,), self.N))

    def __add__(self, other: "TwistedRingElem") -> "TwistedRingElem":
        out = dict(self.terms)
        for g, a in other.terms.items():
            out[g] = out[g] + a if g in out else a
        return TwistedRingElem(self.ring, out)

    def __neg__(self):
        return TwistedRingElem(self.ring, {g: -a for g, a in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "TwistedRingElem") -> "TwistedRingElem":
        # (a x| g)(b x| h) = a c_g(b) x| gh
        R = self.ring
        out: Dict[int, LambdaQuot] = {}
        for g, a in self.terms.items():
            for h, b in other.terms.items():
                gh = R.base.mul(g, h)
                t = a * R.act(g, b)
                out[gh] = out[gh] + t if gh in out else t
        return TwistedRingElem(R, out)

    def reduce(self, N: int) -> "TwistedRingElem":
        return TwistedRingElem(self.ring, {g: a.reduce(N) for g, a in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, TwistedRingElem):
            return NotImplemented
        N = min(self.N, other.N)
        keys = set(self.terms) | set(other.terms)
        return all(self.coeff(g).reduce(N).coeffs == other.coeff(g).reduce(N).coeffs for g in keys)

    def __hash__(self):
        return hash(tuple(sorted((g, a.coeffs) for g, a in self.terms.items())))

    def normal_form(self) -> List[Tuple[int, int, int]]:
        """Triples (coefficient, e, g) meaning coefficient * tau^e g, expanding a_g in powers of tau."""
        out = []
        R = self.ring
        for g, a in sorted(self.terms.items()):
            # a(T) = sum c_k T^k = sum c_k (tau - 1)^k
            P = R.pres.P
            m = a.modulus
            tau_c = [0] * P
            for k, c in enumerate(a.coeffs):
                if c:
                    for j in range(k + 1):
                        tau_c[j % P] = (tau_c[j % P] + c * _binom(k, j) * (-1) ** (k - j)) % m
            out.extend((c, e, g) for e, c in enumerate(tau_c) if c)
        return out

    def to_json(self):
        return {"terms": {str(g): list(a.coeffs) for g, a in sorted(self.terms.items())}, "N": self.N,
                "truncated": self.truncated}

    def __repr__(self):
        return f"TwistedRingElem({self.to_json()})"


def _binom(n: int, k: int) -> int:
    from math import comb
    return comb(n, k)


def word_reduce(ring: TwistedRing, word: Sequence, order: str = "left") -> TwistedRingElem:
    return ring.from_word(word, order)


def twist_precision(ring: TwistedRing, chi: CycloCharacter) -> int:
    return min(ring.N, duality_exponent(ring.p, ring.kappa, ring.n), chi.n + 1)


def _check_twist(ring: TwistedRing, chi: CycloCharacter, N: int):
    pres = ring.pres
    if pres.P == 1:
        return
    m = ring.p ** N
    t = chi.values[pres.index(1, pres.base.identity)]
    if (t - 1 - ring.p ** (ring.kappa + 1)) % m:
        raise NoConsistentTwist(f"chi(tau) = {t} differs from 1 + p^(kappa+1) mod p^{N}")
    for g in range(pres.base.order):
        if (pow(t, pres.action[g], m) - t) % m:
            raise NoConsistentTwist(f"chi(tau)^a(g) != chi(tau) mod p^{N} for g = {g}; "
                                    "the coefficient involution does not commute with the G0-action")


def twisted_reflect(x: TwistedRingElem, chi: CycloCharacter) -> TwistedRingElem:
    """x' = sum chi(g) c_{g^-1}(a_g^*) x| g^-1, the chi-twisted antipode composed
    with the coefficientwise involution; an anti-automorphism.

    ``chi`` is a character of the full group Gamma_n x| G0 (see
    CycloCharacter.cyclotomic)."""
    R = x.ring
    N = twist_precision(R, chi)
    _check_twist(R, chi, N)
    G0 = R.base
    vals = chi.reduce_to(N)
    out = {}
    for g, a in x.terms.items():
        a_star = involution(a.reduce(N) if a.N > N else a)
        if a_star.N > N:
            a_star = a_star.reduce(N)
        gi = G0.inv(g)
        cg = vals[R.pres.index(0, g)]
        out[gi] = R.act(gi, a_star) * cg
    return TwistedRingElem(R, out)
