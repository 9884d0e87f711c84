"""Finite-level bilinear pairings X x R -> Z/p^(n+1) with Galois actions.

Roots of unity are written additively, so conjugation is multiplication by -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import CovarianceFailed, InputError, NoConsistentTwist
from .group_algebra import GroupAlgebraElem, leopoldt_reflect
from .groups import CycloCharacter, FiniteGroup
from .pgroups import FinAbPGroup, PGroupHom, inverse_automorphism

EXHAUSTIVE = 3 ** 6


def _hom(X: FinAbPGroup, M) -> PGroupHom:
    return PGroupHom(X, X, np.asarray(M, dtype=object).reshape(X.rank, X.rank))


@dataclass(frozen=True)
class TauAction:
    """The topological generator tau: matrices on X and R and chi(tau)."""

    X: PGroupHom
    R: PGroupHom
    chi: int


@dataclass(frozen=True, eq=False)
class PairingTable:
    p: int
    n: int
    X: FinAbPGroup
    R: FinAbPGroup
    table: np.ndarray
    group: Optional[FiniteGroup] = None
    act_X: Tuple[PGroupHom, ...] = ()
    act_R: Tuple[PGroupHom, ...] = ()
    chi: Optional[CycloCharacter] = None
    tau: Optional[TauAction] = None

    def __post_init__(self):
        m = self.modulus
        if self.X.p != self.p or self.R.p != self.p:
            raise InputError("groups over a different prime")
        B = np.asarray(self.table, dtype=object).reshape(self.X.rank, self.R.rank) % m
        object.__setattr__(self, "table", B)
        # bilinearity on generators: p^e_i kills row i, p^f_j kills column j
        for i, e in enumerate(self.X.exps):
            for j, f in enumerate(self.R.exps):
                if (int(B[i, j]) * self.p ** e) % m or (int(B[i, j]) * self.p ** f) % m:
                    raise InputError(f"table entry ({i},{j}) is not compatible with the generator orders")
        if self.group is not None:
            G = self.group
            if len(self.act_X) != G.order or len(self.act_R) != G.order:
                raise InputError("one action matrix per group element on X and on R")
            for acts, Y in ((self.act_X, self.X), (self.act_R, self.R)):
                for h in acts:
                    if not h.is_surjective():
                        raise InputError("action matrices must be invertible")
                for a in range(G.order):
                    for b in range(G.order):
                        if not acts[G.mul(a, b)].equals(acts[a].compose(acts[b])):
                            raise InputError("action matrices do not form a group action")
            if self.chi is None:
                object.__setattr__(self, "chi", CycloCharacter.trivial(G, self.p, self.n))
            if self.chi.group is not G or self.chi.n != self.n:
                raise InputError("character must live on the acting group with modulus p^(n+1)")
        if self.tau is not None:
            if not (self.tau.X.is_surjective() and self.tau.R.is_surjective()):
                raise InputError("tau must act invertibly")
            if self.tau.chi % self.p == 0:
                raise InputError("chi(tau) must be a unit")

    @property
    def modulus(self) -> int:
        return self.p ** (self.n + 1)

    def pair(self, x, r) -> int:
        x = np.asarray(x, dtype=object).reshape(-1)
        r = np.asarray(r, dtype=object).reshape(-1)
        return int(x.dot(self.table).dot(r)) % self.modulus if len(x) and len(r) else 0

    def pair_rows(self, Xs, Rs) -> np.ndarray:
        """All values <x, r> for x in rows of Xs, r in rows of Rs."""
        Xs = np.asarray(Xs, dtype=object).reshape(-1, self.X.rank)
        Rs = np.asarray(Rs, dtype=object).reshape(-1, self.R.rank)
        if not self.X.rank or not self.R.rank:
            return np.zeros((len(Xs), len(Rs)), dtype=object)
        return Xs.dot(self.table).dot(Rs.T) % self.modulus

    def left_map(self) -> PGroupHom:
        """x -> <x, .> as a vector of values on the generators of R."""
        V = FinAbPGroup(self.p, (self.n + 1,) * self.R.rank)
        return PGroupHom(self.X, V, self.table.T)

    def right_map(self) -> PGroupHom:
        V = FinAbPGroup(self.p, (self.n + 1,) * self.X.rank)
        return PGroupHom(self.R, V, self.table)

    def to_json(self):
        out = {"p": self.p, "n": self.n, "X": list(self.X.exps), "R": list(self.R.exps),
               "table": [[int(v) for v in row] for row in self.table]}
        if self.group is not None:
            out["group"] = {"table": [[int(v) for v in row] for row in self.group.table]}
            out["actions"] = {"X": [[[int(v) for v in row] for row in h.matrix] for h in self.act_X],
                              "R": [[[int(v) for v in row] for row in h.matrix] for h in self.act_R]}
            out["chi"] = list(self.chi.values)
        if self.tau is not None:
            out["tau"] = {"X": [[int(v) for v in row] for row in self.tau.X.matrix],
                          "R": [[int(v) for v in row] for row in self.tau.R.matrix], "chi": self.tau.chi}
        return out

    @classmethod
    def from_json(cls, data) -> "PairingTable":
        try:
            p, n = int(data["p"]), int(data["n"])
            X = FinAbPGroup(p, tuple(data["X"]))
            R = FinAbPGroup(p, tuple(data["R"]))
            G = chi = None
            aX: Tuple[PGroupHom, ...] = ()
            aR: Tuple[PGroupHom, ...] = ()
            if "group" in data:
                g = data["group"]
                G = FiniteGroup.cyclic(int(g["cyclic"])) if "cyclic" in g else FiniteGroup(np.array(g["table"]))
                aX = tuple(_hom(X, M) for M in data["actions"]["X"])
                aR = tuple(_hom(R, M) for M in data["actions"]["R"])
                chi = CycloCharacter(G, p, n, tuple(data.get("chi", [1] * G.order)))
            tau = None
            if "tau" in data:
                t = data["tau"]
                tau = TauAction(_hom(X, t["X"]), _hom(R, t["R"]), int(t["chi"]))
            return cls(p, n, X, R, np.array(data["table"], dtype=object).reshape(X.rank, R.rank), G, aX, aR, chi, tau)
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad pairing description: {exc}") from exc


# ------------------------------------------------------------------ verdicts

@dataclass
class Verdict:
    ok: bool
    detail: Dict[str, object] = field(default_factory=dict)
    witness: Optional[Dict[str, object]] = None

    def to_json(self):
        return {"ok": self.ok, "detail": self.detail, "witness": self.witness}


def is_nondegenerate(P: PairingTable) -> Verdict:
    left = P.left_map().kernel_gens()
    right = P.right_map().kernel_gens()
    lk = P.X.subgroup_exps(left) if left.size else ()
    rk = P.R.subgroup_exps(right) if right.size else ()
    return Verdict(not lk and not rk, {"left_kernel": list(lk), "right_kernel": list(rk)})


def _elements_or_gens(P: PairingTable, exhaustive_limit: int):
    if P.X.order * P.R.order <= exhaustive_limit:
        return P.X.elements(), P.R.elements(), True
    return P.X.generators(), P.R.generators(), False


def _actions(P: PairingTable):
    out = []
    if P.group is not None:
        for g in range(P.group.order):
            out.append((f"g{g}", P.act_X[g], P.act_R[g], P.chi(g)))
    if P.tau is not None:
        out.append(("tau", P.tau.X, P.tau.R, P.tau.chi))
    return out


def covariance_check(P: PairingTable, exhaustive_limit: int = EXHAUSTIVE) -> Verdict:
    """<g x, g r> = chi(g) <x, r> for every acting element (and tau)."""
    Xs, Rs, exhaustive = _elements_or_gens(P, exhaustive_limit)
    base = P.pair_rows(Xs, Rs)
    for name, AX, AR, c in _actions(P):
        moved = P.pair_rows(AX.apply_rows(Xs), AR.apply_rows(Rs))
        bad = np.argwhere((moved - base * c) % P.modulus != 0)
        if len(bad):
            i, j = bad[0]
            return Verdict(False, {"element": name, "exhaustive": exhaustive},
                           {"g": name, "x": [int(v) for v in Xs[i]], "r": [int(v) for v in Rs[j]]})
    return Verdict(True, {"elements": [a[0] for a in _actions(P)], "exhaustive": exhaustive})


def _tau_poly_matrix(h: PGroupHom, coeffs: Sequence[int], shift: Optional[Tuple[int, PGroupHom]] = None) -> PGroupHom:
    """f(T) with T = h - 1, or T = c h^-1 - 1 when shift = (c, h^-1)."""
    Y = h.domain
    eye = np.eye(Y.rank, dtype=object)
    base = h.matrix if shift is None else shift[1].matrix * shift[0]
    T = _hom(Y, base - eye)
    acc = _hom(Y, np.zeros((Y.rank, Y.rank), dtype=object))
    for c in reversed(list(coeffs)):
        acc = _hom(Y, T.compose(acc).matrix + eye * int(c))
    return acc


def reflection_adjunction(P: PairingTable, alpha: Union[GroupAlgebraElem, Sequence[int], None] = None,
                          exhaustive_limit: int = EXHAUSTIVE) -> Verdict:
    """<x, alpha r> = <alpha' x, r>.

    ``alpha`` is a group-ring element (alpha' = the Leopoldt reflection) or a
    coefficient list f of a polynomial in T = tau - 1 (alpha' = f(T*),
    T* = chi(tau) tau^-1 - 1)."""
    cov = covariance_check(P, exhaustive_limit)
    if not cov.ok:
        raise CovarianceFailed(f"covariance fails: {cov.witness}")
    if alpha is None:
        alpha = [1]
    if isinstance(alpha, GroupAlgebraElem):
        if P.group is None or alpha.group is not P.group:
            raise InputError("alpha must live in the group ring of the acting group")
        N = min(alpha.N, P.n + 1)
        alpha = GroupAlgebraElem(alpha.group, alpha.p, N, alpha.coeffs)
        ref = leopoldt_reflect(alpha, P.chi)
        eyeR, eyeX = np.zeros((P.R.rank, P.R.rank), dtype=object), np.zeros((P.X.rank, P.X.rank), dtype=object)
        onR, onX = eyeR, eyeX
        for g in range(P.group.order):
            onR = onR + P.act_R[g].matrix * int(alpha.coeffs[g])
            onX = onX + P.act_X[g].matrix * int(ref.coeffs[g])
        onR, onX = _hom(P.R, onR), _hom(P.X, onX)
        kind = "group ring"
    else:
        if P.tau is None:
            if list(alpha) not in ([1], []):
                raise InputError("polynomials in T need a tau action")
            onR, onX = _hom(P.R, np.eye(P.R.rank, dtype=object)), _hom(P.X, np.eye(P.X.rank, dtype=object))
        else:
            onR = _tau_poly_matrix(P.tau.R, alpha)
            onX = _tau_poly_matrix(P.tau.X, alpha, (P.tau.chi, inverse_automorphism(P.tau.X)))
        kind = "tau polynomial"
    Xs, Rs, exhaustive = _elements_or_gens(P, exhaustive_limit)
    lhs = P.pair_rows(Xs, onR.apply_rows(Rs))
    rhs = P.pair_rows(onX.apply_rows(Xs), Rs)
    bad = np.argwhere((lhs - rhs) % P.modulus != 0)
    if len(bad):
        i, j = bad[0]
        return Verdict(False, {"kind": kind, "exhaustive": exhaustive},
                       {"x": [int(v) for v in Xs[i]], "r": [int(v) for v in Rs[j]]})
    return Verdict(True, {"kind": kind, "exhaustive": exhaustive})


# ------------------------------------------------------------------ dual construction

def contragredient(h: PGroupHom) -> PGroupHom:
    """h^v with <h x, r> = <x, h^v r> for the pairing diag(p^(n+1-e_i))."""
    X = h.domain
    K = h.matrix
    r = X.rank
    out = np.zeros((r, r), dtype=object)
    for i in range(r):
        for j in range(r):
            d = X.exps[i] - X.exps[j]
            out[i, j] = int(K[j, i]) * X.p ** d if d >= 0 else int(K[j, i]) // X.p ** (-d)
    return _hom(X, out)


def build_dual_pairing(X: FinAbPGroup, n: int, group: Optional[FiniteGroup] = None,
                       act_X: Sequence = (), chi: Union[CycloCharacter, Sequence[int], None] = None,
                       tau_X=None, chi_tau: Optional[int] = None) -> PairingTable:
    """R = X as a group, <x, r> = sum p^(n+1-e_i) x_i r_i, R-actions forced by covariance:
    g acts on R as chi(g) (g^-1)^v."""
    p = X.p
    if X.rank and X.E > n + 1:
        raise InputError(f"exponent p^{X.E} exceeds the value group Z/p^{n + 1}")
    B = np.diag([p ** (n + 1 - e) for e in X.exps]).astype(object) if X.rank else np.zeros((0, 0), dtype=object)
    aX: Tuple[PGroupHom, ...] = ()
    aR: Tuple[PGroupHom, ...] = ()
    if group is not None:
        aX = tuple(h if isinstance(h, PGroupHom) else _hom(X, h) for h in act_X)
        if len(aX) != group.order:
            raise InputError("one action matrix per group element")
        if chi is None:
            chi = CycloCharacter.trivial(group, p, n)
        elif not isinstance(chi, CycloCharacter):
            try:
                chi = CycloCharacter(group, p, n, tuple(chi))
            except InputError as exc:
                raise NoConsistentTwist(f"character incompatible with the acting group: {exc}") from exc
        if chi.group is not group:
            raise NoConsistentTwist("character defined on a different group")
        if chi.n != n:
            raise NoConsistentTwist(f"character modulus p^{chi.n + 1} differs from the value group p^{n + 1}")
        aR = tuple(_hom(X, contragredient(aX[group.inv(g)]).matrix * chi(g)) for g in range(group.order))
    tau = None
    if tau_X is not None:
        hX = tau_X if isinstance(tau_X, PGroupHom) else _hom(X, tau_X)
        c = 1 + p if chi_tau is None else int(chi_tau)
        if c % p == 0:
            raise NoConsistentTwist("chi(tau) is not a unit")
        hR = _hom(X, contragredient(inverse_automorphism(hX)).matrix * c)
        tau = TauAction(hX, hR, c % p ** (n + 1))
    try:
        return PairingTable(p, n, X, X, B, group, aX, aR, chi if group is not None else None, tau)
    except InputError as exc:
        raise NoConsistentTwist(f"forced actions on R are inconsistent: {exc}") from exc


def dual_of(P: PairingTable) -> PairingTable:
    """build_dual_pairing applied to (R, R-actions, chi)."""
    return build_dual_pairing(P.R, P.n, P.group, P.act_R, P.chi,
                              P.tau.R if P.tau is not None else None, P.tau.chi if P.tau is not None else None)


def descend(P: PairingTable) -> PairingTable:
    """Level n -> n-1 on pX x pR: <p x, p r>' = <x, r> mod p^n (= <p x, r> / p)."""
    if P.n < 1:
        raise InputError("no level below 0")
    p, n = P.p, P.n
    kx = [i for i, e in enumerate(P.X.exps) if e >= 2]
    kr = [j for j, f in enumerate(P.R.exps) if f >= 2]
    Xd = FinAbPGroup(p, tuple(P.X.exps[i] - 1 for i in kx))
    Rd = FinAbPGroup(p, tuple(P.R.exps[j] - 1 for j in kr))
    B = P.table[np.ix_(kx, kr)] % p ** n if kx and kr else np.zeros((len(kx), len(kr)), dtype=object)

    def restrict(h: PGroupHom, keep, Y) -> PGroupHom:
        # h(p e_i) = p h(e_i); coordinates on p e_k are the coefficients of h(e_i) on e_k
        return _hom(Y, h.matrix[np.ix_(keep, keep)])

    G, aX, aR, chi, tau = P.group, (), (), None, None
    if G is not None:
        aX = tuple(restrict(h, kx, Xd) for h in P.act_X)
        aR = tuple(restrict(h, kr, Rd) for h in P.act_R)
        chi = CycloCharacter(G, p, n - 1, tuple(v % p ** n for v in P.chi.values))
    if P.tau is not None:
        tau = TauAction(restrict(P.tau.X, kx, Xd), restrict(P.tau.R, kr, Rd), P.tau.chi % p ** n)
    return PairingTable(p, n - 1, Xd, Rd, B, G, aX, aR, chi, tau)


# ------------------------------------------------------------------ skew symmetry

def skew_check(S: PairingTable, conj: int = -1, exhaustive_limit: int = EXHAUSTIVE) -> Verdict:
    """[a, b] = conj([b, a]) with conj = +1 or -1, and the left kernel as a subgroup."""
    if S.X.exps != S.R.exps:
        raise InputError("skew check needs a square table on X x X")
    if conj not in (1, -1):
        raise InputError("conjugation must be +1 or -1 (an order-2 automorphism of Z/p^(n+1))")
    m = S.modulus
    sym = (S.table - conj * S.table.T) % m
    kernel = S.left_map().kernel_gens()
    kexps = S.X.subgroup_exps(kernel) if kernel.size else ()
    detail = {"conj": conj, "kernel": list(kexps)}
    exhaustive = S.X.order ** 2 <= exhaustive_limit
    detail["exhaustive"] = exhaustive
    if exhaustive:
        E = S.X.elements()
        V = S.pair_rows(E, E)
        bad = np.argwhere((V - conj * V.T) % m != 0)
        if len(bad):
            i, j = bad[0]
            return Verdict(False, detail, {"a": [int(v) for v in E[i]], "b": [int(v) for v in E[j]],
                                           "ab": int(V[i, j]), "ba": int(V[j, i])})
        # the kernel computed by linear algebra is exactly the set of a with [a, .] = 0
        zero_rows = {tuple(int(v) for v in E[i]) for i in range(len(E)) if not np.any(V[i] % m)}
        detail["kernel_is_subgroup"] = all(tuple(int(v) for v in S.X.reduce(np.asarray(a, dtype=object) + np.asarray(b, dtype=object))) in zero_rows
                                           for a in zero_rows for b in zero_rows)
        detail["kernel_matches"] = len(zero_rows) == S.X.p ** sum(kexps)
        return Verdict(True, detail)
    bad = np.argwhere(sym != 0)
    if len(bad):
        i, j = bad[0]
        ei, ej = S.X.generators()[i], S.X.generators()[j]
        return Verdict(False, detail, {"a": [int(v) for v in ei], "b": [int(v) for v in ej],
                                       "ab": int(S.table[i, j]), "ba": int(S.table[j, i])})
    detail["kernel_is_subgroup"] = True
    return Verdict(True, detail)


# ------------------------------------------------------------------ fixtures

def c2_fixture(p: int = 3, n: int = 0, matched: bool = True) -> PairingTable:
    """X = R = Z/p, sigma = -1 on X and +1 on R, chi(sigma) = -1 (or +1 on X too when not matched)."""
    G = FiniteGroup.cyclic(2)
    X = FinAbPGroup(p, (n + 1,))
    one = _hom(X, [[1]])
    neg = _hom(X, [[-1]])
    chi = CycloCharacter(G, p, n, (1, -1))
    aX = (one, neg if matched else one)
    return PairingTable(p, n, X, X, np.array([[1]], dtype=object), G, aX, (one, one), chi)
