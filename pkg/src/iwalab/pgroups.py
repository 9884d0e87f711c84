"""Finite abelian p-groups in Smith normal form, homomorphisms between them,
and the Lemma-ab verifier."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from . import _kernels, linalg
from .errors import InfiniteGroup, InputError, NotInjectiveTower, NotMinimalSystem, TooLarge
from .linalg import vp

ENUM_LIMIT = 3 ** 8


@dataclass(frozen=True)
class FinAbPGroup:
    """The group  Z/p^e_1 + ... + Z/p^e_r  with e_1 >= ... >= e_r >= 1."""

    p: int
    exps: Tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exps)
        if any(e < 1 for e in exps):
            raise InputError("exponents must be >= 1")
        if list(exps) != sorted(exps, reverse=True):
            raise InputError("exponents must be non-increasing")
        object.__setattr__(self, "exps", exps)

    @classmethod
    def of(cls, p: int, exps: Sequence[int]) -> "FinAbPGroup":
        return cls(p, tuple(sorted((e for e in exps if e > 0), reverse=True)))

    @property
    def rank(self) -> int:
        return len(self.exps)

    @property
    def log_order(self) -> int:
        return sum(self.exps)

    @property
    def order(self) -> int:
        return self.p ** self.log_order

    @property
    def E(self) -> int:
        return self.exps[0] if self.exps else 0

    @property
    def moduli(self) -> List[int]:
        return [self.p ** e for e in self.exps]

    def reduce(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=object).reshape(-1)
        return np.array([int(x) % m for x, m in zip(v, self.moduli)], dtype=object)

    def reduce_rows(self, X) -> np.ndarray:
        X = np.asarray(X)
        if self.rank == 0:
            return X.reshape(len(X), 0)
        return X % np.array(self.moduli, dtype=X.dtype if X.dtype != object else object)

    def zero(self) -> np.ndarray:
        return np.zeros(self.rank, dtype=object)

    def is_zero(self, v) -> bool:
        return not any(int(x) for x in self.reduce(v))

    def embed_matrix(self, cols, K: Optional[int] = None) -> np.ndarray:
        """Columns scaled into (Z/p^K)^r by x_i -> p^(K - e_i) x_i (injective for K >= E)."""
        K = self.E if K is None else K
        cols = np.asarray(cols, dtype=object).reshape(self.rank, -1)
        scale = np.array([self.p ** (K - e) for e in self.exps], dtype=object).reshape(-1, 1)
        return (cols * scale) % (self.p ** K) if self.rank else cols

    def subgroup_exps(self, gens) -> Tuple[int, ...]:
        """Invariants of the subgroup generated by the given columns."""
        if self.rank == 0:
            return ()
        gens = np.asarray(gens, dtype=object).reshape(self.rank, -1)
        if gens.shape[1] == 0:
            return ()
        d, _, _, _ = linalg.snf(self.embed_matrix(gens), self.p, self.E)
        return tuple(sorted((self.E - vp(int(x), self.p) for x in d if self.E - vp(int(x), self.p) > 0), reverse=True))

    def subgroup_log_size(self, gens) -> int:
        return sum(self.subgroup_exps(gens))

    def in_span(self, gens, v) -> bool:
        if self.rank == 0:
            return True
        gens = np.asarray(gens, dtype=object).reshape(self.rank, -1)
        target = self.embed_matrix(np.asarray(v, dtype=object).reshape(-1, 1)).reshape(-1)
        if gens.shape[1] == 0:
            return not any(int(x) for x in target)
        return linalg.solve(self.embed_matrix(gens), target, self.p, self.E) is not None

    def span_contains(self, gens, others) -> bool:
        if self.rank == 0:
            return True
        others = np.asarray(others, dtype=object).reshape(self.rank, -1)
        return all(self.in_span(gens, others[:, j]) for j in range(others.shape[1]))

    def generators(self) -> np.ndarray:
        return np.eye(self.rank, dtype=object)

    def elements(self, limit: int = ENUM_LIMIT) -> np.ndarray:
        if self.order > limit:
            raise TooLarge(f"|X| = {self.order} exceeds enumeration limit {limit}")
        if self.rank == 0:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.meshgrid(*[np.arange(m, dtype=np.int64) for m in self.moduli], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def random_elements(self, k: int, rng: np.random.Generator) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((k, 0), dtype=np.int64)
        return np.stack([rng.integers(0, m, size=k) for m in self.moduli], axis=1)

    def log_orders(self, X) -> np.ndarray:
        if self.rank == 0:
            return np.zeros(len(X), dtype=np.int64)
        return _kernels.element_orders(X, self.exps, self.p)

    def log_order_of(self, v) -> int:
        v = self.reduce(v)
        best = 0
        for x, e in zip(v, self.exps):
            if int(x):
                best = max(best, e - vp(int(x), self.p))
        return best

    def to_json(self):
        return {"p": self.p, "exponents": list(self.exps)}


def trivial_group(p: int) -> FinAbPGroup:
    return FinAbPGroup(p, ())


# ------------------------------------------------------------------ homomorphisms

@dataclass(frozen=True)
class PGroupHom:
    """Column j is the image of the j-th canonical generator of the domain."""

    domain: FinAbPGroup
    codomain: FinAbPGroup
    matrix: np.ndarray = field(compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=object).reshape(self.codomain.rank, self.domain.rank)
        M = np.array([[int(M[i, j]) % self.codomain.moduli[i] for j in range(M.shape[1])] for i in range(M.shape[0])],
                     dtype=object).reshape(self.codomain.rank, self.domain.rank)
        object.__setattr__(self, "matrix", M)
        if not self.well_defined():
            raise InputError("matrix does not respect generator orders")

    def well_defined(self) -> bool:
        for j, e in enumerate(self.domain.exps):
            if not self.codomain.is_zero(self.matrix[:, j] * self.domain.p ** e):
                return False
        return True

    def __call__(self, v) -> np.ndarray:
        if self.domain.rank == 0 or self.codomain.rank == 0:
            return self.codomain.zero()
        return self.codomain.reduce(self.matrix.dot(np.asarray(v, dtype=object).reshape(-1)))

    def apply_rows(self, X) -> np.ndarray:
        """Apply to many elements (rows) at once."""
        X = np.asarray(X)
        if self.domain.rank == 0 or self.codomain.rank == 0:
            return np.zeros((len(X), self.codomain.rank), dtype=np.int64)
        m = self.codomain.p ** self.codomain.E
        Y = _kernels.matmul_mod(X, self.matrix.T, m)
        return self.codomain.reduce_rows(np.asarray(Y))

    def compose(self, other: "PGroupHom") -> "PGroupHom":
        """self after other."""
        return PGroupHom(other.domain, self.codomain, self.matrix.dot(other.matrix) if other.domain.rank and self.codomain.rank
                         else np.zeros((self.codomain.rank, other.domain.rank), dtype=object))

    def equals(self, other: "PGroupHom") -> bool:
        return all(self.codomain.is_zero(self(g) - other(g)) for g in self.domain.generators())

    def scalar(self, c: int) -> "PGroupHom":
        return PGroupHom(self.domain, self.codomain, self.matrix * c)

    def image_exps(self) -> Tuple[int, ...]:
        return self.codomain.subgroup_exps(self.matrix)

    def image_log_size(self) -> int:
        return sum(self.image_exps())

    def is_surjective(self) -> bool:
        return self.image_log_size() == self.codomain.log_order

    def is_injective(self) -> bool:
        return self.image_log_size() == self.domain.log_order

    def kernel_gens(self) -> np.ndarray:
        D, C = self.domain, self.codomain
        if D.rank == 0:
            return np.zeros((0, 0), dtype=object)
        if C.rank == 0:
            return D.generators()
        K = max(D.E, C.E)
        Memb = C.embed_matrix(self.matrix, K)
        gens = linalg.kernel(Memb, D.p, K)
        if not gens:
            return np.zeros((D.rank, 0), dtype=object)
        return np.stack([D.reduce(g) for g in gens], axis=1)

    def to_json(self):
        return {"domain": list(self.domain.exps), "codomain": list(self.codomain.exps),
                "matrix": [[int(x) for x in row] for row in self.matrix]}


def identity_hom(X: FinAbPGroup) -> PGroupHom:
    return PGroupHom(X, X, np.eye(X.rank, dtype=object))


def scalar_hom(X: FinAbPGroup, c: int) -> PGroupHom:
    return PGroupHom(X, X, np.eye(X.rank, dtype=object) * c)


# ------------------------------------------------------------------ operations

def snf_classify(relations, p: int) -> FinAbPGroup:
    """p-part of Z^r / (column span of the integer relation matrix)."""
    A = np.asarray(relations, dtype=object)
    if A.ndim != 2:
        raise InputError("relation matrix must be 2-dimensional")
    r = A.shape[0]
    if r == 0:
        return trivial_group(p)
    if A.shape[1] == 0 or sympy.Matrix(A.tolist()).rank() < r:
        raise InfiniteGroup("relations do not have full rank: the cokernel is infinite")
    K = 8
    while True:
        d, _, _, _ = linalg.snf(A, p, K)
        vals = [vp(int(x), p) for x in d]
        if len(d) == r and all(v < K for v in vals):
            return FinAbPGroup.of(p, vals)
        K *= 2


@dataclass
class StructureStats:
    p_rank: int
    exponent: int
    subexponent: int
    socle_sizes: List[int]

    def to_json(self):
        return dict(self.__dict__)


def structure_stats(X: FinAbPGroup) -> StructureStats:
    p = X.p
    socles = [p ** sum(min(m, e) for e in X.exps) for m in range(1, X.E + 1)]
    return StructureStats(X.rank, p ** X.E, p ** X.exps[-1] if X.exps else 1, socles)


def p_rank_of_span(X: FinAbPGroup, gens) -> int:
    return len(X.subgroup_exps(gens))


@dataclass
class LemmaABReport:
    hypotheses: Dict[str, bool]
    conclusions: Dict[str, Optional[bool]]
    data: Dict[str, object]

    @property
    def hypotheses_hold(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def violated(self) -> bool:
        """A conclusion failed although every hypothesis held."""
        return self.hypotheses_hold and not all(v for v in self.conclusions.values())

    def to_json(self):
        return {"hypotheses": self.hypotheses, "conclusions": self.conclusions, "data": self.data,
                "hypotheses_hold": self.hypotheses_hold, "violated": self.violated}


def verify_lemma_ab(A: FinAbPGroup, B: FinAbPGroup, N: PGroupHom, iota: PGroupHom,
                    exhaustive_limit: int = 3 ** 6, samples: int = 2000, seed: int = 0) -> LemmaABReport:
    p = A.p
    r = A.rank
    Nio = N.compose(iota)
    hyp = {
        "N_surjective": N.is_surjective(),
        "equal_p_ranks": A.rank == B.rank,
        "index_is_p_to_r": B.log_order - A.log_order == r,
        "N_iota_is_p": Nio.equals(scalar_hom(A, p)),
        "iota_rank_preserving": p_rank_of_span(B, iota.matrix) == r,
    }
    data: Dict[str, object] = {"p_rank_A": A.rank, "p_rank_B": B.rank, "p_rank_iota_A": p_rank_of_span(B, iota.matrix),
                               "log_A": A.log_order, "log_B": B.log_order}
    exhaustive = B.order <= exhaustive_limit
    if exhaustive:
        X = B.elements(limit=exhaustive_limit)
    else:
        X = B.random_elements(samples, np.random.default_rng(seed))
    ordx = B.log_orders(X)
    NX = N.apply_rows(X)
    ordN = A.log_orders(NX)
    iNX = iota.apply_rows(NX)
    ordiN = B.log_orders(iNX)
    data["elements_checked"] = int(len(X))
    data["exhaustive"] = exhaustive
    data["count_ord_x_gt_p_ord_iota_N_x"] = int(np.sum(ordx > ordiN + 1))
    pB = B.generators() * p
    conc: Dict[str, Optional[bool]] = {"iota_injective": None, "iota_A_equals_pB": None, "ord_x_is_p_ord_Nx": None}
    if all(hyp.values()):
        conc["iota_injective"] = iota.is_injective()
        conc["iota_A_equals_pB"] = (B.span_contains(pB, iota.matrix) and
                                     B.subgroup_log_size(iota.matrix) == B.subgroup_log_size(pB))
        # x = 0 is excluded: ord(0) = 1 while p * ord(N 0) = p
        ok = (ordx == ordN + 1) | (ordx == 0)
        conc["ord_x_is_p_ord_Nx"] = bool(np.all(ok))
        if not np.all(ok):
            bad = int(np.argmin(ok))
            data["witness"] = [int(v) for v in X[bad]]
    return LemmaABReport(hyp, conc, data)


def random_automorphism(X: FinAbPGroup, rng: np.random.Generator, tries: int = 200) -> PGroupHom:
    p, e = X.p, X.exps
    for _ in range(tries):
        M = np.zeros((X.rank, X.rank), dtype=object)
        for i in range(X.rank):
            for j in range(X.rank):
                step = p ** max(0, e[i] - e[j])
                M[i, j] = int(rng.integers(0, p ** e[i])) * step % p ** e[i]
        h = PGroupHom(X, X, M)
        if h.is_injective():
            return h
    return identity_hom(X)


def lemma_ab_instance(p: int, rng: np.random.Generator, max_log: int = 6, max_rank: int = 3):
    """Hypothesis-satisfying (A, B, N, iota): B with exponents >= 2, A = B with
    exponents lowered by one, N canonical, iota the multiplication-by-p
    section, then both conjugated by random automorphisms."""
    while True:
        r = int(rng.integers(1, max_rank + 1))
        exps = sorted((int(x) for x in rng.integers(2, max_log + 1, size=r)), reverse=True)
        if sum(exps) <= max_log:
            break
    B = FinAbPGroup(p, tuple(exps))
    A = FinAbPGroup(p, tuple(x - 1 for x in exps))
    N0 = PGroupHom(B, A, np.eye(r, dtype=object))
    i0 = PGroupHom(A, B, np.eye(r, dtype=object) * p)
    fA = random_automorphism(A, rng)
    fB = random_automorphism(B, rng)
    fB_inv = inverse_automorphism(fB)
    fA_inv = inverse_automorphism(fA)
    N = fA.compose(N0).compose(fB_inv)
    iota = fB.compose(i0).compose(fA_inv)
    return A, B, N, iota


def inverse_automorphism(h: PGroupHom) -> PGroupHom:
    X = h.domain
    cols = []
    target = X.embed_matrix(h.matrix)
    for j in range(X.rank):
        e = np.zeros(X.rank, dtype=object)
        e[j] = 1
        x = linalg.solve(target, X.embed_matrix(e.reshape(-1, 1)).reshape(-1), X.p, X.E)
        if x is None:
            raise InputError("not an automorphism")
        cols.append(X.reduce(x))
    return PGroupHom(X, X, np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=object))


def kraft_schoof_fixture(p: int = 3):
    """A = (p^2, p), B = (p^2, p^2), N canonical, iota with image <p e1> (p-rank 1)."""
    A = FinAbPGroup(p, (2, 1))
    B = FinAbPGroup(p, (2, 2))
    N = PGroupHom(B, A, [[1, 0], [0, 1]])
    iota = PGroupHom(A, B, [[p, 0], [0, 0]])
    return A, B, N, iota


@dataclass
class GeneratorChange:
    E: np.ndarray
    det_mod_p: int
    note: str = "E is unique only modulo the relations of X (column j of E is determined mod p^e_j)"

    def to_json(self):
        return {"E": [[int(x) for x in row] for row in self.E], "det_mod_p": self.det_mod_p, "note": self.note}


def is_minimal_system(X: FinAbPGroup, gens) -> bool:
    gens = np.asarray(gens, dtype=object).reshape(X.rank, -1)
    if gens.shape[1] != X.rank:
        return False
    return X.subgroup_log_size(gens) == X.log_order


def generator_change(X: FinAbPGroup, gens1, gens2) -> GeneratorChange:
    """E with gens2_i = sum_j E_ij gens1_j; generators are given as columns."""
    g1 = np.asarray(gens1, dtype=object).reshape(X.rank, -1)
    g2 = np.asarray(gens2, dtype=object).reshape(X.rank, -1)
    if not (is_minimal_system(X, g1) and is_minimal_system(X, g2)):
        raise NotMinimalSystem("both inputs must be minimal generating systems (r elements spanning X)")
    r = X.rank
    E = np.zeros((r, r), dtype=object)
    emb = X.embed_matrix(g1)
    for i in range(r):
        c = linalg.solve(emb, X.embed_matrix(g2[:, i].reshape(-1, 1)).reshape(-1), X.p, X.E)
        E[i, :] = [int(v) for v in c]
    det = int(sympy.Matrix(E.tolist()).det()) % X.p if r else 1
    return GeneratorChange(E, det)


@dataclass
class LimitRankReport:
    verdict: str
    rank: int
    ranks: List[int]
    subexponents: List[int]

    def to_json(self):
        return dict(self.__dict__)


def limit_rank(tower: Sequence[FinAbPGroup], maps: Sequence[PGroupHom]) -> LimitRankReport:
    if len(maps) != len(tower) - 1:
        raise InputError("need one connecting map per consecutive pair")
    for h in maps:
        if not h.is_injective():
            raise NotInjectiveTower("connecting maps must be injective")
    ranks = [X.rank for X in tower]
    subs = [X.exps[-1] if X.exps else 0 for X in tower]
    top = tower[-1]
    if len(tower) >= 2 and len(set(ranks)) == 1 and ranks[0] > 0 and all(a < b for a, b in zip(subs, subs[1:])):
        return LimitRankReport("limit rank", ranks[0], ranks, subs)
    prev = tower[-2].exps if len(tower) >= 2 else ()
    static = [a for a, b in zip(prev, top.exps) if a == b] if len(prev) == len(top.exps) else list(prev)
    m = max(static) if static else 0
    ess = sum(1 for e in top.exps if e > m)
    verdict = "bounded" if ess == 0 else "essential rank"
    return LimitRankReport(verdict, ess, ranks, subs)
