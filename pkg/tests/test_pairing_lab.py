import itertools

import numpy as np
import pytest

from iwalab import pairing as pl
from iwalab.errors import CovarianceFailed, NoConsistentTwist
from iwalab.group_algebra import GroupAlgebraElem
from iwalab.groups import CycloCharacter, FiniteGroup
from iwalab.pgroups import FinAbPGroup, PGroupHom

from oracles import group_elements


def table(p, n, exps, B, **kw):
    X = FinAbPGroup(p, exps)
    return pl.PairingTable(p, n, X, X, np.array(B, dtype=object), **kw)


def test_nondegenerate_examples():
    assert pl.is_nondegenerate(table(3, 0, (1,), [[1]])).ok
    assert not pl.is_nondegenerate(table(3, 0, (1,), [[0]])).ok
    v = pl.is_nondegenerate(table(3, 1, (2,), [[3]]))
    assert not v.ok and v.detail["left_kernel"] == [1]


def test_nondegenerate_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(30):
        B = rng.integers(0, 9, (2, 2)) * np.array([[1, 3], [3, 3]])
        P = table(3, 1, (2, 1), B)
        els = group_elements((2, 1), 3)
        V = P.pair_rows(np.array(els), np.array(els))
        left = sum(1 for i in range(len(els)) if not np.any(V[i] % 9))
        right = sum(1 for j in range(len(els)) if not np.any(V[:, j] % 9))
        assert pl.is_nondegenerate(P).ok == (left == right == 1)


def test_covariance_examples():
    assert pl.covariance_check(pl.c2_fixture(3, 0, matched=True)).ok
    v = pl.covariance_check(pl.c2_fixture(3, 0, matched=False))
    assert not v.ok and v.witness["g"] == "g1"
    G = FiniteGroup.cyclic(2)
    X = FinAbPGroup(3, (1,))
    one = PGroupHom(X, X, [[1]])
    P = pl.PairingTable(3, 0, X, X, np.array([[1]]), G, (one, one), (one, one), CycloCharacter.trivial(G, 3, 0))
    assert pl.covariance_check(P).ok


def test_c2_covariance_enumerated():
    P = pl.c2_fixture(3, 0, matched=True)
    for x, r in itertools.product(range(3), repeat=2):
        assert (P.pair([-x], [r]) - (-1) * P.pair([x], [r])) % 3 == 0


def test_reflection_examples():
    P = pl.c2_fixture(3, 0)
    G = P.group
    assert pl.reflection_adjunction(P).ok
    assert pl.reflection_adjunction(P, GroupAlgebraElem.basis(G, 3, 1, 1)).ok
    with pytest.raises(CovarianceFailed):
        pl.reflection_adjunction(pl.c2_fixture(3, 0, matched=False), GroupAlgebraElem.basis(G, 3, 1, 1))
    # tau acting by 1 + p on a rank-1 table, chi(tau) = q + 1
    X = FinAbPGroup(3, (2,))
    D = pl.build_dual_pairing(X, 1, tau_X=[[4]], chi_tau=4)
    assert pl.reflection_adjunction(D, [0, 1]).ok and pl.reflection_adjunction(D, [1, 1, 1]).ok


def test_dual_examples():
    X = FinAbPGroup(3, (2,))
    D = pl.build_dual_pairing(X, 1, tau_X=[[4]], chi_tau=4)
    assert [[int(v) for v in row] for row in D.tau.R.matrix] == [[1]]
    Z = pl.build_dual_pairing(FinAbPGroup(3, ()), 0)
    assert Z.table.size == 0 and pl.is_nondegenerate(Z).ok
    G = FiniteGroup.cyclic(2)
    V = FinAbPGroup(3, (1, 1))
    swap = np.array([[0, 1], [1, 0]], dtype=object)
    S = pl.build_dual_pairing(V, 0, G, [np.eye(2, dtype=object), swap])
    assert S.act_R[1].equals(PGroupHom(V, V, swap))
    assert pl.is_nondegenerate(S).ok and pl.covariance_check(S).ok


def test_dual_rejects_bad_characters():
    G = FiniteGroup.cyclic(2)
    X = FinAbPGroup(3, (1,))
    with pytest.raises(NoConsistentTwist):
        pl.build_dual_pairing(X, 0, G, [[[1]], [[-1]]], [1, 2, 3])
    with pytest.raises(NoConsistentTwist):
        pl.build_dual_pairing(X, 0, tau_X=[[1]], chi_tau=3)


def fixtures():
    G = FiniteGroup.cyclic(2)
    X = FinAbPGroup(3, (2, 1))
    eye = np.eye(2, dtype=object)
    yield pl.build_dual_pairing(X, 1, G, [eye, -eye], [1, -1], tau_X=[[4, 0], [0, 1]], chi_tau=4)
    G4 = FiniteGroup.cyclic(4)
    Y = FinAbPGroup(5, (1, 1))
    r = np.array([[0, -1], [1, 0]], dtype=object)
    acts = [np.linalg.matrix_power(r.astype(np.int64), k).astype(object) for k in range(4)]
    yield pl.build_dual_pairing(Y, 0, G4, acts, CycloCharacter.from_generator(G4, 5, 0, 2))
    S3 = FiniteGroup.symmetric(3)
    W = FinAbPGroup(3, (1,))
    sign = [1 if S3.element_order(g) != 2 else -1 for g in range(S3.order)]
    yield pl.build_dual_pairing(W, 0, S3, [[[s]] for s in sign], CycloCharacter.trivial(S3, 3, 0))


@pytest.mark.parametrize("P", list(fixtures()))
def test_dual_pairing_properties(P):
    assert pl.is_nondegenerate(P).ok
    assert pl.covariance_check(P, exhaustive_limit=81 * 81).ok
    G = P.group
    for g in range(G.order):
        assert pl.reflection_adjunction(P, GroupAlgebraElem.basis(G, P.p, P.n + 1, g), exhaustive_limit=81 * 81).ok
    if P.tau is not None:
        assert pl.reflection_adjunction(P, [0, 1], exhaustive_limit=81 * 81).ok
    DD = pl.dual_of(pl.dual_of(P))
    assert all(a.equals(b) for a, b in zip(DD.act_R, P.act_R))
    assert all(a.equals(b) for a, b in zip(DD.act_X, P.act_X))


def test_descend_square_commutes():
    P = next(fixtures())
    D = pl.descend(P)
    assert pl.is_nondegenerate(D).ok and pl.covariance_check(D).ok
    p, n = P.p, P.n
    keep = [i for i, e in enumerate(P.X.exps) if e >= 2]
    for x in P.X.elements():
        for r in P.R.elements():
            # <x, p r>_n = p <p x, p r>_{n-1} in Z/p^(n+1)
            px = [int(x[i]) for i in keep]
            pr = [int(r[i]) for i in keep]
            lhs = P.pair(x, P.R.reduce(np.asarray(r, dtype=object) * p))
            assert (lhs - p * D.pair(px, pr)) % p ** (n + 1) == 0


def test_skew_examples():
    V = FinAbPGroup(3, (1, 1))
    alt = pl.PairingTable(3, 0, V, V, np.array([[0, 1], [-1, 0]]))
    v = pl.skew_check(alt)
    assert v.ok and v.detail["kernel_is_subgroup"] and v.detail["kernel_matches"]
    sym = pl.PairingTable(3, 0, V, V, np.array([[1, 2], [2, 0]]))
    assert pl.skew_check(sym, conj=1).ok and not pl.skew_check(sym, conj=-1).ok
    bad = pl.skew_check(pl.PairingTable(3, 0, V, V, np.array([[0, 1], [0, 0]])))
    assert not bad.ok and bad.witness["ab"] != (-bad.witness["ba"]) % 3


def test_table_json_roundtrip():
    P = next(fixtures())
    Q = pl.PairingTable.from_json(P.to_json())
    assert (Q.table == P.table).all() and pl.covariance_check(Q).ok
