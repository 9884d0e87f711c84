import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iwalab.errors import InfiniteGroup, InputError, NotInjectiveTower, NotMinimalSystem
from iwalab.pgroups import (FinAbPGroup, PGroupHom, generator_change, kraft_schoof_fixture, lemma_ab_instance,
                            limit_rank, snf_classify, structure_stats, verify_lemma_ab)

from oracles import apply, elem_log_order, group_elements, span

exps_st = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(lambda e: tuple(sorted(e, reverse=True)))


def test_classify_examples():
    assert snf_classify(np.diag([9, 3]), 3).exps == (2, 1)
    assert snf_classify([[3, 1], [0, 3]], 3).exps == (2,)
    assert snf_classify(np.eye(3, dtype=object), 3).exps == ()
    with pytest.raises(InfiniteGroup):
        snf_classify([[3, 0], [0, 0]], 3)


@given(st.sampled_from([2, 3, 5]), st.data())
def test_classify_matches_sympy(p, data):
    r = data.draw(st.integers(1, 4))
    A = data.draw(st.lists(st.lists(st.integers(-30, 30), min_size=r + 1, max_size=r + 1), min_size=r, max_size=r))
    import sympy
    if sympy.Matrix(A).rank() < r:
        return
    # non-square relation matrices: compare against the square Gram-free route via sympy on A
    from sympy.matrices.normalforms import smith_normal_form
    S = smith_normal_form(sympy.Matrix(A), domain=sympy.ZZ)
    d = [abs(int(S[i, i])) for i in range(r)]
    from oracles import vp
    ref = sorted((vp(x, p) for x in d if x % p == 0), reverse=True)
    assert list(snf_classify(A, p).exps) == ref


def test_stats_examples():
    s = structure_stats(FinAbPGroup(3, (2, 1)))
    assert (s.p_rank, s.exponent, s.subexponent, s.socle_sizes[0]) == (2, 9, 3, 9)
    s = structure_stats(FinAbPGroup(5, (2,)))
    assert s.p_rank == 1 and s.exponent == s.subexponent == 25
    assert structure_stats(FinAbPGroup(3, ())).p_rank == 0


@given(st.sampled_from([2, 3]), exps_st)
def test_socle_sizes_brute_force(p, exps):
    X = FinAbPGroup(p, exps)
    if X.order > 3 ** 6:
        return
    s = structure_stats(X)
    els = group_elements(exps, p)
    for m, size in enumerate(s.socle_sizes, start=1):
        assert size == sum(1 for v in els if elem_log_order(v, exps, p) <= m)
    assert s.socle_sizes[0] == p ** s.p_rank


@pytest.mark.parametrize("exps", [(1,), (2,), (2, 1), (3, 1), (2, 2), (3, 2)])
def test_subexponent_against_definition(exps):
    # largest p^m such that a full-rank subgroup has every element outside pY of order >= p^m
    p = 3 if sum(exps) <= 4 else 2
    els = group_elements(exps, p)
    r = len(exps)
    best = 0
    for gens in itertools.combinations_with_replacement(range(len(els)), r):
        Y = span([els[i] for i in gens], exps, p)
        pY = {tuple(p * a % p ** e for a, e in zip(y, exps)) for y in Y}
        if sum(1 for y in Y if elem_log_order(y, exps, p) <= 1) != p ** r:
            continue
        outside = [elem_log_order(y, exps, p) for y in Y if y not in pY]
        best = max(best, min(outside))
    assert p ** best == structure_stats(FinAbPGroup(p, exps)).subexponent


def test_generator_change_examples():
    X = FinAbPGroup(3, (2, 1))
    I = np.eye(2, dtype=object)
    assert (generator_change(X, I, I).E == I).all()
    # columns are generators: {(1,1), (0,1)}
    E = generator_change(X, I, [[1, 0], [1, 1]]).E
    assert [[int(v) for v in row] for row in E] == [[1, 1], [0, 1]]
    with pytest.raises(NotMinimalSystem):
        generator_change(X, I, [[3, 0], [0, 1]])


@given(st.data())
def test_generator_change_recovers_random_transform(data):
    X = FinAbPGroup(3, (2, 1))
    a, b, c, d = (data.draw(st.integers(0, 8)) for _ in range(4))
    if (a * d - b * c) % 3 == 0:
        return
    g2 = np.array([[a, b], [c, d]], dtype=object).T % 9
    r = generator_change(X, np.eye(2, dtype=object), g2)
    assert r.det_mod_p % 3
    for i in range(2):
        assert X.is_zero(X.reduce(r.E[i, 0] * np.array([1, 0]) + r.E[i, 1] * np.array([0, 1])) - X.reduce(g2[:, i]))


def test_limit_rank_examples():
    T = [FinAbPGroup(3, (k,)) for k in (1, 2, 3)]
    assert limit_rank(T, [PGroupHom(T[i], T[i + 1], [[3]]) for i in range(2)]).rank == 1
    T2 = [FinAbPGroup(3, (k, 1)) for k in (1, 2, 3)]
    r = limit_rank(T2, [PGroupHom(T2[i], T2[i + 1], [[3, 0], [0, 1]]) for i in range(2)])
    assert r.verdict == "essential rank" and r.rank == 1
    T3 = [FinAbPGroup(3, (1,))] * 3
    assert limit_rank(T3, [PGroupHom(T3[0], T3[0], [[1]])] * 2).verdict == "bounded"
    with pytest.raises(NotInjectiveTower):
        limit_rank(T3[:2], [PGroupHom(T3[0], T3[0], [[0]])])


def test_hom_rejects_ill_defined_matrix():
    with pytest.raises(InputError):
        PGroupHom(FinAbPGroup(3, (1,)), FinAbPGroup(3, (2,)), [[1]])


# ------------------------------------------------------------------ order lemma

def brute_lemma(A, B, N, iota):
    """Hypotheses and the size conclusion by enumeration, without package linear algebra."""
    p = A.p
    a_els = group_elements(A.exps, p)
    b_els = group_elements(B.exps, p)
    key = lambda v, ex: tuple(int(x) % p ** e for x, e in zip(v, ex))
    N_img = {key(apply(N.matrix, b, A.exps, p), A.exps) for b in b_els}
    i_img = {key(apply(iota.matrix, a, B.exps, p), B.exps) for a in a_els}
    socle = [y for y in i_img if elem_log_order(y, B.exps, p) <= 1]
    hyp = {
        "N_surjective": len(N_img) == len(a_els),
        "equal_p_ranks": len(A.exps) == len(B.exps),
        "index": len(b_els) // len(a_els) == p ** len(A.exps),
        "N_iota_is_p": all(key(apply(N.matrix, apply(iota.matrix, a, B.exps, p), A.exps, p), A.exps) ==
                           key(a * p, A.exps) for a in a_els),
        "rank_preserving": len(socle) == p ** len(A.exps),
    }
    return hyp, len(i_img) == len(a_els)


def test_cyclic_instance():
    A, B = FinAbPGroup(3, (1,)), FinAbPGroup(3, (2,))
    r = verify_lemma_ab(A, B, PGroupHom(B, A, [[1]]), PGroupHom(A, B, [[3]]))
    assert r.hypotheses_hold and all(r.conclusions.values()) and not r.violated


def test_kraft_schoof_fixture_violates_rank_hypothesis():
    A, B, N, iota = kraft_schoof_fixture(3)
    assert A.exps == (2, 1) and B.exps == (2, 2)
    r = verify_lemma_ab(A, B, N, iota)
    assert not r.hypotheses["iota_rank_preserving"] and r.data["p_rank_iota_A"] == 1
    assert all(v is None for v in r.conclusions.values()) and not r.violated


def test_pinned_counterexample_to_the_order_lemma():
    # every hypothesis holds, yet iota is not injective; confirmed by enumeration
    A, B = FinAbPGroup(3, (2, 1)), FinAbPGroup(3, (3, 2))
    N = PGroupHom(B, A, [[1, 1], [1, 2]])
    iota = PGroupHom(A, B, [[18, 18], [3, 0]])
    hyp, injective = brute_lemma(A, B, N, iota)
    assert all(hyp.values()) and not injective
    r = verify_lemma_ab(A, B, N, iota)
    assert r.hypotheses_hold and r.violated and r.conclusions["iota_injective"] is False


def test_generated_instances_hold():
    rng = np.random.default_rng(11)
    for _ in range(40):
        A, B, N, iota = lemma_ab_instance(3, rng)
        hyp, injective = brute_lemma(A, B, N, iota)
        assert all(hyp.values()) and injective
        r = verify_lemma_ab(A, B, N, iota)
        assert r.hypotheses_hold and not r.violated


def test_random_homs_verifier_agrees_with_enumeration():
    # random (N, iota) on small groups: whenever the verifier flags a violation, enumeration confirms it
    rng = np.random.default_rng(12)
    A, B = FinAbPGroup(3, (2, 1)), FinAbPGroup(3, (3, 2))
    seen = 0
    for _ in range(400):
        Nm = [[int(rng.integers(0, 9)), int(rng.integers(0, 9)) * 3 % 9], [int(rng.integers(0, 3)), int(rng.integers(0, 3))]]
        im = [[int(rng.integers(0, 9)) * 3, int(rng.integers(0, 3)) * 9], [int(rng.integers(0, 9)), int(rng.integers(0, 3)) * 3]]
        try:
            N, iota = PGroupHom(B, A, Nm), PGroupHom(A, B, im)
        except InputError:
            continue
        r = verify_lemma_ab(A, B, N, iota)
        hyp, injective = brute_lemma(A, B, N, iota)
        assert r.hypotheses_hold == all(hyp.values())
        if r.hypotheses_hold:
            seen += 1
            assert r.conclusions["iota_injective"] == injective
    assert seen > 0
