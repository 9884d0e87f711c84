import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iwalab import modules as lm
from iwalab.errors import HasMuPart, InfiniteQuotient, InputError, KappaTooSmall, NoStableSuffix, TooLarge
from iwalab.iwasawa import omega
from iwalab.pgroups import FinAbPGroup, PGroupHom

from oracles import resultant_vp

M_T3 = lambda: lm.ElemLambdaModule.build(3, 0, f=[[-3, 1]])


def test_level_quotient_examples():
    M = lm.ElemLambdaModule.build(3, 0, mu=[1])
    assert lm.level_quotient(M, 1).group.exps == (1, 1, 1)
    for n in range(4):
        assert lm.level_quotient(M_T3(), n).group.exps == (n + 1,)
    with pytest.raises(InfiniteQuotient):
        lm.ElemLambdaModule.build(3, 0, f=[[0, 1]])


def test_rejects_non_distinguished():
    with pytest.raises(InputError):
        lm.ElemLambdaModule.build(3, 0, f=[[1, 1]])


def test_mu_part_size_exact():
    for p in (2, 3):
        for kappa in (0, 1):
            M = lm.ElemLambdaModule.build(p, kappa, mu=[1])
            for n in range(kappa, kappa + 4):
                assert lm.level_quotient(M, n).group.log_order == p ** (n - kappa)


@pytest.mark.parametrize("seed", range(6))
def test_level_sizes_match_resultant_oracle(seed):
    rng = np.random.default_rng(seed)
    for p in (2, 3):
        M = lm.random_module(p, rng, max_mu=0)
        for n in range(M.kappa, M.kappa + 3):
            ref = 0
            for s in M.summands:
                ref += resultant_vp(s.F, p, M.kappa, n)
            assert lm.level_quotient(M, n).group.log_order == ref
            assert lm.log_size(M, n)[0] == ref


def test_level_quotient_T_action_annihilated_by_omega():
    rng = np.random.default_rng(3)
    for _ in range(5):
        M = lm.random_module(3, rng)
        lq = lm.level_quotient(M, M.kappa + 1)
        G = lq.group
        if G.rank == 0:
            continue
        acc = PGroupHom(G, G, np.zeros((G.rank, G.rank), dtype=object))
        for c in reversed(omega(3, M.kappa, M.kappa + 1).coeffs):
            acc = PGroupHom(G, G, lq.T.compose(acc).matrix + np.eye(G.rank, dtype=object) * c)
        assert all(G.is_zero(acc(g)) for g in G.generators())


def test_tower_maps_compose_to_norm():
    # projection o lift = multiplication by p at consecutive levels for Lambda/(T - 3): N_{n+1,n}(3) has v_3 = 1
    tw = lm.Tower(M_T3(), 3)
    for n in range(3):
        comp = tw.projection(n).compose(tw.lift(n))
        G = tw.group(n)
        N = lm._fpoly(list(map(int, __import__("iwalab").norm_elem(3, 0, n + 1, n).coeffs)))
        assert comp.equals(tw.poly_action(n, N))


def test_growth_examples():
    r = lm.growth_stats(lm.ElemLambdaModule.build(3, 0, mu=[2], f=[[-3, 1]]))
    assert (r.mu, r.lam, r.nu) == (2, 1, 1)
    r = lm.growth_stats(M_T3())
    assert (r.mu, r.lam, r.nu) == (0, 1, 1)
    r = lm.growth_stats(lm.ElemLambdaModule(3, 0, ()))
    assert (r.mu, r.lam, r.nu) == (0, 0, 0)
    with pytest.raises(NoStableSuffix):
        lm.growth_stats(M_T3(), levels=[0, 1, 2])


def test_growth_nu_shift_in_kappa():
    a = lm.growth_stats(lm.ElemLambdaModule.build(3, 0, f=[[-3, 1]]))
    b = lm.growth_stats(lm.ElemLambdaModule.build(3, 1, f=[[-3, 1]]))
    assert (a.mu, a.lam) == (b.mu, b.lam)


def test_fukuda_examples():
    r = lm.fukuda_check(M_T3())
    assert r.ok and all(t.iota_injective for t in r.transitions)
    M = lm.ElemLambdaModule(3, 0, (lm.FinitePart(lm._fpoly([-3, 1]), 1, 2),))
    r = lm.fukuda_check(M)
    assert r.log_sizes[1:] == [2, 2, 2] and r.ok and any(n == 1 and ok for n, ok in r.point1)
    r = lm.fukuda_check(lm.ElemLambdaModule(3, 0, ()))
    assert r.ok


def test_fukuda_point3_identity_brute_force():
    # p x = iota(N x) element by element for a rank-2 module, independent of the verifier
    M = lm.ElemLambdaModule.build(3, 0, f=[[-3, 1], [-6, 1]])
    tw = lm.Tower(M, 2)
    r = lm.fukuda_check(M, n_levels=3, tower=tw)
    for t in r.transitions:
        B = tw.group(t.n + 1)
        comp = tw.lift(t.n).compose(tw.projection(t.n))
        holds = all(B.is_zero(comp(x) - 3 * x) for x in B.elements())
        assert holds == t.identity_holds
        if t.identity_asserted:
            assert holds


def test_z_invariant_examples():
    tw = lm.Tower(M_T3(), 4)
    x = lm.TowerElement.generator(tw, 0)
    assert lm.z_invariant(x).value == 0
    assert lm.z_invariant(x.scale(3)).value == -1
    tw2 = lm.Tower(lm.ElemLambdaModule.build(3, 0, mu=[1]), 3)
    assert lm.z_invariant(lm.TowerElement.generator(tw2, 0)).value == "-inf"


def test_z_ultrametric():
    M = lm.ElemLambdaModule.build(3, 0, mu=[1], f=[[-3, 1], [-6, 1]])
    tw = lm.Tower(M, 4)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = lm.TowerElement.from_global(tw, [[int(v) for v in rng.integers(-3, 4, 2)] for _ in M.summands])
        b = lm.TowerElement.from_global(tw, [[int(v) for v in rng.integers(-3, 4, 2)] for _ in M.summands])
        za, zb, zab = (lm.z_invariant(e).value for e in (a, b, a + b))
        key = lambda z: float("-inf") if z == "-inf" else z
        assert key(zab) <= max(key(za), key(zb))


def test_shift_examples():
    M = lm.ElemLambdaModule.build(3, 0, mu=[1], f=[[-3, 1]])
    tw = lm.Tower(M, 3)
    x = lm.TowerElement.generator(tw, 0)
    r = lm.shift_maps(x, 1)
    assert r.kills_torsion and all(all(v == 0 for v in s) for s in r.sigma.values())
    assert r.sigma_torsion_free
    with pytest.raises(KappaTooSmall):
        lm.shift_maps(x, 0)
    tw2 = lm.Tower(M_T3(), 3)
    y = lm.TowerElement.generator(tw2, 0)
    r = lm.shift_maps(y, 0)
    assert all(r.sigma[n] == [int(v) for v in y.values[n]] for n in y.values)


def test_split_examples():
    r = lm.weierstrass_split(lm.ElemLambdaModule.build(3, 0, f=[[-3, 1], [-3, 1]], k=[1, 2]))
    assert len(r.components) == 1
    r = lm.weierstrass_split(lm.ElemLambdaModule.build(3, 0, f=[[-3, 1], [-3, 0, 1]]))
    assert len(r.components) == 2 and all(r.trivial_intersections.values())
    assert lm.weierstrass_split(lm.ElemLambdaModule(3, 0, ())).components == []
    with pytest.raises(HasMuPart):
        lm.weierstrass_split(lm.ElemLambdaModule.build(3, 0, mu=[1]))


def test_dual_examples():
    M = lm.ElemLambdaModule.build(3, 0, mu=[1])
    assert lm.iwasawa_dual(M).to_json() == M.to_json()
    D = lm.iwasawa_dual(lm.ElemLambdaModule.build(3, 0, f=[[-6, 1]]))
    for n in range(3):
        assert lm.level_quotient(D, n).group.log_order == resultant_vp(D.summands[0].F, 3, 0, n)
    with pytest.raises(InfiniteQuotient):
        lm.iwasawa_dual(M_T3())


@pytest.mark.parametrize("seed", range(4))
def test_double_dual(seed):
    rng = np.random.default_rng(40 + seed)
    done = 0
    while done < 5:
        M = lm.random_module(3, rng)
        try:
            D = lm.iwasawa_dual(M)
        except InfiniteQuotient:
            continue
        DD = lm.iwasawa_dual(D)
        assert DD.to_json() == M.to_json()
        for n in range(M.kappa, M.kappa + 3):
            assert lm.level_quotient(DD, n).group.exps == lm.level_quotient(M, n).group.exps
        done += 1


def test_unt_star_examples():
    lq = lm.level_quotient(lm.ElemLambdaModule.build(3, 0, mu=[2]), 1)
    r = lm.unt_star_sides(lq.group, lq.T, 3, 0, 1)
    assert r.equal and r.exhaustive and r.exhaustive_equal
    Z = FinAbPGroup(3, ())
    assert lm.unt_star_sides(Z, PGroupHom(Z, Z, np.zeros((0, 0), dtype=object)), 3, 0, 1).equal
    big = FinAbPGroup(3, (2, 2, 2, 1))
    with pytest.raises(TooLarge):
        lm.unt_star_sides(big, PGroupHom(big, big, np.zeros((4, 4), dtype=object)), 3, 0, 1, require_exhaustive=True)


def test_unt_star_trivial_action_as_stated_fails():
    # X = Z/9, T = 0 at p = 3, n = 1: T* = q, so the left side is all of X and the right side is 3X
    X = FinAbPGroup(3, (2,))
    r = lm.unt_star_sides(X, PGroupHom(X, X, [[0]]), 3, 0, 1)
    assert not r.equal and r.exhaustive_equal is False
    assert r.corrected_exponent == 2 and r.corrected_equal


def test_unt_star_corrected_exponent_on_random_levels():
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 12:
        M = lm.random_module(3, rng, kappa=0)
        lq = lm.level_quotient(M, 1)
        if lq.group.order > 3 ** 6:
            continue
        r = lm.unt_star_sides(lq.group, lq.T, 3, 0, 1)
        assert r.corrected_equal
        checked += 1


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_module_roundtrip_json(seed):
    M = lm.random_module(3, np.random.default_rng(seed))
    assert lm.ElemLambdaModule.from_json(M.to_json()).to_json() == M.to_json()
    assert M.mu <= 2 and M.lam <= 4
