"""The ``suite`` command: a batch of seeded checks with one record each.

Records marked ``asserted`` decide the exit status; the others report
statements that are known to fail as stated (kept for visibility).
"""
from __future__ import annotations

from typing import Dict, List

import numpy as np

from . import group_algebra as ga
from . import iwasawa as iw
from . import modules as lm
from . import pairing as pl
from . import pgroups as pg
from .errors import InfiniteQuotient
from .groups import CycloCharacter, FiniteGroup
from .padic import factor_mod_p


def _rec(name: str, ok: bool, detail: str, asserted: bool = True) -> Dict[str, object]:
    return {"name": name, "asserted": asserted, "ok": bool(ok), "detail": detail}


def _involution(quick: bool):
    bad = total = 0
    rng = np.random.default_rng(1)
    for p in (2, 3, 5):
        for kappa in (0, 1):
            for n in (kappa + 1, kappa + 2):
                for N in ((2, 3) if quick else (2, 3, 4)):
                    T = iw.LambdaQuot.gen(p, kappa, n, N)
                    Ts = iw.involution(T)
                    total += 1
                    bad += iw.involution(Ts) != T.reduce(Ts.N)
                    for _ in range(2):
                        x = T.like(rng.integers(0, p ** N, T.P))
                        y = T.like(rng.integers(0, p ** N, T.P))
                        bad += iw.involution(x * y) != iw.involution(x) * iw.involution(y)
    return _rec("involution T** = T, multiplicative", bad == 0, f"{total} parameter sets, {bad} failures")


def lte_exponent(p: int, kappa: int, n: int) -> int:
    """v_p((1 + p^(kappa+1))^(p^(n-kappa)) - 1) by lifting the exponent."""
    if p == 2 and kappa == 0:
        return n + 2
    return n + 1


def _duality():
    bad = []
    for p in (2, 3, 5):
        for kappa in (0, 1):
            for n in (kappa + 1, kappa + 2):
                oracle = lte_exponent(p, kappa, n)
                r = iw.check_omega_duality(p, kappa, n, oracle + 2)
                if not (r.identity_holds and r.lifted_identity_holds and r.e == oracle):
                    bad.append((p, kappa, n))
    return _rec("omega duality constant", not bad, f"failures: {bad}")


def _lemma_ab(quick: bool):
    rng = np.random.default_rng(6)
    count = 50 if quick else 200
    viol = 0
    for _ in range(count):
        A, B, N, iota = pg.lemma_ab_instance(3, rng)
        viol += pg.verify_lemma_ab(A, B, N, iota).violated
    out = [_rec("order lemma on generated instances", viol == 0, f"{count} instances, {viol} violations")]
    A, B, N, iota = pg.kraft_schoof_fixture(3)
    r = pg.verify_lemma_ab(A, B, N, iota)
    out.append(_rec("Kraft-Schoof fixture violates rank preservation",
                    not r.hypotheses["iota_rank_preserving"] and r.data["p_rank_iota_A"] == 1,
                    f"p-rk iota(A1) = {r.data['p_rank_iota_A']}"))
    A, B = pg.FinAbPGroup(3, (2, 1)), pg.FinAbPGroup(3, (3, 2))
    r = pg.verify_lemma_ab(A, B, pg.PGroupHom(B, A, [[1, 1], [1, 2]]), pg.PGroupHom(A, B, [[18, 18], [3, 0]]))
    out.append(_rec("order lemma as stated (known counterexample)", not r.violated,
                    "hypotheses hold, |iota(A)| < |A|", asserted=False))
    return out


def _idempotents():
    bad = []
    for p in (3, 5):
        for m in range(1, 13):
            if m % p == 0:
                continue
            G = FiniteGroup.cyclic(m)
            idems = ga.central_idempotents(G, p, 3)
            checks = ga.verify_idempotent_system(idems)
            nf = len(factor_mod_p([-1] + [0] * (m - 1) + [1], p))
            if len(idems) != nf or not all(checks.values()):
                bad.append((p, m))
    G = FiniteGroup.symmetric(3)
    chi = CycloCharacter.trivial(G, 5, 1)
    rng = np.random.default_rng(3)
    x = ga.GroupAlgebraElem.random(G, 5, 2, rng)
    y = ga.GroupAlgebraElem.random(G, 5, 2, rng)
    refl = lambda a: ga.leopoldt_reflect(a, chi)
    anti = ga.multiplicativity(refl, x, y)["anti"] and refl(refl(x)) == x
    return [_rec("central idempotents of C_m", not bad, f"failures: {bad}"),
            _rec("Leopoldt reflection anti-multiplicative involution", anti, "S3, p=5")]


def _modules(quick: bool):
    count = 20 if quick else 100
    gbad = fviol = dbad = 0
    for p in (2, 3):
        rng = np.random.default_rng(100 + p)
        for _ in range(count // 2):
            M = lm.random_module(p, rng)
            gbad += not lm.growth_stats(M).matches
            fviol += bool(lm.fukuda_check(M).violations)
            if not M.has_mu:
                try:
                    dbad += lm.iwasawa_dual(lm.iwasawa_dual(M)).to_json() != M.to_json()
                except InfiniteQuotient:
                    pass
    return [_rec("growth law recovers (mu, lambda)", gbad == 0, f"{count} modules, {gbad} mismatches"),
            _rec("Fukuda points 1-3", fviol == 0, f"{count} modules, {fviol} with violations"),
            _rec("double Iwasawa dual", dbad == 0, f"{dbad} mismatches")]


def _pairing():
    X = pg.FinAbPGroup(3, (2, 1))
    G = FiniteGroup.cyclic(2)
    eye = np.eye(2, dtype=object)
    D = pl.build_dual_pairing(X, 1, G, [eye, -eye], [1, -1], tau_X=[[4, 0], [0, 1]], chi_tau=4)
    ok = (pl.is_nondegenerate(D).ok and pl.covariance_check(D).ok
          and all(pl.reflection_adjunction(D, ga.GroupAlgebraElem.basis(G, 3, 2, g)).ok for g in range(2))
          and pl.reflection_adjunction(D, [0, 1]).ok and pl.is_nondegenerate(pl.descend(D)).ok)
    V = pg.FinAbPGroup(3, (1, 1))
    alt = pl.PairingTable(3, 0, V, V, np.array([[0, 1], [-1, 0]]))
    pert = pl.PairingTable(3, 0, V, V, np.array([[0, 1], [0, 0]]))
    skew = pl.skew_check(alt).ok and not pl.skew_check(pert).ok
    return [_rec("dual pairing: nondegenerate, covariant, adjunction, descent", ok, "X = (9, 3), C2 x tau"),
            _rec("skew check", skew, "alternating passes, perturbed fails")]


def _unt_star(quick: bool):
    M = lm.ElemLambdaModule.build(3, 0, mu=[2])
    lq = lm.level_quotient(M, 1)
    base = lm.unt_star_sides(lq.group, lq.T, 3, 0, 1)
    rng = np.random.default_rng(9)
    stated = corrected = total = 0
    for _ in range(5 if quick else 10):
        M = lm.random_module(3, rng, kappa=0)
        lq = lm.level_quotient(M, 1)
        r = lm.unt_star_sides(lq.group, lq.T, 3, 0, 1)
        total += 1
        stated += r.equal
        corrected += r.corrected_equal
    return [_rec("unt* on Lambda/(omega_1, 9)", base.equal and bool(base.exhaustive_equal), "p=3, kappa=0, n=1"),
            _rec("unt* as stated on random level quotients", stated == total, f"{stated}/{total} equal",
                 asserted=False),
            _rec("unt* with exponent v_p(omega_n^*)", corrected == total, f"{corrected}/{total} equal")]


def run_suite(seed: int = 0, quick: bool = False) -> List[Dict[str, object]]:
    recs = [_rec("omega(3,0,1)", list(iw.omega(3, 0, 1).coeffs) == [0, 3, 3, 1], "[0, 3, 3, 1]"),
            _involution(quick), _duality()]
    recs += _lemma_ab(quick)
    recs += _idempotents()
    recs += _modules(quick)
    recs += _pairing()
    recs += _unt_star(quick)
    return recs
