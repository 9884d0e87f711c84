from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iwalab import linalg
from iwalab.errors import InputError, NonUnit, NotSquarefreeModP
from iwalab.padic import (PadicInt, PadicPoly, factor_mod_p, hensel_factor, is_prime, padic_inv, padic_val, pdivmod,
                          pmul, split_completions)

from oracles import factor_fp_exhaustive, smith_p_exps, vp

primes = st.sampled_from([2, 3, 5, 7])


@given(primes, st.integers(1, 6), st.integers(), st.integers())
def test_padic_int_ring_ops_match_integers(p, N, a, b):
    m = p ** N
    x, y = PadicInt(p, N, a), PadicInt(p, N, b)
    assert (x + y).residue == (a + b) % m
    assert (x - y).residue == (a - b) % m
    assert (x * y).residue == (a * b) % m
    assert (-x).residue == (-a) % m


@given(primes, st.integers(1, 6), st.integers())
def test_inverse_of_units(p, N, a):
    x = PadicInt(p, N, a)
    if a % p == 0:
        with pytest.raises(NonUnit):
            padic_inv(x)
    else:
        assert padic_inv(x) * x == 1


@given(primes, st.integers(1, 8), st.integers(1, 10 ** 6))
def test_valuation_matches_oracle(p, N, a):
    v = padic_val(PadicInt(p, N, a))
    if a % p ** N == 0:
        assert v.capped and int(v) == N
    else:
        assert int(v) == vp(a % p ** N, p) and not v.capped


def test_zero_valuation_is_capped():
    v = padic_val(PadicInt(3, 4, 0))
    assert v.capped and repr(v) == ">=4"


def test_mixed_precision_truncates():
    x = PadicInt(3, 4, 10) + PadicInt(3, 2, 1)
    assert x.N == 2 and x.truncated and x.residue == 2


def test_bad_precision():
    with pytest.raises(InputError):
        PadicInt(3, 0, 1)


@given(st.integers(0, 400))
def test_is_prime(n):
    assert is_prime(n) == (n >= 2 and all(n % d for d in range(2, n)))


@given(primes, st.lists(st.integers(-50, 50), min_size=1, max_size=6),
       st.lists(st.integers(-50, 50), min_size=1, max_size=4))
def test_pdivmod_by_monic(p, a, b):
    m = p ** 3
    b = b + [1]
    q, r = pdivmod(a, b, m)
    assert len(r) < len(b)
    back = [x % m for x in pmul(q, b, m)]
    back += [0] * (len(a) - len(back))
    rr = list(r) + [0] * (len(back) - len(r))
    assert all((x + y - z) % m == 0 for x, y, z in zip(back, rr, list(a) + [0] * (len(back) - len(a))))


@pytest.mark.parametrize("p,f", [(3, [-1, 0, 0, 0, 1]), (5, [1, 1, 1, 1]), (7, [-2, 0, 0, 1]), (2, [1, 1, 0, 1])])
def test_factor_mod_p_matches_exhaustive(p, f):
    ours = sorted(factor_mod_p(f, p))
    ref = sorted(factor_fp_exhaustive(f, p))
    assert ours == ref


@given(st.sampled_from([3, 5, 7]), st.integers(2, 8), st.integers(2, 6))
def test_hensel_lift_product(p, m, N):
    f = [-1] + [0] * (m - 1) + [1]
    if m % p == 0:
        with pytest.raises(NotSquarefreeModP):
            hensel_factor(PadicPoly(p, N, f))
        return
    facs = hensel_factor(PadicPoly(p, N, f))
    assert all(g.is_monic() for g in facs)
    prod = reduce(lambda a, b: a * b, facs)
    assert prod.coeffs == PadicPoly(p, N, f).coeffs
    assert len(facs) == len(factor_fp_exhaustive(f, p))


def test_split_completions_x2_plus_1():
    # X^2 + 1 splits at 5 and stays irreducible at 3
    assert split_completions(PadicPoly(5, 4, [1, 0, 1])).degrees == (1, 1)
    assert split_completions(PadicPoly(3, 4, [1, 0, 1])).degrees == (2,)
    r = split_completions(PadicPoly(5, 4, [1, 0, 1]))
    for g in r.factors:
        root = (-g.coeffs[0]) % 5 ** 4
        assert (root * root + 1) % 5 ** 4 == 0


def test_hensel_needs_monic():
    with pytest.raises(InputError):
        hensel_factor(PadicPoly(3, 3, [1, 2]))


@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.data())
def test_snf_transforms(p, N, data):
    r = data.draw(st.integers(1, 4))
    c = data.draw(st.integers(1, 4))
    m = p ** N
    A = np.array(data.draw(st.lists(st.lists(st.integers(0, m - 1), min_size=c, max_size=c), min_size=r, max_size=r)),
                 dtype=object)
    d, U, Ui, V = linalg.snf(A, p, N)
    D = np.asarray(linalg.matmul(linalg.matmul(U, A, m), V, m), dtype=object) % m
    expect = np.zeros((r, c), dtype=object)
    for i, x in enumerate(d):
        expect[i, i] = x
    assert (D == expect).all()
    assert (np.asarray(linalg.matmul(U, Ui, m)) % m == np.eye(r, dtype=object)).all()
    assert all(vp(x, p) < N for x in d)
    assert [vp(x, p) for x in d] == sorted(vp(x, p) for x in d)


@given(st.sampled_from([2, 3, 5]), st.data())
def test_solve_and_kernel(p, data):
    N = 3
    m = p ** N
    A = np.array(data.draw(st.lists(st.lists(st.integers(0, m - 1), min_size=3, max_size=3), min_size=2, max_size=3)),
                 dtype=object)
    x = np.array(data.draw(st.lists(st.integers(0, m - 1), min_size=3, max_size=3)), dtype=object)
    b = A.dot(x) % m
    y = linalg.solve(A, b, p, N)
    assert y is not None and ((A.dot(y) - b) % m == 0).all()
    for g in linalg.kernel(A, p, N):
        assert (A.dot(g) % m == 0).all()


@given(st.sampled_from([2, 3]), st.data())
def test_image_size_against_sympy_smith(p, data):
    r = data.draw(st.integers(1, 3))
    A = np.array(data.draw(st.lists(st.lists(st.integers(-20, 20), min_size=r, max_size=r), min_size=r, max_size=r)),
                 dtype=object)
    import sympy
    if sympy.Matrix(A.tolist()).det() == 0:
        return
    from iwalab.pgroups import snf_classify
    assert list(snf_classify(A, p).exps) == smith_p_exps(A, p)
