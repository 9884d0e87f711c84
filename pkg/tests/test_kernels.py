import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iwalab import _kernels as K
from iwalab import modules as lm
from iwalab.pgroups import snf_classify

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not importable")


def _check_snf(A, p, N, out):
    d, U, Ui, V = out
    m = p ** N
    A = np.asarray(A, dtype=object) % m
    D = np.asarray(U, dtype=object).dot(A).dot(np.asarray(V, dtype=object)) % m
    expect = np.zeros_like(D)
    for i, v in enumerate(d):
        expect[i, i] = v
    assert (D == expect).all()
    assert ((np.asarray(U, dtype=object).dot(np.asarray(Ui, dtype=object)) % m) == np.eye(len(U), dtype=object)).all()


@given(st.sampled_from([2, 3, 5]), st.integers(1, 4), st.integers(1, 5), st.integers(1, 5), st.data())
def test_snf_backends_agree(p, N, r, c, data):
    m = p ** N
    A = np.array(data.draw(st.lists(st.lists(st.integers(0, m - 1), min_size=c, max_size=c), min_size=r, max_size=r)),
                 dtype=object)
    a = K.snf_numpy(A, p, N)
    b = K.snf_numba(A, p, N)
    assert [int(v) for v in a[0]] == [int(v) for v in b[0]]
    _check_snf(A, p, N, a)
    _check_snf(A, p, N, b)


@pytest.mark.parametrize("p,P", [(2, 4), (3, 9), (5, 5)])
def test_polymulmod_backends_agree(p, P):
    rng = np.random.default_rng(P)
    m = p ** 4
    w = np.zeros(P + 1, dtype=np.int64)
    w[:P] = rng.integers(0, m, P) * p % m
    w[P] = 1
    a = rng.integers(0, m, (20, P))
    b = rng.integers(0, m, (20, P))
    got = K._polymulmod_nb(a.astype(np.int64), b.astype(np.int64), w, m)
    ref = K.polymulmod_numpy(a, b, w, m)
    assert (np.asarray(got, dtype=object) % m == np.asarray(ref, dtype=object) % m).all()


def test_matmul_and_orders_backends_agree():
    rng = np.random.default_rng(0)
    m = 3 ** 6
    A, B = rng.integers(0, m, (30, 30)), rng.integers(0, m, (30, 30))
    assert (np.asarray(K._matmul_nb(A, B, m)) == np.asarray(K.matmul_numpy(A, B, m), dtype=np.int64)).all()
    exps = np.array([6, 4, 2, 1])
    X = rng.integers(0, m, (500, 4))
    assert (np.asarray(K._orders_nb(X, exps, 3)) == np.asarray(K.orders_numpy(X, exps, 3))).all()


def test_set_backend_switches_dispatch():
    rng = np.random.default_rng(1)
    old = K.set_backend("numpy")
    try:
        mods = [lm.random_module(3, rng) for _ in range(5)]
        ref = [[lm.level_quotient(M, n).group.exps for n in range(M.kappa, M.kappa + 3)] for M in mods]
        A = rng.integers(0, 81, (6, 6))
        c_np = snf_classify(A, 3).exps
        K.set_backend("numba")
        got = [[lm.level_quotient(M, n).group.exps for n in range(M.kappa, M.kappa + 3)] for M in mods]
        assert got == ref and snf_classify(A, 3).exps == c_np
    finally:
        K.set_backend(old)
    with pytest.raises(ValueError):
        K.set_backend("fortran")


def test_env_flag_gives_identical_cli_output(tmp_path):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"p": 3, "kappa": 0, "summands": [{"mu": 1}, {"f": [-3, 0, 1], "k": 1}]}))
    outs = {}
    for name in ("numba", "numpy"):
        env = dict(os.environ, IWALAB_KERNELS=name)
        probe = subprocess.run([sys.executable, "-c", "from iwalab import _kernels; print(_kernels.BACKEND)"],
                               capture_output=True, text=True, env=env)
        assert probe.stdout.strip() == name
        r = subprocess.run([sys.executable, "-m", "iwalab", "fukuda", "--module", str(m), "--levels", "3"],
                           capture_output=True, text=True, env=env)
        assert r.returncode == 0
        outs[name] = r.stdout
    assert outs["numba"] == outs["numpy"]
