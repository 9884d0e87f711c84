#!/usr/bin/env python3
"""Compare the numba kernels with their numpy twins.

Prints one JSON record per kernel with min/mean timings for both backends
and whether the outputs agree.
"""
import argparse
import json
import time

import numpy as np

from iwalab import _kernels

SEED = 42


def _time(fn, warmup: int, runs: int):
    for _ in range(warmup):
        out = fn()
    times = []
    for _ in range(runs):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return out, {"min": min(times), "mean": sum(times) / len(times)}


def cases(size: int, rng: np.random.Generator):
    p, N = 3, 6
    m = p ** N
    A = rng.integers(0, m, size=(size, size)) * np.where(rng.random((size, size)) < 0.5, 3, 1) % m
    B = rng.integers(0, m, size=(size, size))
    P = 81
    w = np.zeros(P + 1, dtype=np.int64)
    w[0], w[-1] = -1 % m, 1
    a = rng.integers(0, m, size=(64, P))
    b = rng.integers(0, m, size=(64, P))
    X = rng.integers(0, m, size=(20000, 4))
    exps = np.array([6, 4, 2, 1])
    return {
        "snf_mod": lambda: _kernels.snf_mod(A, p, N)[0],
        "matmul_mod": lambda: _kernels.matmul_mod(A, B, m),
        "polymulmod": lambda: _kernels.polymulmod(a, b, w, m),
        "element_orders": lambda: _kernels.element_orders(X % (p ** exps), exps, p),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=60)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--warmup", type=int, default=2)
    args = ap.parse_args()
    results = []
    for name in cases(args.size, np.random.default_rng(SEED)):
        row = {"kernel": name}
        outs = {}
        for backend in ("numba", "numpy"):
            _kernels.set_backend(backend)
            fn = cases(args.size, np.random.default_rng(SEED))[name]
            out, t = _time(fn, args.warmup, args.runs)
            outs[backend] = np.asarray(out, dtype=object)
            row[backend] = t
        row["agree"] = bool(np.array_equal(outs["numba"], outs["numpy"]))
        row["speedup"] = row["numpy"]["min"] / max(row["numba"]["min"], 1e-12)
        results.append(row)
        print(json.dumps(row))
    _kernels.set_backend("numba")
    return results


if __name__ == "__main__":
    main()
