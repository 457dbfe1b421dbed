"""Compare the compiled kernels with the numpy fallback.

Each case runs on identical inputs with both backends, checks that the
outputs agree and reports the best wall time of ``--repeat`` runs.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from necklace import builtin, kernels


def level_copies(system, m):
    L = np.array([[1.0, 0.0, 0.0, 1.0]])
    T = np.zeros((1, 2))
    for _ in range(m):
        A = L.reshape(-1, 1, 2, 2) @ system.ML.reshape(1, -1, 2, 2)
        t = np.einsum("kab,ib->kia", L.reshape(-1, 2, 2), system.MT) + T[:, None, :]
        L, T = A.reshape(-1, 4), t.reshape(-1, 2)
    return L, T


def cases(seed):
    rng = np.random.default_rng(seed)
    s = builtin("ex21")
    c0 = np.array(s.c0)
    L, T = level_copies(s, 3)
    p = tuple(s.node(1))
    yield "refine_point ex21 L3", "refine_point", (L, T, s.ML, s.MT, c0, s.r0, p[0], p[1], 1e-9)

    i, j = np.triu_indices(len(L) // 24, 1)
    split = rng.random(len(i)) < 0.5
    yield ("refine_pairs ex21", "refine_pairs",
           (L[i], T[i], L[j], T[j], split, s.ML, s.MT, c0, s.r0, 1e-3))

    g = builtin("fig1a")
    yield ("rasterize fig1a 1024", "rasterize",
           (g.ML, g.MT, np.array(g.c0), g.r0, -0.1, -0.1, 1.4 / 1024, 1024, 1024, 10 ** 8))

    free = (rng.random((1024, 1024)) < 0.6).astype(np.uint8)
    yield "label_components 1024^2", "label_components", (free,)

    n = 200_000
    yield "union_find 200k", "union_find", (n, rng.integers(0, n, size=(n, 2)))


def best_time(func, args, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = func(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not kernels.compiled_available():
        parser.exit(1, "compiled kernels are not built; run `pip install -e .` first\n")
    py, cy = kernels.get_backend("python"), kernels.get_backend("compiled")
    print(f"{'case':28s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  agree")
    for label, name, case_args in cases(args.seed):
        tp, op = best_time(getattr(py, name), case_args, args.repeat)
        tc, oc = best_time(getattr(cy, name), case_args, args.repeat)
        print(f"{label:28s} {tp:10.4f} {tc:11.4f} {tp / tc:7.1f}x  {same(op, oc)}")


if __name__ == "__main__":
    main()
