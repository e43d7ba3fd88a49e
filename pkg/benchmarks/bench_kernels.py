"""Compare the compiled kernels against the numpy fallback.

Runs the two hot kernels (neighbor mean over CSR, squared distances to one
row) on a few synthetic sizes and prints per-call timings for whichever
backend is active plus the pure-numpy implementation. Launch once normally
and once with CFKNN_FORCE_PYTHON=1 to confirm the dispatch works end to end:

    python benchmarks/bench_kernels.py
    CFKNN_FORCE_PYTHON=1 python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from cfknn import _npkernels, kernels
from cfknn.datasets import gen_ba_shapes
from cfknn.graph import Graph


def bench(fn, *args, repeat=50):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def random_csr(n, avg_deg, dim, seed):
    rng = np.random.default_rng(seed)
    m = n * avg_deg // 2
    edges = set()
    while len(edges) < m:
        u, v = rng.integers(0, n, size=2)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    g = Graph.build(n, sorted(edges),
                    features=rng.standard_normal((n, dim)))
    indptr, indices = g.csr()
    return indptr, indices, np.ascontiguousarray(g.features)


def main():
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':<28}{'active':>12}{'numpy':>12}{'speedup':>9}")

    cases = [("ba-shapes graph", None)]
    for n, deg, dim in ((1_000, 8, 16), (10_000, 10, 64), (50_000, 12, 64)):
        cases.append((f"random n={n} d={dim}", (n, deg, dim)))

    for label, params in cases:
        if params is None:
            g, _ = gen_ba_shapes(0)
            indptr, indices = g.csr()
            x = np.ascontiguousarray(g.features)
        else:
            indptr, indices, x = random_csr(*params, seed=0)
        t_active = bench(kernels.neighbor_mean, indptr, indices, x)
        t_numpy = bench(_npkernels.neighbor_mean, indptr, indices, x)
        a = np.asarray(kernels.neighbor_mean(indptr, indices, x))
        b = np.asarray(_npkernels.neighbor_mean(indptr, indices, x))
        assert np.allclose(a, b, atol=1e-10), "backend mismatch"
        print(f"{'nbr_mean ' + label:<28}{t_active * 1e3:>10.3f}ms"
              f"{t_numpy * 1e3:>10.3f}ms{t_numpy / t_active:>8.2f}x")

    for n, dim in ((1_000, 64), (100_000, 64)):
        mat = np.ascontiguousarray(
            np.random.default_rng(1).standard_normal((n, dim)))
        t_active = bench(kernels.sq_dists_to, mat, 0)
        t_numpy = bench(_npkernels.sq_dists_to, mat, 0)
        assert np.allclose(np.asarray(kernels.sq_dists_to(mat, 0)),
                           np.asarray(_npkernels.sq_dists_to(mat, 0)))
        print(f"{f'sq_dists n={n}':<28}{t_active * 1e3:>10.3f}ms"
              f"{t_numpy * 1e3:>10.3f}ms{t_numpy / t_active:>8.2f}x")


if __name__ == "__main__":
    main()
