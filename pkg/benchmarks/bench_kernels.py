"""Benchmark the jitted kernels against the pure-Python/numpy fallback.

Both backends share one source, so outputs must be identical; this script
verifies that on every run and reports wall-clock speedups for the two hot
kernels (Gini split scan, batch tree traversal) plus an end-to-end
explain-a-tree timing.

Run: python benchmarks/bench_kernels.py [--n 2000] [--d 50] [--repeats 3]

The package-wide backend is chosen at import time; set EVADEX_DISABLE_NUMBA=1
to force the fallback everywhere (this script always times both variants
explicitly, so the flag only matters for the end-to-end row).
"""

import argparse
import time

import numpy as np

from evadex import kernels
from evadex.dataset import split_dataset
from evadex.explain import ExplainConfig, explain
from evadex.models import TrainConfig, train_tree
from evadex.synth import binary_planted


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--d", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--explains", type=int, default=20, help="samples for the end-to-end row")
    args = ap.parse_args()

    if kernels.best_gini_split_jit is None:
        print("numba backend unavailable (not importable or disabled); nothing to compare")
        return

    data = binary_planted(args.n, args.d, seed=0)
    train, _ = split_dataset(data, (0.6, 0.4), seed=0)
    X = np.ascontiguousarray(train.features)
    y = train.labels

    # warm the JIT before timing
    kernels.best_gini_split_jit(X[:64], y[:64], 2, 1)

    print(f"backend in use: {kernels.backend_name()}   n={args.n} d={args.d} repeats={args.repeats}")
    print(f"{'kernel':<28} {'python':>10} {'numba':>10} {'speedup':>9}")

    t_py, out_py = best_of(lambda: kernels.best_gini_split_py(X, y, 2, 5), args.repeats)
    t_nb, out_nb = best_of(lambda: kernels.best_gini_split_jit(X, y, 2, 5), args.repeats)
    assert out_py == out_nb, "split scan outputs diverged between backends"
    print(f"{'gini split scan':<28} {t_py:>9.4f}s {t_nb:>9.4f}s {t_py / t_nb:>8.1f}x")

    model = train_tree(train, TrainConfig(model_kind="tree", max_depth=10, min_leaf=5, seed=0))
    rng = np.random.default_rng(0)
    Xq = np.ascontiguousarray((rng.random((20_000, args.d)) < 0.2).astype(np.float64))
    kernels.tree_leaf_indices_jit(model.feature, model.threshold, model.left, model.right, Xq[:64])
    t_py, leaves_py = best_of(
        lambda: kernels.tree_leaf_indices_py(model.feature, model.threshold, model.left, model.right, Xq),
        args.repeats,
    )
    t_nb, leaves_nb = best_of(
        lambda: kernels.tree_leaf_indices_jit(model.feature, model.threshold, model.left, model.right, Xq),
        args.repeats,
    )
    assert np.array_equal(leaves_py, leaves_nb), "traversal outputs diverged between backends"
    print(f"{'tree traversal (20k rows)':<28} {t_py:>9.4f}s {t_nb:>9.4f}s {t_py / t_nb:>8.1f}x")

    # end-to-end: surrogate explanations against the tree under the active backend
    ecfg = ExplainConfig(kernel_width=0.7 * args.d, seed=0)
    t0 = time.perf_counter()
    for i in range(args.explains):
        explain(model, data.sample(i), ecfg)
    dt = time.perf_counter() - t0
    print(f"\nend-to-end ({kernels.backend_name()} backend): {args.explains} tree explanations "
          f"in {dt:.2f}s ({dt / args.explains * 1000:.0f} ms each)")
    print("rerun with EVADEX_DISABLE_NUMBA=1 to time the fallback end to end")


if __name__ == "__main__":
    main()
