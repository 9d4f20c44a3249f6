"""Times the compiled coordinate-descent kernel against the Python one.

Both backends must produce bit-identical weights on the same training
run; this script asserts that before reporting timings, so it doubles as
an equivalence check on realistic problem sizes.

Run from the repository root: python3 benchmarks/bench_svm.py
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from da_tagger.features import FeatureVector
from da_tagger.svm import TrainConfig, available_backends, train_binary


def synthetic_problem(n, n_sparse, nnz, dense_dim, seed):
    """Linearly-separable-ish binary set with sparse and dense blocks."""
    rng = np.random.Generator(np.random.PCG64(seed))
    data = []
    for _ in range(n):
        label = 1 if rng.random() < 0.5 else -1
        ids = np.sort(rng.choice(n_sparse, size=nnz, replace=False))
        vals = rng.normal(loc=0.3 * label, scale=1.0, size=nnz)
        dense = rng.normal(loc=0.1 * label, scale=1.0, size=dense_dim)
        fv = FeatureVector(sparse=[(int(j), float(v)) for j, v in zip(ids, vals)],
                           dense=dense if dense_dim else None)
        data.append((fv, label))
    # both classes must be present
    if len({lb for _, lb in data}) < 2:
        data[0] = (data[0][0], -data[0][1])
    return data


def run(kernel_name, data, n_sparse, cfg, repeats):
    if kernel_name == "cython":
        from da_tagger.svm import _dcd_cy as kernel
    else:
        from da_tagger.svm import _dcd as kernel
    best = float("inf")
    w = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        w = train_binary(data, cfg, n_sparse=n_sparse, kernel=kernel)
        best = min(best, time.perf_counter() - t0)
    return w, best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="training examples")
    ap.add_argument("--sparse-dim", type=int, default=5000)
    ap.add_argument("--nnz", type=int, default=25,
                    help="active sparse features per example")
    ap.add_argument("--dense-dim", type=int, default=50)
    ap.add_argument("--epochs", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    data = synthetic_problem(args.n, args.sparse_dim, args.nnz,
                             args.dense_dim, args.seed)
    # tolerance low enough that the loop always runs the full epoch budget,
    # so both backends do identical work
    cfg = TrainConfig(C=0.1, max_outer_iterations=args.epochs,
                      tolerance=1e-12, seed=args.seed)

    results = {}
    for name in backends:
        w, secs = run(name, data, args.sparse_dim, cfg, args.repeats)
        results[name] = (w, secs)
        per_epoch = 1000.0 * secs / args.epochs
        print(f"{name:>7}: {secs:8.3f} s total   {per_epoch:7.2f} ms/epoch"
              f"   (best of {args.repeats})")

    if "cython" in results and "python" in results:
        wc, tc = results["cython"]
        wp, tp = results["python"]
        if not np.array_equal(wc, wp):
            diff = float(np.max(np.abs(wc - wp)))
            raise SystemExit(f"FAIL: backends disagree, max |dw| = {diff:g}")
        print(f"weights bit-identical across backends ({wc.shape[0]} dims)")
        print(f"speedup: {tp / tc:.1f}x")
    else:
        print("compiled backend not built; install with pip install -e . "
              "--no-build-isolation to compare")


if __name__ == "__main__":
    main()
