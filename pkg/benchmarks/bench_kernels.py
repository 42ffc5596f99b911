"""Compare the compiled and numpy split-statistics kernels.

    python3 benchmarks/bench_kernels.py [--rows 200000] [--attrs 10] [--repeat 5]

Reports the median time of one full-node ``split_stats`` call per backend,
end-to-end training time, and checks that both backends agree bit for bit.
"""
import argparse
import statistics
import time

import numpy as np

from fmdt_pit import Dataset, Hyperparameters, kernels, train
from fmdt_pit import model_io
from fmdt_pit.partition import uniform_cores


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200_000)
    ap.add_argument("--attrs", type=int, default=10)
    ap.add_argument("--fuzzy-sets", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if kernels.BACKEND != "cython":
        print("compiled kernel not built; only the numpy fallback is available")
    backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])

    rng = np.random.default_rng(0)
    n, F, T = args.rows, args.attrs, args.fuzzy_sets
    U = rng.random((n, F))
    y = rng.integers(0, 2, n)
    rows = np.arange(n, dtype=np.int64)
    w = rng.random(n)
    call = dict(data=U, y=y, w=w, rows=rows, attrs=np.arange(F), nbranch=np.full(F, T),
                is_cat=np.zeros(F, dtype=np.int64), cores=uniform_cores(T), n_classes=2)

    print(f"split_stats on {n} rows x {F} attributes, T={T}")
    out, stats = {}, {}
    for b in backends:
        stats[b] = kernels.split_stats(**call, backend=b)
        out[b] = median_time(lambda: kernels.split_stats(**call, backend=b), args.repeat)
        print(f"  {b:<7} {out[b] * 1e3:9.1f} ms")
    if len(backends) == 2:
        print(f"  speedup {out['python'] / out['cython']:.2f}x, "
              f"bit-identical: {stats['python'].tobytes() == stats['cython'].tobytes()}")

    X = rng.normal(size=(n // 2, F))
    ds = Dataset.from_arrays(X, (X[:, 0] * X[:, 1] + X[:, 2] > 0).astype(int))
    print(f"train on {ds.n} rows x {F} attributes, default settings")
    dumps, fit = {}, {}
    for b in backends:
        t0 = time.perf_counter()
        m = train(ds, Hyperparameters(), backend=b)
        fit[b] = time.perf_counter() - t0
        dumps[b] = model_io.dumps(m)
        print(f"  {b:<7} {fit[b]:9.2f} s  (learning {m.timings['learning']:.2f} s)")
    if len(backends) == 2:
        print(f"  speedup {fit['python'] / fit['cython']:.2f}x, "
              f"identical models: {dumps['python'] == dumps['cython']}")


if __name__ == "__main__":
    main()
