"""Compare the jitted similarity kernels against the pure-numpy path.

Run directly:

    python benchmarks/bench_kernels.py [--dim 256] [--rows 2000] [--repeat 50]

The numba path is compiled on first call, so one warmup round runs
before timing. Results are wall-clock medians over ``--repeat`` calls.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from datafactory import kernels


def _time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--rows", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=50)
    parser.add_argument("--pairs", type=int, default=2000)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    u = rng.normal(size=args.dim)
    v = rng.normal(size=args.dim)
    matrix = rng.normal(size=(args.rows, args.dim))

    jit = kernels.numba_enabled()
    print(f"numba available and enabled: {jit}")
    print(f"dim={args.dim} rows={args.rows} repeat={args.repeat}")

    rows = []
    if jit:
        kernels.cosine(u, v)  # warmup triggers compilation
        kernels.batch_cosine(matrix, u)
        rows.append(
            (
                "numba",
                _time(lambda: [kernels.cosine(u, v) for _ in range(args.pairs)], args.repeat),
                _time(lambda: kernels.batch_cosine(matrix, u), args.repeat),
            )
        )

    rows.append(
        (
            "numpy",
            _time(lambda: [kernels._cosine_np(u, v) for _ in range(args.pairs)], args.repeat),
            _time(lambda: kernels._batch_cosine_np(matrix, u), args.repeat),
        )
    )

    header = f"{'path':8} {'cosine x' + str(args.pairs):>16} {'batch_cosine':>14}"
    print(header)
    print("-" * len(header))
    for name, t_cos, t_batch in rows:
        print(f"{name:8} {t_cos * 1e3:13.3f} ms {t_batch * 1e3:11.3f} ms")

    if len(rows) == 2:
        print(
            f"speedup: cosine {rows[1][1] / rows[0][1]:.2f}x, "
            f"batch {rows[1][2] / rows[0][2]:.2f}x (numba over numpy)"
        )


if __name__ == "__main__":
    main()
