"""Time the compiled kernels against the numpy fallback.

Runs the embedding SGD epoch and the forest split scan on synthetic
workloads under both backends and prints a small table. The first numba
call pays JIT compilation; a warmup run keeps that out of the timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from prereqchain import kernels


def _pvdm_workload(rng, n_docs=150, doc_len=120, vocab=2000, dim=100,
                   negative=5):
    tokens = rng.integers(0, vocab, n_docs * doc_len).astype(np.int64)
    doc_bounds = (np.arange(n_docs + 1) * doc_len).astype(np.int64)
    word = (rng.random((vocab, dim)) - 0.5) / dim
    doc = (rng.random((n_docs, dim)) - 0.5) / dim
    out = np.zeros((vocab, dim))
    negatives = rng.integers(0, vocab, (tokens.size, negative)).astype(np.int64)
    alphas = np.full(tokens.size, 0.025)
    return tokens, doc_bounds, word, doc, out, negatives, alphas


def _split_workload(rng, rows, cols=8):
    features = rng.random((rows, cols))
    labels = (rng.random(rows) < 0.4).astype(np.int64)
    return features, labels


def bench_pvdm(backend: str, repeat: int, rng) -> float:
    kernels.set_backend(backend)
    args = _pvdm_workload(rng)
    best = float("inf")
    for _ in range(repeat + 1):  # one extra pass as warmup
        work = tuple(a.copy() if isinstance(a, np.ndarray) else a for a in args)
        start = time.perf_counter()
        kernels.pvdm_epoch(*work, window=5, update_words=True)
        best = min(best, time.perf_counter() - start)
    return best


def _bench_split_at(rows):
    def bench(backend: str, repeat: int, rng) -> float:
        kernels.set_backend(backend)
        features, labels = _split_workload(rng, rows)
        best = float("inf")
        for _ in range(repeat + 1):
            start = time.perf_counter()
            kernels.best_split(features, labels, min_leaf=1)
            best = min(best, time.perf_counter() - start)
        return best
    return bench


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timed repetitions per case (best is reported)")
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "numba" not in backends:
        print("numba unavailable; timing the numpy fallback only")

    initial = kernels.active_backend()
    rows = []
    for name, bench in (("pvdm_epoch (18k positions, dim 100)", bench_pvdm),
                        ("best_split (1k rows, 8 columns)", _bench_split_at(1000)),
                        ("best_split (20k rows, 8 columns)", _bench_split_at(20000))):
        timings = {b: bench(b, args.repeat, np.random.default_rng(0))
                   for b in backends}
        rows.append((name, timings))
    kernels.set_backend(initial)

    width = max(len(name) for name, _ in rows)
    print(f"{'kernel'.ljust(width)}  " +
          "".join(f"{b:>12}" for b in backends) +
          ("     speedup" if len(backends) == 2 else ""))
    for name, timings in rows:
        cells = "".join(f"{timings[b] * 1000:>10.1f}ms" for b in backends)
        line = f"{name.ljust(width)}  {cells}"
        if len(backends) == 2:
            line += f"{timings['numpy'] / timings['numba']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
