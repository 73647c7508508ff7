#!/usr/bin/env python3
"""Compare the two LCS table kernels behind the diff extractor.

Usage:
    python3 benchmarks/bench_diff.py [--pairs 2000] [--max-len 40]

Times the compiled (numba) and vectorized (numpy) kernels over the same
randomly generated token pairs, checks they agree cell for cell, and prints
per-kernel wall time plus the speedup. The first numba call compiles; it is
excluded from the timed window.
"""

import argparse
import random
import time

import numpy as np

from revloop._kernels import encode_pair, lcs_table_numpy

try:
    from revloop._kernels import lcs_table_numba

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def make_pairs(n_pairs, max_len, seed=0):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_pairs):
        vocab = [f"t{i}" for i in range(rng.randint(4, 50))]
        a = [rng.choice(vocab) for _ in range(rng.randint(1, max_len))]
        if rng.random() < 0.5:
            b = [rng.choice(vocab) for _ in range(rng.randint(1, max_len))]
        else:
            b = list(a)
            for _ in range(rng.randint(1, 6)):
                if b and rng.random() < 0.5:
                    b.pop(rng.randrange(len(b)))
                else:
                    b.insert(rng.randint(0, len(b)), rng.choice(vocab))
        pairs.append(encode_pair(a, b))
    return pairs


def bench(kernel, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a, b in pairs:
            kernel(a, b)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--max-len", type=int, default=40)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.max_len)
    print(f"{args.pairs} pairs, token lengths up to {args.max_len}")

    if not HAS_NUMBA:
        print("numba not installed; timing the numpy kernel only")
        t = bench(lcs_table_numpy, pairs)
        print(f"numpy : {t * 1000:8.1f} ms")
        return

    # compile outside the timed window
    lcs_table_numba(*pairs[0])

    for a, b in pairs[:50]:
        if not np.array_equal(lcs_table_numba(a, b), lcs_table_numpy(a, b)):
            raise SystemExit("kernel outputs disagree; aborting")

    t_numba = bench(lcs_table_numba, pairs)
    t_numpy = bench(lcs_table_numpy, pairs)
    print(f"numba : {t_numba * 1000:8.1f} ms")
    print(f"numpy : {t_numpy * 1000:8.1f} ms")
    print(f"speedup: {t_numpy / t_numba:.1f}x")


if __name__ == "__main__":
    main()
