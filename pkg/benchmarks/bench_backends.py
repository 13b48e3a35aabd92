"""Compare the compiled and pure-numpy chart kernels.

    python benchmarks/bench_backends.py --sizes 10,20,40,80 --reps 3

Prints a per-size table with the speedup, the log-log slope of each backend,
and whether both backends chose the same trees with exploration disabled.
"""

import argparse
import sys

import numpy as np

from silva._accel import HAVE_NUMBA
from silva.bench import loglog_slope, time_generation
from silva.cky import GenerationConfig, beam_generate
from silva.synthetic import random_corpus
from silva.treebank import serialize_tree


def agreement(count, n_range, seed):
    cfg = GenerationConfig(epsilon_max=0.0, seed=seed)
    same = 0
    for doc in random_corpus(count, n_range, seed, prefix="agree"):
        a = beam_generate(doc, cfg, "numba")
        b = beam_generate(doc, cfg, "numpy")
        same += serialize_tree(a.tree) == serialize_tree(b.tree) and a.distance == b.distance
    return same


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="10,20,40,80")
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--beam-size", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--agree-docs", type=int, default=50)
    args = parser.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1

    sizes = [int(s) for s in args.sizes.split(",")]
    cfg = GenerationConfig(beam_size=args.beam_size, seed=args.seed)
    fast = time_generation(sizes, args.reps, cfg, backend="numba", seed=args.seed)
    slow = time_generation(sizes, args.reps, cfg, backend="numpy", seed=args.seed)

    print(f"{'n':>5} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for f, s in zip(fast, slow):
        print(f"{f.n:>5} {f.mean_ms:>10.2f} {s.mean_ms:>10.2f} {s.mean_ms / f.mean_ms:>7.1f}x")
    print(f"slope numba {loglog_slope(fast):.2f}, numpy {loglog_slope(slow):.2f}")
    speedups = np.array([s.mean_ms / f.mean_ms for f, s in zip(fast, slow)])
    print(f"geometric mean speedup {np.exp(np.log(speedups).mean()):.1f}x")

    same = agreement(args.agree_docs, (2, 30), args.seed)
    print(f"backends agree on {same}/{args.agree_docs} documents at epsilon 0")
    return 0


if __name__ == "__main__":
    sys.exit(main())
