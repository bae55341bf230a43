"""Time the compiled kernels against the pure-Python reference.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from coneflex import _kernels_py, kernels
from coneflex import generators as gen
from coneflex import hyperideal as hyp
from coneflex import geometry as geo
from coneflex.conemanifold import prism_meridian_system


def tube_inputs():
    T = hyp.truncate(gen.hyperideal_schonhardt())
    X = T.points
    frames = []
    for a, b in T.old_edges:
        w, length = geo.tangent_towards(X[a], X[b])
        frames.append((X[a], w, length))
    grams, pairs = [], []
    for i in range(len(frames)):
        for j in range(i + 1, len(frames)):
            (u1, w1, _), (u2, w2, _) = frames[i], frames[j]
            pairs.append((i, j))
            grams.append(kernels._gram(u1, w1, u2, w2))
    lengths = np.array([f[2] for f in frames])
    return np.array(grams), lengths, np.array(pairs, dtype=np.int64)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        from coneflex import _kernels as compiled
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the Python reference only")
    grams, lengths, pairs = tube_inputs()
    words = prism_meridian_system().matrix()
    cases = {
        "pairwise_segment_cosh_min (66 pairs)": lambda m: m.pairwise_segment_cosh_min(grams, lengths, pairs, 1e-10),
        "meridian_scan (n=7)": lambda m: m.meridian_scan(words, 7),
        "meridian_scan (n=13)": lambda m: m.meridian_scan(words, 13),
    }
    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for name, call in cases.items():
        tp = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:40s} {tp:12.5f}")
            continue
        tc = min(timeit.repeat(lambda: call(compiled), number=1, repeat=args.repeat))
        print(f"{name:40s} {tp:12.5f} {tc:12.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
