#!/usr/bin/env python3
"""Benchmark the compiled sampling kernels against the numpy fallback.

Run after an in-place build:

    python benchmarks/bench_kernels.py [--items 200000] [--draws 1000000]

Outputs one table row per kernel and lane, plus an end-to-end negative
sampling comparison (the lanes produce bit-identical results, so only
wall time differs).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from svoplaus import kernels
from svoplaus.extraction import Triple
from svoplaus.kernels import _fallback
from svoplaus.rng import make_rng
from svoplaus.sampling import NegativeSampler
from svoplaus.store import TripleStore

try:
    from svoplaus.kernels import _ext
except ImportError:
    _ext = None


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(items: int, draws: int) -> None:
    rng = np.random.default_rng(0)
    w = rng.random(items) + 1e-9
    u = rng.random(2 * draws)
    hay = np.unique(rng.integers(0, 10 * items, items).astype(np.uint64))
    keys = rng.integers(0, 10 * items, draws).astype(np.uint64)

    lanes = [("python", _fallback)] + ([("ext", _ext)] if _ext else [])
    rows = []
    for name, lane in lanes:
        t_build = timeit(lambda: lane.build_alias_arrays(w))
        prob, alias = lane.build_alias_arrays(w)
        t_draw = timeit(lambda: lane.alias_draw(prob, alias, u))
        t_member = timeit(lambda: lane.membership(keys, hay))
        rows.append((name, t_build, t_draw, t_member))

    print(f"\nkernels ({items} items, {draws} draws):")
    print(f"{'lane':8} {'build (s)':>12} {'draw (s)':>12} {'membership (s)':>15}")
    for name, t_build, t_draw, t_member in rows:
        print(f"{name:8} {t_build:12.4f} {t_draw:12.4f} {t_member:15.4f}")
    if len(rows) == 2:
        print(
            "speedup: build {:.1f}x, draw {:.1f}x, membership {:.1f}x".format(
                rows[0][1] / rows[1][1], rows[0][2] / rows[1][2], rows[0][3] / rows[1][3]
            )
        )


def bench_end_to_end(n_triples: int, draws: int) -> None:
    rng = np.random.default_rng(1)
    letters = "abcdefghijklmnopqrstuvwxyz"
    lemmas = [
        "".join(letters[(i // 26**p) % 26] for p in range(4)) for i in range(1000)
    ]
    counts = {}
    while len(counts) < n_triples:
        s, v, o = rng.integers(0, 1000, 3)
        counts[Triple(lemmas[s], lemmas[v], lemmas[o])] = int(rng.integers(1, 50))
    store = TripleStore.from_counts(counts)

    lanes = [("python", _fallback)] + ([("ext", _ext)] if _ext else [])
    originals = (kernels.build_alias_arrays, kernels.alias_draw, kernels.membership)
    results = {}
    print(f"\nend-to-end negative sampling ({n_triples} attested, {draws} draws):")
    try:
        for name, lane in lanes:
            kernels.build_alias_arrays = lane.build_alias_arrays
            kernels.alias_draw = lane.alias_draw
            kernels.membership = lane.membership
            sampler = NegativeSampler(store, collision_cap=100)
            t = timeit(lambda: sampler.sample(draws, make_rng(7)), repeats=2)
            triples, flags = sampler.sample(draws, make_rng(7))
            results[name] = triples
            print(f"{name:8} {t:10.4f} s ({draws / t / 1e6:.2f} M draws/s), flagged {int(flags.sum())}")
    finally:
        kernels.build_alias_arrays, kernels.alias_draw, kernels.membership = originals
    if len(results) == 2:
        assert results["python"] == results["ext"], "lanes diverged"
        print("lanes produce identical samples: yes")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--items", type=int, default=200_000)
    parser.add_argument("--draws", type=int, default=1_000_000)
    parser.add_argument("--triples", type=int, default=100_000)
    args = parser.parse_args()

    print(f"active lane at import: {kernels.IMPL}")
    if _ext is None:
        print("compiled extension not built; benchmarking the fallback only")
    bench_kernels(args.items, args.draws)
    bench_end_to_end(args.triples, args.draws // 10)


if __name__ == "__main__":
    main()
