"""Finite versions: functional graphs, bounded multimaps, and the doubling map.

A fixed-point-free self-map of a finite set can always be 3-colored so that
no point shares a color with its image.  With up to k images per point,
2k + 1 colors suffice.  Without a bound on the number of images this fails:
n -> {n+1, ..., 2n} needs more and more colors as the set grows.

Run:  python3 demos/04_discrete.py
"""

import time

import numpy as np

from fpf_chroma.discrete import (FiniteMultiMap, conflict_edges, discrete_color_multi,
                                 discrete_color_single, doubling_min_colors)

for n in (6, 5):
    col = discrete_color_single({i: (i + 1) % n for i in range(n)})
    print(f"{n}-cycle: colors {[col[i] for i in range(n)]}")

rng = np.random.default_rng(1)
for k in (1, 2, 3, 5):
    n = 10_000
    deg = rng.integers(1, k + 1, n)
    owner = np.repeat(np.arange(n), deg)
    g = FiniteMultiMap(n, np.concatenate([[0], np.cumsum(deg)]), (owner + rng.integers(1, n, len(owner))) % n)
    t = time.perf_counter()
    colors = discrete_color_multi(g)
    src, dst = conflict_edges(g)
    print(f"k = {k}: {colors.max() + 1} colors (bound {2 * k + 1}), proper = {bool(np.all(colors[src] != colors[dst]))}, "
          f"{1e3 * (time.perf_counter() - t):.1f} ms")

print("doubling map, minimum colors on {1..N}:")
for N in (2, 4, 8, 12, 16, 20):
    print(f"  N = {N:2d}: {doubling_min_colors(N)}")
