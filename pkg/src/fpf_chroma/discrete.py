"""Colorings of fixed-point-free maps on finite sets.

* ``discrete_color_single``: a self-map v -> f(v) without fixed points is
  3-colorable so that no vertex shares a color with its image.
* ``discrete_color_multi``: a set-valued map with |f(v)| <= k and v ∉ f(v) is
  (2k+1)-colorable so that no vertex shares a color with anything in its image.
* ``doubling_min_colors``: exact color counts for n -> {n+1, ..., 2n} on
  {1..N}, which grow without bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numba
import numpy as np

__all__ = [
    "LoopError", "FiniteMultiMap", "discrete_color_multi", "discrete_color_single",
    "doubling_min_colors", "doubling_map", "conflict_edges", "is_proper",
    "exact_chromatic_number", "DOUBLING_CAP",
]

DOUBLING_CAP = 20


class LoopError(ValueError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} lies in its own image (fixed point)")
        self.vertex = vertex


@dataclass
class FiniteMultiMap:
    """Set-valued map on vertices 0..n-1, stored as CSR arrays.

    ``images[indptr[v]:indptr[v+1]]`` is f(v).
    """

    n: int
    indptr: np.ndarray
    images: np.ndarray

    def __post_init__(self):
        self.indptr = np.asarray(self.indptr, dtype=np.int64)
        self.images = np.asarray(self.images, dtype=np.int64)
        if len(self.indptr) != self.n + 1:
            raise ValueError("indptr must have n + 1 entries")
        if len(self.images) and (self.images.min() < 0 or self.images.max() >= self.n):
            raise ValueError("image vertex out of range")

    @classmethod
    def from_images(cls, images: Mapping[int, object]) -> "FiniteMultiMap":
        """Build from ``{v: iterable of image vertices}`` on arbitrary integer labels.

        Vertices are relabelled 0..n-1 in sorted order; ``labels`` maps back.
        """
        verts = set(images)
        for img in images.values():
            verts.update(img)
        labels = sorted(verts)
        index = {v: i for i, v in enumerate(labels)}
        indptr = [0]
        flat = []
        for v in labels:
            img = sorted(set(images.get(v, ())))
            flat += [index[w] for w in img]
            indptr.append(len(flat))
        out = cls(len(labels), np.array(indptr), np.array(flat, dtype=np.int64))
        out.labels = labels
        return out

    @property
    def k(self) -> int:
        return int(np.diff(self.indptr).max()) if self.n else 0

    def image(self, v: int) -> np.ndarray:
        return self.images[self.indptr[v]:self.indptr[v + 1]]

    def loops(self) -> np.ndarray:
        owner = np.repeat(np.arange(self.n), np.diff(self.indptr))
        return np.unique(owner[owner == self.images])

    @property
    def fixed_point_free(self) -> bool:
        return len(self.loops()) == 0


def conflict_edges(g: FiniteMultiMap) -> tuple[np.ndarray, np.ndarray]:
    """(source, target) arrays of the directed edges v -> w, w ∈ f(v)."""
    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    return src, g.images


def is_proper(colors: np.ndarray, src: np.ndarray, dst: np.ndarray) -> bool:
    return bool(np.all(colors[src] != colors[dst]))


def _symmetric_csr(n: int, src: np.ndarray, dst: np.ndarray):
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    order = np.lexsort((b, a))
    a, b = a[order], b[order]
    keep = np.ones(len(a), dtype=bool)
    keep[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    a, b = a[keep], b[keep]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, a + 1, 1)
    return np.cumsum(indptr), b


@numba.njit(cache=True)
def _smallest_last(n, indptr, adj):
    """Degeneracy (smallest-last) elimination order via bucket queues."""
    deg = np.empty(n, np.int64)
    maxdeg = 0
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
        if deg[v] > maxdeg:
            maxdeg = deg[v]
    # doubly linked buckets
    head = -np.ones(maxdeg + 1, np.int64)
    nxt = -np.ones(n, np.int64)
    prv = -np.ones(n, np.int64)
    for v in range(n):
        d = deg[v]
        nxt[v] = head[d]
        if head[d] >= 0:
            prv[head[d]] = v
        head[d] = v
    removed = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    low = 0
    for pos in range(n):
        while head[low] < 0:
            low += 1
        v = head[low]
        head[low] = nxt[v]
        if nxt[v] >= 0:
            prv[nxt[v]] = -1
        removed[v] = True
        order[pos] = v
        for e in range(indptr[v], indptr[v + 1]):
            w = adj[e]
            if removed[w]:
                continue
            d = deg[w]
            # unlink w from bucket d
            if prv[w] >= 0:
                nxt[prv[w]] = nxt[w]
            else:
                head[d] = nxt[w]
            if nxt[w] >= 0:
                prv[nxt[w]] = prv[w]
            d -= 1
            deg[w] = d
            prv[w] = -1
            nxt[w] = head[d]
            if head[d] >= 0:
                prv[head[d]] = w
            head[d] = w
            if d < low:
                low = d
    return order


@numba.njit(cache=True)
def _greedy_in_order(n, indptr, adj, order):
    colors = -np.ones(n, np.int64)
    mark = -np.ones(n + 1, np.int64)
    for pos in range(n - 1, -1, -1):
        v = order[pos]
        for e in range(indptr[v], indptr[v + 1]):
            c = colors[adj[e]]
            if c >= 0:
                mark[c] = v
        c = 0
        while mark[c] == v:
            c += 1
        colors[v] = c
    return colors


def discrete_color_multi(g: FiniteMultiMap) -> np.ndarray:
    """Color vertices so that no v shares a color with any w ∈ f(v).

    Greedy in reverse smallest-last order on the symmetrized conflict graph;
    that graph is 2k-degenerate, so at most 2k + 1 colors are used.
    """
    loops = g.loops()
    if len(loops):
        raise LoopError(getattr(g, "labels", range(g.n))[int(loops[0])])
    if g.n == 0:
        return np.zeros(0, dtype=np.int64)
    if np.any(np.diff(g.indptr) == 0):
        v = int(np.nonzero(np.diff(g.indptr) == 0)[0][0])
        raise ValueError(f"vertex {getattr(g, 'labels', range(g.n))[v]} has an empty image")
    src, dst = conflict_edges(g)
    indptr, adj = _symmetric_csr(g.n, src, dst)
    order = _smallest_last(g.n, indptr, adj)
    return _greedy_in_order(g.n, indptr, adj, order)


def discrete_color_single(f) -> dict:
    """3-color a fixed-point-free self-map so that color(v) != color(f(v)).

    ``f`` is a mapping v -> f(v) (vertices without an entry are sinks).
    Each cycle is colored alternately (a third color closes odd cycles) and
    tree vertices take a color different from their image.
    """
    f = dict(f)
    for v, w in f.items():
        if v == w:
            raise LoopError(v)
    verts = set(f) | set(f.values())
    color: dict = {}
    state: dict = {}  # 1 = on current walk, 2 = done
    for start in sorted(verts, key=repr):
        if start in state:
            continue
        walk = []
        v = start
        while v not in state and v in f:
            state[v] = 1
            walk.append(v)
            v = f[v]
        if v not in f and v not in state:
            state[v] = 2
            color[v] = 0
        elif state.get(v) == 1:
            # new cycle starting at v
            cyc = walk[walk.index(v):]
            for i, u in enumerate(cyc):
                color[u] = i % 2
            if len(cyc) % 2:
                color[cyc[-1]] = 2
            for u in cyc:
                state[u] = 2
            walk = walk[:walk.index(v)]
        # tree part, colored from the cycle/sink outward
        for u in reversed(walk):
            color[u] = 1 if color[f[u]] == 0 else 0
            state[u] = 2
    return color


def doubling_map(N: int) -> dict:
    """n -> {n+1, ..., 2n} restricted to {1..N} (n = N has an empty image)."""
    return {n: set(range(n + 1, min(2 * n, N) + 1)) for n in range(1, N + 1)}


def _adjacency_bits(n: int, edges) -> list[int]:
    adj = [0] * n
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return adj


def _max_clique(adj: list[int]) -> int:
    best = 0

    def grow(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        while cand:
            v = cand.bit_length() - 1
            grow(cand & adj[v], size + 1)
            cand &= ~(1 << v)
            if size + bin(cand).count("1") <= best:
                return

    grow((1 << len(adj)) - 1, 0)
    return best


def exact_chromatic_number(n: int, edges) -> int:
    """Exact chromatic number by DSATUR branch and bound with a clique lower bound."""
    if n == 0:
        return 0
    adj = _adjacency_bits(n, edges)
    lower = max(1, _max_clique(adj))
    best = n + 1
    colors = [-1] * n

    def saturation(v):
        return len({colors[w] for w in range(n) if adj[v] >> w & 1 and colors[w] >= 0})

    def search(colored: int, used: int):
        nonlocal best
        if used >= best:
            return
        if colored == n:
            best = used
            return
        v = max((u for u in range(n) if colors[u] < 0),
                key=lambda u: (saturation(u), bin(adj[u]).count("1"), -u))
        forbidden = {colors[w] for w in range(n) if adj[v] >> w & 1}
        for c in range(min(used + 1, best - 1)):
            if c in forbidden:
                continue
            colors[v] = c
            search(colored + 1, max(used, c + 1))
            colors[v] = -1
            if best == lower:
                return

    search(0, 0)
    return best


def doubling_min_colors(N: int, cap: int = DOUBLING_CAP) -> int:
    """Minimum number of colors for the doubling map restricted to {1..N}."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > cap:
        raise ValueError(f"N = {N} exceeds the exact-search cap {cap}")
    edges = [(a - 1, b - 1) for a, img in doubling_map(N).items() for b in img]
    return exact_chromatic_number(N, edges)
