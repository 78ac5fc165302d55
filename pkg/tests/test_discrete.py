import itertools

import numpy as np
import pytest

from fpf_chroma.discrete import (DOUBLING_CAP, FiniteMultiMap, LoopError, conflict_edges,
                                 discrete_color_multi, discrete_color_single, doubling_map,
                                 doubling_min_colors, exact_chromatic_number, is_proper)


def brute_chromatic(n, edges):
    """Smallest c such that some assignment in range(c)^n is proper (exhaustive)."""
    for c in range(1, n + 1):
        for assign in itertools.product(range(c), repeat=n):
            if all(assign[a] != assign[b] for a, b in edges):
                return c
    return 0


def backtrack_colorable(n, adj, c):
    """Independent oracle: plain backtracking in vertex order 0..n-1."""
    colors = [-1] * n

    def go(v):
        if v == n:
            return True
        for col in range(c):
            if all(colors[w] != col for w in adj[v] if w < v):
                colors[v] = col
                if go(v + 1):
                    return True
        colors[v] = -1
        return False

    return go(0)


def doubling_oracle(N):
    adj = [set() for _ in range(N)]
    for a, img in doubling_map(N).items():
        for b in img:
            adj[a - 1].add(b - 1)
            adj[b - 1].add(a - 1)
    c = 1
    while not backtrack_colorable(N, adj, c):
        c += 1
    return c


def doubling_certificate(N):
    """Independent exact value for even N: a clique gives the lower bound and a
    first-fit coloring (descending order) the matching upper bound."""
    adj = {v: set() for v in range(1, N + 1)}
    for a, img in doubling_map(N).items():
        for b in img:
            adj[a].add(b)
            adj[b].add(a)
    clique = range(N // 2, N + 1)  # a < b <= N <= 2a, so b in f(a)
    assert all(b in adj[a] for a in clique for b in clique if a < b)
    col = {}
    for v in range(N, 0, -1):
        used = {col[w] for w in adj[v] if w in col}
        col[v] = min(c for c in range(N) if c not in used)
    upper = len(set(col.values()))
    assert upper == len(clique), "bounds do not meet"
    return upper


# values frozen from the oracles above (backtracking for N <= 10, clique +
# first-fit certificate for even N)
DOUBLING_VALUES = {2: 2, 3: 2, 4: 3, 5: 3, 6: 4, 8: 5, 10: 6, 12: 7, 16: 9, 20: 11}


def test_doubling_oracle_agrees_with_frozen_values():
    for N in (2, 3, 4, 5, 6, 8, 10):
        assert doubling_oracle(N) == DOUBLING_VALUES[N]
    for N in (2, 4, 6, 8, 10, 12, 16, 20):
        assert doubling_certificate(N) == DOUBLING_VALUES[N]


@pytest.mark.parametrize("N", sorted(DOUBLING_VALUES))
def test_doubling_min_colors(N):
    assert doubling_min_colors(N) == DOUBLING_VALUES[N]


def test_doubling_growth_and_guards():
    vals = [doubling_min_colors(N) for N in range(2, 21)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert doubling_min_colors(20) > doubling_min_colors(4)
    with pytest.raises(ValueError):
        doubling_min_colors(1)
    with pytest.raises(ValueError):
        doubling_min_colors(DOUBLING_CAP + 1)


def test_exact_chromatic_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n = int(rng.integers(1, 8))
        edges = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.5]
        assert exact_chromatic_number(n, edges) == brute_chromatic(n, edges)


def test_multi_path():
    g = FiniteMultiMap.from_images({i: [i + 1] for i in range(9)} | {9: [8]})
    colors = discrete_color_multi(g)
    assert len(set(colors)) == 2 and is_proper(colors, *conflict_edges(g))


def test_multi_z5_is_complete():
    g = FiniteMultiMap.from_images({i: [(i + 1) % 5, (i + 2) % 5] for i in range(5)})
    colors = discrete_color_multi(g)
    assert is_proper(colors, *conflict_edges(g)) and len(set(colors)) <= 5
    edges = list(zip(*conflict_edges(g)))
    assert brute_chromatic(5, edges) == 5
    assert len(set(colors)) == 5


def test_multi_errors():
    with pytest.raises(LoopError) as exc:
        discrete_color_multi(FiniteMultiMap.from_images({0: [0]}))
    assert exc.value.vertex == 0
    with pytest.raises(ValueError):
        discrete_color_multi(FiniteMultiMap.from_images({0: [1]}))  # vertex 1 has empty image
    with pytest.raises(ValueError):
        FiniteMultiMap(2, [0, 1, 2], [1, 5])


def random_multimap(rng, n, k):
    deg = rng.integers(1, k + 1, n)
    owner = np.repeat(np.arange(n), deg)
    img = (owner + rng.integers(1, n, len(owner))) % n
    return FiniteMultiMap(n, np.concatenate([[0], np.cumsum(deg)]), img)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_multi_random_bound(k):
    rng = np.random.default_rng(k)
    for _ in range(20):
        g = random_multimap(rng, 500, k)
        colors = discrete_color_multi(g)
        assert is_proper(colors, *conflict_edges(g)) and colors.max() + 1 <= 2 * k + 1


def test_single_cycles():
    c6 = discrete_color_single({i: (i + 1) % 6 for i in range(6)})
    assert len(set(c6.values())) == 2
    c5 = discrete_color_single({i: (i + 1) % 5 for i in range(5)})
    assert len(set(c5.values())) == 3
    for f in ({i: (i + 1) % 6 for i in range(6)}, {i: (i + 1) % 5 for i in range(5)}):
        col = discrete_color_single(f)
        assert all(col[v] != col[w] for v, w in f.items())
    with pytest.raises(LoopError):
        discrete_color_single({0: 0, 1: 0})


def test_single_random_functional_graphs():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 60))
        f = {v: int((v + rng.integers(1, n)) % n) for v in range(n)}
        col = discrete_color_single(f)
        assert set(col) == set(range(n))
        assert all(col[v] != col[f[v]] for v in f) and len(set(col.values())) <= 3


def test_single_with_sinks():
    col = discrete_color_single({0: 1, 1: 2, 3: 2})
    assert col[0] != col[1] != col[2] and col[3] != col[2]
