import itertools
import math

import numpy as np
import pytest

from qlab.emulator import SearchBackend, ideal_backend
from qlab.graphs import (Graph, check_path, dag_game_solve, dag_longest_path,
                         hamiltonian_path, parse_edge_list, parse_matrix,
                         perm_unrank, qbfs, qdfs, qtopsort, tsp)
from qlab.simulator import as_generator


def random_graph(n, p, rng, directed=False, representation="list"):
    g = Graph(n, directed=directed, representation=representation)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                if directed:
                    g.add_edge(*((u, v) if rng.random() < 0.5 else (v, u)))
                else:
                    g.add_edge(u, v)
    return g.finalize()


def random_dag(n, p, rng):
    g = Graph(n, directed=True)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v)       # edges only go up: acyclic
    return g.finalize()


def dfs_classical(g, start):
    order = []
    seen = set()

    def go(v):
        seen.add(v)
        order.append(v)
        for w in g.neighbors(v):
            if w not in seen:
                go(w)

    go(start)
    return order


def bfs_classical(g, start):
    dist = [math.inf] * g.n
    dist[start] = 0
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in g.neighbors(v):
                if dist[w] == math.inf:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def test_parsers():
    g = parse_edge_list("4\n0 1\n2 3\n")
    assert g.n == 4 and g.has_edge(1, 0)
    m = parse_matrix("0 1\n1 0\n")
    assert m.n == 2 and m.has_edge(0, 1)
    assert m.representation == "matrix"


def test_dfs_bfs_match_classical_ideal():
    rng = as_generator(0)
    for trial in range(60):
        n = int(rng.integers(2, 8))
        rep = "matrix" if trial % 3 == 0 else "list"
        g = random_graph(n, 0.5, rng, representation=rep)
        order, _ = qdfs(g, 0, ideal_backend(0))
        assert order == dfs_classical(g, 0)
        dist, _ = qbfs(g, 0, ideal_backend(0))
        assert dist == bfs_classical(g, 0)


def test_topsort_valid_on_random_dags():
    rng = as_generator(1)
    for _ in range(40):
        n = int(rng.integers(2, 8))
        g = random_dag(n, 0.5, rng)
        order, _ = qtopsort(g, ideal_backend(0))
        pos = {v: i for i, v in enumerate(order)}
        assert sorted(order) == list(range(n))
        for u in range(n):
            for v in g.neighbors(u):
                assert pos[u] < pos[v]


def test_dag_game_matches_recursion():
    def classical(g):
        win = [None] * g.n

        def solve(v):
            if win[v] is None:
                win[v] = any(not solve(w) for w in g.neighbors(v))
            return win[v]

        return [solve(v) for v in range(g.n)]

    rng = as_generator(2)
    for _ in range(40):
        g = random_dag(int(rng.integers(2, 8)), 0.5, rng)
        win, _ = dag_game_solve(g, ideal_backend(0))
        assert [bool(w) for w in win] == classical(g)


def test_dag_longest_path_matches_dp():
    def classical(g, src):
        memo = {}

        def best(v):
            if v not in memo:
                memo[v] = max((1 + best(w) for w in g.neighbors(v)), default=0)
            return memo[v]

        return best(src)

    rng = as_generator(3)
    for _ in range(40):
        g = random_dag(int(rng.integers(2, 8)), 0.5, rng)
        got, _ = dag_longest_path(g, 0, ideal_backend(0))
        assert got == classical(g, 0)


def ham_brute(g):
    for perm in itertools.permutations(range(g.n)):
        if all(g.has_edge(perm[i], perm[i + 1]) for i in range(g.n - 1)):
            return True
    return False


@pytest.mark.parametrize("variant", ["brute", "dp", "quantum-bf", "quantum-dp"])
def test_hamiltonian_path_small(variant):
    rng = as_generator(4)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        g = random_graph(n, 0.5, rng)
        path, _ = hamiltonian_path(g, variant, ideal_backend(0))
        assert (path is not None) == ham_brute(g)
        if path is not None:
            assert sorted(path) == list(range(n))
            assert all(g.has_edge(path[i], path[i + 1]) for i in range(n - 1))


def test_hamiltonian_guards():
    g = random_graph(12, 0.5, as_generator(0))
    with pytest.raises(ValueError):
        hamiltonian_path(g, "brute")
    with pytest.raises(ValueError):
        hamiltonian_path(random_graph(15, 0.5, as_generator(0)), "dp")


def tsp_brute(g):
    best = math.inf
    for perm in itertools.permutations(range(g.n)):
        if all(g.has_edge(perm[i], perm[i + 1]) for i in range(g.n - 1)):
            best = min(best, sum(g.weight(perm[i], perm[i + 1])
                                 for i in range(g.n - 1)))
    return best


@pytest.mark.parametrize("variant", ["dp", "quantum-dp"])
def test_tsp_matches_brute(variant):
    rng = as_generator(5)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        g = Graph(n, weighted=True)
        for u in range(n):
            for v in range(u + 1, n):
                if rng.random() < 0.6:
                    g.add_edge(u, v, float(rng.integers(1, 10)))
        g.finalize()
        (weight, path), _ = tsp(g, variant, ideal_backend(0))
        assert weight == pytest.approx(tsp_brute(g))
        if path is not None:
            assert check_path(g, path)


def test_quantum_dp_stochastic_two_thirds():
    rng = as_generator(6)
    hits = 0
    for seed in range(30):
        g = random_graph(6, 0.6, rng)
        want = ham_brute(g)
        path, _ = hamiltonian_path(g, "quantum-dp",
                                   SearchBackend("analytic", seed))
        hits += (path is not None) == want
    assert hits >= 20


def test_perm_unrank_roundtrip():
    perms = [perm_unrank(i, 4) for i in range(24)]
    assert perms == sorted(perms)
    assert perms == [list(p) for p in itertools.permutations(range(4))]
