import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from diskmatch.graph import IntersectionGraph, Matching
from diskmatch.matching import (AugmentingPath, apply_paths, approx_matching_eps,
                                exact_maximum_matching, find_disjoint_augmenting_paths,
                                hopcroft_karp, hopcroft_karp_phase, length_schedule,
                                matching_size_bitmask, maximum_matching_size,
                                short_augmenting_path_exists)
from diskmatch.graph import greedy_on_graph

from oracles import (augmenting_path_within, exhaustive_matching_size, nx_matching_size,
                     random_graph, rng_for)


def graph(n, edges):
    return IntersectionGraph.from_edges(n, edges)


def cycle(n):
    return [(i, (i + 1) % n) for i in range(n)]


def assert_matching_in(g, m):
    seen = set()
    for a, b in m:
        assert g.has_edge(a, b)
        assert a not in seen and b not in seen
        seen.update((a, b))


@st.composite
def small_graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return n, chosen


class TestExact:
    @pytest.mark.parametrize("n, edges, k", [
        (3, cycle(3), 1),
        (9, cycle(9), 4),
        (0, [], 0),
        (1, [], 0),
        (6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)], 3),
    ])
    def test_examples(self, n, edges, k):
        m = exact_maximum_matching(graph(n, edges))
        assert len(m) == k
        assert_matching_in(graph(n, edges), m)

    def test_nested_blossoms(self):
        # two triangles glued to a five-cycle, stem on the outside
        edges = cycle(5) + [(0, 5), (5, 6), (6, 0), (2, 7), (7, 8), (8, 2), (9, 5)]
        g = graph(10, edges)
        assert len(exact_maximum_matching(g)) == exhaustive_matching_size(10, edges) == 5

    @settings(max_examples=150, deadline=None)
    @given(small_graphs())
    def test_property_vs_exhaustive(self, ng):
        n, edges = ng
        g = graph(n, edges)
        m = exact_maximum_matching(g)
        assert_matching_in(g, m)
        assert len(m) == exhaustive_matching_size(n, edges)
        assert not augmenting_path_within(n, edges, m, n + 1)

    @pytest.mark.parametrize("seed", range(25))
    def test_gnp40_vs_networkx(self, seed):
        rng = rng_for(20, seed)
        edges = random_graph(40, 0.2 if seed % 2 else 0.06, rng)
        assert maximum_matching_size(graph(40, edges)) == nx_matching_size(40, edges)

    def test_bitmask_checker(self):
        edges = cycle(7) + [(0, 3)]
        assert matching_size_bitmask(graph(7, edges)) == 3 == exhaustive_matching_size(7, edges)
        with pytest.raises(ValueError):
            matching_size_bitmask(graph(21, []))


class TestAugmentingPaths:
    def test_single_edge(self):
        g = graph(2, [(0, 1)])
        paths = find_disjoint_augmenting_paths(g, Matching(), 1)
        assert [p.vertices for p in paths] == [(0, 1)]
        assert len(paths[0]) == 1

    def test_perfect_matching(self):
        g = graph(4, cycle(4))
        assert find_disjoint_augmenting_paths(g, Matching([(0, 1), (2, 3)]), 5) == []

    def test_length_bound(self):
        # path 0-1-2-3 with (1,2) matched: only augmenting path has 3 edges
        g = graph(4, [(0, 1), (1, 2), (2, 3)])
        m = Matching([(1, 2)])
        assert find_disjoint_augmenting_paths(g, m, 1) == []
        paths = find_disjoint_augmenting_paths(g, m, 3)
        assert [p.vertices for p in paths] in ([(0, 1, 2, 3)], [(3, 2, 1, 0)])

    def test_through_blossom(self):
        # free 0 - stem to a triangle whose far side reaches a free vertex
        edges = [(0, 1), (1, 2), (2, 3), (3, 1), (3, 4), (4, 5)]
        g = graph(6, edges)
        m = Matching([(1, 2), (3, 4)])
        paths = find_disjoint_augmenting_paths(g, m, 5)
        assert len(paths) == 1
        assert paths[0].is_valid(g, m.mates(6))
        assert len(apply_paths(m, paths, 6)) == 3

    def test_path_validation(self):
        with pytest.raises(ValueError):
            AugmentingPath((0, 1, 2))
        with pytest.raises(ValueError):
            AugmentingPath((0, 1, 0, 1))
        g = graph(4, [(0, 1), (1, 2), (2, 3)])
        assert not AugmentingPath((0, 1, 2, 3)).is_valid(g, [-1, -1, -1, -1])

    def test_rejects_bad_maxlen(self):
        with pytest.raises(ValueError):
            find_disjoint_augmenting_paths(graph(2, [(0, 1)]), Matching(), 0)

    @pytest.mark.parametrize("maxlen", [1, 3, 5, 7])
    @pytest.mark.parametrize("seed", range(30))
    def test_random_maximal_set(self, seed, maxlen):
        rng = rng_for(21, seed, maxlen)
        n = int(rng.integers(6, 31))
        edges = random_graph(n, float(rng.uniform(0.05, 0.3)), rng)
        g = graph(n, edges)
        m = Matching.from_mates(greedy_on_graph(g, rng.permutation(n).tolist()))
        paths = find_disjoint_augmenting_paths(g, m, maxlen)
        used = set()
        for p in paths:
            assert len(p) <= maxlen
            assert p.is_valid(g, m.mates(n))
            assert used.isdisjoint(p.vertices)
            used.update(p.vertices)
        # maximality: nothing short survives once the used vertices are removed
        keep = [v for v in range(n) if v not in used]
        sub_edges = [(a, b) for a, b in edges if a not in used and b not in used]
        local = {v: k for k, v in enumerate(keep)}
        sub_m = [(local[a], local[b]) for a, b in m if a not in used]
        assert not augmenting_path_within(len(keep), [(local[a], local[b]) for a, b in sub_edges],
                                          sub_m, maxlen)

    @pytest.mark.parametrize("seed", range(20))
    def test_builtin_checker_agrees(self, seed):
        rng = rng_for(22, seed)
        n = 14
        edges = random_graph(n, 0.25, rng)
        g = graph(n, edges)
        m = Matching.from_mates(greedy_on_graph(g))
        for k in (1, 3, 5):
            assert short_augmenting_path_exists(g, m.mates(n), k) == augmenting_path_within(n, edges, m, k)


class TestApprox:
    def test_single_edge(self):
        assert approx_matching_eps(graph(2, [(0, 1)]), 0.5) == Matching([(0, 1)])

    def test_path_p5(self):
        assert len(approx_matching_eps(graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), 0.1)) == 2

    @pytest.mark.parametrize("eps", [0, 1, -0.5, 1.5])
    def test_bad_eps(self, eps):
        with pytest.raises(ValueError):
            approx_matching_eps(graph(2, [(0, 1)]), eps)

    @pytest.mark.parametrize("eps, sched", [
        (0.5, [1, 3, 7, 9]),
        (0.2, [1, 3, 7, 15, 21]),
        (0.1, [1, 3, 7, 15, 31, 41]),
    ])
    def test_schedule(self, eps, sched):
        assert length_schedule(eps) == sched
        assert sched[-1] >= 4 / eps

    @pytest.mark.parametrize("eps", [0.5, 0.2, 0.1])
    @pytest.mark.parametrize("seed", range(25))
    def test_random_sparse(self, seed, eps):
        rng = rng_for(23, seed)
        n = int(rng.integers(20, 121))
        edges = random_graph(n, float(rng.uniform(1.0, 4.0)) / n, rng)
        g = graph(n, edges)
        m = approx_matching_eps(g, eps)
        assert_matching_in(g, m)
        k = nx_matching_size(n, edges)
        assert len(m) >= math.ceil((1 - eps) * k)
        assert not augmenting_path_within(n, edges, m, min(int(4 / eps), 9))

    def test_repairs_bad_greedy_start(self):
        # k copies of a 4-path a-b-c-d labelled so greedy grabs every middle edge
        k = 20
        edges = []
        for i in range(k):
            a, b, c, d = 2 * k + 2 * i, 2 * i, 2 * i + 1, 2 * k + 2 * i + 1
            edges += [(a, b), (b, c), (c, d)]
        g = graph(4 * k, edges)
        assert sum(1 for v, u in enumerate(greedy_on_graph(g)) if u > v) == k
        assert len(approx_matching_eps(g, 0.5)) == 2 * k


class TestHopcroftKarp:
    def test_k11(self):
        g = graph(2, [(0, 1)])
        assert len(hopcroft_karp_phase(g, [0, 1], Matching())) == 1

    def test_k33_one_phase(self):
        edges = [(a, b) for a in range(3) for b in range(3, 6)]
        g = graph(6, edges)
        assert len(hopcroft_karp_phase(g, [0, 0, 0, 1, 1, 1], Matching())) == 3

    def test_rejects_non_bipartite_edge(self):
        with pytest.raises(ValueError):
            hopcroft_karp_phase(graph(3, [(0, 1)]), [0, 0, 1], Matching())

    def test_phase_grows_shortest_first(self):
        # path 0-1-2-3 with (1,2) matched: one phase finds the length-3 path
        g = graph(4, [(0, 1), (1, 2), (2, 3)])
        m = hopcroft_karp_phase(g, [0, 1, 0, 1], Matching([(1, 2)]))
        assert m == Matching([(0, 1), (2, 3)])

    @pytest.mark.parametrize("eps", [0.5, 0.25, 0.1])
    @pytest.mark.parametrize("seed", range(15))
    def test_phases_bound(self, seed, eps):
        rng = rng_for(24, seed)
        a, b = int(rng.integers(5, 40)), int(rng.integers(5, 40))
        p = float(rng.uniform(0.03, 0.2))
        edges = [(i, a + j) for i in range(a) for j in range(b) if rng.random() < p]
        side = [0] * a + [1] * b
        g = graph(a + b, edges)
        k = nx_matching_size(a + b, edges)
        m = hopcroft_karp(g, side, phases=math.ceil(1 / eps))
        assert_matching_in(g, m)
        assert len(m) >= (1 - eps) * k
        assert len(hopcroft_karp(g, side)) == k
