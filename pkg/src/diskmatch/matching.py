"""Matching on explicit graphs: blossom search, bounded augmenting paths, HK.

Everything here works on mate arrays (``mate[v] == -1`` when ``v`` is free)
and :class:`IntersectionGraph` adjacency.  The public functions wrap results
in :class:`Matching`.

The workhorse is :func:`_forest_phase`, an Edmonds alternating-forest search
grown from every free vertex at once.  Whenever an edge joins even vertices
of two different trees, the path through both roots is augmented right away
and both trees are retired for the rest of the phase, so one phase yields a
set of vertex-disjoint augmenting paths.  A length bound prunes the forest:
an even vertex whose own alternating path to its root already uses
``maxlen`` edges is never scanned.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import IntersectionGraph, Matching, greedy_on_graph


@dataclass(frozen=True)
class AugmentingPath:
    """An alternating path between two free vertices (odd number of edges)."""

    vertices: tuple[int, ...]

    def __post_init__(self):
        if len(self.vertices) < 2 or len(self.vertices) % 2:
            raise ValueError("augmenting path needs an even number of vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("augmenting path repeats a vertex")

    def __len__(self) -> int:
        return len(self.vertices) - 1

    def is_valid(self, g: IntersectionGraph, mate: Sequence[int]) -> bool:
        vs = self.vertices
        if mate[vs[0]] != -1 or mate[vs[-1]] != -1:
            return False
        for k in range(len(vs) - 1):
            a, b = vs[k], vs[k + 1]
            if not g.has_edge(a, b):
                return False
            if (k % 2 == 1) != (mate[a] == b):
                return False
        return True


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def _augment(mate: list[int], path: Sequence[int]) -> None:
    for k in range(0, len(path), 2):
        a, b = path[k], path[k + 1]
        mate[a] = b
        mate[b] = a


def _forest_phase(adj: Sequence[Sequence[int]], mate: list[int], maxlen: int,
                  strict: bool, blocked: Sequence[bool] | None = None
                  ) -> tuple[list[list[int]], bool]:
    """One multi-root Edmonds search; augments ``mate`` in place.

    Returns the augmented paths and whether the length bound pruned anything
    (when it did not, finding no path proves ``mate`` is maximum on the
    unblocked part).  In ``strict`` mode paths longer than ``maxlen`` are
    skipped instead of augmented.
    """
    n = len(adj)
    root = [-1] * n
    even = [False] * n
    parent = [-1] * n
    base = list(range(n))
    level = [0] * n
    members: dict[int, list[int]] = {}
    dead: set[int] = set()
    stamp = [0] * n
    blossom_mark = [0] * n
    clock = 0
    q: deque[int] = deque()
    for v in range(n):
        if mate[v] == -1 and not (blocked and blocked[v]):
            root[v] = v
            even[v] = True
            members[v] = [v]
            q.append(v)
    found: list[list[int]] = []
    pruned = False

    def walk(x: int) -> list[int]:
        out = [x]
        while mate[x] != -1:
            y = mate[x]
            x = parent[y]
            out.append(y)
            out.append(x)
        return out

    def lca(a: int, b: int) -> int:
        nonlocal clock
        clock += 1
        while True:
            a = base[a]
            stamp[a] = clock
            if mate[a] == -1:
                break
            a = parent[mate[a]]
        while True:
            b = base[b]
            if stamp[b] == clock:
                return b
            b = parent[mate[b]]

    def mark_path(v: int, b: int, child: int, tag: int) -> None:
        while base[v] != b:
            u = mate[v]
            blossom_mark[base[v]] = tag
            blossom_mark[base[u]] = tag
            parent[v] = child
            level[u] = level[child] + 2
            child = u
            v = parent[u]

    while q:
        v = q.popleft()
        rv = root[v]
        if rv in dead:
            continue
        if level[v] + 1 > maxlen:
            pruned = True
            continue
        for to in adj[v]:
            if rv in dead:
                break
            if blocked and blocked[to]:
                continue
            rt = root[to]
            if rt != -1 and rt in dead:
                continue
            if base[v] == base[to] or mate[v] == to:
                continue
            if even[to]:
                if rt != rv:
                    if strict and level[v] + level[to] + 1 > maxlen:
                        continue
                    path = walk(v)[::-1] + walk(to)
                    if strict and len(path) - 1 > maxlen:
                        continue
                    _augment(mate, path)
                    found.append(path)
                    dead.add(rv)
                    dead.add(rt)
                    break
                cur = lca(v, to)
                clock += 1
                tag = clock
                mark_path(v, cur, to, tag)
                mark_path(to, cur, v, tag)
                for i in members[rv]:
                    if blossom_mark[base[i]] == tag:
                        base[i] = cur
                        if not even[i]:
                            even[i] = True
                            q.append(i)
            elif rt == -1:
                # matched and unlabeled: grow the tree by two levels
                w = mate[to]
                if blocked and blocked[w]:
                    continue
                parent[to] = v
                root[to] = rv
                root[w] = rv
                level[to] = level[v] + 1
                level[w] = level[v] + 2
                even[w] = True
                members[rv].append(to)
                members[rv].append(w)
                q.append(w)
    return found, pruned


def _max_search_len(n: int) -> int:
    return n + 1


def exact_maximum_matching(g: IntersectionGraph) -> Matching:
    """Maximum-cardinality matching (blossom algorithm, greedy warm start)."""
    return Matching.from_mates(exact_mates(g))


def exact_mates(g: IntersectionGraph, mate: Sequence[int] | None = None) -> list[int]:
    mate = greedy_on_graph(g) if mate is None else list(mate)
    cap = _max_search_len(g.n)
    while True:
        found, _ = _forest_phase(g.adj, mate, cap, strict=False)
        if not found:
            return mate


def maximum_matching_size(g: IntersectionGraph) -> int:
    return sum(1 for v, u in enumerate(exact_mates(g)) if u > v)


def find_disjoint_augmenting_paths(g: IntersectionGraph, m: Matching,
                                   maxlen: int) -> list[AugmentingPath]:
    """Vertex-disjoint augmenting paths of at most ``maxlen`` edges.

    The set is inclusion-maximal: no further path of length at most
    ``maxlen`` avoids all returned vertices.  Searches repeat on the graph
    minus the vertices already used until one comes back empty.  Paths are
    reported relative to ``m`` (``m`` itself is not modified).
    """
    if maxlen < 1:
        raise ValueError(f"maxlen must be >= 1, got {maxlen}")
    mate = m.mates(g.n)
    original = list(mate)
    blocked = [False] * g.n
    paths = []
    while True:
        found, pruned = _forest_phase(g.adj, mate, maxlen, strict=True, blocked=blocked)
        if not found and pruned:
            # the pruned forest can overlook a short path through a blossom
            p = _bounded_dfs_path(g.adj, mate, maxlen, blocked)
            if p is not None:
                _augment(mate, p)
                found = [p]
        if not found:
            break
        for p in found:
            for v in p:
                blocked[v] = True
            paths.append(AugmentingPath(tuple(p)))
    for p in paths:
        assert p.is_valid(g, original)
    return paths


def _even_distance_bound(adj, mate, blocked) -> list[float]:
    """Per vertex, the fewest edges of an alternating walk to a free vertex.

    The walk starts with an unmatched edge and may repeat vertices, so the
    value is a lower bound on the remaining length of any simple augmenting
    path continuing from that vertex.
    """
    n = len(adj)
    inf = math.inf
    dist = [inf] * n
    q: deque[int] = deque()
    for t in range(n):
        if mate[t] != -1 or (blocked and blocked[t]):
            continue
        for v in adj[t]:
            if dist[v] == inf and not (blocked and blocked[v]):
                dist[v] = 1
                q.append(v)
    while q:
        w = q.popleft()
        u = mate[w]
        if u == -1:
            continue
        for v in adj[u]:
            if v != w and dist[v] == inf and mate[v] != u and not (blocked and blocked[v]):
                dist[v] = dist[w] + 2
                q.append(v)
    return dist


def _bounded_dfs_path(adj, mate, maxlen: int, blocked) -> list[int] | None:
    """Exact search for one augmenting path of at most ``maxlen`` edges.

    Depth-first enumeration of simple alternating paths, cut off with the
    walk-distance lower bound.  Worst case exponential in ``maxlen``.
    """
    n = len(adj)
    bound = _even_distance_bound(adj, mate, blocked)
    onpath = [False] * n
    path: list[int] = []

    def extend(v: int, length: int) -> bool:
        for u in adj[v]:
            if onpath[u] or mate[v] == u or (blocked and blocked[u]):
                continue
            if mate[u] == -1:
                path.append(u)
                return True
            w = mate[u]
            if onpath[w] or length + 2 + bound[w] > maxlen:
                continue
            onpath[u] = onpath[w] = True
            path.append(u)
            path.append(w)
            if extend(w, length + 2):
                return True
            path.pop()
            path.pop()
            onpath[u] = onpath[w] = False
        return False

    for s in range(n):
        if mate[s] != -1 or (blocked and blocked[s]) or bound[s] > maxlen:
            continue
        onpath[s] = True
        path.append(s)
        if extend(s, 0):
            return path
        path.pop()
        onpath[s] = False
    return None


def apply_paths(m: Matching, paths: Iterable[AugmentingPath], n: int) -> Matching:
    mate = m.mates(n)
    for p in paths:
        _augment(mate, p.vertices)
    return Matching.from_mates(mate)


def length_schedule(eps: float) -> list[int]:
    """Odd path-length bounds used by :func:`approx_matching_eps`.

    Doubling ``1, 3, 7, 15, ...`` capped by the first odd number that is at
    least ``4 / eps``.
    """
    top = math.ceil(4.0 / eps)
    if top % 2 == 0:
        top += 1
    out = []
    k = 1
    while k < top:
        out.append(k)
        k = 2 * k + 1
    out.append(top)
    return out


def approx_mates(g: IntersectionGraph, eps: float,
                 mate: Sequence[int] | None = None) -> list[int]:
    _check_eps(eps)
    mate = greedy_on_graph(g) if mate is None else list(mate)
    schedule = length_schedule(eps)
    # one last round at twice the depth: blossoms can inflate a vertex's
    # depth label past its true distance, and the slack catches those paths
    schedule.append(2 * schedule[-1] + 1)
    for k in schedule:
        while True:
            found, pruned = _forest_phase(g.adj, mate, k, strict=False)
            if not found:
                if not pruned:
                    # the search ran unbounded: the matching is maximum
                    return mate
                break
    return mate


def approx_matching_eps(g: IntersectionGraph, eps: float) -> Matching:
    """Matching with at least ``(1 - eps)`` times the maximum size.

    Greedy start, then rounds of disjoint augmenting paths under growing
    length bounds.  Once no path of at most ``4 / eps`` edges is left the
    matching is within the bound.
    """
    return Matching.from_mates(approx_mates(g, eps))


# --- bipartite ----------------------------------------------------------------

def _check_bipartite(g: IntersectionGraph, side: Sequence[int]) -> None:
    if len(side) != g.n:
        raise ValueError("need one side label per vertex")
    for v, u in g.edges():
        if side[v] == side[u]:
            raise ValueError(f"edge ({v}, {u}) joins two vertices of side {side[v]}")


def _hk_layers(adj, mate, left: Sequence[int]) -> tuple[list[int], int]:
    inf = math.inf
    dist = [inf] * len(adj)
    q = deque()
    for v in left:
        if mate[v] == -1:
            dist[v] = 0
            q.append(v)
    shortest = inf
    while q:
        v = q.popleft()
        if dist[v] >= shortest:
            continue
        for u in adj[v]:
            w = mate[u]
            if w == -1:
                if shortest == inf:
                    shortest = dist[v] + 1
            elif dist[w] == inf:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist, shortest


def _hk_phase(adj, mate: list[int], left: Sequence[int]) -> tuple[int, float]:
    """One Hopcroft-Karp phase in place; returns (augmentations, shortest length)."""
    dist, shortest = _hk_layers(adj, mate, left)
    if shortest == math.inf:
        return 0, math.inf
    it = [0] * len(adj)
    inf = math.inf
    gained = 0
    for s in left:
        if mate[s] != -1:
            continue
        # iterative DFS along the layered graph
        stack = [s]
        pairs: list[int] = []
        while stack:
            v = stack[-1]
            nbrs = adj[v]
            advanced = False
            while it[v] < len(nbrs):
                u = nbrs[it[v]]
                it[v] += 1
                w = mate[u]
                if w == -1:
                    if dist[v] + 1 == shortest:
                        pairs.append(u)
                        advanced = True
                        stack.append(-1)
                        break
                elif dist[w] == dist[v] + 1:
                    pairs.append(u)
                    stack.append(w)
                    advanced = True
                    break
            if not advanced:
                dist[v] = inf
                stack.pop()
                if pairs:
                    pairs.pop()
            elif stack[-1] == -1:
                stack.pop()
                # stack holds left vertices, pairs the right ones in order
                for a, b in zip(stack, pairs):
                    mate[a] = b
                    mate[b] = a
                for a in stack:
                    dist[a] = inf
                gained += 1
                break
    return gained, shortest


def hopcroft_karp_phase(g: IntersectionGraph, side: Sequence[int], m: Matching) -> Matching:
    """Augment ``m`` along a maximal set of disjoint shortest augmenting paths.

    ``side[v]`` is 0 or 1; every edge must join the two sides.
    """
    _check_bipartite(g, side)
    mate = m.mates(g.n)
    left = [v for v in range(g.n) if side[v] == 0]
    _hk_phase(g.adj, mate, left)
    return Matching.from_mates(mate)


def hopcroft_karp(g: IntersectionGraph, side: Sequence[int], phases: int | None = None) -> Matching:
    """Run HK phases (all of them when ``phases`` is None)."""
    _check_bipartite(g, side)
    mate = [-1] * g.n
    left = [v for v in range(g.n) if side[v] == 0]
    done = 0
    while phases is None or done < phases:
        gained, _ = _hk_phase(g.adj, mate, left)
        done += 1
        if not gained:
            break
    return Matching.from_mates(mate)


# --- reference checkers -------------------------------------------------------

def matching_size_bitmask(g: IntersectionGraph) -> int:
    """Maximum matching size by memoized subset recursion; tiny graphs only."""
    if g.n > 20:
        raise ValueError("bitmask checker is limited to 20 vertices")
    nbr = [0] * g.n
    for v, u in g.edges():
        nbr[v] |= 1 << u
        nbr[u] |= 1 << v
    memo = {0: 0}

    def best(mask: int) -> int:
        if mask in memo:
            return memo[mask]
        v = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << v)
        val = best(rest)
        cand = nbr[v] & rest
        while cand:
            low = cand & -cand
            val = max(val, 1 + best(rest & ~low))
            cand ^= low
        memo[mask] = val
        return val

    return best((1 << g.n) - 1)


def short_augmenting_path_exists(g: IntersectionGraph, mate: Sequence[int], maxlen: int) -> bool:
    """Exhaustive search for a simple augmenting path with at most ``maxlen`` edges.

    Enumerates alternating paths from every free vertex by depth-first
    search; exponential in ``maxlen`` and meant for small test graphs.
    """
    n = g.n
    onpath = [False] * n

    def extend(v: int, length: int) -> bool:
        # v is reached by an even-length prefix; try an unmatched edge next
        for u in g.adj[v]:
            if onpath[u] or mate[v] == u:
                continue
            if mate[u] == -1:
                return True
            if length + 2 > maxlen - 1:
                continue
            w = mate[u]
            if onpath[w]:
                continue
            onpath[u] = onpath[w] = True
            if extend(w, length + 2):
                return True
            onpath[u] = onpath[w] = False
        return False

    for s in range(n):
        if mate[s] != -1:
            continue
        onpath[s] = True
        if maxlen >= 1 and extend(s, 0):
            return True
        onpath[s] = False
    return False


__all__ = [
    "AugmentingPath",
    "apply_paths",
    "approx_matching_eps",
    "approx_mates",
    "exact_mates",
    "exact_maximum_matching",
    "find_disjoint_augmenting_paths",
    "hopcroft_karp",
    "hopcroft_karp_phase",
    "length_schedule",
    "matching_size_bitmask",
    "maximum_matching_size",
    "short_augmenting_path_exists",
]
