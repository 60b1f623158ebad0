"""Reference implementations used only by the tests.

Nothing here imports the package's own matching or graph code, so a bug
there cannot hide behind a shared helper.
"""

import itertools
import math

import networkx as nx
import numpy as np

from diskmatch.geometry import Disk


def pairs_bruteforce(disks):
    """All intersecting index pairs ``(i, j)``, ``i < j``, by exact arithmetic."""
    out = set()
    for i, j in itertools.combinations(range(len(disks)), 2):
        a, b = disks[i], disks[j]
        if (a.cx - b.cx) ** 2 + (a.cy - b.cy) ** 2 <= (a.r + b.r) ** 2:
            out.add((i, j))
    return out


def pairs_numpy(disks, chunk=1024):
    """Same predicate as :func:`pairs_bruteforce`, vectorized by row blocks."""
    if not disks:
        return set()
    a = np.asarray(disks, dtype=float).reshape(len(disks), 3)
    x, y, r = a[:, 0], a[:, 1], a[:, 2]
    out = set()
    for s in range(0, len(a), chunk):
        dx = x[s:s + chunk, None] - x[None, :]
        dy = y[s:s + chunk, None] - y[None, :]
        rr = r[s:s + chunk, None] + r[None, :]
        hit = dx * dx + dy * dy <= rr * rr
        ii, jj = np.nonzero(hit)
        ii = ii + s
        keep = ii < jj
        out.update(zip(ii[keep].tolist(), jj[keep].tolist()))
    return out


def density_upper(disks, chunk=1024):
    """Max over o of #{members with r >= r_o meeting o}, counting o itself."""
    a = np.asarray(disks, dtype=float).reshape(len(disks), 3)
    x, y, r = a[:, 0], a[:, 1], a[:, 2]
    best = 0
    for s in range(0, len(a), chunk):
        dx = x[s:s + chunk, None] - x[None, :]
        dy = y[s:s + chunk, None] - y[None, :]
        rr = r[s:s + chunk, None] + r[None, :]
        hit = (dx * dx + dy * dy <= rr * rr) & (r[None, :] >= r[s:s + chunk, None])
        best = max(best, int(hit.sum(axis=1).max()))
    return best


def nx_graph(n, edges):
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    return g


def nx_matching_size(n, edges):
    return len(nx.max_weight_matching(nx_graph(n, edges), maxcardinality=True))


def disk_matching_size(disks):
    return nx_matching_size(len(disks), pairs_bruteforce(disks))


def exhaustive_matching_size(n, edges):
    """Maximum matching by branching on the lowest vertex; fine up to ~16 vertices."""
    nbr = [set() for _ in range(n)]
    for a, b in edges:
        nbr[a].add(b)
        nbr[b].add(a)
    memo = {}

    def solve(left):
        if not left:
            return 0
        if left in memo:
            return memo[left]
        v = min(left)
        rest = left - {v}
        best = solve(rest)
        for u in nbr[v] & rest:
            best = max(best, 1 + solve(rest - {u}))
        memo[left] = best
        return best

    return solve(frozenset(range(n)))


def augmenting_path_within(n, edges, matching, maxlen):
    """True iff some augmenting path with at most ``maxlen`` edges exists.

    Plain DFS over simple alternating paths from every free vertex.
    """
    nbr = [[] for _ in range(n)]
    for a, b in edges:
        nbr[a].append(b)
        nbr[b].append(a)
    mate = {}
    for a, b in matching:
        mate[a] = b
        mate[b] = a
    used = set()

    def grow(v, length):
        for u in nbr[v]:
            if u in used or mate.get(v) == u:
                continue
            if u not in mate:
                return True
            w = mate[u]
            if length + 3 > maxlen or w in used:
                continue
            used.update((u, w))
            if grow(w, length + 2):
                return True
            used.difference_update((u, w))
        return False

    for s in range(n):
        if s in mate:
            continue
        used.add(s)
        if maxlen >= 1 and grow(s, 0):
            return True
        used.discard(s)
    return False


def shortest_bipartite_augmenting(n, edges, side, matching):
    """Length (edges) of the shortest augmenting path in a bipartite graph, or inf."""
    nbr = [[] for _ in range(n)]
    for a, b in edges:
        nbr[a].append(b)
        nbr[b].append(a)
    mate = {}
    for a, b in matching:
        mate[a] = b
        mate[b] = a
    # BFS over alternating paths from all free left vertices
    dist = {v: 0 for v in range(n) if side[v] == 0 and v not in mate}
    frontier = list(dist)
    depth = 0
    while frontier:
        nxt = []
        for v in frontier:
            for u in nbr[v]:
                if mate.get(v) == u:
                    continue
                if u not in mate:
                    return depth + 1
                w = mate[u]
                if w not in dist:
                    dist[w] = depth + 2
                    nxt.append(w)
        frontier = nxt
        depth += 2
    return math.inf


def check_hierarchy(disks, root, lost, ratio):
    """Partition, separation and balance invariants of a separator tree."""
    leaves = root.leaves()
    covered = [i for leaf in leaves for i in leaf.all_disks]
    assert len(covered) == len(set(covered))
    assert set(covered).isdisjoint(lost)
    assert set(covered) | set(lost) == set(root.all_disks)
    for node in root.nodes():
        assert set(node.active) <= set(node.all_disks)
        if node.is_leaf:
            continue
        c = node.separator_circle
        inner, outer = node.children
        assert len(inner.active) + len(outer.active) <= len(node.active)
        assert max(len(inner.active), len(outer.active)) <= ratio * len(node.active)
        for i in inner.all_disks:
            d = disks[i]
            assert math.hypot(d.cx - c.cx, d.cy - c.cy) + d.r < c.radius * (1 + 1e-12)
        for i in outer.all_disks:
            d = disks[i]
            assert math.hypot(d.cx - c.cx, d.cy - c.cy) - d.r > c.radius * (1 - 1e-12)


def unmatched_independent(disks, matching):
    used = {v for e in matching for v in e}
    rest = [d for i, d in enumerate(disks) if i not in used]
    return not pairs_bruteforce(rest)


def assert_valid_matching(disks, matching):
    seen = set()
    for a, b in matching:
        assert a != b
        assert a not in seen and b not in seen
        seen.update((a, b))
        p, q = disks[a], disks[b]
        assert (p.cx - q.cx) ** 2 + (p.cy - q.cy) ** 2 <= (p.r + q.r) ** 2


# --- instance helpers ---------------------------------------------------------

def random_unit(n, box, rng):
    xy = rng.uniform(0.0, box, size=(n, 2))
    return [Disk(x, y, 1.0) for x, y in xy]


def random_mixed(n, box, rng, r_min=0.3, r_max=2.0):
    xy = rng.uniform(0.0, box, size=(n, 2))
    rs = rng.uniform(r_min, r_max, size=n)
    return [Disk(x, y, r) for (x, y), r in zip(xy, rs)]


def random_graph(n, p, rng):
    return [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < p]


def rng_for(*key):
    return np.random.default_rng(list(key))
