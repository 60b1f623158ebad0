"""General-disk matching: geometric HK, random 2-coloring, small exact solver."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Disk, as_rng, disks_intersect, radius_class
from .graph import (IntersectionGraph, Matching, build_intersection_graph,
                    greedy_matching_sweep)
from .matching import _check_eps, exact_mates, find_disjoint_augmenting_paths


class GeomNeighborIndex:
    """Deletable "give me any live disk meeting this one" structure.

    Disks are bucketed by power-of-two radius class, each class on its own
    uniform grid whose cell side is the largest diameter in the class.  A
    query visits, per class, the cells that can hold an intersecting center,
    or the class's live list when that is shorter.  Deletion is lazy: dead
    entries are purged from a cell the next time it is scanned.
    """

    def __init__(self, disks: Sequence[Disk], ids: Sequence[int] | None = None):
        self._disks = list(disks)
        self._ids = list(range(len(self._disks))) if ids is None else list(ids)
        if len(self._ids) != len(self._disks):
            raise ValueError("ids and disks differ in length")
        self._pos = {key: k for k, key in enumerate(self._ids)}
        if len(self._pos) != len(self._ids):
            raise ValueError("duplicate ids")
        self._alive = [True] * len(self._disks)
        self._classes: dict[int, tuple[float, float, dict[tuple[int, int], list[int]], dict[int, None]]] = {}
        for k, (cx, cy, r) in enumerate(self._disks):
            c = radius_class(r)
            entry = self._classes.get(c)
            if entry is None:
                half = math.ldexp(1.0, c)
                entry = self._classes[c] = (half, 2.0 * half, {}, {})
            side = entry[1]
            key = (math.floor(cx / side), math.floor(cy / side))
            entry[2].setdefault(key, []).append(k)
            entry[3][k] = None
        self._order = sorted(self._classes)
        self.live = len(self._disks)

    def __len__(self) -> int:
        return self.live

    def delete(self, ident: int) -> None:
        k = self._pos.get(ident)
        if k is None:
            raise KeyError(f"unknown disk id {ident}")
        if not self._alive[k]:
            return
        self._alive[k] = False
        self.live -= 1
        self._classes[radius_class(self._disks[k][2])][3].pop(k, None)

    def __contains__(self, ident: int) -> bool:
        k = self._pos.get(ident)
        return k is not None and self._alive[k]

    def query(self, q: Disk) -> int | None:
        """Id of some live disk intersecting ``q``, or None."""
        qx, qy, qr = q[0], q[1], q[2]
        disks = self._disks
        alive = self._alive
        for c in self._order:
            half, side, grid, live = self._classes[c]
            if not live:
                continue
            reach = qr + half
            x0 = math.floor((qx - reach) / side)
            x1 = math.floor((qx + reach) / side)
            y0 = math.floor((qy - reach) / side)
            y1 = math.floor((qy + reach) / side)
            if (x1 - x0 + 1) * (y1 - y0 + 1) > len(live):
                for k in live:
                    ox, oy, orr = disks[k]
                    dx = qx - ox
                    dy = qy - oy
                    s = qr + orr
                    if dx * dx + dy * dy <= s * s:
                        return self._ids[k]
                continue
            for gx in range(x0, x1 + 1):
                for gy in range(y0, y1 + 1):
                    cell = grid.get((gx, gy))
                    if not cell:
                        continue
                    dirty = False
                    hit = None
                    for k in cell:
                        if not alive[k]:
                            dirty = True
                            continue
                        ox, oy, orr = disks[k]
                        dx = qx - ox
                        dy = qy - oy
                        s = qr + orr
                        if dx * dx + dy * dy <= s * s:
                            hit = k
                            break
                    if dirty:
                        cell[:] = [k for k in cell if alive[k]]
                    if hit is not None:
                        return self._ids[hit]
        return None


def geom_neighbor_index(disks: Sequence[Disk]) -> GeomNeighborIndex:
    return GeomNeighborIndex(disks)


def _geom_hk_phase(disks: Sequence[Disk], left: Sequence[int], right: Sequence[int],
                   mate: list[int], limit: float) -> tuple[int, float]:
    """One HK phase driven by neighbor queries; ``mate`` updated in place.

    Returns the number of augmentations and the shortest augmenting path
    length found (inf if none).  Nothing is augmented when that length is
    ``limit`` or more.
    """
    # BFS: layers of left vertices, each right vertex is discovered once
    index = GeomNeighborIndex([disks[u] for u in right], right)
    layer = [v for v in left if mate[v] == -1]
    dist: dict[int, int] = {v: 0 for v in layer}
    rlayers: list[list[int]] = []
    depth = 0
    final = False
    while layer and not final:
        found_r: list[int] = []
        nxt = []
        for v in layer:
            while True:
                u = index.query(disks[v])
                if u is None:
                    break
                index.delete(u)
                found_r.append(u)
                w = mate[u]
                if w == -1:
                    final = True
                elif not final:
                    dist[w] = depth + 1
                    nxt.append(w)
        rlayers.append(found_r)
        layer = nxt
        depth += 1
    if not final:
        return 0, math.inf
    shortest = 2 * (depth - 1) + 1
    if shortest >= limit:
        return 0, shortest
    last = depth - 1
    # DFS with one deletable index per right layer
    indexes = [GeomNeighborIndex([disks[u] for u in rl], rl) for rl in rlayers]
    gained = 0
    for s in left:
        if mate[s] != -1 or dist.get(s) != 0:
            continue
        stack = [s]
        picked: list[int] = []
        while stack:
            v = stack[-1]
            d = len(stack) - 1
            u = indexes[d].query(disks[v])
            if u is None:
                stack.pop()
                if picked:
                    picked.pop()
                continue
            indexes[d].delete(u)
            w = mate[u]
            if d == last:
                if w != -1:
                    continue
                picked.append(u)
                for a, b in zip(stack, picked):
                    mate[a] = b
                    mate[b] = a
                gained += 1
                break
            if w == -1 or dist.get(w) != d + 1:
                continue
            picked.append(u)
            stack.append(w)
    return gained, shortest


def bipartite_geom_mates(disks: Sequence[Disk], side: Sequence[int], eps: float,
                         mate: list[int] | None = None) -> list[int]:
    """Geometric HK on ``disks`` split by ``side`` (0/1 per disk).

    Phases run until the shortest augmenting path has at least ``4 / eps``
    edges (or none is left).  ``mate`` may hold a starting matching whose
    edges all cross sides.
    """
    _check_eps(eps)
    n = len(disks)
    mate = [-1] * n if mate is None else list(mate)
    left = [v for v in range(n) if side[v] == 0]
    right = [v for v in range(n) if side[v] == 1]
    limit = 4.0 / eps
    while True:
        gained, shortest = _geom_hk_phase(disks, left, right, mate, limit)
        if not gained:
            return mate


def bipartite_geom_matching(d1: Sequence[Disk], d2: Sequence[Disk], eps: float) -> Matching:
    """``(1 - eps)``-approximate matching between two disk families.

    Only edges from ``d1`` to ``d2`` count.  Vertex ``i`` of the result is
    ``d1[i]``; vertex ``len(d1) + j`` is ``d2[j]``.  On return no augmenting
    path with fewer than ``4 / eps`` edges remains.
    """
    _check_eps(eps)
    disks = list(d1) + list(d2)
    side = [0] * len(d1) + [1] * len(d2)
    return Matching.from_mates(bipartite_geom_mates(disks, side, eps))


@dataclass(frozen=True)
class ColoringEpoch:
    """Iteration budget of the random 2-coloring scheme for a given eps."""

    eps: float
    n: int
    seed: int | None = None
    iteration_scale: float = 1.0

    @property
    def path_bound(self) -> int:
        return math.ceil(4.0 / self.eps)

    @property
    def iterations_per_epoch(self) -> int:
        return 4 * 2 ** math.ceil(4.0 / self.eps)

    @property
    def c_eps(self) -> int:
        return 2 ** math.ceil(8.0 / self.eps)

    @property
    def total_iteration_cap(self) -> int:
        return max(1, math.ceil(self.iteration_scale * self.c_eps * math.log2(max(2, self.n))))


@dataclass
class ColoringStats:
    iterations: int = 0
    augmentations: int = 0
    certified: bool = False
    sizes: list[int] | None = None


def _sym_diff_gain(m1: dict[int, int], m2: dict[int, int]) -> list[list[tuple[int, int]]]:
    """Components of ``m1 xor m2`` whose ``m2`` edges outnumber ``m1`` edges.

    Each component is returned as its sorted list of ``m2`` edges.
    """
    e1 = {(min(a, b), max(a, b)) for a, b in m1.items()}
    e2 = {(min(a, b), max(a, b)) for a, b in m2.items()}
    only1 = e1 - e2
    only2 = e2 - e1
    adj: dict[int, list[int]] = {}
    for a, b in only1 | only2:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    comp_of: dict[int, int] = {}
    for start in sorted(adj):
        if start in comp_of:
            continue
        comp_of[start] = start
        stack = [start]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u not in comp_of:
                    comp_of[u] = start
                    stack.append(u)
    count: dict[int, int] = {}
    edges2: dict[int, list[tuple[int, int]]] = {}
    for e in only1:
        c = comp_of[e[0]]
        count[c] = count.get(c, 0) - 1
    for e in only2:
        c = comp_of[e[0]]
        count[c] = count.get(c, 0) + 1
        edges2.setdefault(c, []).append(e)
    return [sorted(edges2[c]) for c in sorted(count) if count[c] > 0]


def random_coloring_matching(disks: Sequence[Disk], eps: float, rng=None,
                             iteration_scale: float = 1.0,
                             stats: ColoringStats | None = None) -> Matching:
    """``(1 - eps)``-approximate matching of a general disk graph.

    Starts from the sweep greedy.  Each iteration colors every disk with a
    random bit, keeps the matched pairs that got different colors, runs the
    geometric bipartite matcher from there at ``eps / 16`` and swaps in the
    augmenting components it produced.  When an iteration gains nothing, a
    bounded search on the explicit graph checks for augmenting paths of at
    most ``4 / eps`` edges; none left ends the loop.  A hard cap of
    ``c_eps * log2(n)`` iterations applies in any case.
    """
    _check_eps(eps)
    gen = as_rng(rng)
    n = len(disks)
    cur = greedy_matching_sweep(disks).mates(n)
    st = stats if stats is not None else ColoringStats()
    st.sizes = [sum(1 for v, u in enumerate(cur) if u > v)]
    if n < 2:
        st.certified = True
        return Matching.from_mates(cur)
    budget = ColoringEpoch(eps, n, iteration_scale=iteration_scale)
    g: IntersectionGraph | None = None
    certified_state: tuple[int, ...] | None = None
    plen = math.floor(4.0 / eps)
    for _ in range(budget.total_iteration_cap):
        st.iterations += 1
        bits = gen.integers(0, 2, size=n)
        keep = [v for v in range(n) if cur[v] == -1 or bits[v] != bits[cur[v]]]
        local = {v: k for k, v in enumerate(keep)}
        sub = [disks[v] for v in keep]
        side = [int(bits[v]) for v in keep]
        start = [local[cur[v]] if cur[v] != -1 else -1 for v in keep]
        res = bipartite_geom_mates(sub, side, eps / 16.0, start)
        m1 = {keep[a]: keep[b] for a, b in enumerate(start) if b != -1}
        m2 = {keep[a]: keep[b] for a, b in enumerate(res) if b != -1}
        gain = 0
        for comp in _sym_diff_gain(m1, m2):
            verts = {v for e in comp for v in e}
            for v in verts:
                if cur[v] != -1 and cur[v] not in verts:
                    raise AssertionError("augmenting component leaks out of its vertex set")
            for v in verts:
                cur[v] = -1
            for a, b in comp:
                cur[a] = b
                cur[b] = a
            gain += 1
        st.augmentations += gain
        st.sizes.append(sum(1 for v, u in enumerate(cur) if u > v))
        if gain:
            continue
        state = tuple(cur)
        if state == certified_state:
            continue
        if g is None:
            g = build_intersection_graph(disks)
        if not find_disjoint_augmenting_paths(g, Matching.from_mates(cur), max(1, plen)):
            st.certified = True
            break
        certified_state = state
    return Matching.from_mates(cur)


# --- small matchings ----------------------------------------------------------

@dataclass(frozen=True)
class NeighborhoodClass:
    signature: frozenset[int]
    members: tuple[int, ...]


def classify_free_disks(matched: Sequence[Disk], free: Sequence[Disk]) -> list[NeighborhoodClass]:
    """Group ``free`` by which ``matched`` disks they intersect.

    Signatures hold positions in ``matched``; members hold positions in
    ``free``.  Classes come out in order of their first member.
    """
    groups: dict[frozenset[int], list[int]] = {}
    for k, d in enumerate(free):
        sig = frozenset(a for a, md in enumerate(matched) if disks_intersect(d, md))
        groups.setdefault(sig, []).append(k)
    return [NeighborhoodClass(sig, tuple(mem)) for sig, mem in groups.items()]


@dataclass(frozen=True)
class TooBig:
    """The greedy matching already exceeds the size cap."""

    greedy_size: int
    cap: int


def small_matching_cap(n: int, c: float = 1.0) -> int:
    return math.ceil(c * n ** 0.125) if n > 0 else 0


def small_matching_exact(disks: Sequence[Disk], c: float = 1.0) -> Matching | TooBig:
    """Exact maximum matching when it is small, else :class:`TooBig`.

    With ``N = ceil(c * n**(1/8))``: when the sweep greedy has more than
    ``N`` edges, give up.  Otherwise the unmatched disks are pairwise
    disjoint, so they only touch the ``2|M| <= 2N`` matched disks, and free
    disks with the same neighbours among them are interchangeable.  Keeping
    the ``2N`` lowest-index members of each class preserves the maximum
    matching size; the blossom algorithm then runs on what is left.
    """
    n = len(disks)
    greedy = greedy_matching_sweep(disks)
    cap = small_matching_cap(n, c)
    if len(greedy) > cap:
        return TooBig(len(greedy), cap)
    if not len(greedy):
        return Matching()
    vm = sorted(greedy.vertices())
    vm_set = set(vm)
    free = [i for i in range(n) if i not in vm_set]
    classes = classify_free_disks([disks[i] for i in vm], [disks[i] for i in free])
    limit = 2 * cap
    chosen = list(vm)
    for cl in classes:
        if not cl.signature:
            continue
        chosen.extend(free[k] for k in cl.members[:limit])
    chosen.sort()
    sub = [disks[i] for i in chosen]
    g = build_intersection_graph(sub)
    mate = exact_mates(g)
    return Matching.from_mates(mate).relabel(chosen)


__all__ = [
    "ColoringEpoch",
    "ColoringStats",
    "GeomNeighborIndex",
    "NeighborhoodClass",
    "TooBig",
    "bipartite_geom_mates",
    "bipartite_geom_matching",
    "classify_free_disks",
    "geom_neighbor_index",
    "random_coloring_matching",
    "small_matching_cap",
    "small_matching_exact",
]
