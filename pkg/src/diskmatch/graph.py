"""Explicit intersection graphs, matchings, density and the sweep greedy."""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .geometry import Disk, disks_intersect, radius_class


class Matching:
    """A set of vertex-disjoint edges over disk (or vertex) indices.

    Edges are stored normalized as ``(i, j)`` with ``i < j`` and sorted, so two
    matchings with the same edges compare equal and print identically.
    """

    __slots__ = ("edges",)

    def __init__(self, edges: Iterable[tuple[int, int]] = ()):
        seen: set[int] = set()
        norm = []
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop ({a}, {b}) in matching")
            if a in seen or b in seen:
                raise ValueError(f"edge ({a}, {b}) shares a vertex with another edge")
            seen.add(a)
            seen.add(b)
            norm.append((a, b) if a < b else (b, a))
        norm.sort()
        self.edges: tuple[tuple[int, int], ...] = tuple(norm)

    @classmethod
    def from_mates(cls, mate: Sequence[int]) -> Matching:
        return cls((v, u) for v, u in enumerate(mate) if u > v)

    def mates(self, n: int) -> list[int]:
        mate = [-1] * n
        for a, b in self.edges:
            mate[a] = b
            mate[b] = a
        return mate

    def vertices(self) -> set[int]:
        return {v for e in self.edges for v in e}

    def relabel(self, labels: Sequence[int]) -> Matching:
        """Map local indices through ``labels`` (local -> global)."""
        return Matching((labels[a], labels[b]) for a, b in self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.edges)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.edges == other.edges

    def __hash__(self) -> int:
        return hash(self.edges)

    def __or__(self, other: Matching) -> Matching:
        return Matching(self.edges + other.edges)

    def __repr__(self) -> str:
        return f"Matching({list(self.edges)!r})"


def check_matching(disks: Sequence[Disk], matching: Matching) -> None:
    """Raise ``ValueError`` unless every edge joins intersecting, distinct disks.

    Vertex-disjointness is re-checked here from scratch rather than trusted
    from the constructor, since callers use this as an independent audit.
    """
    used: set[int] = set()
    n = len(disks)
    for a, b in matching.edges:
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a}, {b}) out of range for {n} disks")
        if a in used or b in used:
            raise ValueError(f"vertex reused by edge ({a}, {b})")
        used.add(a)
        used.add(b)
        if not disks_intersect(disks[a], disks[b]):
            raise ValueError(f"edge ({a}, {b}) joins disjoint disks")


@dataclass
class IntersectionGraph:
    """Adjacency lists over vertices ``0..n-1``; each list sorted ascending."""

    n: int
    adj: list[list[int]] = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> IntersectionGraph:
        adj: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            adj[a].append(b)
            adj[b].append(a)
        for v, lst in enumerate(adj):
            lst.sort()
            for k in range(1, len(lst)):
                if lst[k] == lst[k - 1]:
                    raise ValueError(f"duplicate edge ({v}, {lst[k]})")
        return cls(n, adj)

    @property
    def m(self) -> int:
        return sum(len(a) for a in self.adj) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for v, lst in enumerate(self.adj):
            for u in lst:
                if u > v:
                    yield v, u

    def has_edge(self, a: int, b: int) -> bool:
        lst = self.adj[a]
        k = bisect_left(lst, b)
        return k < len(lst) and lst[k] == b

    def induced(self, vertices: Sequence[int]) -> tuple[IntersectionGraph, list[int]]:
        """Subgraph on ``vertices``; returns it with the local -> global map."""
        local = {v: k for k, v in enumerate(vertices)}
        adj = []
        for v in vertices:
            adj.append(sorted(local[u] for u in self.adj[v] if u in local))
        return IntersectionGraph(len(vertices), adj), list(vertices)


# --- pair enumeration -------------------------------------------------------

def intersecting_pairs(disks: Sequence[Disk]) -> Iterator[tuple[int, int]]:
    """Yield every intersecting pair ``(i, j)``, ``i < j``, exactly once.

    Disks are bucketed by power-of-two radius class; class ``k`` lives on a
    grid with cell side ``2**(k+1)``, the largest diameter in the class.  A
    disk probes the 3x3 cell block of its own class and of every larger
    class: any partner of radius at least its own has its center within one
    cell side.  Same-class pairs are deduplicated by index.
    """
    n = len(disks)
    if n < 2:
        return
    classes: dict[int, dict[tuple[int, int], list[int]]] = {}
    klass = [0] * n
    for i, (cx, cy, r) in enumerate(disks):
        k = radius_class(r)
        klass[i] = k
        side = math.ldexp(1.0, k + 1)
        grid = classes.setdefault(k, {})
        key = (math.floor(cx / side), math.floor(cy / side))
        cell = grid.get(key)
        if cell is None:
            grid[key] = [i]
        else:
            cell.append(i)
    ordered = sorted(classes)
    sides = {k: math.ldexp(1.0, k + 1) for k in ordered}
    for i, (cx, cy, r) in enumerate(disks):
        ki = klass[i]
        for k in ordered:
            if k < ki:
                continue
            side = sides[k]
            grid = classes[k]
            gx = math.floor(cx / side)
            gy = math.floor(cy / side)
            same = k == ki
            for x in (gx - 1, gx, gx + 1):
                for y in (gy - 1, gy, gy + 1):
                    cell = grid.get((x, y))
                    if cell is None:
                        continue
                    for j in cell:
                        if same and j <= i:
                            continue
                        ox, oy, orr = disks[j]
                        dx = cx - ox
                        dy = cy - oy
                        s = r + orr
                        if dx * dx + dy * dy <= s * s:
                            yield (i, j) if i < j else (j, i)


def brute_force_pairs(disks: Sequence[Disk]) -> set[tuple[int, int]]:
    """All intersecting pairs by the O(n^2) double loop (test oracle)."""
    out = set()
    for i in range(len(disks)):
        a = disks[i]
        for j in range(i + 1, len(disks)):
            if disks_intersect(a, disks[j]):
                out.add((i, j))
    return out


def build_intersection_graph(disks: Sequence[Disk]) -> IntersectionGraph:
    """Explicit intersection graph, containment pairs included."""
    n = len(disks)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in intersecting_pairs(disks):
        adj[i].append(j)
        adj[j].append(i)
    for lst in adj:
        lst.sort()
    return IntersectionGraph(n, adj)


# --- density ----------------------------------------------------------------

def density_exact(disks: Sequence[Disk]) -> int:
    """Largest count, over member disks, of intersecting disks at least as large.

    A disk counts itself.  Quadratic; meant as an oracle on small inputs.
    """
    best = 0
    for i, a in enumerate(disks):
        c = sum(1 for b in disks if b.r >= a.r and disks_intersect(a, b))
        best = max(best, c)
    return best


def density(disks: Sequence[Disk]) -> int:
    """Density estimate ``lam_hat`` with ``density_exact <= lam_hat <= 4 * density_exact``.

    Candidates come from the radius-class grids; only partners that really
    intersect and are at least as large are counted, so the estimate is in
    fact exact.  Runs in time proportional to the number of candidate pairs.
    """
    if not disks:
        return 0
    cnt = [1] * len(disks)
    for i, j in intersecting_pairs(disks):
        ri, rj = disks[i].r, disks[j].r
        if rj >= ri:
            cnt[i] += 1
        if ri >= rj:
            cnt[j] += 1
    return max(cnt)


# --- greedy sweep -----------------------------------------------------------

def greedy_matching_sweep(disks: Sequence[Disk]) -> Matching:
    """Maximal matching of the intersection graph by a left-to-right sweep.

    The sweep status holds the live (unmatched) disks crossing the sweep line,
    ordered bottom to top by their vertical slice.  Whenever two disks become
    neighbours in the status they are tested for intersection; an
    intersecting pair is matched and both leave the sweep at once.  Because
    neighbours never intersect, the live slices stay pairwise disjoint, so the
    order never changes between events and no crossing events are needed.
    Containment is caught the same way: a disk born inside another sits
    directly between that disk's boundary arcs.

    Events are ordered by ``(x, kind, index)`` with left extremes (kind 0)
    before right extremes (kind 1), so disks touching at a shared extreme
    point are still seen together.
    """
    n = len(disks)
    if n < 2:
        return Matching()
    cx = [d[0] for d in disks]
    cy = [d[1] for d in disks]
    rr = [d[2] for d in disks]
    r2 = [r * r for r in rr]
    left = sorted(range(n), key=lambda i: (cx[i] - rr[i], i))
    right = sorted(range(n), key=lambda i: (cx[i] + rr[i], i))
    alive = [True] * n
    status: list[int] = []
    edges: list[tuple[int, int]] = []
    sqrt = math.sqrt

    def hits(a: int, b: int) -> bool:
        dx = cx[a] - cx[b]
        dy = cy[a] - cy[b]
        s = rr[a] + rr[b]
        return dx * dx + dy * dy <= s * s

    def lower_bound(x: float, y: float) -> int:
        # number of status disks whose slice top at x lies strictly below y
        lo, hi = 0, len(status)
        while lo < hi:
            mid = (lo + hi) >> 1
            j = status[mid]
            t = x - cx[j]
            h = r2[j] - t * t
            top = cy[j] + (sqrt(h) if h > 0.0 else 0.0)
            if top < y:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def settle(pos: int) -> None:
        # test the pair that has just become adjacent around ``pos``
        while 0 < pos < len(status):
            a = status[pos - 1]
            b = status[pos]
            if not hits(a, b):
                return
            edges.append((a, b))
            alive[a] = alive[b] = False
            del status[pos - 1:pos + 1]
            pos -= 1

    li = ri = 0
    while li < n or ri < n:
        if li < n and (ri >= n or cx[left[li]] - rr[left[li]] <= cx[right[ri]] + rr[right[ri]]):
            i = left[li]
            li += 1
            x = cx[i] - rr[i]
            p = lower_bound(x, cy[i])
            if p > 0 and hits(status[p - 1], i):
                j = status.pop(p - 1)
                edges.append((j, i))
                alive[i] = alive[j] = False
                settle(p - 1)
            elif p < len(status) and hits(status[p], i):
                j = status.pop(p)
                edges.append((j, i))
                alive[i] = alive[j] = False
                settle(p)
            else:
                status.insert(p, i)
        else:
            i = right[ri]
            ri += 1
            if not alive[i]:
                continue
            p = lower_bound(cx[i] + rr[i], cy[i])
            if p < len(status) and status[p] == i:
                pass
            elif p > 0 and status[p - 1] == i:
                p -= 1
            elif p + 1 < len(status) and status[p + 1] == i:
                p += 1
            else:
                p = status.index(i)
            del status[p]
            settle(p)
    return Matching(edges)


def greedy_on_graph(g: IntersectionGraph, order: Iterable[int] | None = None) -> list[int]:
    """Greedy maximal matching on an explicit graph; returns the mate array."""
    mate = [-1] * g.n
    for v in (range(g.n) if order is None else order):
        if mate[v] != -1:
            continue
        for u in g.adj[v]:
            if mate[u] == -1 and u != v:
                mate[v] = u
                mate[u] = v
                break
    return mate


def leftovers_independent(disks: Sequence[Disk], matching: Matching) -> bool:
    """True iff the unmatched disks are pairwise disjoint (maximality check)."""
    used = matching.vertices()
    rest = [d for i, d in enumerate(disks) if i not in used]
    for _ in intersecting_pairs(rest):
        return False
    return True


__all__ = [
    "IntersectionGraph",
    "Matching",
    "brute_force_pairs",
    "build_intersection_graph",
    "check_matching",
    "density",
    "density_exact",
    "greedy_matching_sweep",
    "greedy_on_graph",
    "intersecting_pairs",
    "leftovers_independent",
]
