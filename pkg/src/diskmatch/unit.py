"""Unit-disk matching: linear greedy, towers, and the sparsified pipeline.

Every disk here has radius exactly 1.  A unit disk always contains between
one and five integer lattice points, and all disks containing a common
lattice point pairwise intersect; the disks registered at one point form a
*tower*, which is a clique.  Intersecting disks register at points at most 4
apart, so each tower only interacts with the 48 lattice offsets of length at
most 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import Disk, GridPoint, union_diameter_bounds
from .graph import IntersectionGraph, Matching
from .matching import approx_mates


# lattice offsets (da, db) != 0 with da^2 + db^2 <= 16
NEIGHBOR_OFFSETS = tuple(
    (da, db) for da in range(-4, 5) for db in range(-4, 5)
    if 0 < da * da + db * db <= 16
)
FORWARD_OFFSETS = tuple(o for o in NEIGHBOR_OFFSETS if o > (0, 0))

# lattice offsets within distance 3 of a center, relative to floor(center)
_NEAR3 = tuple((da, db) for da in range(-3, 4) for db in range(-3, 4))


def _check_unit(disks: Sequence[Disk]) -> None:
    for k, d in enumerate(disks):
        if d[2] != 1.0:
            raise ValueError(f"disk {k} has radius {d[2]}, expected a unit disk")


def _covered(cx: float, cy: float) -> list[tuple[int, int]]:
    fi = math.floor(cx)
    fj = math.floor(cy)
    out = []
    for i in (fi - 1, fi, fi + 1, fi + 2):
        dx = i - cx
        dx2 = dx * dx
        if dx2 > 1.0:
            continue
        for j in (fj - 1, fj, fj + 1, fj + 2):
            dy = j - cy
            if dx2 + dy * dy <= 1.0:
                out.append((i, j))
    return out


def greedy_unit(disks: Sequence[Disk]) -> Matching:
    """Maximal matching of a unit-disk graph in expected linear time.

    First pass: hash lattice points; a disk meeting an unmatched disk
    waiting at one of its lattice points is paired with it, otherwise it
    waits at all of its points.  Afterwards every point holds at most one
    unmatched disk.  Second pass: an unmatched disk looks up the waiting
    disks at lattice points within distance 3 of its center, which covers
    every unit disk it can intersect.
    """
    _check_unit(disks)
    return Matching.from_mates(_greedy_unit_mates(disks))


def _locality_order(xs: np.ndarray, ys: np.ndarray, tile: float = 4.0) -> np.ndarray:
    """Permutation grouping disks by coarse square tile.

    Only a memory-locality aid for the hash passes; any permutation gives a
    valid maximal matching.  The tile key fits in 32 bits and is sorted by
    two stable 16-bit passes, which numpy runs as radix sorts (linear time).
    """
    n = xs.size
    if max(np.ptp(xs), np.ptp(ys)) / tile > 2.0 ** 30:
        return np.arange(n)  # tile ids would overflow; keep input order
    tx = np.floor(xs / tile).astype(np.int64)
    ty = np.floor(ys / tile).astype(np.int64)
    tx -= tx.min()
    ty -= ty.min()
    key = tx * (int(ty.max()) + 1) + ty
    key %= 2 * n + 1
    lo = (key & 0xFFFF).astype(np.uint16)
    hi = (key >> 16).astype(np.uint16)
    o1 = np.argsort(lo, kind="stable")
    return o1[np.argsort(hi[o1], kind="stable")]


def _greedy_unit_mates(disks: Sequence[Disk]) -> list[int]:
    n = len(disks)
    if n == 0:
        return []
    arr = np.asarray(disks, dtype=float).reshape(n, 3)
    order = _locality_order(arr[:, 0], arr[:, 1])
    xs = arr[order, 0].tolist()
    ys = arr[order, 1].tolist()
    # lattice point (a, b) -> (a - a0) * K + (b - b0); exact for every point
    # within distance 3 of some center
    a0 = math.floor(min(xs)) - 3
    b0 = math.floor(min(ys)) - 3
    K = math.floor(max(ys)) - b0 + 8
    near = tuple((da, db, da * K + db) for da, db in _NEAR3)

    mate = [-1] * n
    waiting: dict[int, int] = {}
    get = waiting.get
    pending = []
    floor = math.floor
    for i in range(n):
        cx = xs[i]
        cy = ys[i]
        fi = floor(cx)
        fj = floor(cy)
        pts = []
        for a in (fi - 1, fi, fi + 1, fi + 2):
            dx = a - cx
            dx2 = dx * dx
            if dx2 > 1.0:
                continue
            row = (a - a0) * K - b0
            for b in (fj - 1, fj, fj + 1, fj + 2):
                dy = b - cy
                if dx2 + dy * dy <= 1.0:
                    pts.append(row + b)
        for p in pts:
            j = get(p)
            if j is not None and mate[j] == -1:
                mate[i] = j
                mate[j] = i
                break
        else:
            for p in pts:
                waiting[p] = i
            pending.append(i)
    for i in pending:
        if mate[i] != -1:
            continue
        cx = xs[i]
        cy = ys[i]
        fi = floor(cx)
        fj = floor(cy)
        base = (fi - a0) * K + (fj - b0)
        for da, db, off in near:
            dx = fi + da - cx
            dy = fj + db - cy
            if dx * dx + dy * dy > 9.0:
                continue
            j = get(base + off)
            if j is None or j == i or mate[j] != -1:
                continue
            ex = cx - xs[j]
            ey = cy - ys[j]
            if ex * ex + ey * ey <= 4.0:
                mate[i] = j
                mate[j] = i
                break
    back = order.tolist()
    out = [-1] * n
    for i, j in enumerate(mate):
        if j != -1:
            out[back[i]] = back[j]
    return out


@dataclass
class Tower:
    """Disks registered at one lattice point; members in increasing index order."""

    point: GridPoint
    members: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.members)


def registration_point(d: Disk) -> GridPoint:
    """Lexicographically smallest lattice point inside the unit disk ``d``."""
    return GridPoint(*_covered(d[0], d[1])[0])


def tower_decompose(disks: Sequence[Disk]) -> list[Tower]:
    """Register each disk at its smallest contained lattice point.

    Towers are returned in order of their first member.
    """
    _check_unit(disks)
    towers: dict[tuple[int, int], Tower] = {}
    for i, d in enumerate(disks):
        p = _covered(d[0], d[1])[0]
        t = towers.get(p)
        if t is None:
            t = towers[p] = Tower(GridPoint(*p))
        t.members.append(i)
    return list(towers.values())


@dataclass(frozen=True)
class UnitEpsParams:
    """Tunables of the unit pipeline; defaults are the textbook constants."""

    eps: float
    tall_factor: float = 200.0
    pair_cap: int = 49
    inner_eps_divisor: float = 8.0

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")

    @property
    def tall_threshold(self) -> int:
        """A tower with more members than this is tall."""
        return math.ceil(self.tall_factor / self.eps)


def tall_tower_reduction(towers: Sequence[Tower], params: UnitEpsParams,
                         ) -> tuple[Matching, list[int]]:
    """Pair off and delete every tall tower.

    A tall tower is matched internally in index order and then removed
    whole; an odd member left over is dropped along with it.  Deleting
    disks never makes another tower taller, so one pass suffices.  Returns
    the partial matching and the sorted indices of the surviving disks.
    """
    cap = params.tall_threshold
    edges = []
    residual = []
    for t in towers:
        m = t.members
        if len(m) > cap:
            edges.extend((m[k], m[k + 1]) for k in range(0, len(m) - 1, 2))
        else:
            residual.extend(m)
    residual.sort()
    return Matching(edges), residual


@dataclass
class UnitPipelineResult:
    matching: Matching
    tall: Matching
    residual: list[int]
    kept: list[int]
    residual_edges: int
    sparse_edges: int


def _tower_map(disks: Sequence[Disk], indices: Sequence[int]) -> dict[tuple[int, int], list[int]]:
    towers: dict[tuple[int, int], list[int]] = {}
    for i in indices:
        d = disks[i]
        p = _covered(d[0], d[1])[0]
        lst = towers.get(p)
        if lst is None:
            towers[p] = [i]
        else:
            lst.append(i)
    return towers


def _cross_edges(disks, ta: list[int], tb: list[int]) -> list[tuple[int, int]]:
    out = []
    for i in ta:
        cx, cy, _ = disks[i]
        for j in tb:
            ox, oy, _ = disks[j]
            dx = cx - ox
            dy = cy - oy
            if dx * dx + dy * dy <= 4.0:
                out.append((i, j))
    return out


def run_unit_pipeline(disks: Sequence[Disk], eps: float,
                      params: UnitEpsParams | None = None) -> UnitPipelineResult:
    """Tall-tower reduction, sparsification, approximation and greedy fill-in."""
    _check_unit(disks)
    params = params or UnitEpsParams(eps)
    towers = tower_decompose(disks)
    tall, residual = tall_tower_reduction(towers, params)
    tmap = _tower_map(disks, residual)

    # residual graph, tower-local; also remember the cross edges per tower pair
    adj: dict[int, list[int]] = {i: [] for i in residual}
    pair_edges: list[tuple[tuple[int, int], tuple[int, int], list[tuple[int, int]]]] = []
    for p, mem in tmap.items():
        for a in range(len(mem)):
            for b in range(a + 1, len(mem)):
                adj[mem[a]].append(mem[b])
                adj[mem[b]].append(mem[a])
        for da, db in FORWARD_OFFSETS:
            q = (p[0] + da, p[1] + db)
            other = tmap.get(q)
            if other is None:
                continue
            ce = _cross_edges(disks, mem, other)
            if ce:
                pair_edges.append((p, q, ce))
                for i, j in ce:
                    adj[i].append(j)
                    adj[j].append(i)
    residual_edges = sum(len(v) for v in adj.values()) // 2

    # sparsify: greedy capped cross matching plus capped marks from its nodes
    keep: set[int] = set()
    cap = params.pair_cap
    for _p, _q, ce in pair_edges:
        used: set[int] = set()
        cm = []
        for i, j in ce:
            if i not in used and j not in used:
                used.add(i)
                used.add(j)
                cm.append((i, j))
                if len(cm) == cap:
                    break
        marks: dict[int, int] = {}
        for i, j in cm:
            keep.add(i)
            keep.add(j)
        cm_set = set(cm)
        for i, j in ce:
            if (i, j) in cm_set:
                continue
            # an edge counts against the budget of each matched node it touches
            ci = i in used and marks.get(i, 0) < cap
            cj = j in used and marks.get(j, 0) < cap
            if ci or cj:
                if ci:
                    marks[i] = marks.get(i, 0) + 1
                if cj:
                    marks[j] = marks.get(j, 0) + 1
                keep.add(i)
                keep.add(j)
    for mem in tmap.values():
        surplus = [i for i in mem if i not in keep]
        if len(surplus) % 2:
            keep.add(surplus[0])
    kept = sorted(keep)

    # approximate matching on the sparse graph
    local = {v: k for k, v in enumerate(kept)}
    sadj = [sorted(local[u] for u in adj[v] if u in local) for v in kept]
    sparse = IntersectionGraph(len(kept), sadj)
    mate2 = approx_mates(sparse, eps / params.inner_eps_divisor)
    edges = list(tall.edges)
    matched: set[int] = set()
    for a, b in enumerate(mate2):
        if b > a:
            edges.append((kept[a], kept[b]))
            matched.add(kept[a])
            matched.add(kept[b])

    # greedy inside each tower on what is left
    for mem in tmap.values():
        free = [i for i in mem if i not in matched]
        edges.extend((free[k], free[k + 1]) for k in range(0, len(free) - 1, 2))
    return UnitPipelineResult(
        matching=Matching(edges),
        tall=tall,
        residual=residual,
        kept=kept,
        residual_edges=residual_edges,
        sparse_edges=sparse.m,
    )


def approx_unit_matching(disks: Sequence[Disk], eps: float) -> Matching:
    """A matching of at least ``(1 - eps)`` times the maximum, unit disks only."""
    return run_unit_pipeline(disks, eps).matching


# frozen calibration: residual <= RESIDUAL_CONSTANT * diameter^2 / eps
RESIDUAL_CONSTANT = 320.0


def approx_unit_matching_bounded_diam(disks: Sequence[Disk], eps: float,
                                      diameter_hint: float) -> Matching:
    """Same guarantee as :func:`approx_unit_matching` for a union of small diameter.

    The hint is checked against the bounding box; a union that is visibly
    wider than ``diameter_hint`` is rejected.  After the tall-tower cleanup
    only ``O(diameter_hint**2 / eps)`` disks survive, so the work beyond the
    linear scan depends on the hint rather than on ``len(disks)``.
    """
    return run_unit_pipeline_bounded(disks, eps, diameter_hint).matching


def run_unit_pipeline_bounded(disks: Sequence[Disk], eps: float,
                              diameter_hint: float) -> UnitPipelineResult:
    if not diameter_hint > 0.0:
        raise ValueError(f"diameter_hint must be positive, got {diameter_hint}")
    lo, _ = union_diameter_bounds(disks)
    if lo > diameter_hint * (1.0 + 1e-9):
        raise ValueError(f"disks span at least {lo:.6g}, more than the hint {diameter_hint:.6g}")
    return run_unit_pipeline(disks, eps)


__all__ = [
    "FORWARD_OFFSETS",
    "NEIGHBOR_OFFSETS",
    "RESIDUAL_CONSTANT",
    "Tower",
    "UnitEpsParams",
    "UnitPipelineResult",
    "approx_unit_matching",
    "approx_unit_matching_bounded_diam",
    "greedy_unit",
    "registration_point",
    "run_unit_pipeline",
    "run_unit_pipeline_bounded",
    "tall_tower_reduction",
    "tower_decompose",
]
