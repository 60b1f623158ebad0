"""Matching-size estimators: importance sampling, shifted grid, separators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

import numpy as np

from .geometry import (Circle, Disk, as_rng, disk_inside_circle,
                       disk_intersects_circle)
from .graph import build_intersection_graph, density, greedy_matching_sweep
from .general import TooBig, small_matching_exact
from .matching import _check_eps, approx_matching_eps
from .unit import _check_unit, greedy_unit, run_unit_pipeline_bounded


# --- importance sampling ------------------------------------------------------

@dataclass(frozen=True)
class ImportanceTriple:
    """A substructure with multiplicity ``w`` and coarse size estimate ``e``.

    The caller promises that the true size of the structure lies within a
    factor ``b`` of ``e``.
    """

    structure_id: Hashable
    w: float
    e: float

    def __post_init__(self):
        if not (self.w >= 1.0 and self.e >= 1.0):
            raise ValueError(f"weights must be >= 1, got w={self.w}, e={self.e}")


def sample_budget(epsA: float, delta: float, b: float, M: float, c_I: float = 1.0) -> int:
    """Target sample count ``t0``; with ``r <= t0`` triples nothing is dropped."""
    if not 0.0 < epsA < 1.0 or not 0.0 < delta < 1.0:
        raise ValueError("epsA and delta must lie in (0, 1)")
    if b < 1.0:
        raise ValueError(f"b must be >= 1, got {b}")
    lm = math.log(max(M, 2.0))
    llm = math.log(max(lm, 1.0))
    return math.ceil(c_I * b ** 4 / epsA ** 2 * (max(1.0, llm) + math.log(1.0 / delta)) * max(1.0, lm))


# frozen: output size <= OUTPUT_SIZE_CONSTANT * sample_budget(...) for c_I = 1
OUTPUT_SIZE_CONSTANT = 2.0


def importance_sample_arrays(w: np.ndarray, e: np.ndarray, epsA: float, delta: float,
                             b: float, M: float, rng=None, c_I: float = 1.0,
                             ) -> tuple[np.ndarray, np.ndarray]:
    """Array form of :func:`importance_sample`: returns kept positions and new weights."""
    w = np.asarray(w, dtype=float)
    e = np.asarray(e, dtype=float)
    if w.shape != e.shape:
        raise ValueError("w and e must have the same shape")
    if w.size and (w.min() < 1.0 or e.min() < 1.0):
        raise ValueError("weights must be >= 1")
    t0 = sample_budget(epsA, delta, b, M, c_I)
    if w.size <= t0:
        return np.arange(w.size), w.copy()
    gen = as_rng(rng)
    share = w * e
    p = np.minimum(1.0, t0 * share / share.sum())
    keep = np.flatnonzero(gen.random(w.size) < p)
    return keep, w[keep] / p[keep]


def importance_sample(triples: Sequence[ImportanceTriple], epsA: float, delta: float,
                      b: float, M: float, rng=None, c_I: float = 1.0,
                      ) -> list[ImportanceTriple]:
    """Subsample triples so the reweighted sum still estimates the total.

    Triple ``i`` survives with probability ``p_i`` proportional to
    ``w_i * e_i`` (capped at 1) and its weight becomes ``w_i / p_i``, which
    keeps ``sum(w' * size)`` unbiased.  Since every size is within ``b`` of
    its estimate, no single survivor carries more than a ``b**2 / t0`` share
    of the total, which is what drives the concentration.  Inputs already no
    longer than the budget come back unchanged.
    """
    triples = list(triples)
    t0 = sample_budget(epsA, delta, b, M, c_I)
    if len(triples) <= t0:
        return triples
    w = np.fromiter((t.w for t in triples), float, len(triples))
    e = np.fromiter((t.e for t in triples), float, len(triples))
    keep, nw = importance_sample_arrays(w, e, epsA, delta, b, M, rng, c_I)
    return [ImportanceTriple(triples[k].structure_id, float(x), triples[k].e)
            for k, x in zip(keep.tolist(), nw.tolist())]


# --- shifted grid (unit disks) ------------------------------------------------

@dataclass
class EstimateReport:
    value: float
    cells: int = 0
    sampled: int = 0
    dropped_disks: int = 0
    exact: bool = False
    hierarchy: Any = None  # separator root, when one was built


def estimate_unit_matching_size(disks: Sequence[Disk], eps: float, rng=None,
                                report: EstimateReport | None = None) -> float:
    """Estimate the maximum matching size of a unit-disk graph.

    A grid of side ``psi = ceil(32 / eps)`` is shifted uniformly at random
    and disks crossing a cell boundary are dropped.  Each cell's greedy
    matching is a 2-approximation of its optimum and serves as the coarse
    estimate for importance sampling; the sampled cells are then matched
    with the bounded-diameter pipeline at ``eps / 16``.
    """
    _check_eps(eps)
    _check_unit(disks)
    gen = as_rng(rng)
    n = len(disks)
    rep = report if report is not None else EstimateReport(0.0)
    if n == 0:
        rep.value = 0.0
        return 0.0
    psi = math.ceil(32.0 / eps)
    sx, sy = gen.uniform(0.0, psi, size=2)
    cells: dict[tuple[int, int], list[int]] = {}
    dropped = 0
    for i, (cx, cy, _r) in enumerate(disks):
        gx = math.floor((cx - sx) / psi)
        gy = math.floor((cy - sy) / psi)
        x0 = sx + gx * psi
        y0 = sy + gy * psi
        if cx - 1.0 > x0 and cx + 1.0 < x0 + psi and cy - 1.0 > y0 and cy + 1.0 < y0 + psi:
            cells.setdefault((gx, gy), []).append(i)
        else:
            dropped += 1
    triples = []
    for key in sorted(cells):
        members = cells[key]
        e = len(greedy_unit([disks[i] for i in members]))
        if e:
            triples.append(ImportanceTriple(key, 1.0, float(e)))
    chosen = importance_sample(triples, eps / 32.0, float(n) ** -10 if n > 1 else 0.5,
                               2.0, max(n, 2), gen)
    total = 0.0
    for t in chosen:
        sub = [disks[i] for i in cells[t.structure_id]]
        res = run_unit_pipeline_bounded(sub, eps / 16.0, psi * math.sqrt(2.0))
        total += t.w * len(res.matching)
    rep.value = total
    rep.cells = len(triples)
    rep.sampled = len(chosen)
    rep.dropped_disks = dropped
    return total


# --- separator hierarchy ------------------------------------------------------

SPLIT_RATIO = 0.9


@dataclass
class SeparatorNode:
    """One region of the hierarchy.

    ``active`` and ``all_disks`` hold indices of disks lying entirely in the
    region; internal nodes carry the separating circle and two children
    (inside first).
    """

    node_id: int
    active: list[int]
    all_disks: list[int]
    depth: int = 0
    separator_circle: Circle | None = None
    children: list[SeparatorNode] = field(default_factory=list)
    boundary_count: int = 0

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list[SeparatorNode]:
        out = []
        stack = [self]
        while stack:
            v = stack.pop()
            if v.is_leaf:
                out.append(v)
            else:
                stack.extend(reversed(v.children))
        return out

    def nodes(self) -> list[SeparatorNode]:
        out = []
        stack = [self]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(v.children))
        return out


def leaf_capacity(lambda_hat: float, eps: float, c_C: float = 4.0) -> int:
    return math.ceil(c_C * lambda_hat / eps ** 2)


def _split(disks, circle: Circle, members: Sequence[int]) -> tuple[list[int], list[int], list[int]]:
    inside, outside, hit = [], [], []
    for i in members:
        d = disks[i]
        if disk_intersects_circle(d, circle):
            hit.append(i)
        elif disk_inside_circle(d, circle):
            inside.append(i)
        else:
            outside.append(i)
    return inside, outside, hit


def _radius_base(dist_sorted: np.ndarray, k: int, ratio: float) -> float:
    """Lower end ``alpha`` of the radius range around one center.

    Starts from the distance to the ``ceil(k / (2 * ratio))``-th nearest
    active center.  When ``[alpha, 2 * alpha]`` cannot be balanced, alpha is
    moved into the window where at least a ``1 - ratio`` share of centers
    lies within ``alpha`` and at most a ``ratio`` share within ``2 * alpha``.
    """
    m = min(k, math.ceil(k / (2.0 * ratio)))
    alpha = float(dist_sorted[m - 1])
    lo = float(dist_sorted[min(k, math.ceil((1.0 - ratio) * k)) - 1])
    hi = float(dist_sorted[max(1, math.floor(ratio * k)) - 1])
    if 2.0 * alpha >= hi and hi >= 2.0 * lo:
        alpha = max(lo, 0.5 * hi * (1.0 - 1e-9))
    return alpha


def _median_circle(disks, active, pts, center) -> Circle:
    """Circle through the median-distance center; always balanced.

    Disks whose centers lie on the circle are cut, so neither side keeps
    more than ``ceil(k / 2)`` of the ``k`` active disks.
    """
    dist = np.sort(np.sqrt(((pts - center) ** 2).sum(axis=1)))
    radius = float(dist[len(dist) // 2])
    if radius == 0.0:
        # most centers coincide with the center; a tiny circle cuts them all
        radius = 0.5 * min(disks[i][2] for i in active)
    return Circle(float(center[0]), float(center[1]), radius)


def build_separator_hierarchy(disks: Sequence[Disk], active: Sequence[int],
                              all_disks: Sequence[int], lambda_hat: float, eps: float,
                              rng=None, c_C: float = 4.0, ratio: float = SPLIT_RATIO,
                              max_tries: int = 20, max_depth: int = 60,
                              boundary_candidates: int = 8,
                              ) -> tuple[SeparatorNode, set[int]]:
    """Split the active disks recursively with random circles.

    A node stops when it holds at most ``ceil(c_C * lambda_hat / eps**2)``
    active disks.  Otherwise a circle is drawn around the centroid of the
    active centers with radius uniform in ``[alpha, 2 * alpha]``; draws are
    retried (fresh radius, later a jittered center) until neither side keeps
    more than ``ratio`` of the active disks; if every draw fails, the circle
    through the median-distance center is used instead.  Even depths take the first
    balanced draw; odd depths draw a few balanced candidates and keep the
    one cutting the fewest disks, which keeps boundaries small.  Every disk
    the circle touches is lost; the rest go to the inside or the outside
    child.
    """
    if lambda_hat < 1:
        raise ValueError(f"lambda_hat must be >= 1, got {lambda_hat}")
    _check_eps(eps)
    gen = as_rng(rng)
    cap = leaf_capacity(lambda_hat, eps, c_C)
    all_set = set(all_disks)
    for i in active:
        if i not in all_set:
            raise ValueError(f"active disk {i} is not among all_disks")
    lost: set[int] = set()
    ids = itertools.count()
    root = SeparatorNode(next(ids), sorted(active), sorted(all_disks))
    stack = [root]
    while stack:
        node = stack.pop()
        k = len(node.active)
        if k <= cap or node.depth >= max_depth:
            continue
        pts = np.array([[disks[i][0], disks[i][1]] for i in node.active])
        centroid = pts.mean(axis=0)
        spread = float(np.sqrt(((pts - centroid) ** 2).sum(axis=1).max()))
        if spread == 0.0:
            continue  # all centers coincide, nothing to separate
        want = boundary_candidates if node.depth % 2 else 1
        balanced = []
        center = centroid
        for attempt in range(max_tries):
            if attempt == max_tries // 2:
                center = centroid + gen.normal(0.0, 0.25 * spread, size=2)
            dist = np.sort(np.sqrt(((pts - center) ** 2).sum(axis=1)))
            alpha = _radius_base(dist, k, ratio)
            if alpha <= 0.0:
                alpha = float(dist[dist > 0][0]) if (dist > 0).any() else spread
            circle = Circle(float(center[0]), float(center[1]), gen.uniform(alpha, 2.0 * alpha))
            inside, outside, hit = _split(disks, circle, node.active)
            worst = max(len(inside), len(outside))
            if worst <= ratio * k:
                full_hit = sum(1 for i in node.all_disks if disk_intersects_circle(disks[i], circle))
                balanced.append((full_hit, attempt, circle))
                if len(balanced) >= want:
                    break
        if balanced:
            circle = min(balanced)[2]
        else:
            circle = _median_circle(disks, node.active, pts, centroid)
        a_in, a_out, _ = _split(disks, circle, node.active)
        if max(len(a_in), len(a_out)) >= k:
            continue  # no progress possible: keep as a leaf
        d_in, d_out, d_hit = _split(disks, circle, node.all_disks)
        lost.update(d_hit)
        node.separator_circle = circle
        node.children = [
            SeparatorNode(next(ids), a_in, d_in, node.depth + 1),
            SeparatorNode(next(ids), a_out, d_out, node.depth + 1),
        ]
        stack.extend(reversed(node.children))
    _fill_boundary_counts(disks, root, lost)
    return root, lost


def _fill_boundary_counts(disks, root: SeparatorNode, lost: set[int]) -> None:
    """Count, per node, the lost disks that touch one of the node's disks."""
    if not lost:
        return
    ids = sorted(set(root.all_disks))
    local = {v: k for k, v in enumerate(ids)}
    g = build_intersection_graph([disks[i] for i in ids])
    lost_local = {local[i] for i in lost if i in local}
    for node in root.nodes():
        touching = set()
        for i in node.all_disks:
            if i in lost:
                continue
            for u in g.adj[local[i]]:
                if u in lost_local:
                    touching.add(u)
        node.boundary_count = len(touching)


def estimate_disk_matching_size(disks: Sequence[Disk], eps: float, rng=None,
                                c_small: float = 1.0, c_C: float = 4.0,
                                report: EstimateReport | None = None) -> float:
    """Estimate the maximum matching size of a general disk graph.

    Small optima are solved exactly.  Otherwise the greedy-matched disks are
    split by a separator hierarchy; each leaf's greedy matching is its
    coarse estimate, leaves are importance-sampled and each sampled leaf is
    matched to within ``eps / 8``.
    """
    _check_eps(eps)
    gen = as_rng(rng)
    rep = report if report is not None else EstimateReport(0.0)
    n = len(disks)
    small = small_matching_exact(disks, c_small)
    if not isinstance(small, TooBig):
        rep.value = float(len(small))
        rep.exact = True
        return rep.value
    greedy = greedy_matching_sweep(disks)
    lam = max(1, density(disks))
    root, lost = build_separator_hierarchy(disks, sorted(greedy.vertices()), range(n),
                                           lam, eps, gen, c_C=c_C)
    leaves = root.leaves()
    triples = []
    for pos, leaf in enumerate(leaves):
        sub = [disks[i] for i in leaf.all_disks]
        e = len(greedy_matching_sweep(sub))
        if e:
            triples.append(ImportanceTriple(pos, 1.0, float(e)))
    chosen = importance_sample(triples, eps / 4.0, float(n) ** -10, 2.0, max(n, 2), gen)
    total = 0.0
    for t in chosen:
        sub = [disks[i] for i in leaves[t.structure_id].all_disks]
        res = small_matching_exact(sub, c_small)
        if isinstance(res, TooBig):
            res = approx_matching_eps(build_intersection_graph(sub), eps / 8.0)
        total += t.w * len(res)
    rep.value = total
    rep.cells = len(triples)
    rep.sampled = len(chosen)
    rep.dropped_disks = len(lost)
    rep.hierarchy = root
    return total


__all__ = [
    "EstimateReport",
    "ImportanceTriple",
    "OUTPUT_SIZE_CONSTANT",
    "SPLIT_RATIO",
    "SeparatorNode",
    "build_separator_hierarchy",
    "estimate_disk_matching_size",
    "estimate_unit_matching_size",
    "importance_sample",
    "importance_sample_arrays",
    "leaf_capacity",
    "sample_budget",
]
