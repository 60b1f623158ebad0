"""Planar disks, circles and the predicates every other module builds on.

All predicates compare squared distances so that no square root enters a
decision.  Disks are closed: tangent disks intersect.
"""

from __future__ import annotations

import math
from collections import namedtuple
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class Disk(namedtuple("_Disk", "cx cy r")):
    """A closed disk with center ``(cx, cy)`` and radius ``r > 0``."""

    __slots__ = ()

    def __new__(cls, cx: float, cy: float, r: float) -> Disk:
        cx = float(cx)
        cy = float(cy)
        r = float(r)
        if not (math.isfinite(cx) and math.isfinite(cy) and math.isfinite(r)):
            raise ValueError(f"disk coordinates must be finite, got ({cx}, {cy}, {r})")
        if not r > 0.0:
            raise ValueError(f"disk radius must be positive, got {r}")
        return super().__new__(cls, cx, cy, r)

    @property
    def diameter(self) -> float:
        return 2.0 * self.r


class GridPoint(NamedTuple):
    i: int
    j: int


class Circle(namedtuple("_Circle", "cx cy radius")):
    """A circle (the curve, not the disk it bounds)."""

    __slots__ = ()

    def __new__(cls, cx: float, cy: float, radius: float) -> Circle:
        radius = float(radius)
        if not radius > 0.0:
            raise ValueError(f"circle radius must be positive, got {radius}")
        return super().__new__(cls, float(cx), float(cy), radius)


def as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    """Accept a generator or a seed; never falls back to global state."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def disks_intersect(a: Disk, b: Disk) -> bool:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    s = a[2] + b[2]
    return dx * dx + dy * dy <= s * s


def point_in_disk(x: float, y: float, d: Disk) -> bool:
    dx = x - d[0]
    dy = y - d[1]
    return dx * dx + dy * dy <= d[2] * d[2]


def covered_grid_points(d: Disk) -> list[GridPoint]:
    """Integer lattice points inside the closed unit disk ``d``.

    Scans the 3x3 block of candidates around the center; the result is in
    lexicographic ``(i, j)`` order and always has between 1 and 5 points.
    """
    if d.r != 1.0:
        raise ValueError(f"covered_grid_points needs a unit disk, got r={d.r}")
    cx, cy = d.cx, d.cy
    fi = math.floor(cx)
    fj = math.floor(cy)
    out = []
    for i in range(fi - 1, fi + 3):
        dx = i - cx
        if dx * dx > 1.0:
            continue
        for j in range(fj - 1, fj + 3):
            dy = j - cy
            if dx * dx + dy * dy <= 1.0:
                out.append(GridPoint(i, j))
    return out


def disk_intersects_circle(d: Disk, c: Circle) -> bool:
    """True iff the closed disk meets the circle curve.

    Equivalent to ``|dist - radius| <= r`` evaluated without square roots:
    the disk hits the curve unless it lies strictly inside the inner radius or
    strictly outside the outer radius of the annulus ``radius +- r``.
    """
    dx = d.cx - c.cx
    dy = d.cy - c.cy
    dist2 = dx * dx + dy * dy
    outer = c.radius + d.r
    if dist2 > outer * outer:
        return False
    inner = c.radius - d.r
    return inner <= 0.0 or dist2 >= inner * inner


def disk_inside_circle(d: Disk, c: Circle) -> bool:
    """Disk strictly inside the circle (does not touch it)."""
    inner = c.radius - d.r
    if inner <= 0.0:
        return False
    dx = d.cx - c.cx
    dy = d.cy - c.cy
    return dx * dx + dy * dy < inner * inner


def random_circle(center: tuple[float, float], alpha: float,
                  rng: np.random.Generator | int | None) -> Circle:
    """Circle at ``center`` with radius drawn uniformly from ``[alpha, 2*alpha]``."""
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    gen = as_rng(rng)
    return Circle(center[0], center[1], gen.uniform(alpha, 2.0 * alpha))


def radius_class(r: float) -> int:
    """Power-of-two bucket: ``r`` lies in ``[2**(k-1), 2**k)`` for class ``k``."""
    return math.frexp(r)[1]


def bounding_box(disks: Iterable[Disk]) -> tuple[float, float, float, float]:
    xs0 = ys0 = math.inf
    xs1 = ys1 = -math.inf
    for cx, cy, r in disks:
        xs0 = min(xs0, cx - r)
        ys0 = min(ys0, cy - r)
        xs1 = max(xs1, cx + r)
        ys1 = max(ys1, cy + r)
    return xs0, ys0, xs1, ys1


def union_diameter_bounds(disks: Sequence[Disk]) -> tuple[float, float]:
    """Cheap lower and upper bounds on the diameter of the union of ``disks``.

    Lower bound is the longer bounding box side, upper bound its diagonal.
    """
    if not disks:
        return 0.0, 0.0
    x0, y0, x1, y1 = bounding_box(disks)
    w, h = x1 - x0, y1 - y0
    return max(w, h), math.hypot(w, h)
