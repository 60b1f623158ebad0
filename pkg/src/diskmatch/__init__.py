"""Exact, approximate and estimated maximum matchings in disk intersection graphs."""

from .estimators import (ImportanceTriple, SeparatorNode, build_separator_hierarchy,
                         estimate_disk_matching_size, estimate_unit_matching_size,
                         importance_sample)
from .general import (GeomNeighborIndex, NeighborhoodClass, TooBig, bipartite_geom_matching,
                      classify_free_disks, geom_neighbor_index, random_coloring_matching,
                      small_matching_exact)
from .geometry import (Circle, Disk, GridPoint, covered_grid_points, disk_intersects_circle,
                       disks_intersect, random_circle)
from .graph import (IntersectionGraph, Matching, build_intersection_graph, density,
                    density_exact, greedy_matching_sweep)
from .matching import (AugmentingPath, approx_matching_eps, exact_maximum_matching,
                       find_disjoint_augmenting_paths, hopcroft_karp_phase)
from .unit import (Tower, UnitEpsParams, approx_unit_matching, approx_unit_matching_bounded_diam,
                   greedy_unit, tall_tower_reduction, tower_decompose)

__version__ = "0.1.0"

__all__ = [
    "AugmentingPath",
    "Circle",
    "Disk",
    "GeomNeighborIndex",
    "GridPoint",
    "ImportanceTriple",
    "IntersectionGraph",
    "Matching",
    "NeighborhoodClass",
    "SeparatorNode",
    "TooBig",
    "Tower",
    "UnitEpsParams",
    "approx_matching_eps",
    "approx_unit_matching",
    "approx_unit_matching_bounded_diam",
    "bipartite_geom_matching",
    "build_intersection_graph",
    "build_separator_hierarchy",
    "classify_free_disks",
    "covered_grid_points",
    "density",
    "density_exact",
    "disk_intersects_circle",
    "disks_intersect",
    "estimate_disk_matching_size",
    "estimate_unit_matching_size",
    "exact_maximum_matching",
    "find_disjoint_augmenting_paths",
    "geom_neighbor_index",
    "greedy_matching_sweep",
    "greedy_unit",
    "hopcroft_karp_phase",
    "importance_sample",
    "random_circle",
    "random_coloring_matching",
    "small_matching_exact",
    "tall_tower_reduction",
    "tower_decompose",
]
