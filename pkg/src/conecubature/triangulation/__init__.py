"""Simplicial decomposition of arrangement cones."""

from .simplices import (
    BaseProjection,
    Simplex,
    SimplicialCone,
    cone_axis,
    decompose_all,
    decompose_cone,
    generator_abs_det,
    partition_dump,
    project_to_base,
    simplices_per_cone,
    triangulate_base,
)

__all__ = [
    "Simplex",
    "BaseProjection",
    "SimplicialCone",
    "cone_axis",
    "project_to_base",
    "triangulate_base",
    "generator_abs_det",
    "decompose_cone",
    "decompose_all",
    "simplices_per_cone",
    "partition_dump",
]
