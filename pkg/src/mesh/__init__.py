from src.mesh.triangle_mesh import (
    Side,
    TriangleMesh,
    build_unit_square_mesh,
    triangle_geometry,
    boundary_edges_on_side,
    dump_mesh,
)

__all__ = [
    "Side",
    "TriangleMesh",
    "build_unit_square_mesh",
    "triangle_geometry",
    "boundary_edges_on_side",
    "dump_mesh",
]
