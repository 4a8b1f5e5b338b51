"""Iso-surface extraction from carved occupancy grids.

Runs the classic 256-case table method (via scikit-image's implementation)
at iso-level 0.5 on the binary occupancy field. With a binary field the
linear edge interpolation degenerates to voxel-edge midpoints, which is the
intended vertex placement: occupancy has no scalar gradient to exploit.

Surfaces close around interior solids; occupancy touching the grid boundary
yields an open sheet there (carved hulls are interior by construction since
the grid is centered on the subject).
"""

from __future__ import annotations

import numpy as np
from skimage.measure import marching_cubes as _marching_cubes

from .mesh import SurfaceMesh
from .voxels import VoxelGrid


def marching_cubes(grid: VoxelGrid, drop_degenerate: bool = True) -> SurfaceMesh:
    """Extract the occupancy surface; empty occupancy gives an empty mesh."""
    if grid.occupancy is None:
        raise ValueError("grid has not been carved")
    if not grid.occupancy.any():
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    volume = grid.occupancy.astype(np.float32)
    verts, faces, normals, _ = _marching_cubes(
        volume, level=0.5, spacing=tuple(grid.spacing))
    # sample (i, j, k) sits at the voxel center origin + (idx + 0.5) * spacing
    verts = verts + grid.origin + 0.5 * grid.spacing
    mesh = SurfaceMesh(verts, faces.astype(np.int64), normals)
    if drop_degenerate:
        mesh = mesh.drop_degenerate()
    return mesh
