from .marching import marching_cubes
from .mesh import SurfaceMesh, export_mesh, load_ply
from .voxels import DEFAULT_DIMS, DEFAULT_EXTENT_M, VoxelGrid, build_grid, carve
