"""Voxel grid construction and silhouette cone carving.

The grid is axis-aligned and centered on the reconstructed hip joint. Each
voxel center is projected into every camera; the projection is floor-rounded
to a pixel and the voxel's support counts the cameras whose silhouette mask
is set there. Occupancy is support >= the camera threshold. Projections
behind a camera or outside the frame count as not-in-cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadDims, NoSilhouettes
from ..geometry import CameraView

DEFAULT_DIMS = (160, 160, 160)
DEFAULT_EXTENT_M = (1.8, 1.8, 1.9)


@dataclass
class VoxelGrid:
    origin: np.ndarray          # min corner (meters)
    dims: tuple                 # (nx, ny, nz)
    spacing: np.ndarray         # per-axis voxel edge (meters)
    occupancy: np.ndarray | None = None   # (nx, ny, nz) bool
    support: np.ndarray | None = None     # (nx, ny, nz) uint8

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def voxel_volume_m3(self) -> float:
        return float(np.prod(self.spacing))

    def centers(self) -> np.ndarray:
        """(N, 3) voxel centers in x-fastest-last (C) index order."""
        nx, ny, nz = self.dims
        ix, iy, iz = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz),
                                 indexing="ij")
        idx = np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1)
        return self.origin + (idx + 0.5) * self.spacing

    def occupied_volume_m3(self) -> float:
        if self.occupancy is None:
            return 0.0
        return float(self.occupancy.sum()) * self.voxel_volume_m3


def build_grid(hip, extent_m=DEFAULT_EXTENT_M, dims=DEFAULT_DIMS) -> VoxelGrid:
    """Axis-aligned grid of ``dims`` voxels spanning ``extent_m`` around ``hip``."""
    hip = np.asarray(hip, dtype=float)
    extent = np.asarray(extent_m, dtype=float)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise BadDims(f"dims must be three positive counts, got {dims}")
    if np.any(extent <= 0) or not np.all(np.isfinite(extent)):
        raise BadDims(f"extents must be positive, got {extent.tolist()}")
    spacing = extent / np.asarray(dims, dtype=float)
    origin = hip - extent / 2.0
    return VoxelGrid(origin=origin, dims=dims, spacing=spacing)


def carve(grid: VoxelGrid, silhouettes: list[tuple[np.ndarray, CameraView]],
          support_threshold: int | None = None) -> VoxelGrid:
    """Fill occupancy: a voxel is kept when at least ``support_threshold``
    cameras see its floor-rounded projection inside their mask.

    The default threshold is C - 1, tolerating one bad silhouette.
    """
    if not silhouettes:
        raise NoSilhouettes("carving needs at least one silhouette")
    n_cams = len(silhouettes)
    if support_threshold is None:
        support_threshold = max(n_cams - 1, 1)
    if support_threshold > n_cams:
        raise ValueError(f"threshold {support_threshold} exceeds camera "
                         f"count {n_cams}")
    centers = grid.centers()
    support = np.zeros(len(centers), dtype=np.uint8)
    for mask, cam in silhouettes:
        h, w = mask.shape
        intr = cam.intrinsics
        if (w, h) != (intr.image_w, intr.image_h):
            raise ValueError("mask resolution must match the intrinsics")
        pose = cam.pose
        pc = (centers - pose.translation) @ pose.rotation
        z = pc[:, 2]
        ok = z > 1e-9
        u = np.full(len(centers), -1.0)
        v = np.full(len(centers), -1.0)
        u[ok] = intr.fx * pc[ok, 0] / z[ok] + intr.cx
        v[ok] = intr.fy * pc[ok, 1] / z[ok] + intr.cy
        ui = np.floor(u).astype(np.int64)
        vi = np.floor(v).astype(np.int64)
        inside = ok & (ui >= 0) & (ui < w) & (vi >= 0) & (vi < h)
        hit = np.zeros(len(centers), dtype=bool)
        hit[inside] = mask[vi[inside], ui[inside]]
        support += hit
    grid.support = support.reshape(grid.dims)
    grid.occupancy = grid.support >= support_threshold
    return grid
