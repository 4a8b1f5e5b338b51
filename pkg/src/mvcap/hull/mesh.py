"""Triangle mesh container, OBJ/PLY export and volume integration."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import IoFailure


@dataclass
class SurfaceMesh:
    vertices: np.ndarray   # (V, 3) float
    faces: np.ndarray      # (F, 3) int
    normals: np.ndarray | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        if len(self.faces) and self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")

    @property
    def empty(self) -> bool:
        return len(self.faces) == 0

    def triangle_areas(self) -> np.ndarray:
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def volume_m3(self) -> float:
        """Signed volume by the divergence theorem (meaningful when closed)."""
        if self.empty:
            return 0.0
        a, b, c = (self.vertices[self.faces[:, k]] for k in range(3))
        return float(abs(np.einsum("ij,ij->i", a, np.cross(b, c)).sum()) / 6.0)

    def euler_characteristic(self) -> int:
        edges = set()
        for f in self.faces:
            for i, j in ((0, 1), (1, 2), (2, 0)):
                edges.add(frozenset((int(f[i]), int(f[j]))))
        return len(self.vertices) - len(edges) + len(self.faces)

    def is_closed(self) -> bool:
        """Every edge shared by exactly two faces."""
        count: dict[frozenset, int] = {}
        for f in self.faces:
            for i, j in ((0, 1), (1, 2), (2, 0)):
                e = frozenset((int(f[i]), int(f[j])))
                count[e] = count.get(e, 0) + 1
        return bool(count) and all(v == 2 for v in count.values())

    def drop_degenerate(self, area_tol: float = 1e-12) -> "SurfaceMesh":
        if self.empty:
            return self
        keep = self.triangle_areas() > area_tol
        return SurfaceMesh(self.vertices, self.faces[keep], self.normals)


def _fmt(x: float) -> str:
    return repr(float(x))


def export_mesh(mesh: SurfaceMesh, path, fmt: str | None = None) -> Path:
    """Write OBJ or PLY (ascii); output bytes are deterministic per mesh."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    try:
        if fmt == "obj":
            lines = [f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}"
                     for v in mesh.vertices]
            lines += [f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}" for f in mesh.faces]
            path.write_text("\n".join(lines) + ("\n" if lines else ""))
        elif fmt == "ply":
            head = [
                "ply", "format ascii 1.0",
                f"element vertex {len(mesh.vertices)}",
                "property double x", "property double y", "property double z",
                f"element face {len(mesh.faces)}",
                "property list uchar int vertex_indices",
                "end_header",
            ]
            body = [f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}"
                    for v in mesh.vertices]
            body += [f"3 {f[0]} {f[1]} {f[2]}" for f in mesh.faces]
            path.write_text("\n".join(head + body) + "\n")
        else:
            raise ValueError(f"unknown mesh format {fmt!r}")
    except OSError as e:
        raise IoFailure(str(e)) from e
    return path


def load_ply(path) -> SurfaceMesh:
    lines = Path(path).read_text().splitlines()
    n_v = n_f = 0
    body_at = 0
    for i, line in enumerate(lines):
        if line.startswith("element vertex"):
            n_v = int(line.split()[-1])
        elif line.startswith("element face"):
            n_f = int(line.split()[-1])
        elif line == "end_header":
            body_at = i + 1
            break
    verts = np.array([[float(x) for x in lines[body_at + k].split()]
                      for k in range(n_v)]) if n_v else np.zeros((0, 3))
    faces = np.array([[int(x) for x in lines[body_at + n_v + k].split()[1:4]]
                      for k in range(n_f)], dtype=np.int64) if n_f \
        else np.zeros((0, 3), dtype=np.int64)
    return SurfaceMesh(verts, faces)
