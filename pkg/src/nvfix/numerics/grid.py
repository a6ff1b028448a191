"""Grids and per-surface geometry used by the scanners.

S^2 is covered by the six faces of an equiangular cube; RP^2 uses the three
positive faces (every line through the origin meets one of them).  The torus
is the unit square with wrap-around, the disc the square [-1, 1]^2 clipped to
the unit disc.  A cell is (face, i, j) at a given edge size in face
coordinates; all scans subdivide cells by halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..errors import NvfixError

# normal, e1, e2 with e1 x e2 = normal
CUBE_FACES = np.array([
    [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
    [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    [[-1, 0, 0], [0, 0, 1], [0, 1, 0]],
    [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
    [[0, 0, -1], [0, 1, 0], [1, 0, 0]],
], dtype=float)

ROOT_CELL = 0.02  # coarse starting cell size (radians on the sphere)


@dataclass(frozen=True)
class GridSpec:
    """Tolerances of the grid scanners.

    resolution: finest cell edge (radians on S^2/RP^2, units of length on
    the torus and disc).  refinement_depth: extra local bisection levels
    applied around each candidate before polishing.  cluster_radius: points
    closer than this are the same fixed point (default 5 * resolution).
    """

    resolution: float = 1e-3
    refinement_depth: int = 3
    cluster_radius: Optional[float] = None
    safety: float = 2.0
    residual_tol: float = 1e-8
    zero_tol: float = 1e-12
    max_seeds: int = 4

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        if self.refinement_depth < 0:
            raise ValueError("refinement_depth must be >= 0")
        if self.cluster_radius is None:
            object.__setattr__(self, "cluster_radius", 5 * self.resolution)
        if not self.cluster_radius > self.resolution:
            raise ValueError("cluster_radius must exceed resolution")

    def with_overrides(self, **kw) -> GridSpec:
        kw = {k: v for k, v in kw.items() if v is not None}
        if "resolution" in kw and "cluster_radius" not in kw:
            kw["cluster_radius"] = None
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {"resolution": self.resolution, "refinement_depth": self.refinement_depth,
                "cluster_radius": self.cluster_radius}


def level_plan(span: float, resolution: float, root: float = ROOT_CELL) -> tuple[int, int]:
    """(cells per face edge at the root, number of halvings) so that the final
    cell edge is <= resolution and the root edge is about ``root``."""
    k = max(0, int(math.floor(math.log2(max(root, resolution) / resolution))))
    n_root = int(math.ceil(span / (resolution * 2**k)))
    return n_root, k


class Surface:
    """Base surface: cells, their centres, chart maps and codomain differences."""

    name = "surface"
    dim = 3
    faces: np.ndarray = CUBE_FACES
    span = math.pi / 2
    origin = -math.pi / 4
    periodic = False

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def points(self, face: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        f = self.faces[face]
        v = f[:, 0] + np.tan(a)[:, None] * f[:, 1] + np.tan(b)[:, None] * f[:, 2]
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def diff(self, y: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Vector whose norm is the codomain distance from x to y."""
        return y - x

    def dist(self, y, x) -> np.ndarray:
        return np.linalg.norm(self.diff(np.atleast_2d(y), np.atleast_2d(x)), axis=1)

    def cell_radius_factor(self) -> float:
        """Bound on (distance centre -> corner) / (cell edge)."""
        return 0.85  # measured max 0.806 for the equiangular cube

    # charts ----------------------------------------------------------
    def frame(self, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(c, dtype=float)
        helper = np.eye(3)[int(np.argmin(np.abs(c)))]
        e1 = np.cross(helper, c)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(c, e1)
        return e1, e2  # e1 x e2 = c

    def from_chart(self, c: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Inverse gnomonic chart at c."""
        e1, e2 = self.frame(c)
        u = np.atleast_2d(u)
        v = c + u[:, :1] * e1 + u[:, 1:2] * e2
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def to_chart(self, c: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Gnomonic chart at c (y must lie in the open hemisphere of c)."""
        e1, e2 = self.frame(c)
        y = np.atleast_2d(y)
        h = y @ c
        return np.column_stack([y @ e1, y @ e2]) / h[:, None]

    def canonical(self, x: np.ndarray) -> np.ndarray:
        return x

    def neighbour_points(self, x: np.ndarray) -> np.ndarray:
        """Points used for neighbour search (RP^2 adds antipodes)."""
        return x


class SphereSurface(Surface):
    name = "sphere"


class RP2Surface(Surface):
    name = "rp2"
    faces = CUBE_FACES[:3]

    def diff(self, y, x):
        s = np.where(np.einsum("ij,ij->i", y, x) >= 0, 1.0, -1.0)
        return y - s[:, None] * x

    def to_chart(self, c, y):
        y = np.atleast_2d(y)
        s = np.where(y @ c >= 0, 1.0, -1.0)
        return super().to_chart(c, y * s[:, None])

    def canonical(self, x):
        from ..geometry import canonical_rp2

        return canonical_rp2(x)

    def neighbour_points(self, x):
        return np.vstack([x, -x])


class TorusSurface(Surface):
    name = "torus"
    dim = 2
    faces = np.zeros((1, 3, 3))
    span = 1.0
    origin = 0.0
    periodic = True

    def points(self, face, a, b):
        return np.mod(np.column_stack([a, b]), 1.0)

    def diff(self, y, x):
        return np.mod(y - x + 0.5, 1.0) - 0.5

    def cell_radius_factor(self):
        return 0.5 * math.sqrt(2) * 1.01

    def from_chart(self, c, u):
        return np.mod(np.asarray(c) + np.atleast_2d(u), 1.0)

    def to_chart(self, c, y):
        return self.diff(np.atleast_2d(y), np.broadcast_to(c, np.shape(np.atleast_2d(y))))

    def canonical(self, x):
        return np.mod(x, 1.0)


class DiscSurface(Surface):
    name = "disc"
    dim = 2
    faces = np.zeros((1, 3, 3))
    span = 2.0
    origin = -1.0

    def points(self, face, a, b):
        v = np.column_stack([a, b])
        r = np.maximum(1.0, np.linalg.norm(v, axis=1))
        return v / r[:, None]

    def cell_radius_factor(self):
        return 0.5 * math.sqrt(2) * 1.01

    def from_chart(self, c, u):
        v = np.asarray(c) + np.atleast_2d(u)
        r = np.maximum(1.0, np.linalg.norm(v, axis=1))
        return v / r[:, None]

    def to_chart(self, c, y):
        return np.atleast_2d(y) - np.asarray(c)


SURFACES = {
    "sphere": SphereSurface(), "s2": SphereSurface(),
    "rp2": RP2Surface(), "projective_plane": RP2Surface(),
    "torus": TorusSurface(), "t2": TorusSurface(),
    "disc": DiscSurface(), "disk": DiscSurface(),
}


def get_surface(surface) -> Surface:
    if isinstance(surface, Surface):
        return surface
    name = getattr(surface, "value", None) or getattr(getattr(surface, "kind", None), "value", None) or surface
    key = str(name).strip().lower()
    if key not in SURFACES:
        raise NvfixError(f"no numerical model for surface {surface!r}")
    return SURFACES[key]


@dataclass
class Cells:
    """A batch of cells at one level: face index and integer position."""

    face: np.ndarray
    i: np.ndarray
    j: np.ndarray
    size: float

    def __len__(self) -> int:
        return len(self.face)

    def centers(self, surf: Surface) -> np.ndarray:
        a = surf.origin + (self.i + 0.5) * self.size
        b = surf.origin + (self.j + 0.5) * self.size
        return surf.points(self.face, a, b)

    def subdivide(self, mask: Optional[np.ndarray] = None) -> Cells:
        f, i, j = (self.face, self.i, self.j) if mask is None else (self.face[mask], self.i[mask], self.j[mask])
        di = np.array([0, 1, 0, 1])
        dj = np.array([0, 0, 1, 1])
        return Cells(
            np.repeat(f, 4), (2 * i[:, None] + di).ravel(), (2 * j[:, None] + dj).ravel(), self.size / 2)

    def take(self, idx) -> Cells:
        return Cells(self.face[idx], self.i[idx], self.j[idx], self.size)


def root_cells(surf: Surface, n_root: int) -> Cells:
    ii, jj = np.meshgrid(np.arange(n_root), np.arange(n_root), indexing="ij")
    nf = surf.n_faces
    face = np.repeat(np.arange(nf), n_root * n_root)
    cells = Cells(face, np.tile(ii.ravel(), nf), np.tile(jj.ravel(), nf), surf.span / n_root)
    if isinstance(surf, DiscSurface):
        a = surf.origin + (cells.i + 0.5) * cells.size
        b = surf.origin + (cells.j + 0.5) * cells.size
        keep = np.hypot(a, b) <= 1 + cells.size
        cells = cells.take(np.nonzero(keep)[0])
    return cells


def sphere_sample(resolution: float, surface="sphere") -> np.ndarray:
    """Cell centres of a uniform cube grid with edge about ``resolution``."""
    surf = get_surface(surface)
    n = max(1, int(math.ceil(surf.span / resolution)))
    return root_cells(surf, n).centers(surf)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic, nearly uniform ``count``-point set on S^2."""
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    r = np.sqrt(np.maximum(0.0, 1 - z * z))
    ang = np.pi * (3 - math.sqrt(5)) * k
    return np.column_stack([r * np.cos(ang), r * np.sin(ang), z])
