"""Fixed points, fixed point indices and coincidence distances of catalog maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import ZeroOnCircle
from .grid import GridSpec, Surface, get_surface
from .scan import CoincidenceResult, merge_points, minimise_residual, scan_zeros


class Unreliable:
    """Marker for an index whose winding number did not stabilise."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "Unreliable"

    def __reduce__(self):
        return (Unreliable, ())


UNRELIABLE = Unreliable()


def map_name(m) -> str:
    if isinstance(m, (list, tuple)):
        return "{" + ", ".join(map_name(f) for f in m) + "}"
    return str(getattr(m, "name", None) or type(m).__name__)


def _is_multivalued(m) -> bool:
    return bool(getattr(m, "multivalued", False))


def displacement_field(m, surface):
    """x -> vector from x to (the nearest value of) m(x)."""
    surf = get_surface(surface)
    if _is_multivalued(m):
        def fn(x):
            vals = np.asarray(m.values(x))
            D = np.stack([surf.diff(v, x) for v in vals])
            best = np.argmin(np.linalg.norm(D, axis=2), axis=0)
            return D[best, np.arange(len(x))]
        return fn
    return lambda x: surf.diff(np.asarray(m(x), dtype=float), x)


def _branch_near(m, surf: Surface, centre: np.ndarray):
    """Single-valued local branch of ``m``: the value nearest ``centre``."""
    if not _is_multivalued(m):
        return m

    def f(x):
        vals = np.asarray(m.values(x))
        d = np.stack([surf.dist(v, np.broadcast_to(centre, v.shape)) for v in vals])
        best = np.argmin(d, axis=0)
        return vals[best, np.arange(vals.shape[1])]
    return f


def winding_number(v: np.ndarray) -> tuple[int, float]:
    """Winding of a closed planar polygon around 0 and its largest angle step."""
    ang = np.arctan2(v[:, 1], v[:, 0])
    step = np.diff(np.append(ang, ang[0]))
    step = (step + np.pi) % (2 * np.pi) - np.pi
    return int(round(float(np.sum(step)) / (2 * np.pi))), float(np.max(np.abs(step)))


def fixed_point_index(m, point, radius: float, surface="sphere", zero_tol: float = 1e-12,
                      min_samples: int = 64, max_samples: int = 1024):
    """Winding number of chart(x) - chart(f(x)) on the circle of ``radius``
    around ``point`` in the gnomonic (or flat) chart centred there.

    The sample count starts at ``min_samples`` and doubles until two
    consecutive counts give the same winding with every angle step below
    pi/2; otherwise the result is ``UNRELIABLE``.
    """
    surf = get_surface(surface)
    c = np.asarray(point, dtype=float).ravel()
    if surf.dim == 3:
        c = c / np.linalg.norm(c)
    f = _branch_near(m, surf, c)
    prev = None
    n = min_samples
    while n <= max_samples:
        t = 2 * np.pi * np.arange(n) / n
        u = radius * np.column_stack([np.cos(t), np.sin(t)])
        x = surf.from_chart(c, u)
        y = np.asarray(f(x), dtype=float)
        v = surf.to_chart(c, x) - surf.to_chart(c, y)
        if np.min(np.linalg.norm(v, axis=1)) < zero_tol:
            raise ZeroOnCircle(f"displacement vanishes on the circle of radius {radius:g}")
        w, worst = winding_number(v)
        if prev is not None and w == prev and worst < np.pi / 2:
            return w
        prev = w
        n *= 2
    return UNRELIABLE


@dataclass(frozen=True)
class FixedPointCluster:
    location: tuple
    index: object
    diameter: float
    residual: float
    coordinate: Optional[int] = None
    index_radius: Optional[float] = None

    def to_dict(self) -> dict:
        idx = self.index if isinstance(self.index, int) else "unreliable"
        out = {"location": [round(v, 12) for v in self.location], "index": idx,
               "index_radius": self.index_radius, "diameter": self.diameter}
        if self.coordinate is not None:
            out["coordinate"] = self.coordinate
        return out


@dataclass(frozen=True)
class FixedPointReport:
    clusters: tuple
    map_id: str
    grid: GridSpec
    surface: str

    @property
    def total_count(self) -> int:
        return len(self.clusters)

    def index_sum(self):
        if any(not isinstance(c.index, int) for c in self.clusters):
            return UNRELIABLE
        return sum(c.index for c in self.clusters)

    def to_dict(self) -> dict:
        return {"map": self.map_id, "surface": self.surface, "grid": self.grid.to_dict(),
                "total_count": self.total_count, "clusters": [c.to_dict() for c in self.clusters],
                "provenance": "scan"}


MAX_INDEX_RADIUS = 0.5


def _safe_index(m, p, radius, surf, grid, limit):
    """Index with two fallbacks: shrink the circle if the displacement
    vanishes on it, grow it (while it still isolates p) if the winding does
    not stabilise.  Returns (index, radius used)."""
    r = min(radius, limit)
    for _ in range(4):
        try:
            idx = fixed_point_index(m, p, r, surf, zero_tol=grid.zero_tol)
            break
        except ZeroOnCircle:
            r *= 0.7
    else:
        return UNRELIABLE, r
    while idx is UNRELIABLE and 4 * r <= limit:
        r *= 4
        try:
            idx = fixed_point_index(m, p, r, surf, zero_tol=grid.zero_tol)
        except ZeroOnCircle:
            break
    return idx, r


def find_fixed_points(m, surface="sphere", grid: Optional[GridSpec] = None,
                      compute_index: bool = True, index_radius: Optional[float] = None) -> FixedPointReport:
    """Fixed point clusters of a single-valued map, a split list of maps
    (scanned per coordinate) or a multivalued map with ``values``."""
    surf = get_surface(surface)
    grid = grid or GridSpec()
    maps = list(m) if isinstance(m, (list, tuple)) else [m]
    pts, res, coords = [], [], []
    for k, f in enumerate(maps):
        for root in scan_zeros(surf, displacement_field(f, surf), grid).roots:
            pts.append(root.point)
            res.append(root.residual)
            coords.append(k)
    merged = merge_points(surf, pts, res, grid.cluster_radius)
    radius = index_radius or grid.cluster_radius / 2
    owner = [coords[min(mc.members, key=lambda a: (res[a], a))] for mc in merged]
    clusters = []
    for c, mc in enumerate(merged):
        k = owner[c]
        idx, used = None, None
        if compute_index:
            # the circle must not reach another fixed point of the same coordinate
            others = [o.location for o, ko in zip(merged, owner) if ko == k and o is not mc]
            limit = MAX_INDEX_RADIUS
            if others:
                limit = min(limit, 0.45 * float(np.min(surf.dist(np.array(others), np.broadcast_to(
                    mc.location, (len(others), len(mc.location)))))))
            idx, used = _safe_index(maps[k], mc.location, radius, surf, grid, limit)
        clusters.append(FixedPointCluster(
            tuple(float(v) for v in mc.location), idx, mc.diameter,
            float(min(res[a] for a in mc.members)), k + 1 if isinstance(m, (list, tuple)) else None, used))
    return FixedPointReport(tuple(clusters), map_name(m), grid, surf.name)


def coincidence_min_distance(f, g, surface="sphere", grid: Optional[GridSpec] = None) -> CoincidenceResult:
    """min over the surface of d(f(x), g(x)) (codomain metric of ``surface``)."""
    surf = get_surface(surface)
    fn = lambda x: surf.diff(np.asarray(f(x), dtype=float), np.asarray(g(x), dtype=float))  # noqa: E731
    return minimise_residual(surf, fn, grid)
