"""Hierarchical zero finding for residual fields on surfaces.

A residual field is a function x -> V(x) in R^k whose norm is the distance
we want to drive to zero (x - f(x) for fixed points, f(x) - y0 for
preimages, f(x) - g(x) for coincidences).  Cells are subdivided while the
residual at the centre stays under a Lipschitz bound times the cell radius;
the surviving finest cells are grouped into connected components, each
component is refined locally from its best cell and polished with
least squares in a gnomonic chart.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import least_squares
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import GridTooCoarse
from .grid import Cells, GridSpec, Surface, get_surface, level_plan, root_cells

VecFn = Callable[[np.ndarray], np.ndarray]

CHUNK = 1 << 15
MAX_CANDIDATES = 2_000_000
MIN_LIPSCHITZ = 2.0


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("NVFIX_THREADS", "1")))
    except ValueError:
        return 1


def evaluate(fn: VecFn, pts: np.ndarray) -> np.ndarray:
    """Apply ``fn`` on fixed-size chunks so results never depend on threads."""
    if len(pts) <= CHUNK:
        return np.asarray(fn(pts), dtype=float)
    chunks = [pts[s:s + CHUNK] for s in range(0, len(pts), CHUNK)]
    nt = thread_count()
    if nt > 1:
        with ThreadPoolExecutor(max_workers=nt) as ex:
            parts = list(ex.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])


def residual(fn: VecFn, pts: np.ndarray) -> np.ndarray:
    return np.linalg.norm(evaluate(fn, pts), axis=1)


def estimate_lipschitz(surf: Surface, pts: np.ndarray, r: np.ndarray, size: float) -> float:
    """Largest |r(a) - r(b)| / |a - b| over neighbouring sample points."""
    tree = _tree(surf, pts)
    pairs = tree.query_pairs(1.6 * size * surf.cell_radius_factor() * 2, output_type="ndarray")
    if len(pairs) == 0:
        return MIN_LIPSCHITZ
    n = len(pts)
    a, b = pairs[:, 0] % n, pairs[:, 1] % n
    keep = a != b
    a, b = a[keep], b[keep]
    d = surf.dist(pts[a], pts[b])
    ok = d > 0
    if not np.any(ok):
        return MIN_LIPSCHITZ
    ratio = np.abs(r[a[ok]] - r[b[ok]]) / d[ok]
    return max(MIN_LIPSCHITZ, 2.0 * float(np.max(ratio)))


def _tree(surf: Surface, pts: np.ndarray) -> cKDTree:
    if surf.periodic:
        return cKDTree(np.mod(pts, 1.0), boxsize=1.0)
    return cKDTree(surf.neighbour_points(pts))


@dataclass(frozen=True)
class Root:
    point: np.ndarray
    residual: float
    component: int


@dataclass
class ScanResult:
    roots: list
    lipschitz: float
    evaluations: int
    candidates: int
    min_residual: float
    argmin: np.ndarray


def _descend(surf: Surface, fn: VecFn, grid: GridSpec, lipschitz: Optional[float]):
    n_root, k = level_plan(surf.span, grid.resolution)
    cells = root_cells(surf, n_root)
    pts = cells.centers(surf)
    r = residual(fn, pts)
    evals = len(pts)
    L = lipschitz if lipschitz is not None else estimate_lipschitz(surf, pts, r, cells.size)
    factor = surf.cell_radius_factor()
    best = int(np.argmin(r))
    gmin, gargmin = float(r[best]), pts[best]
    for _ in range(k):
        keep = r <= grid.safety * L * factor * cells.size + grid.zero_tol
        cells = cells.subdivide(keep)
        if len(cells) > MAX_CANDIDATES:
            raise GridTooCoarse(
                f"{len(cells)} candidate cells at edge {cells.size:.2e}: zero set is not isolated")
        pts = cells.centers(surf)
        r = residual(fn, pts)
        evals += len(pts)
        if len(r):
            b = int(np.argmin(r))
            if r[b] < gmin:
                gmin, gargmin = float(r[b]), pts[b]
    keep = r <= grid.safety * L * factor * cells.size + grid.zero_tol
    idx = np.nonzero(keep)[0]
    return cells.take(idx), pts[idx], r[idx], L, evals, gmin, gargmin


def _components(surf: Surface, pts: np.ndarray, size: float) -> tuple[int, np.ndarray]:
    n = len(pts)
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    tree = _tree(surf, pts)
    pairs = tree.query_pairs(2.2 * size * surf.cell_radius_factor(), output_type="ndarray")
    a, b = pairs[:, 0] % n, pairs[:, 1] % n
    g = coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    return connected_components(g, directed=False)


def local_refine(surf: Surface, fn: VecFn, seed: np.ndarray, step: float, depth: int) -> np.ndarray:
    """Pattern search on a 3x3 stencil in the chart at ``seed``, halving the
    step ``depth`` times."""
    off = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
    centre = np.asarray(seed, dtype=float)
    for _ in range(depth):
        cand = surf.from_chart(centre, off * step)
        r = residual(fn, cand)
        centre = cand[int(np.argmin(r))]
        step /= 2
    return centre


def polish(surf: Surface, fn: VecFn, seed: np.ndarray, max_move: float = 0.25):
    """Least-squares minimisation of |V| in the chart at ``seed``.

    Returns (point, residual); the point is None if the solver left the chart.
    """
    seed = np.asarray(seed, dtype=float)

    def f(u):
        return np.asarray(fn(surf.from_chart(seed, u[None, :])), dtype=float)[0]

    best_u, best_r = np.zeros(2), float(np.linalg.norm(f(np.zeros(2))))
    for method in ("lm", "trf"):
        try:
            sol = least_squares(f, best_u, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                max_nfev=400)
        except ValueError:
            continue
        r = float(np.linalg.norm(sol.fun))
        if r < best_r and np.linalg.norm(sol.x) <= max_move:
            best_u, best_r = sol.x, r
    return surf.canonical(surf.from_chart(seed, best_u[None, :]))[0], best_r


def scan_zeros(surface, fn: VecFn, grid: Optional[GridSpec] = None,
               lipschitz: Optional[float] = None) -> ScanResult:
    """All isolated zeros of the residual field ``fn`` on ``surface``."""
    surf = get_surface(surface)
    grid = grid or GridSpec()
    cells, pts, r, L, evals, gmin, gargmin = _descend(surf, fn, grid, lipschitz)
    ncomp, labels = _components(surf, pts, cells.size)
    # deterministic component order: by smallest canonical cell key
    key = np.lexsort((cells.j, cells.i, cells.face))
    first = {}
    for pos in key:
        first.setdefault(int(labels[pos]), len(first))
    roots: list[Root] = []
    for comp in sorted(first, key=first.get):
        members = np.nonzero(labels == comp)[0]
        order = members[np.lexsort((cells.j[members], cells.i[members], cells.face[members], r[members]))]
        alive = np.ones(len(order), dtype=bool)
        for _ in range(grid.max_seeds):
            if not np.any(alive):
                break
            s = order[np.argmax(alive)]
            seed = local_refine(surf, fn, pts[s], cells.size / 2, grid.refinement_depth)
            p, res = polish(surf, fn, seed)
            if res > grid.residual_tol:
                break
            known = any(surf.dist(p, q.point)[0] <= grid.cluster_radius for q in roots)
            if known:
                break
            roots.append(Root(p, res, comp))
            if res < gmin:
                gmin, gargmin = res, p
            alive &= surf.dist(pts[order], np.broadcast_to(p, pts[order].shape)) > grid.cluster_radius
    return ScanResult(roots, L, evals, len(pts), gmin, gargmin)


@dataclass(frozen=True)
class MergedCluster:
    location: np.ndarray
    members: tuple
    diameter: float


def merge_points(surface, points: list, residuals: list, radius: float) -> list[MergedCluster]:
    """Single-linkage merge within ``radius``; a merged group wider than
    ``radius`` means the scan could not separate candidates."""
    surf = get_surface(surface)
    n = len(points)
    if n == 0:
        return []
    P = np.array(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a in range(n):
        d = surf.dist(np.broadcast_to(P[a], P.shape), P)
        for b in np.nonzero(d <= radius)[0]:
            ra, rb = find(a), find(int(b))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    out = []
    for root in sorted(groups):
        mem = groups[root]
        diam = 0.0
        for a in mem:
            diam = max(diam, float(np.max(surf.dist(np.broadcast_to(P[a], (len(mem), P.shape[1])), P[mem]))))
        if diam > radius:
            raise GridTooCoarse(f"merged fixed point group has diameter {diam:.3g} > {radius:.3g}")
        best = min(mem, key=lambda a: (residuals[a], a))
        out.append(MergedCluster(P[best], tuple(mem), diam))
    return out


@dataclass(frozen=True)
class CoincidenceResult:
    min: float
    argmin: np.ndarray

    def to_dict(self) -> dict:
        return {"min": self.min, "argmin": [float(v) for v in self.argmin]}


def minimise_residual(surface, fn: VecFn, grid: Optional[GridSpec] = None,
                      lipschitz: Optional[float] = None, beam: int = 50_000) -> CoincidenceResult:
    """Minimum of |V| by branch and bound on the cell hierarchy, followed by
    one local refinement pass around the argmin.  At most ``beam`` cells
    (smallest lower bounds first) are carried to the next level."""
    surf = get_surface(surface)
    grid = grid or GridSpec()
    n_root, k = level_plan(surf.span, grid.resolution)
    cells = root_cells(surf, n_root)
    pts = cells.centers(surf)
    r = residual(fn, pts)
    L = lipschitz if lipschitz is not None else estimate_lipschitz(surf, pts, r, cells.size)
    factor = surf.cell_radius_factor()
    b = int(np.argmin(r))
    best, arg = float(r[b]), pts[b]
    for _ in range(k):
        if best <= grid.zero_tol:
            break
        lb = r - L * factor * cells.size
        idx = np.nonzero(lb < best)[0]
        if len(idx) > beam:
            order = np.lexsort((cells.j[idx], cells.i[idx], cells.face[idx], lb[idx]))
            idx = np.sort(idx[order[:beam]])
        cells = cells.take(idx).subdivide()
        pts = cells.centers(surf)
        r = residual(fn, pts)
        b = int(np.argmin(r))
        if r[b] < best:
            best, arg = float(r[b]), pts[b]
    if best > grid.zero_tol:
        seed = local_refine(surf, fn, arg, cells.size / 2, grid.refinement_depth)
        p, res = polish(surf, fn, seed)
        if res < best:
            best, arg = res, p
    return CoincidenceResult(best, surf.canonical(np.atleast_2d(arg))[0])
