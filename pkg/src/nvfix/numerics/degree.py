"""Degrees of sphere maps by signed preimage counting, and the homotopy
classifiers built on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..errors import DegreeUnstable, EmptyInput, InconsistentClass
from ..geometry import NONTRIVIAL, TRIVIAL, antipodal_after
from .grid import GridSpec, get_surface
from .scan import merge_points, scan_zeros

DEGREE_GRID = GridSpec(resolution=4e-3, refinement_depth=3)
FD_STEP = 1e-6
SINGULAR_TOL = 1e-6


def random_regular_values(seed: int):
    """Endless reproducible stream of candidate regular values on S^2."""
    rng = np.random.default_rng(seed)
    while True:
        v = rng.normal(size=3)
        yield v / np.linalg.norm(v)


@dataclass(frozen=True)
class PreimageCount:
    value: np.ndarray
    points: tuple
    signs: tuple
    regular: bool

    @property
    def degree(self) -> int:
        return int(sum(self.signs))

    @property
    def count(self) -> int:
        return len(self.points)


def _jacobian(f, x: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """Derivative of f in oriented gnomonic charts at x (source) and y0 (target)."""
    sph = get_surface("sphere")
    cols = []
    for e in np.eye(2):
        up = sph.from_chart(x, FD_STEP * e[None, :])
        dn = sph.from_chart(x, -FD_STEP * e[None, :])
        fy = np.asarray(f(np.vstack([up, dn])), dtype=float)
        cy = sph.to_chart(y0, fy)
        cols.append((cy[0] - cy[1]) / (2 * FD_STEP))
    return np.column_stack(cols)


def preimages(f, y0, domain="sphere", grid: Optional[GridSpec] = None) -> PreimageCount:
    """Preimages of y0 under f: domain -> S^2, with local orientation signs
    (signs are only meaningful for the oriented domain S^2)."""
    grid = grid or DEGREE_GRID
    y0 = np.asarray(y0, dtype=float)
    fn = lambda x: np.asarray(f(x), dtype=float) - y0  # noqa: E731
    roots = scan_zeros(domain, fn, grid).roots
    merged = merge_points(domain, [r.point for r in roots], [r.residual for r in roots], grid.cluster_radius)
    signs, regular = [], True
    for mc in merged:
        J = _jacobian(f, mc.location, y0)
        sv = np.linalg.svd(J, compute_uv=False)
        if sv[-1] < SINGULAR_TOL or not np.all(np.isfinite(J)):
            regular = False
        signs.append(int(np.sign(np.linalg.det(J))))
    return PreimageCount(y0, tuple(mc.location for mc in merged), tuple(signs), regular)


def degree_sphere(f, samples: int = 2, seed: int = 0, grid: Optional[GridSpec] = None,
                  max_tries: int = 8) -> int:
    """Degree of f: S^2 -> S^2 as a signed preimage count.

    ``samples`` regular values (drawn from a seeded stream, skipping values
    with a near-singular preimage) must give the same count.  On a
    disagreement a fresh set is drawn once more before giving up.
    """
    values = random_regular_values(seed)
    for _attempt in range(2):
        found, tries = [], 0
        while len(found) < samples and tries < max_tries:
            tries += 1
            pc = preimages(f, next(values), "sphere", grid)
            if pc.regular:
                found.append(pc.degree)
        if len(found) < samples:
            raise DegreeUnstable(f"no {samples} regular values found in {max_tries} tries")
        if len(set(found)) == 1:
            return found[0]
    raise DegreeUnstable(f"regular values disagree on the degree: {found}")


def classify_2valued_sphere(f, seed: int = 0, grid: Optional[GridSpec] = None) -> int:
    """Degree of the 2-valued map {f, A o f}: |deg f|."""
    return abs(degree_sphere(f, seed=seed, grid=grid))


def lift_parity(m, seed: int = 0, grid: Optional[GridSpec] = None, samples: int = 2,
                max_tries: int = 8) -> int:
    """Number of preimages mod 2 of a regular value under the map RP^2 -> S^2
    induced by the lift of ``m`` (its absolute degree mod 2)."""
    g = m.lift() if hasattr(m, "lift") else m
    values = random_regular_values(seed)
    found, tries = [], 0
    while len(found) < samples and tries < max_tries:
        tries += 1
        pc = preimages(g, next(values), "rp2", grid)
        if pc.regular:
            found.append(pc.count % 2)
    if len(found) < samples or len(set(found)) != 1:
        raise DegreeUnstable(f"lift parity not stable across regular values: {found}")
    return found[0]


def classify_rp2(maps: Sequence, seed: int = 0, grid: Optional[GridSpec] = None) -> str:
    """Homotopy class (trivial / nontrivial) of an n-ordered RP^2 map."""
    maps = list(maps)
    if not maps:
        raise EmptyInput("need at least one coordinate")
    parities = [lift_parity(m, seed=seed, grid=grid) for m in maps]
    if len(set(parities)) != 1:
        raise InconsistentClass(f"coordinates have lift parities {parities}")
    return NONTRIVIAL if parities[0] == 1 else TRIVIAL
