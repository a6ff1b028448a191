"""Nielsen numbers of n-valued maps.

Split maps add up their coordinate Nielsen numbers.  Non-split maps on
orientable closed surfaces are reduced to a finite covering q on which they
split; when every point stabiliser of the induced permutation group is
trivial, N(phi) is the sum of the coincidence Nielsen numbers N(q, f_i) over
one coordinate index per orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .descriptor import CoveringAnalysis, Surface, SurfaceDescriptor
from .errors import (
    EmptyInput,
    InconsistentInput,
    MissingRepresentative,
    NotFree,
    UnsupportedSurface,
)

SPLIT_FORMULA = "split-sum"            # N(phi) = N(f_1) + ... + N(f_n)
ORBIT_FORMULA = "orbit-sum"            # N(phi) = sum over I0 of N(q, f_i)
TORUS_2VALUED_FORMULA = "torus-2valued-cover"  # N(phi) = N(q, f_1) = N(q, f_2)


@dataclass(frozen=True)
class NielsenInput:
    analysis: CoveringAnalysis
    per_pair: Mapping[int, int] = field(default_factory=dict)


@dataclass(frozen=True)
class NielsenSection:
    """Report fragment: which formula, the summands, the total."""

    formula_used: str
    terms: tuple
    total: int

    def to_dict(self) -> dict:
        return {"formula_used": self.formula_used, "terms": list(self.terms), "total": self.total}


def nielsen_split(ns: Sequence[int]) -> int:
    ns = list(ns)
    if not ns:
        raise EmptyInput("need at least one coordinate Nielsen number")
    for v in ns:
        if int(v) != v or v < 0:
            raise ValueError(f"Nielsen numbers are non-negative integers, got {v!r}")
    return int(sum(int(v) for v in ns))


def canonical_per_pair(inp: NielsenInput) -> dict[int, int]:
    """Re-key per-pair values by orbit representative.

    Values supplied for two members of the same orbit must agree; every orbit
    must receive a value.
    """
    part = inp.analysis.partition
    out: dict[int, int] = {}
    for key, value in inp.per_pair.items():
        i = int(key)
        if int(value) != value or value < 0:
            raise ValueError(f"N(q, f_{i}) must be a non-negative integer, got {value!r}")
        rep = part.representative_of(i)
        if rep in out and out[rep] != int(value):
            raise InconsistentInput(
                f"N(q, f_i) differs within orbit {sorted(part.orbit_of(i))}: {out[rep]} vs {value}")
        out[rep] = int(value)
    missing = [r for r in part.representatives if r not in out]
    if missing:
        raise MissingRepresentative(f"no N(q, f_i) given for orbit representatives {missing}")
    return out


def nielsen_nonsplit(inp: NielsenInput) -> int:
    a = inp.analysis
    if not a.free:
        i, alpha = a.witness
        raise NotFree(
            f"stabiliser of {i} contains {alpha.to_cycle_notation()}; orbit formula does not apply",
            witness=a.witness,
        )
    per = canonical_per_pair(inp)
    return sum(per[r] for r in a.representatives)


def nonsplit_section(inp: NielsenInput) -> NielsenSection:
    total = nielsen_nonsplit(inp)
    per = canonical_per_pair(inp)
    terms = tuple({"index": r, "N(q,f_i)": per[r]} for r in inp.analysis.representatives)
    return NielsenSection(ORBIT_FORMULA, terms, total)


def split_section(ns: Sequence[int]) -> NielsenSection:
    return NielsenSection(SPLIT_FORMULA, tuple(int(v) for v in ns), nielsen_split(ns))


def single_map_nielsen(surface: SurfaceDescriptor | Surface | str, data=None) -> int:
    """Nielsen number of a single self-map from its homotopy datum.

    Sphere: ``data`` is the degree.  Torus: ``data`` is the 2x2 integer matrix
    of the induced map on pi_1.  Disc and RP2 take no datum (answer 1; for
    RP2 this covers the maps trivial on pi_1, which is every coordinate of an
    n-valued map).
    """
    kind = _kind(surface)
    if kind is Surface.SPHERE:
        deg = int(data)
        # L(f) = 1 + deg, and a simply connected space has one fixed point class
        return 0 if deg == -1 else 1
    if kind in (Surface.DISC, Surface.PROJECTIVE_PLANE):
        return 1
    if kind is Surface.TORUS:
        M = np.asarray(data, dtype=np.int64)
        if M.shape != (2, 2):
            raise ValueError("torus datum must be a 2x2 integer matrix")
        det = (M[0, 0] - 1) * (M[1, 1] - 1) - M[0, 1] * M[1, 0]
        return int(abs(det))
    raise UnsupportedSurface(str(kind))


@dataclass(frozen=True)
class ClassCount:
    """Number of homotopy classes of n-valued maps: ``finite`` or countable."""

    finite: Optional[int] = None
    countable: bool = False
    index: Optional[str] = None

    def to_dict(self) -> dict:
        if self.countable:
            return {"count": "countable", "indexed_by": self.index}
        return {"count": self.finite}


def classify_homotopy_count(surface: SurfaceDescriptor | Surface | str, n: int) -> ClassCount:
    if n < 1:
        raise ValueError("n must be >= 1")
    kind = _kind(surface)
    if kind is Surface.DISC:
        return ClassCount(finite=1)
    if kind is Surface.SPHERE:
        if n >= 3:
            return ClassCount(finite=1)
        if n == 2:
            return ClassCount(countable=True, index="degree in N")
        return ClassCount(countable=True, index="degree in Z")
    if kind is Surface.PROJECTIVE_PLANE:
        if n >= 2:
            return ClassCount(finite=2)
        raise UnsupportedSurface("single-valued self-maps of RP2 are not classified here")
    raise UnsupportedSurface(f"homotopy classification on {kind.value} is not implemented")


def _kind(surface) -> Surface:
    if isinstance(surface, SurfaceDescriptor):
        return surface.kind
    if isinstance(surface, Surface):
        return surface
    return Surface.parse(surface)
