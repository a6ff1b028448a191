"""Symbolic n-valued maps: the permutation image of pi_1 and what it implies.

An n-valued self-map of a surface X is recorded here only through the
homomorphism pi_1(X) -> S_n sending a loop to the permutation it induces on
the n values (``sigma``, one permutation per pi_1 generator).  That is enough
to decide splitness and to build the finite covering on which the map
splits, together with its deck group acting on coordinate indices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import DegreeMismatch, NotRealizable, RelationViolation
from .group import (
    DEFAULT_DEGREE_CAP,
    OrbitPartition,
    Permutation,
    PermGroup,
    generate_group,
    is_free_stabilizer_action,
    orbit_partition,
    parse_permutation,
    stabilizer,
)


class Surface(enum.Enum):
    DISC = "disc"
    SPHERE = "sphere"
    PROJECTIVE_PLANE = "projective_plane"
    TORUS = "torus"

    @classmethod
    def parse(cls, name: str) -> Surface:
        key = name.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {
            "disc": cls.DISC, "disk": cls.DISC, "d2": cls.DISC,
            "sphere": cls.SPHERE, "s2": cls.SPHERE,
            "projective_plane": cls.PROJECTIVE_PLANE, "projectiveplane": cls.PROJECTIVE_PLANE,
            "rp2": cls.PROJECTIVE_PLANE,
            "torus": cls.TORUS, "t2": cls.TORUS,
        }
        if key not in aliases:
            raise ValueError(f"unknown surface {name!r}")
        return aliases[key]


@dataclass(frozen=True)
class SurfaceDescriptor:
    kind: Surface

    @property
    def pi1(self) -> str:
        return {
            Surface.DISC: "trivial",
            Surface.SPHERE: "trivial",
            Surface.PROJECTIVE_PLANE: "Z2",
            Surface.TORUS: "ZxZ",
        }[self.kind]

    @property
    def n_generators(self) -> int:
        return {Surface.DISC: 0, Surface.SPHERE: 0,
                Surface.PROJECTIVE_PLANE: 1, Surface.TORUS: 2}[self.kind]

    @property
    def orientable(self) -> bool:
        return self.kind is not Surface.PROJECTIVE_PLANE

    @classmethod
    def of(cls, kind: Surface | str) -> SurfaceDescriptor:
        return cls(kind if isinstance(kind, Surface) else Surface.parse(kind))


@dataclass(frozen=True)
class NValuedMapDescriptor:
    """``sigma[k]`` is the permutation induced by the k-th pi_1 generator.

    For the torus the generators are (e1, e2) = (meridian, longitude).
    """

    surface: SurfaceDescriptor
    n: int
    sigma: tuple[Permutation, ...] = ()
    payload: Any = None

    @classmethod
    def build(cls, surface, n: int, sigma=(), payload=None) -> NValuedMapDescriptor:
        """Convenience constructor accepting strings for surface and sigma."""
        surf = surface if isinstance(surface, SurfaceDescriptor) else SurfaceDescriptor.of(surface)
        perms = tuple(s if isinstance(s, Permutation) else parse_permutation(s, n) for s in sigma)
        return cls(surf, n, perms, payload)


@dataclass(frozen=True)
class Violation:
    kind: type
    message: str

    def exception(self) -> Exception:
        return self.kind(self.message)


def validate(d: NValuedMapDescriptor) -> list[Violation]:
    """Empty list iff ``d`` describes a homomorphism that some n-valued map realises."""
    out: list[Violation] = []
    if d.n < 1:
        out.append(Violation(DegreeMismatch, f"n must be >= 1, got {d.n}"))
        return out
    ngen = d.surface.n_generators
    if len(d.sigma) != ngen:
        out.append(Violation(
            DegreeMismatch,
            f"{d.surface.kind.value} has {ngen} pi_1 generators, sigma has {len(d.sigma)}",
        ))
        return out
    for k, p in enumerate(d.sigma):
        if p.degree != d.n:
            out.append(Violation(DegreeMismatch, f"sigma[{k}] has degree {p.degree}, expected {d.n}"))
    if out:
        return out
    kind = d.surface.kind
    if kind is Surface.TORUS:
        a, b = d.sigma
        if a * b != b * a:
            out.append(Violation(RelationViolation, f"torus images {a} and {b} do not commute"))
    elif kind is Surface.PROJECTIVE_PLANE:
        (a,) = d.sigma
        if not (a * a).is_identity():
            out.append(Violation(
                RelationViolation, f"RP2 generator image {a} has order {a.order()}, not dividing 2"))
        elif not a.is_identity():
            # every n-valued map of RP2 splits, so only the trivial image occurs
            out.append(Violation(NotRealizable, f"RP2 n-valued maps are split; sigma={a} is not realisable"))
    return out


def check(d: NValuedMapDescriptor) -> None:
    """Raise the first violation reported by :func:`validate`."""
    problems = validate(d)
    if problems:
        raise problems[0].exception()


def is_split(d: NValuedMapDescriptor) -> bool:
    check(d)
    return all(p.is_identity() for p in d.sigma)


@dataclass(frozen=True)
class CoveringAnalysis:
    L_prime: PermGroup
    index_H: int
    partition: OrbitPartition
    stabilizers: dict[int, PermGroup]
    free: bool
    witness: Optional[tuple[int, Permutation]]
    lift_count: int
    fiber_coincidence_counts: dict[int, int] = field(default_factory=dict)

    @property
    def orbits(self) -> tuple[frozenset[int], ...]:
        return self.partition.orbits

    @property
    def representatives(self) -> tuple[int, ...]:
        return self.partition.representatives

    @property
    def n(self) -> int:
        return self.L_prime.n

    def to_dict(self) -> dict:
        return {
            "L_prime": sorted(p.to_image_notation() for p in self.L_prime.elements),
            "index_H": self.index_H,
            "orbits": [sorted(o) for o in self.orbits],
            "representatives": list(self.representatives),
            "stabilizers": {
                str(i): sorted(p.to_image_notation() for p in G.elements)
                for i, G in sorted(self.stabilizers.items())
            },
            "free": self.free,
            "witness": None if self.witness is None
            else {"index": self.witness[0], "element": self.witness[1].to_image_notation()},
            "lift_count": self.lift_count,
            "fiber_coincidence_counts": {str(i): c for i, c in sorted(self.fiber_coincidence_counts.items())},
            # |K_i| is only determined in the free case, where it is 1
            "K_sizes": {str(i): 1 for i in sorted(self.stabilizers)} if self.free else None,
        }


def covering_analysis(d: NValuedMapDescriptor, cap: int = DEFAULT_DEGREE_CAP) -> CoveringAnalysis:
    check(d)
    return analyze_group(generate_group(list(d.sigma), d.n, cap=cap), d.n)


def analyze_group(L: PermGroup, n: int) -> CoveringAnalysis:
    """Orbit/stabiliser data of the deck group image L' acting on {1..n}."""
    part = orbit_partition(L)
    stabs = {i: stabilizer(L, i) for i in range(1, n + 1)}
    verdict = is_free_stabilizer_action(L)
    return CoveringAnalysis(
        L_prime=L,
        index_H=L.order,
        partition=part,
        stabilizers=stabs,
        free=verdict.free,
        witness=verdict.witness,
        lift_count=math.factorial(n),
        fiber_coincidence_counts={i: G.order for i, G in stabs.items()},
    )
