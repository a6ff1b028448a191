"""Finite permutation groups acting on {1, ..., n}.

Everything here is exact enumeration: groups are small (degree capped,
8 by default) so the full element set is materialised on construction.
Indices are 1-based throughout.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    DegreeMismatch,
    IndexOutOfRange,
    PermutationSyntaxError,
)

DEFAULT_DEGREE_CAP = 8


@dataclass(frozen=True, order=True)
class Permutation:
    """A bijection of {1..n}, stored as its one-line image tuple.

    ``p(i)`` is ``images[i - 1]``.  Products compose right to left:
    ``(a * b)(i) == a(b(i))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        imgs = tuple(int(v) for v in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise PermutationSyntaxError(f"not a permutation of 1..{len(imgs)}: {imgs}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], n: int) -> Permutation:
        images = list(range(1, n + 1))
        seen: set[int] = set()
        for cyc in cycles:
            cyc = [int(c) for c in cyc]
            for c in cyc:
                if not 1 <= c <= n:
                    raise PermutationSyntaxError(f"cycle entry {c} outside 1..{n}")
                if c in seen:
                    raise PermutationSyntaxError(f"entry {c} repeated across cycles")
                seen.add(c)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a - 1] = b
        return cls(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        if other.degree != self.degree:
            raise DegreeMismatch(f"cannot compose degree {self.degree} with {other.degree}")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> Permutation:
        inv = [0] * self.degree
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.images, start=1))

    def fixed_points(self) -> list[int]:
        return [i for i, v in enumerate(self.images, start=1) if v == i]

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles()), 1)

    def cycles(self) -> list[tuple[int, ...]]:
        """Non-trivial cycles, each starting at its smallest entry."""
        seen: set[int] = set()
        out = []
        for start in range(1, self.degree + 1):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            j = self(start)
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self(j)
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def to_image_notation(self) -> str:
        return "[" + ",".join(str(v) for v in self.images) + "]"

    def to_cycle_notation(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(c) for c in cy) + ")" for cy in cyc)

    def __str__(self) -> str:
        return self.to_image_notation()


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, n: int) -> Permutation:
    """Parse cycle notation ``"(1 2)(3 4)"`` or image notation ``"[2,1,4,3]"``.

    ``"()"``, ``"id"`` and ``""`` denote the identity.  Cycle entries may be
    separated by spaces or commas.
    """
    s = text.strip()
    if s in ("", "id", "()", "e"):
        return Permutation.identity(n)
    if s.startswith("["):
        if not s.endswith("]"):
            raise PermutationSyntaxError(f"unterminated image notation: {text!r}")
        body = s[1:-1].strip()
        try:
            imgs = tuple(int(t) for t in re.split(r"[,\s]+", body) if t)
        except ValueError as exc:
            raise PermutationSyntaxError(f"bad image notation {text!r}") from exc
        if len(imgs) != n:
            raise DegreeMismatch(f"{text!r} has degree {len(imgs)}, expected {n}")
        return Permutation(imgs)
    if _CYCLE_RE.sub("", s).strip():
        raise PermutationSyntaxError(f"bad cycle notation {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(s):
        try:
            cycles.append([int(t) for t in re.split(r"[,\s]+", body.strip()) if t])
        except ValueError as exc:
            raise PermutationSyntaxError(f"bad cycle notation {text!r}") from exc
    return Permutation.from_cycles(cycles, n)


@dataclass(frozen=True)
class PermGroup:
    n: int
    elements: frozenset[Permutation]
    generators: tuple[Permutation, ...] = field(default=())

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.sorted_elements)

    def __contains__(self, p: Permutation) -> bool:
        return p in self.elements

    def is_trivial(self) -> bool:
        return len(self.elements) == 1

    @cached_property
    def sorted_elements(self) -> tuple[Permutation, ...]:
        return tuple(sorted(self.elements))

    @cached_property
    def table(self) -> np.ndarray:
        """Row k holds the images of ``sorted_elements[k]``."""
        return np.array([p.images for p in self.sorted_elements], dtype=np.int16).reshape(-1, self.n)

    def select(self, mask: np.ndarray) -> frozenset[Permutation]:
        elems = self.sorted_elements
        return frozenset(elems[k] for k in np.flatnonzero(mask))


def generate_group(
    gens: Sequence[Permutation], n: int, cap: int = DEFAULT_DEGREE_CAP
) -> PermGroup:
    """Closure of ``gens`` under composition (BFS over right multiplication)."""
    if n < 1:
        raise DegreeMismatch(f"degree must be positive, got {n}")
    if n > cap:
        raise CapExceeded(f"degree {n} exceeds configured cap {cap}")
    for g in gens:
        if g.degree != n:
            raise DegreeMismatch(f"generator {g} has degree {g.degree}, expected {n}")
    limit = math.factorial(n)
    # BFS on raw image tuples; Permutation objects are built once at the end
    ident = tuple(range(1, n + 1))
    gen_imgs = [g.images for g in gens]
    seen = {ident}
    queue = deque([ident])
    while queue:
        a = queue.popleft()
        for g in gen_imgs:
            b = tuple(a[j - 1] for j in g)
            if b not in seen:
                seen.add(b)
                if len(seen) > limit:
                    raise CapExceeded(f"closure exceeded {limit} elements")
                queue.append(b)
    return PermGroup(n, frozenset(Permutation(t) for t in seen), tuple(gens))


def _check_index(G: PermGroup, i: int) -> None:
    if not 1 <= i <= G.n:
        raise IndexOutOfRange(f"index {i} outside 1..{G.n}")


@dataclass(frozen=True)
class OrbitPartition:
    orbits: tuple[frozenset[int], ...]
    representatives: tuple[int, ...]

    def orbit_of(self, i: int) -> frozenset[int]:
        for orb in self.orbits:
            if i in orb:
                return orb
        raise IndexOutOfRange(f"index {i} not in any orbit")

    def representative_of(self, i: int) -> int:
        return min(self.orbit_of(i))


def orbit_partition(G: PermGroup) -> OrbitPartition:
    """Orbits of G on {1..n}, ordered by smallest element, which is also
    the chosen representative."""
    remaining = set(range(1, G.n + 1))
    orbits = []
    while remaining:
        i = min(remaining)
        orb = frozenset(int(v) for v in np.unique(G.table[:, i - 1]))
        orbits.append(orb)
        remaining -= orb
    return OrbitPartition(tuple(orbits), tuple(min(o) for o in orbits))


def stabilizer(G: PermGroup, i: int) -> PermGroup:
    _check_index(G, i)
    return PermGroup(G.n, G.select(G.table[:, i - 1] == i))


def transporter(G: PermGroup, i: int, j: int) -> frozenset[Permutation]:
    """All elements of G sending i to j; empty or a coset of stabilizer(G, i)."""
    _check_index(G, i)
    _check_index(G, j)
    return G.select(G.table[:, i - 1] == j)


@dataclass(frozen=True)
class FreenessVerdict:
    free: bool
    witness: Optional[tuple[int, Permutation]] = None

    def __bool__(self) -> bool:
        return self.free


def is_free_stabilizer_action(G: PermGroup) -> FreenessVerdict:
    """True iff every point stabiliser is trivial.

    The witness is the smallest index with a non-trivial stabiliser together
    with the smallest non-identity element fixing it.
    """
    T = G.table
    ident = np.arange(1, G.n + 1)
    moving = np.any(T != ident, axis=1)
    for i in range(1, G.n + 1):
        hits = np.flatnonzero((T[:, i - 1] == i) & moving)
        if len(hits):
            # rows follow sorted order, so the first hit is the smallest element
            return FreenessVerdict(False, (i, G.sorted_elements[hits[0]]))
    return FreenessVerdict(True, None)
