"""Non-split 2-valued maps of the torus with linear-model lifts.

Conventions.  The base torus X and the covering torus are both R^2/Z^2.
For a non-split 2-valued map with monodromy rho: Z^2 -> S_2, H = ker(rho)
has a column basis Q (upper-triangular Hermite form, det Q = 2) and the
covering is q(x) = Q x mod Z^2.  Its non-trivial deck transformation is
t(x) = x + Q^{-1} e for any e outside H.  A lift of phi o q is (f_1, f_2)
with f_2 = f_1 o t; the linear model is f_1(x) = M x + c.

Coincidences of (q, f) are the solutions of (M - Q) x = -c mod Z^2, of which
there are |det(M - Q)| when that determinant is non-zero.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .descriptor import NValuedMapDescriptor, Surface, check, covering_analysis
from .errors import InconsistentPayload, SingularCovering, SplitInput
from .group import Permutation
from .nielsen import NielsenInput, nielsen_nonsplit

DEGENERATE = "degenerate"

# amplitude of the deck-antisymmetric term added when the linear model would
# make f_1 and f_2 collide
PERTURBATION_AMPLITUDE = 0.05


def as_int_matrix(A) -> np.ndarray:
    arr = np.asarray(A)
    if arr.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {arr.shape}")
    out = arr.astype(np.int64)
    if not np.array_equal(out, arr):
        raise ValueError(f"matrix entries must be integers: {A!r}")
    return out


def det2(A) -> int:
    a = as_int_matrix(A)
    return int(a[0, 0]) * int(a[1, 1]) - int(a[0, 1]) * int(a[1, 0])


def hnf(B) -> np.ndarray:
    """Upper-triangular column Hermite form of the lattice spanned by B's columns.

    Result [[a, b], [0, d]] with a, d > 0 and 0 <= b < a.
    """
    B = as_int_matrix(B)
    if det2(B) == 0:
        raise SingularCovering("lattice basis is singular")
    # column ops: clear the bottom row into the second column
    c1 = [int(B[0, 0]), int(B[1, 0])]
    c2 = [int(B[0, 1]), int(B[1, 1])]
    while c1[1] != 0:
        q = c2[1] // c1[1]
        c2 = [c2[0] - q * c1[0], c2[1] - q * c1[1]]
        c1, c2 = c2, c1
    # now c1 = (a, 0), c2 = (b, d)
    a, b, d = c1[0], c2[0], c2[1]
    if a < 0:
        a = -a
    if d < 0:
        b, d = -b, -d
    b %= a
    return np.array([[a, b], [0, d]], dtype=np.int64)


def kernel_lattice(sigma: Sequence[Permutation]) -> np.ndarray:
    """Hermite basis of {v in Z^2 : rho(v) = id} for rho given on (e1, e2)."""
    if len(sigma) != 2:
        raise ValueError("torus monodromy needs two generator images")
    s1, s2 = (0 if p.is_identity() else 1 for p in sigma)
    if any(p.degree != 2 for p in sigma):
        raise ValueError("kernel_lattice handles 2-valued maps only")
    if s1 == 0 and s2 == 0:
        raise SplitInput("trivial monodromy: the covering is trivial")
    # kernel of (a, b) -> s1*a + s2*b mod 2
    if s1 and not s2:
        B = [[2, 0], [0, 1]]
    elif s2 and not s1:
        B = [[1, 0], [0, 2]]
    else:
        B = [[2, 1], [0, 1]]
    return hnf(B)


def lefschetz_coincidence(Q, M) -> int:
    if det2(Q) == 0:
        raise SingularCovering("covering matrix is singular")
    return det2(as_int_matrix(M) - as_int_matrix(Q))


def smith_normal_form(A) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (U, D, V) with U @ A @ V == D diagonal, U and V unimodular,
    D[0,0] | D[1,1] and D[0,0] >= 0."""
    D = [[int(v) for v in row] for row in as_int_matrix(A)]
    U = [[1, 0], [0, 1]]
    V = [[1, 0], [0, 1]]

    def row_op(M_, i, j, k):  # row_i -= k * row_j
        M_[i] = [M_[i][t] - k * M_[j][t] for t in range(2)]

    def col_op(M_, i, j, k):  # col_i -= k * col_j
        for r in range(2):
            M_[r][i] -= k * M_[r][j]

    def swap_rows(M_):
        M_[0], M_[1] = M_[1], M_[0]

    def swap_cols(M_):
        for r in range(2):
            M_[r][0], M_[r][1] = M_[r][1], M_[r][0]

    while True:
        entries = [(abs(D[i][j]), i, j) for i in range(2) for j in range(2) if D[i][j] != 0]
        if not entries:
            break
        _, i, j = min(entries)
        if i == 1:
            swap_rows(D), swap_rows(U)
        if j == 1:
            swap_cols(D), swap_cols(V)
        p = D[0][0]
        dirty = False
        if D[1][0] != 0:
            k = D[1][0] // p
            row_op(D, 1, 0, k), row_op(U, 1, 0, k)
            dirty = dirty or D[1][0] != 0
        if D[0][1] != 0:
            k = D[0][1] // p
            col_op(D, 1, 0, k), col_op(V, 1, 0, k)
            dirty = dirty or D[0][1] != 0
        if dirty:
            continue
        if D[1][1] % p != 0:
            # fold row 1 into row 0 to expose a smaller gcd
            row_op(D, 0, 1, -1), row_op(U, 0, 1, -1)
            continue
        break
    if D[0][0] < 0:
        U[0] = [-v for v in U[0]]
        D[0] = [-v for v in D[0]]
    return (np.array(U, dtype=np.int64), np.array(D, dtype=np.int64), np.array(V, dtype=np.int64))


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    return Fraction(str(value).strip())


def _vec(c) -> tuple[Fraction, Fraction]:
    if c is None:
        return (Fraction(0), Fraction(0))
    c = tuple(parse_rational(v) for v in c)
    if len(c) != 2:
        raise ValueError("offset must have two components")
    return c


def coincidence_points_snf(Q, M, c=None) -> Optional[list[tuple[Fraction, Fraction]]]:
    """All x in [0,1)^2 with q(x) = f(x), parametrised through the Smith form.

    None when det(M - Q) = 0.
    """
    A = as_int_matrix(M) - as_int_matrix(Q)
    if det2(A) == 0:
        return None
    U, D, V = smith_normal_form(A)
    b = [-v for v in _vec(c)]
    Ub = [U[0, 0] * b[0] + U[0, 1] * b[1], U[1, 0] * b[0] + U[1, 1] * b[1]]
    d = [int(D[0, 0]), int(D[1, 1])]
    pts = []
    for k0 in range(abs(d[0])):
        for k1 in range(abs(d[1])):
            y = [(Ub[0] + k0) / d[0], (Ub[1] + k1) / d[1]]
            x = (V[0, 0] * y[0] + V[0, 1] * y[1], V[1, 0] * y[0] + V[1, 1] * y[1])
            pts.append(tuple(v - math.floor(v) for v in x))
    return sorted(set(pts))


def coincidence_count_oracle(Q, M, c=None):
    """Number of coincidences of q(x) = Qx and f(x) = Mx + c on the covering
    torus, or ``DEGENERATE`` when det(M - Q) = 0."""
    pts = coincidence_points_snf(Q, M, c)
    if pts is None:
        return DEGENERATE
    return len(pts)


def enumerate_coincidences(Q, M, c=None) -> Optional[list[tuple[Fraction, Fraction]]]:
    """Brute force: try every integer translate k with (M-Q)x = k - c for some
    x in the unit square, keep those x that land in [0,1)^2."""
    A = as_int_matrix(M) - as_int_matrix(Q)
    det = det2(A)
    if det == 0:
        return None
    cv = _vec(c)
    corners = [(A[0, 0] * u + A[0, 1] * v, A[1, 0] * u + A[1, 1] * v)
               for u, v in itertools.product((0, 1), repeat=2)]
    lo = [math.floor(min(p[i] for p in corners) + cv[i]) - 1 for i in range(2)]
    hi = [math.ceil(max(p[i] for p in corners) + cv[i]) + 1 for i in range(2)]
    a, b, cc, d = int(A[0, 0]), int(A[0, 1]), int(A[1, 0]), int(A[1, 1])
    out = []
    for k0 in range(lo[0], hi[0] + 1):
        for k1 in range(lo[1], hi[1] + 1):
            r0, r1 = k0 - cv[0], k1 - cv[1]
            x0 = (d * r0 - b * r1) / det
            x1 = (-cc * r0 + a * r1) / det
            if 0 <= x0 < 1 and 0 <= x1 < 1:
                out.append((Fraction(x0), Fraction(x1)))
    return sorted(out)


@dataclass(frozen=True)
class TorusLinearPayload:
    M: tuple[tuple[int, int], tuple[int, int]]
    c: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    Q: Optional[tuple[tuple[int, int], tuple[int, int]]] = None

    @classmethod
    def build(cls, M, c=None, Q=None) -> TorusLinearPayload:
        try:
            Mi = as_int_matrix(M)
            Qi = None if Q is None else as_int_matrix(Q)
            cv = _vec(c)
        except (ValueError, ZeroDivisionError) as exc:
            raise InconsistentPayload(str(exc)) from exc
        return cls(
            tuple(tuple(int(v) for v in row) for row in Mi),
            cv,
            None if Qi is None else tuple(tuple(int(v) for v in row) for row in Qi),
        )

    @property
    def M_array(self) -> np.ndarray:
        return np.array(self.M, dtype=np.int64)

    def to_dict(self) -> dict:
        return {"M": [list(r) for r in self.M], "c": [str(v) for v in self.c]}


def deck_generator(sigma: Sequence[Permutation]) -> np.ndarray:
    """A pi_1 element outside H: e1 if it swaps the values, else e2."""
    return np.array([1, 0]) if not sigma[0].is_identity() else np.array([0, 1])


class TorusTwoValuedMap:
    """Numerical realisation of a non-split 2-valued torus map.

    f_1(x) = M x + c (+ eps * w(x) when needed), f_2 = f_1 o t.  If
    M Q^{-1} e is integral the linear coordinates would coincide everywhere,
    so a term eps * (cos 2 pi k.x, sin 2 pi k.x) with k.Q^{-1}e = 1/2 mod 1
    is added; it changes sign under t and leaves the homotopy class alone.
    """

    def __init__(self, sigma: Sequence[Permutation], payload: TorusLinearPayload):
        self.sigma = tuple(sigma)
        self.Q = kernel_lattice(self.sigma)
        self.M = payload.M_array
        self.c = np.array([float(v) for v in payload.c])
        self.Qinv = np.linalg.inv(self.Q.astype(float))
        e = deck_generator(self.sigma)
        self.shift = self.Qinv @ e  # deck translation on the cover
        dq = det2(self.Q)
        exact_shift = [
            Fraction(int(self.Q[1, 1]) * int(e[0]) - int(self.Q[0, 1]) * int(e[1]), dq),
            Fraction(int(self.Q[0, 0]) * int(e[1]) - int(self.Q[1, 0]) * int(e[0]), dq),
        ]
        swap = [sum(int(self.M[i, j]) * exact_shift[j] for j in range(2)) for i in range(2)]
        self.perturbed = all(v.denominator == 1 for v in swap)
        self.k = None
        if self.perturbed:
            half = [i for i in range(2) if exact_shift[i].denominator == 2]
            self.k = np.eye(2, dtype=np.int64)[half[0]]

    def f1(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        out = x @ self.M.T + self.c
        if self.perturbed:
            ang = 2 * np.pi * (x @ self.k)
            out = out + PERTURBATION_AMPLITUDE * np.column_stack([np.cos(ang), np.sin(ang)])
        return np.mod(out, 1.0)

    def f2(self, x: np.ndarray) -> np.ndarray:
        return self.f1(np.atleast_2d(x) + self.shift)

    def q(self, x: np.ndarray) -> np.ndarray:
        return np.mod(np.atleast_2d(x) @ self.Q.T, 1.0)

    def values(self, y: np.ndarray) -> np.ndarray:
        """phi(y) as an array of shape (2, N, 2)."""
        x = np.atleast_2d(y) @ self.Qinv.T
        return np.stack([self.f1(x), self.f2(x)])

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.values(y)

    domain = "torus"
    codomain = "torus"
    multivalued = True


@dataclass(frozen=True)
class TorusNielsenResult:
    nielsen: int
    lefschetz: int
    Q: np.ndarray
    degenerate: bool
    oracle_count: object
    brute_force_count: Optional[int]

    def to_dict(self) -> dict:
        return {
            "Q": self.Q.tolist(),
            "det(M-Q)": self.lefschetz,
            "oracle_count": self.oracle_count,
            "brute_force_count": self.brute_force_count,
            "degenerate": self.degenerate,
            "N": self.nielsen,
        }


def check_payload(d: NValuedMapDescriptor) -> TorusLinearPayload:
    check(d)
    if d.surface.kind is not Surface.TORUS:
        raise InconsistentPayload("linear payload requires a torus descriptor")
    if d.n != 2:
        raise InconsistentPayload(f"linear model covers 2-valued maps, n={d.n}")
    p = d.payload
    if not isinstance(p, TorusLinearPayload):
        raise InconsistentPayload("descriptor carries no TorusLinearPayload")
    if all(s.is_identity() for s in d.sigma):
        raise SplitInput("map is split; use the split formula")
    if p.Q is not None:
        Q = kernel_lattice(d.sigma)
        if not np.array_equal(hnf(p.Q), Q):
            raise InconsistentPayload(
                f"payload covering {p.Q} does not span ker(rho) = {Q.tolist()}")
    return p


def nielsen_torus_2valued(d: NValuedMapDescriptor) -> TorusNielsenResult:
    p = check_payload(d)
    Q = kernel_lattice(d.sigma)
    L = lefschetz_coincidence(Q, p.M_array)
    count = coincidence_count_oracle(Q, p.M_array, p.c)
    brute = enumerate_coincidences(Q, p.M_array, p.c)
    analysis = covering_analysis(d)
    total = nielsen_nonsplit(NielsenInput(analysis, {analysis.representatives[0]: abs(L)}))
    return TorusNielsenResult(
        nielsen=total,
        lefschetz=L,
        Q=Q,
        degenerate=(L == 0),
        oracle_count=count,
        brute_force_count=None if brute is None else len(brute),
    )
