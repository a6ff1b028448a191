"""Closed-form maps on S^2 and RP^2.

Points are unit 3-vectors; arrays of points have shape (N, 3).  A point of
RP^2 is handled through any of its two representatives; ``canonical_rp2``
picks the one with z > 0 (ties on the equator broken by y > 0, then x > 0).

Every map is a small frozen dataclass, vectorised over (N, 3) arrays.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainMismatch, EpsilonTooLarge, ValidationFailed

NORTH = np.array([0.0, 0.0, 1.0])
SOUTH = -NORTH
SPHERE = "sphere"
RP2 = "rp2"

# ---------------------------------------------------------------- points


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@dataclass(frozen=True)
class SpherePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        v = np.array([self.x, self.y, self.z], dtype=float)
        nrm = float(np.linalg.norm(v))
        if nrm == 0:
            raise ValueError("zero vector is not a sphere point")
        if abs(nrm - 1.0) > 1e-12:
            v = v / nrm
            object.__setattr__(self, "x", float(v[0]))
            object.__setattr__(self, "y", float(v[1]))
            object.__setattr__(self, "z", float(v[2]))

    @classmethod
    def from_array(cls, v) -> SpherePoint:
        v = np.asarray(v, dtype=float).reshape(3)
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def spherical(self) -> SphericalCoord:
        return SphericalCoord.from_cartesian(self.array)

    def __neg__(self) -> SpherePoint:
        return SpherePoint(-self.x, -self.y, -self.z)


@dataclass(frozen=True)
class SphericalCoord:
    """Longitude theta in [0, 2pi), latitude phi in [-pi/2, pi/2]."""

    theta: float
    phi: float

    def __post_init__(self):
        th, ph = normalize_spherical(self.theta, self.phi)
        object.__setattr__(self, "theta", float(th))
        object.__setattr__(self, "phi", float(ph))

    def to_cartesian(self) -> np.ndarray:
        return spherical_to_cartesian(self.theta, self.phi)

    def to_point(self) -> SpherePoint:
        return SpherePoint.from_array(self.to_cartesian())

    @classmethod
    def from_cartesian(cls, v) -> SphericalCoord:
        th, ph = cartesian_to_spherical(np.asarray(v, dtype=float))
        return cls(float(th), float(ph))


def spherical_to_cartesian(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), np.sin(phi)], axis=-1)


def cartesian_to_spherical(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=float)
    theta = np.mod(np.arctan2(v[..., 1], v[..., 0]), 2 * np.pi)
    phi = np.arctan2(v[..., 2], np.hypot(v[..., 0], v[..., 1]))
    return theta, phi


def normalize_spherical(theta, phi):
    """Bring any (theta, phi) pair into range by round-tripping through R^3."""
    return cartesian_to_spherical(spherical_to_cartesian(theta, phi))


def canonical_rp2(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    flip = (z < 0) | ((z == 0) & ((y < 0) | ((y == 0) & (x < 0))))
    return np.where(flip[..., None], -v, v)


@dataclass(frozen=True)
class RP2Point:
    rep: SpherePoint

    def __post_init__(self):
        c = canonical_rp2(self.rep.array)
        object.__setattr__(self, "rep", SpherePoint.from_array(c))

    @classmethod
    def of(cls, v) -> RP2Point:
        return cls(SpherePoint.from_array(v))

    def distance(self, other: RP2Point) -> float:
        return float(rp2_distance(self.rep.array, other.rep.array))


def sphere_distance(a, b) -> np.ndarray:
    return np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


def rp2_distance(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def rotation_to(P) -> np.ndarray:
    """Rotation matrix R with R @ NORTH == P (Rodrigues about NORTH x P)."""
    P = normalize(np.asarray(P, dtype=float))
    c = float(P @ NORTH)
    if c < -1 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    k = np.cross(NORTH, P)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + K + K @ K / (1 + c)


def rotation_about(axis, angle: float) -> np.ndarray:
    k = normalize(np.asarray(axis, dtype=float))
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def _stereo(y: np.ndarray) -> np.ndarray:
    """Stereographic coordinates of points in the frame whose pole is NORTH.

    1 - z is rewritten as (x^2 + y^2)/(1 + z) to keep precision near the pole.
    The pole itself maps to inf.
    """
    r2 = y[:, 0] ** 2 + y[:, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = np.where(y[:, 2] > 0, r2 / (1 + y[:, 2]), 1 - y[:, 2])
        w = y[:, :2] / denom[:, None]
    w[denom == 0] = np.inf
    return w


def _inverse_stereo(w: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_stereo`; non-finite w goes to the pole."""
    out = np.empty((len(w), 3))
    bad = ~np.all(np.isfinite(w), axis=1)
    r2 = np.where(bad, 0.0, np.sum(np.where(bad[:, None], 0.0, w) ** 2, axis=1))
    big = r2 > 1
    small = ~big
    ws = np.where(bad[:, None], 0.0, w)
    out[small, :2] = 2 * ws[small] / (r2[small] + 1)[:, None]
    out[small, 2] = (r2[small] - 1) / (r2[small] + 1)
    u = ws[big] / r2[big][:, None]
    u2 = np.sum(u**2, axis=1)
    out[big, :2] = 2 * u / (1 + u2)[:, None]
    out[big, 2] = (1 - u2) / (1 + u2)
    out[bad] = NORTH
    return out


def _as_points(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


# ---------------------------------------------------------------- maps


class CatalogMap:
    domain: str = SPHERE
    codomain: str = SPHERE

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def name(self) -> str:
        return type(self).__name__

    def lift(self) -> CatalogMap:
        """An S^2 -> S^2 map g with g o A = g covering this RP^2 self-map."""
        raise DomainMismatch(f"{self.name} is not an RP2 -> RP2 map with a lift")


def eval_map(m: CatalogMap, point):
    """Evaluate on a SpherePoint / RP2Point / array, checking the domain."""
    if isinstance(point, RP2Point):
        if m.domain != RP2:
            raise DomainMismatch(f"{m.name} is defined on {m.domain}, got an RP2 point")
        out = m(point.rep.array)[0]
        return RP2Point.of(out) if m.codomain == RP2 else SpherePoint.from_array(out)
    if isinstance(point, SpherePoint):
        if m.domain != SPHERE:
            raise DomainMismatch(f"{m.name} is defined on {m.domain}, got a sphere point")
        out = m(point.array)[0]
        return RP2Point.of(out) if m.codomain == RP2 else SpherePoint.from_array(out)
    return m(point)


@dataclass(frozen=True)
class Identity(CatalogMap):
    def __call__(self, x):
        return _as_points(x).copy()

    @property
    def name(self):
        return "identity"


@dataclass(frozen=True)
class Antipodal(CatalogMap):
    def __call__(self, x):
        return -_as_points(x)

    @property
    def name(self):
        return "antipodal"


@dataclass(frozen=True)
class Constant(CatalogMap):
    P: tuple

    def __call__(self, x):
        return np.broadcast_to(normalize(np.array(self.P)), _as_points(x).shape).copy()

    @property
    def name(self):
        return f"const(P={_fmt(self.P)})"


@dataclass(frozen=True)
class Rotation(CatalogMap):
    axis: tuple
    angle: float

    def __call__(self, x):
        return _as_points(x) @ rotation_about(self.axis, self.angle).T

    @property
    def name(self):
        return f"rotation(axis={_fmt(self.axis)},angle={self.angle!r})"


@dataclass(frozen=True)
class Composite(CatalogMap):
    outer: CatalogMap
    inner: CatalogMap

    def __post_init__(self):
        if self.inner.codomain != self.outer.domain:
            raise DomainMismatch(f"cannot compose {self.outer.name} after {self.inner.name}")

    @property
    def domain(self):
        return self.inner.domain

    @property
    def codomain(self):
        return self.outer.codomain

    def __call__(self, x):
        return self.outer(self.inner(x))

    @property
    def name(self):
        prefix = "A*" if isinstance(self.outer, Antipodal) else self.outer.name + "*"
        return prefix + self.inner.name


def antipodal_after(m: CatalogMap) -> CatalogMap:
    return Composite(Antipodal(), m)


@dataclass(frozen=True)
class F1(CatalogMap):
    """Stereographic translation: x -> s^{-1}(s(x) + eps), s projecting from P.

    Degree 1; the only fixed point is P, where the map is tangent to the
    identity (index 2).
    """

    P: tuple = (0.0, 0.0, 1.0)
    eps: float = 0.1

    def __call__(self, x):
        R = rotation_to(self.P)
        y = _as_points(x) @ R  # R^T x, row-wise
        w = _stereo(y)
        w = w + np.array([self.eps, 0.0])
        return _inverse_stereo(w) @ R.T

    @property
    def name(self):
        return f"f1(P={_fmt(self.P)},eps={self.eps!r})"


def make_f1(P=(0.0, 0.0, 1.0), epsilon: float = 0.1, check_resolution: float = 0.02) -> F1:
    """Build f1 and check the displacement bound |x - f1(x)| < 2 sin(pi/4)."""
    if not 0 < epsilon < 1:
        raise EpsilonTooLarge(f"epsilon must lie in (0, 1), got {epsilon}")
    P = tuple(float(v) for v in normalize(np.asarray(P, dtype=float)))
    f = F1(P, float(epsilon))
    from .numerics.grid import sphere_sample

    pts = sphere_sample(check_resolution)
    disp = float(np.max(sphere_distance(pts, f(pts))))
    if disp >= 2 * math.sin(math.pi / 4):
        raise EpsilonTooLarge(f"max displacement {disp:.4f} reaches the antipodal bound")
    return f


# base point of the suspension model and its antipode
F2_BASEPOINT = np.array([1.0, 0.0, 0.0])
_F2_FRAME = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])  # rows: X, Y, pole


def _f2_chart(x: np.ndarray) -> np.ndarray:
    return _stereo(x @ _F2_FRAME.T)


def _f2_chart_inv(w: np.ndarray) -> np.ndarray:
    return _inverse_stereo(w) @ _F2_FRAME


def suspension_to_sphere(theta, t) -> np.ndarray:
    """Homeomorphism from the reduced suspension of S^1 onto S^2.

    (theta, t) in [0, 2pi) x [0, 1]; the collapsed set goes to F2_BASEPOINT
    and (pi, 1/2) to its antipode.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = np.mod(theta, 2 * np.pi) / (2 * np.pi)
    with np.errstate(divide="ignore", invalid="ignore"):
        X = np.tan(np.pi * (s - 0.5))
        Y = np.tan(np.pi * (t - 0.5))
    edge = (s == 0) | (t <= 0) | (t >= 1)
    w = np.column_stack([X, Y])
    w[edge] = np.inf
    return _f2_chart_inv(w)


@dataclass(frozen=True)
class F2(CatalogMap):
    """Reduced suspension of z -> z^2, i.e. (theta, t) -> (2 theta, t).

    In the tan-chart of :func:`suspension_to_sphere` the rule reads
    (X, Y) -> ((X^2 - 1) / (2X), Y).  Degree 2, single fixed point at the
    (non-smooth) base point; A o f2 fixes only the class of (pi, 1/2).
    """

    def __call__(self, x):
        w = _f2_chart(_as_points(x))
        X = w[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            Xn = np.where(X == 0, np.inf, (X * X - 1) / (2 * X))
        return _f2_chart_inv(np.column_stack([Xn, w[:, 1]]))

    @property
    def name(self):
        return "f2"


@dataclass(frozen=True)
class F2Smooth(CatalogMap):
    """z -> z + 1/z in the same chart: a smooth degree-2 map with the same
    fixed point structure as :class:`F2` (index 3 at the base point)."""

    def __call__(self, x):
        w = _f2_chart(_as_points(x))
        at_base = ~np.all(np.isfinite(w), axis=1)
        z = np.where(at_base, 1.0, w[:, 0]) + 1j * np.where(at_base, 0.0, w[:, 1])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = z + 1 / z
        out = np.column_stack([r.real, r.imag])
        out[at_base | (z == 0) | ~np.isfinite(r)] = np.inf
        return _f2_chart_inv(out)

    @property
    def name(self):
        return "f2_smooth"


@dataclass(frozen=True)
class UP(CatalogMap):
    """(theta, phi) -> (theta, 2 phi - pi/2) in the frame whose pole is P."""

    P: tuple = (0.0, 0.0, 1.0)

    def __call__(self, x):
        R = rotation_to(self.P)
        y = _as_points(x) @ R
        theta = np.arctan2(y[:, 1], y[:, 0])
        phi = np.arctan2(y[:, 2], np.hypot(y[:, 0], y[:, 1]))
        return spherical_to_cartesian(theta, 2 * phi - np.pi / 2) @ R.T

    @property
    def name(self):
        return f"UP(P={_fmt(self.P)})"


@dataclass(frozen=True)
class WP(CatalogMap):
    """RP^2 self-map covered by U_P; evaluated on either representative."""

    P: tuple = (0.0, 0.0, 1.0)
    domain = RP2
    codomain = RP2

    def __call__(self, x):
        return UP(self.P)(x)

    def lift(self):
        return UP(self.P)

    @property
    def name(self):
        return f"WP(P={_fmt(self.P)})"


@dataclass(frozen=True)
class ConstantRP2(CatalogMap):
    P: tuple
    domain = RP2
    codomain = RP2

    def __call__(self, x):
        return Constant(self.P)(x)

    def lift(self):
        return Constant(self.P)

    @property
    def name(self):
        return f"constRP2(P={_fmt(self.P)})"


def _fmt(v) -> str:
    return "[" + ",".join(f"{float(c):.12g}" for c in v) + "]"


# ---------------------------------------------------------------- RP^2 representatives

TRIVIAL = "trivial"
NONTRIVIAL = "nontrivial"


def arc_points(n: int) -> list[tuple]:
    """P_k at angle k pi / (2(n+1)) along the arc from (1,0,0) to (0,0,1)."""
    out = []
    for k in range(1, n + 1):
        a = k * math.pi / (2 * (n + 1))
        out.append((math.cos(a), 0.0, math.sin(a)))
    return out


def build_rp2_representative(n: int, cls: str, grid=None, tol: float = 1e-6) -> list[CatalogMap]:
    """Coordinates of an n-ordered map of RP^2 in the requested homotopy class,
    checked pairwise coincidence-free on the grid."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cls = cls.lower().replace("-", "").replace("_", "")
    pts = arc_points(n)
    if cls == TRIVIAL:
        maps: list[CatalogMap] = [ConstantRP2(P) for P in pts]
    elif cls == NONTRIVIAL:
        maps = [WP(P) for P in pts]
    else:
        raise ValueError(f"unknown class {cls!r}")
    from .numerics import coincidence_min_distance

    for i in range(n):
        for j in range(i + 1, n):
            res = coincidence_min_distance(maps[i], maps[j], RP2, grid)
            if res.min <= tol:
                raise ValidationFailed(
                    f"coordinates {i + 1} and {j + 1} nearly coincide (distance {res.min:.3g})")
    return maps


# ---------------------------------------------------------------- parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_number(text: str) -> float:
    """Float literal or arithmetic in ``pi`` (e.g. ``3*pi/16``)."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported number syntax {text!r}")

    return ev(ast.parse(str(text).strip(), mode="eval").body)


_NAMED_POINTS = {
    "north": (0.0, 0.0, 1.0), "south": (0.0, 0.0, -1.0),
    "east": (0.0, 1.0, 0.0), "west": (0.0, -1.0, 0.0),
    "front": (1.0, 0.0, 0.0), "back": (-1.0, 0.0, 0.0),
}


def parse_point(text) -> tuple:
    """``north``, ``[theta,phi]`` (spherical) or ``[x,y,z]`` (Cartesian)."""
    if isinstance(text, (list, tuple)):
        vals = [parse_number(str(v)) for v in text]
    else:
        s = str(text).strip().lower()
        if s in _NAMED_POINTS:
            return _NAMED_POINTS[s]
        if not (s.startswith("[") and s.endswith("]")):
            raise ValueError(f"bad point {text!r}")
        vals = [parse_number(v) for v in s[1:-1].split(",")]
    if len(vals) == 2:
        return tuple(float(v) for v in spherical_to_cartesian(vals[0], vals[1]))
    if len(vals) == 3:
        return tuple(float(v) for v in normalize(np.array(vals)))
    raise ValueError(f"point needs 2 or 3 coordinates: {text!r}")


_CALL_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def _split_args(body: str) -> dict[str, str]:
    out, depth, cur = [], 0, ""
    for ch in body:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur)
    args = {}
    for item in out:
        if "=" not in item:
            raise ValueError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        args[k.strip().lower()] = v.strip()
    return args


def parse_catalog_map(text: str) -> CatalogMap:
    """Parse ids like ``antipodal``, ``f1(P=north,eps=0.1)``, ``WP(P=[0,pi/4])``,
    ``A*f2``.  A leading ``A*`` composes with the antipodal map."""
    s = text.strip()
    for prefix in ("A*", "A.", "A∘"):
        if s.startswith(prefix):
            return antipodal_after(parse_catalog_map(s[len(prefix):]))
    m = _CALL_RE.match(s)
    if not m:
        raise ValueError(f"bad map id {text!r}")
    name, body = m.group(1).lower(), m.group(2) or ""
    args = _split_args(body)
    P = parse_point(args["p"]) if "p" in args else (0.0, 0.0, 1.0)
    if name == "identity":
        return Identity()
    if name in ("antipodal", "a"):
        return Antipodal()
    if name in ("const", "constant", "f0"):
        return Constant(P)
    if name in ("constrp2", "constant_rp2"):
        return ConstantRP2(P)
    if name == "f1":
        return make_f1(P, parse_number(args.get("eps", "0.1")))
    if name == "f2":
        return F2()
    if name == "f2_smooth":
        return F2Smooth()
    if name == "up":
        return UP(P)
    if name == "wp":
        return WP(P)
    if name == "rotation":
        return Rotation(parse_point(args.get("axis", "north")), parse_number(args.get("angle", "0")))
    raise ValueError(f"unknown map {name!r}")
