"""Named verification suites: group, torus, sphere, rp2 (and all)."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import geometry as geo
from .descriptor import NValuedMapDescriptor, analyze_group
from .errors import NotFree, UnknownSuite
from .group import Permutation, generate_group, orbit_partition, stabilizer, transporter
from .nielsen import NielsenInput, nielsen_nonsplit, nielsen_split, single_map_nielsen
from .numerics import (
    GridSpec,
    UNRELIABLE,
    classify_rp2,
    coincidence_min_distance,
    degree_sphere,
    fibonacci_sphere,
    find_fixed_points,
    fixed_point_index,
)
from .torus import (
    TorusLinearPayload,
    TorusTwoValuedMap,
    coincidence_points_snf,
    det2,
    enumerate_coincidences,
    kernel_lattice,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class SuiteResult:
    name: str
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def random_permutation(rng: np.random.Generator, n: int) -> Permutation:
    return Permutation(tuple(int(v) + 1 for v in rng.permutation(n)))


def random_subgroup(rng: np.random.Generator, n: int, max_gens: int = 2):
    """Subgroup generated by 1..max_gens random elements; half of the draws
    use sparse generators (few moved points) so small groups appear too."""
    gens = []
    for _ in range(int(rng.integers(1, max_gens + 1))):
        if rng.random() < 0.5:
            gens.append(random_permutation(rng, n))
        else:
            k = int(rng.integers(2, n + 1)) if n >= 2 else 1
            pts = rng.choice(n, size=k, replace=False) + 1
            gens.append(Permutation.from_cycles([pts.tolist()], n))
    return generate_group(gens, n)


# ---------------------------------------------------------------- group


def check_group_algebra(G) -> list[str]:
    """Orbit-stabiliser, transporter cosets and orbit partition; returns failures."""
    n = G.n
    T = G.table.astype(np.int64)
    bad = []
    part = orbit_partition(G)
    covered = sorted(i for o in part.orbits for i in o)
    if covered != list(range(1, n + 1)):
        bad.append("orbits do not partition 1..n")
    if tuple(min(o) for o in part.orbits) != part.representatives:
        bad.append("representative is not the orbit minimum")
    for i in range(1, n + 1):
        S = stabilizer(G, i)
        orb = part.orbit_of(i)
        if G.order != len(orb) * S.order:
            bad.append(f"|G| != |orbit({i})| * |stab({i})|")
        S_rows = T[T[:, i - 1] == i]
        for j in range(1, n + 1):
            tr = transporter(G, i, j)
            if j not in orb:
                if tr:
                    bad.append(f"transporter({i},{j}) non-empty outside the orbit")
                continue
            if len(tr) != S.order:
                bad.append(f"|transporter({i},{j})| != |stab({i})|")
                continue
            # tr must equal the left coset g * stab(i) for any g in tr
            g = np.array(min(tr).images, dtype=np.int64)
            coset = g[S_rows - 1]
            got = np.array(sorted(p.images for p in tr), dtype=np.int64)
            if not np.array_equal(got, coset[np.lexsort(coset.T[::-1])]):
                bad.append(f"transporter({i},{j}) is not a left coset of stab({i})")
    return bad


def group_algebra_suite(count: int = 100, max_n: int = 8, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    failures, orders = [], []
    for k in range(count):
        n = int(rng.integers(1, max_n + 1))
        G = random_subgroup(rng, n)
        orders.append(G.order)
        failures += [f"case {k} (n={n}): {msg}" for msg in check_group_algebra(G)]
    return Check("group algebra", not failures,
                 {"cases": count, "max_order": max(orders), "failures": failures[:5],
                  "seconds": round(time.perf_counter() - t0, 3)})


def orbit_engine_suite(count: int = 200, max_n: int = 6, seed: int = 0) -> Check:
    """Orbit formula accepts exactly the free actions; n = 2 reduces to the
    single per-pair value."""
    rng = np.random.default_rng(seed + 1)
    t0 = time.perf_counter()
    failures, n_free, n_two = [], 0, 0
    for k in range(count):
        n = int(rng.integers(2, max_n + 1))
        L = random_subgroup(rng, n)
        a = analyze_group(L, n)
        part = orbit_partition(L)
        values = {i: int(rng.integers(0, 7)) for i in part.representatives}
        per_pair = {i: values[part.representative_of(i)] for i in range(1, n + 1)}
        # independent freeness oracle: every orbit is regular (|orbit| = |L|)
        free_oracle = all(len(o) == L.order for o in part.orbits)
        try:
            total = nielsen_nonsplit(NielsenInput(a, per_pair))
            if not free_oracle:
                failures.append(f"case {k}: accepted a non-free action")
            expected = sum(Fraction(per_pair[i], len(part.orbit_of(i))) for i in range(1, n + 1))
            if total != expected:
                failures.append(f"case {k}: total {total} != {expected}")
            n_free += 1
        except NotFree as exc:
            i, alpha = exc.witness
            if free_oracle:
                failures.append(f"case {k}: rejected a free action")
            if alpha not in L or alpha.is_identity() or alpha(i) != i:
                failures.append(f"case {k}: bad witness {exc.witness}")
    # 2-valued non-split maps: L' = <(1 2)>, N = the per-pair value
    swap = Permutation((2, 1))
    for v in range(0, 30):
        a = analyze_group(generate_group([swap], 2), 2)
        n_two += 1
        if nielsen_nonsplit(NielsenInput(a, {1: v})) != v or nielsen_nonsplit(NielsenInput(a, {2: v})) != v:
            failures.append(f"n=2 value {v} not reproduced")
    return Check("orbit engine", not failures,
                 {"cases": count, "free_cases": n_free, "two_valued_cases": n_two,
                  "failures": failures[:5], "seconds": round(time.perf_counter() - t0, 3)})


# ---------------------------------------------------------------- torus


def random_rational(rng) -> Fraction:
    q = int(rng.integers(1, 7))
    return Fraction(int(rng.integers(0, q)), q)


def torus_oracle_suite(count: int = 500, seed: int = 0) -> Check:
    """Brute-force lattice counts against |det(M - Q)| and the SNF parametrisation."""
    rng = np.random.default_rng(seed + 2)
    t0 = time.perf_counter()
    failures, done = [], 0
    while done < count:
        Q = rng.integers(-5, 6, size=(2, 2))
        M = rng.integers(-5, 6, size=(2, 2))
        det = det2(M - Q)
        if det == 0 or det2(Q) == 0:
            continue
        c = (random_rational(rng), random_rational(rng))
        brute = enumerate_coincidences(Q, M, c)
        snf = coincidence_points_snf(Q, M, c)
        A = (M - Q).tolist()
        for x in brute:
            r = [A[i][0] * x[0] + A[i][1] * x[1] + c[i] for i in range(2)]
            if any(v.denominator != 1 for v in r):
                failures.append(f"point {x} is not a coincidence")
        if len(brute) != abs(det) or sorted(snf) != sorted(brute):
            failures.append(f"Q={Q.tolist()} M={M.tolist()}: brute {len(brute)} snf {len(snf)} det {det}")
        done += 1
    return Check("torus oracle", not failures,
                 {"cases": done, "failures": failures[:5], "seconds": round(time.perf_counter() - t0, 3)})


TORUS_SIGMAS = [((2, 1), (1, 2)), ((1, 2), (2, 1)), ((2, 1), (2, 1))]


def torus_index_suite(count: int = 12, seed: int = 0) -> Check:
    """Winding index at a coincidence point against sign(det(M - Q))."""
    rng = np.random.default_rng(seed + 3)
    t0 = time.perf_counter()
    rows, failures = [], []
    while len(rows) < count:
        sigma = [Permutation(p) for p in TORUS_SIGMAS[int(rng.integers(0, 3))]]
        Q = kernel_lattice(sigma)
        M = rng.integers(-3, 4, size=(2, 2))
        det = det2(M - Q)
        if det == 0 or abs(det) > 12:
            continue
        c = (random_rational(rng), random_rational(rng))
        T = TorusTwoValuedMap(sigma, TorusLinearPayload.build(M.tolist(), [str(v) for v in c]))
        if T.perturbed:
            continue  # coincidences of the perturbed model are not the linear ones
        pts = coincidence_points_snf(Q, M, c)
        base = np.array([[float(p[0]), float(p[1])] for p in pts]) @ Q.T.astype(float) % 1.0
        x = base[int(rng.integers(0, len(base)))]
        d = np.mod(base - x + 0.5, 1.0) - 0.5
        gaps = np.linalg.norm(d, axis=1)
        gaps = gaps[gaps > 1e-9]
        radius = min(0.01, 0.25 * float(gaps.min())) if len(gaps) else 0.01
        idx = fixed_point_index(T, x, radius, "torus")
        ok = idx == int(np.sign(det))
        rows.append({"Q": Q.tolist(), "M": M.tolist(), "det": det, "index": idx if idx is not UNRELIABLE else None})
        if not ok:
            failures.append(rows[-1])
    return Check("torus index cross-check", not failures,
                 {"cases": len(rows), "failures": failures[:5], "seconds": round(time.perf_counter() - t0, 3)})


# ---------------------------------------------------------------- sphere


def sphere_catalog_suite(seed: int = 0, grid: Optional[GridSpec] = None) -> list[Check]:
    grid = grid or GridSpec()
    A = geo.Antipodal()
    f0 = geo.Constant(tuple(geo.normalize([0.3, -0.4, 0.8])))
    f1 = geo.make_f1()
    f2 = geo.F2()
    out = []

    def count_and_degree(name, f, want_fix, want_deg):
        rep = find_fixed_points(f, "sphere", grid)
        deg = degree_sphere(f, seed=seed)
        out.append(Check(f"{name}: fixed points and degree",
                         rep.total_count == want_fix and deg == want_deg,
                         {"fixed_points": rep.total_count, "degree": deg,
                          "indices": [c.to_dict()["index"] for c in rep.clusters]}))
        return rep, deg

    r0, d0 = count_and_degree("f0", f0, 1, 0)
    r1, d1 = count_and_degree("f1", f1, 1, 1)
    r2, d2 = count_and_degree("f2", f2, 1, 2)

    af1 = geo.antipodal_after(f1)
    rep = find_fixed_points(af1, "sphere", grid)
    gap = coincidence_min_distance(af1, geo.Identity(), "sphere", grid).min
    out.append(Check("A o f1 fixed point free", rep.total_count == 0 and gap > 1e-2,
                     {"fixed_points": rep.total_count, "min_displacement": gap}))

    af2 = geo.antipodal_after(f2)
    rep = find_fixed_points(af2, "sphere", grid)
    target = geo.suspension_to_sphere(np.pi, 0.5)[0]
    dist = float(np.linalg.norm(np.array(rep.clusters[0].location) - target)) if rep.clusters else None
    out.append(Check("A o f2 single fixed point at (-1, 1/2)",
                     rep.total_count == 1 and dist is not None and dist < 1e-6,
                     {"fixed_points": rep.total_count, "distance_to_expected": dist}))

    da1, da2 = degree_sphere(af1, seed=seed), degree_sphere(af2, seed=seed)
    n_phi1 = nielsen_split([single_map_nielsen("sphere", d1), single_map_nielsen("sphere", da1)])
    n_phi2 = nielsen_split([single_map_nielsen("sphere", d2), single_map_nielsen("sphere", da2)])
    out.append(Check("N(phi1) = 1 and N(phi2) = 2", n_phi1 == 1 and n_phi2 == 2,
                     {"degrees": [d1, da1, d2, da2], "N(phi1)": n_phi1, "N(phi2)": n_phi2,
                      "formula_used": "split-sum"}))

    # Lefschetz-Hopf: sum of indices = 1 + degree
    lh = {"f0": (r0.index_sum(), 1 + d0), "f1": (r1.index_sum(), 1 + d1)}
    ok = all(s == w for s, w in lh.values())
    s2 = r2.index_sum()
    detail = {k: {"index_sum": s, "1+deg": w} for k, (s, w) in lh.items()}
    if s2 is UNRELIABLE:
        sm = geo.F2Smooth()
        rs, ds = find_fixed_points(sm, "sphere", grid), degree_sphere(sm, seed=seed)
        ss = rs.index_sum()
        detail["f2"] = {"index_sum": "unreliable", "fallback": "f2_smooth",
                        "fallback_index_sum": ss if ss is not UNRELIABLE else None, "1+deg": 1 + ds}
        ok = ok and rs.total_count == 1 and ss == 1 + ds == 1 + d2
    else:
        detail["f2"] = {"index_sum": s2, "1+deg": 1 + d2}
        ok = ok and s2 == 1 + d2 == 3
    out.append(Check("Lefschetz-Hopf index sums", ok, detail))
    return out


# ---------------------------------------------------------------- rp2


def rp2_wecken_suite(max_n: int = 5, seed: int = 0, grid: Optional[GridSpec] = None) -> list[Check]:
    grid = grid or GridSpec()
    out = []
    for n in range(1, max_n + 1):
        for cls in (geo.TRIVIAL, geo.NONTRIVIAL):
            t0 = time.perf_counter()
            maps = geo.build_rp2_representative(n, cls, grid)
            rep = find_fixed_points(maps, "rp2", grid)
            got_cls = classify_rp2(maps, seed=seed)
            N = nielsen_split([single_map_nielsen("rp2")] * n)
            out.append(Check(f"RP2 n={n} {cls}",
                             rep.total_count == n == N and got_cls == cls,
                             {"clusters": rep.total_count, "N": N, "classified_as": got_cls,
                              "seconds": round(time.perf_counter() - t0, 3)}))
    return out


def wp_geometry_suite(pairs: int = 20, seed: int = 0, grid: Optional[GridSpec] = None) -> list[Check]:
    grid = grid or GridSpec()
    rng = np.random.default_rng(seed + 4)
    X = fibonacci_sphere(100_000)
    out = []
    worst = 0.0
    for _ in range(5):
        P = geo.normalize(rng.normal(size=3))
        a, b = geo.WP(tuple(P))(X), geo.WP(tuple(-P))(X)
        worst = max(worst, float(np.max(geo.rp2_distance(a, b))))
    out.append(Check("W_P = W_-P", worst <= 1e-9, {"max_distance": worst, "grid_points": len(X)}))

    errs, counts = [], []
    for _ in range(5):
        P = geo.normalize(rng.normal(size=3))
        rep = find_fixed_points(geo.WP(tuple(P)), "rp2", grid)
        counts.append(rep.total_count)
        if rep.total_count == 1:
            errs.append(float(geo.rp2_distance(np.array(rep.clusters[0].location), P)))
    out.append(Check("Fix(W_P) = {p(P)}", all(c == 1 for c in counts) and max(errs) <= 1e-6,
                     {"counts": counts, "max_location_error": max(errs) if errs else None}))

    mins = []
    while len(mins) < pairs:
        P1, P2 = geo.normalize(rng.normal(size=3)), geo.normalize(rng.normal(size=3))
        gap = math.acos(min(1.0, abs(float(P1 @ P2))))
        if gap < math.pi / 16:
            continue
        r = coincidence_min_distance(geo.WP(tuple(P1)), geo.WP(tuple(P2)), "rp2", grid)
        mins.append({"gap": round(gap, 6), "min_distance": r.min})
    out.append(Check("Coin(W_P1, W_P2) empty", all(m["min_distance"] > 1e-3 for m in mins),
                     {"pairs": len(mins), "smallest": min(m["min_distance"] for m in mins)}))
    return out


# ---------------------------------------------------------------- dispatch

SUITES: dict[str, Callable[..., list]] = {
    "group": lambda seed, grid: [group_algebra_suite(seed=seed), orbit_engine_suite(seed=seed)],
    "torus": lambda seed, grid: [torus_oracle_suite(seed=seed), torus_index_suite(seed=seed)],
    "sphere": lambda seed, grid: sphere_catalog_suite(seed=seed, grid=grid),
    "rp2": lambda seed, grid: rp2_wecken_suite(seed=seed, grid=grid) + wp_geometry_suite(seed=seed, grid=grid),
}


def verify(suite: str, seed: int = 0, grid: Optional[GridSpec] = None) -> list[SuiteResult]:
    name = str(suite).strip().lower()
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise UnknownSuite(f"unknown suite {suite!r}; expected one of {', '.join(list(SUITES) + ['all'])}")
    return [SuiteResult(s, SUITES[s](seed, grid)) for s in names]
