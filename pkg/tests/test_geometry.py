from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvfix.errors import DomainMismatch, EpsilonTooLarge
from nvfix.geometry import (
    F2,
    UP,
    WP,
    Antipodal,
    Constant,
    ConstantRP2,
    F2Smooth,
    Identity,
    RP2Point,
    SphericalCoord,
    SpherePoint,
    antipodal_after,
    canonical_rp2,
    eval_map,
    make_f1,
    parse_catalog_map,
    parse_point,
    rp2_distance,
    suspension_to_sphere,
)
from nvfix.numerics.grid import fibonacci_sphere

GRID = fibonacci_sphere(100_000)


def up_closed_form(P, x):
    """U_P(x) = 2<P,x> x - P: latitude phi -> 2 phi - pi/2 with longitude kept."""
    P = np.asarray(P, dtype=float)
    return 2 * (x @ P)[:, None] * x - P


unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: 0.1 < math.sqrt(sum(c * c for c in v))).map(lambda v: tuple(np.array(v) / np.linalg.norm(v)))


# --- points


def test_sphere_point_normalises():
    p = SpherePoint(0.0, 3.0, 4.0)
    assert abs(np.linalg.norm(p.array) - 1) <= 1e-12
    with pytest.raises(ValueError):
        SpherePoint(0, 0, 0)


@settings(max_examples=100)
@given(st.floats(0, 2 * math.pi - 1e-9), st.floats(-1.5, 1.5))
def test_spherical_round_trip(theta, phi):
    c = SphericalCoord(theta, phi)
    back = SphericalCoord.from_cartesian(c.to_cartesian())
    assert abs(back.phi - phi) < 1e-9
    assert abs((back.theta - theta + math.pi) % (2 * math.pi) - math.pi) < 1e-9


def test_spherical_coordinates_renormalised():
    c = SphericalCoord(3 * math.pi, 0.0)
    assert 0 <= c.theta < 2 * math.pi and abs(c.theta - math.pi) < 1e-12
    c = SphericalCoord(0.0, math.pi / 2 + 0.3)  # past the pole
    assert abs(c.phi - (math.pi / 2 - 0.3)) < 1e-12


def test_rp2_canonical_rule_and_tiebreak():
    assert RP2Point.of([0, 0, -1]).rep.z == 1
    assert RP2Point.of([0, -1, 0]).rep.y == 1
    assert RP2Point.of([-1, 0, 0]).rep.x == 1
    assert RP2Point.of([0.3, -0.2, -0.5]).rep.z > 0


def test_canonicalisation_idempotent():
    once = canonical_rp2(GRID)
    assert np.array_equal(canonical_rp2(once), once)
    assert np.max(rp2_distance(GRID, -GRID)) == 0


@settings(max_examples=50)
@given(unit_vectors, unit_vectors, unit_vectors)
def test_rp2_distance_is_a_metric(a, b, c):
    a, b, c = map(np.array, (a, b, c))
    dab, dbc, dac = rp2_distance(a, b), rp2_distance(b, c), rp2_distance(a, c)
    assert dab >= 0 and abs(dab - rp2_distance(b, a)) < 1e-15
    assert dac <= dab + dbc + 1e-12
    assert rp2_distance(a, -a) < 1e-15


# --- U_P and W_P


def test_up_pole_and_equator():
    P = np.array([0.0, 0.0, 1.0])
    assert np.allclose(UP(tuple(P))(P), P, atol=1e-12)
    th = np.linspace(0, 2 * np.pi, 17)
    eq = np.column_stack([np.cos(th), np.sin(th), np.zeros_like(th)])
    assert np.allclose(UP(tuple(P))(eq), -P, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(unit_vectors)
def test_up_matches_closed_form(P):
    x = GRID[::10]
    assert np.max(np.abs(UP(P)(x) - up_closed_form(P, x))) < 1e-12


@pytest.mark.parametrize("P", [(0, 0, 1), (1, 0, 0), tuple(np.array([1, -2, 0.5]) / np.linalg.norm([1, -2, 0.5]))])
def test_up_is_even(P):
    U = UP(P)
    assert np.max(np.linalg.norm(U(-GRID) - U(GRID), axis=1)) <= 1e-9


@pytest.mark.parametrize("P", [(0, 0, 1), (0.6, 0.8, 0.0), (0.48, -0.6, 0.64)])
def test_diagram_commutes(P):
    # p(U_P(x)) = W_P(p(x)) with p the quotient map
    left = canonical_rp2(UP(P)(GRID))
    right = canonical_rp2(WP(P)(canonical_rp2(GRID)))
    assert np.max(rp2_distance(left, right)) <= 1e-9


@pytest.mark.parametrize("P", [(0, 0, 1), (0.6, 0.8, 0.0), (0.48, -0.6, 0.64)])
def test_wp_equals_w_minus_p(P):
    minusP = tuple(-np.array(P, dtype=float))
    assert np.max(rp2_distance(WP(P)(GRID), WP(minusP)(GRID))) <= 1e-9


def test_wp_fixes_its_pole():
    P = (0.48, -0.6, 0.64)
    out = eval_map(WP(P), RP2Point.of(P))
    assert out.distance(RP2Point.of(P)) < 1e-12


def test_domain_checks():
    with pytest.raises(DomainMismatch):
        eval_map(WP(), SpherePoint(0, 0, 1))
    with pytest.raises(DomainMismatch):
        eval_map(Antipodal(), RP2Point.of([0, 0, 1]))
    with pytest.raises(DomainMismatch):
        antipodal_after(WP())
    assert WP().lift() == UP() and ConstantRP2((0, 0, 1)).lift() == Constant((0, 0, 1))


def test_antipodal_and_constant():
    out = eval_map(Antipodal(), SpherePoint(0, 0, 1))
    assert (out.x, out.y, out.z) == (0, 0, -1)
    assert np.allclose(Constant((0, 1, 0))(GRID[:5]), [0, 1, 0])


# --- f1


def test_f1_fixes_pole():
    f = make_f1((0, 0, 1), 0.1)
    assert np.allclose(f(np.array([0.0, 0.0, 1.0])), [0, 0, 1], atol=1e-12)


def chunked_fibonacci(count: int, chunk: int = 1_000_000):
    golden = math.pi * (3 - math.sqrt(5))
    for start in range(0, count, chunk):
        k = np.arange(start, min(count, start + chunk), dtype=float)
        z = 1 - 2 * (k + 0.5) / count
        r = np.sqrt(1 - z * z)
        yield np.column_stack([r * np.cos(golden * k), r * np.sin(golden * k), z])


def test_f1_has_no_fixed_point_off_the_pole():
    f = make_f1((0, 0, 1), 0.1)
    count = int(4 * math.pi / 1e-6)  # one point per (1e-3)^2 of area
    low = np.inf
    for x in chunked_fibonacci(count):
        keep = np.linalg.norm(x - [0, 0, 1], axis=1) > 1e-3
        d = np.linalg.norm(f(x[keep]) - x[keep], axis=1)
        low = min(low, float(d.min()))
    assert low > 0


def test_antipodal_f1_fixed_point_free():
    f = antipodal_after(make_f1((0, 0, 1), 0.1))
    assert np.min(np.linalg.norm(f(GRID) - GRID, axis=1)) > 1e-2


def test_f1_displacement_bound_and_errors():
    f = make_f1((0, 1, 0), 0.3)
    assert np.max(np.linalg.norm(f(GRID) - GRID, axis=1)) < math.sqrt(2)
    for eps in (0.0, 1.0, -0.2):
        with pytest.raises(EpsilonTooLarge):
            make_f1((0, 0, 1), eps)
    with pytest.raises(EpsilonTooLarge):
        make_f1((0, 0, 1), 0.85)


# --- f2


@settings(max_examples=50)
@given(st.floats(0.01, 2 * math.pi - 0.01), st.floats(0.01, 0.99))
def test_f2_doubles_the_circle_coordinate(theta, t):
    x = suspension_to_sphere(theta, t)
    assert np.allclose(F2()(x), suspension_to_sphere(2 * theta, t), atol=1e-9)


def test_f2_basepoints():
    base = suspension_to_sphere(0.0, 0.3)
    assert np.allclose(base, [1, 0, 0])
    assert np.allclose(suspension_to_sphere(math.pi, 0.5), [-1, 0, 0], atol=1e-12)
    assert np.allclose(F2()(base), base)
    assert np.allclose(F2Smooth()(base), base)
    assert np.allclose(antipodal_after(F2())(np.array([-1.0, 0, 0])), [-1, 0, 0], atol=1e-12)


def test_f2_maps_are_continuous_on_a_grid():
    for f in (F2(), F2Smooth()):
        y = f(GRID)
        assert np.all(np.isfinite(y))
        assert np.allclose(np.linalg.norm(y, axis=1), 1)


# --- parsing


@pytest.mark.parametrize("text,cls", [
    ("antipodal", Antipodal), ("identity", Identity), ("const(P=north)", Constant),
    ("f2", F2), ("f2_smooth", F2Smooth), ("WP(P=[0,pi/4])", WP), ("UP(P=[1,0,0])", UP),
    ("constrp2(P=front)", ConstantRP2),
])
def test_parse_catalog_ids(text, cls):
    assert isinstance(parse_catalog_map(text), cls)


def test_parse_composite_and_f1():
    m = parse_catalog_map("A*f1(P=south,eps=0.2)")
    assert m.name.startswith("A*f1")
    assert m.inner.eps == 0.2 and np.allclose(m.inner.P, [0, 0, -1])


def test_parse_points():
    assert parse_point("north") == (0.0, 0.0, 1.0)
    assert np.allclose(parse_point("[pi/2, 0]"), [0, 1, 0], atol=1e-12)
    assert np.allclose(parse_point("[0, 3, 4]"), [0, 0.6, 0.8])
    with pytest.raises(ValueError):
        parse_point("[1]")


@pytest.mark.parametrize("bad", ["blob", "f1(P=north", "WP(P=[1,2,3,4])", "const(P=nowhere)"])
def test_parse_rejects_bad_ids(bad):
    with pytest.raises(ValueError):
        parse_catalog_map(bad)
