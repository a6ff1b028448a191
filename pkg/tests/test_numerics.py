from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nvfix.errors import EmptyInput, InconsistentClass, ZeroOnCircle
from nvfix.geometry import (
    F2,
    UP,
    WP,
    Antipodal,
    Constant,
    ConstantRP2,
    F2Smooth,
    Identity,
    Rotation,
    antipodal_after,
    build_rp2_representative,
    canonical_rp2,
    make_f1,
    rp2_distance,
    suspension_to_sphere,
)
from nvfix.group import Permutation
from nvfix.numerics import (
    UNRELIABLE,
    GridSpec,
    classify_2valued_sphere,
    classify_rp2,
    coincidence_min_distance,
    degree_sphere,
    find_fixed_points,
    fixed_point_index,
    winding_number,
)
from nvfix.numerics.grid import get_surface, level_plan
from nvfix.torus import TorusLinearPayload, TorusTwoValuedMap

P_OFF = tuple(np.array([0.3, -0.4, 0.866]) / np.linalg.norm([0.3, -0.4, 0.866]))


class Linear:
    """Disc chart map z -> A z."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)

    def __call__(self, x):
        return np.atleast_2d(x) @ self.A.T


# --- GridSpec


def test_grid_defaults_and_validation():
    g = GridSpec()
    assert g.resolution == 1e-3 and g.refinement_depth == 3
    assert g.cluster_radius == pytest.approx(5e-3)
    assert GridSpec(resolution=2e-3).cluster_radius == pytest.approx(1e-2)
    assert g.with_overrides(resolution=4e-3).cluster_radius == pytest.approx(2e-2)
    with pytest.raises(ValueError):
        GridSpec(resolution=0)
    with pytest.raises(ValueError):
        GridSpec(resolution=1e-3, cluster_radius=1e-3)


@pytest.mark.parametrize("res", [1e-3, 4e-3, 3e-2, 0.5])
def test_level_plan_reaches_resolution(res):
    n_root, k = level_plan(math.pi / 2, res)
    assert (math.pi / 2) / (n_root * 2**k) <= res


# --- winding numbers and indices


def test_winding_of_circle_powers():
    t = 2 * np.pi * np.arange(256) / 256
    for k in (-2, -1, 0, 1, 3):
        v = np.column_stack([np.cos(k * t), np.sin(k * t)]) + (0 if k else 2)
        assert winding_number(v)[0] == k


def test_contraction_has_index_one():
    assert fixed_point_index(Linear(np.eye(2) / 2), (0.0, 0.0), 0.1, "disc") == 1


@settings(max_examples=60, deadline=None)
@given(st.tuples(*[st.floats(-3, 3)] * 4))
def test_linear_index_is_sign_of_det(entries):
    A = np.array(entries).reshape(2, 2)
    det = np.linalg.det(np.eye(2) - A)
    assume(abs(det) > 1e-2)
    assert fixed_point_index(Linear(A), (0.0, 0.0), 0.05, "disc") == int(np.sign(det))


def test_zero_on_circle():
    with pytest.raises(ZeroOnCircle):
        fixed_point_index(Identity(), (0.0, 0.0, 1.0), 0.01)


def test_f1_index_two_at_pole():
    f = make_f1(P_OFF, 0.1)
    assert fixed_point_index(f, P_OFF, 0.05) == 2


def test_unreliable_is_a_singleton():
    import pickle

    assert pickle.loads(pickle.dumps(UNRELIABLE)) is UNRELIABLE


# --- fixed point scans


def test_constant_has_one_cluster():
    x0 = (0.0, 0.6, 0.8)
    rep = find_fixed_points(Constant(x0))
    assert rep.total_count == 1
    assert np.linalg.norm(np.array(rep.clusters[0].location) - x0) < 1e-6
    assert rep.clusters[0].index == 1


def test_antipodal_has_no_fixed_points():
    assert find_fixed_points(Antipodal()).total_count == 0


def test_wp_single_cluster_at_pole():
    rep = find_fixed_points(WP(P_OFF), "rp2")
    assert rep.total_count == 1
    assert rp2_distance(np.array(rep.clusters[0].location), np.array(P_OFF)) < 1e-6


def test_split_f2_pair_has_two_clusters():
    rep = find_fixed_points([F2(), antipodal_after(F2())])
    assert rep.total_count == 2
    locs = sorted(rep.clusters, key=lambda c: c.coordinate)
    assert np.allclose(locs[0].location, [1, 0, 0], atol=1e-6)
    assert np.allclose(locs[1].location, suspension_to_sphere(math.pi, 0.5)[0], atol=1e-6)
    assert [c.coordinate for c in locs] == [1, 2]


def test_clusters_are_separated():
    rep = find_fixed_points([Constant((0, 0, 1)), Constant((0, 0.1, 0.995))])
    locs = np.array([c.location for c in rep.clusters])
    assert rep.total_count == 2
    assert np.linalg.norm(locs[0] - locs[1]) > rep.grid.cluster_radius


@pytest.mark.parametrize("m", [Constant((0, 0, 1)), make_f1((0, 0, 1), 0.1), F2(), antipodal_after(F2()),
                               Rotation((1, 1, 0), 0.7)])
def test_refinement_monotone(m):
    coarse = find_fixed_points(m, grid=GridSpec(resolution=2e-3, refinement_depth=3), compute_index=False)
    fine = find_fixed_points(m, grid=GridSpec(resolution=2e-3, refinement_depth=4), compute_index=False)
    assert coarse.total_count == fine.total_count
    for a, b in zip(coarse.clusters, fine.clusters):
        assert np.linalg.norm(np.array(a.location) - b.location) <= coarse.grid.cluster_radius


def test_scan_independent_of_thread_count(monkeypatch):
    m = make_f1(P_OFF, 0.1)
    monkeypatch.setenv("NVFIX_THREADS", "1")
    one = find_fixed_points(m).to_dict()
    monkeypatch.setenv("NVFIX_THREADS", "4")
    four = find_fixed_points(m).to_dict()
    assert one == four


def test_torus_two_valued_scan_counts_nielsen_number():
    sigma = [Permutation((2, 1)), Permutation((1, 2))]
    T = TorusTwoValuedMap(sigma, TorusLinearPayload.build([[1, 1], [0, 3]], ["1/3", "1/5"]))
    rep = find_fixed_points(T, "torus")
    # |det(M - Q)| = |det([[-1, 1], [0, 2]])| = 2, each point of index sign(-2)
    assert rep.total_count == 2
    assert [c.index for c in rep.clusters] == [-1, -1]


# --- Lefschetz-Hopf: sum of indices = 1 + degree


@pytest.mark.parametrize("m,deg", [(Constant((0, 0, 1)), 0), (make_f1(P_OFF, 0.1), 1), (F2Smooth(), 2),
                                   (antipodal_after(F2()), -2)])
def test_index_sum_is_lefschetz_number(m, deg):
    rep = find_fixed_points(m)
    assert rep.index_sum() == 1 + deg


# --- coincidences


def test_coincidence_of_map_with_itself_is_zero():
    assert coincidence_min_distance(F2(), F2()).min == 0


def test_identity_and_antipodal_are_distance_two_apart():
    assert coincidence_min_distance(Identity(), Antipodal()).min == pytest.approx(2.0, abs=1e-12)


def test_wp_pair_is_coincidence_free():
    a = (1.0, 0.0, 0.0)
    b = (math.cos(math.pi / 8), 0.0, math.sin(math.pi / 8))
    res = coincidence_min_distance(WP(a), WP(b), "rp2")
    assert res.min > 1e-2
    # the reported minimum is attained at the reported point
    got = rp2_distance(WP(a)(res.argmin[None]), WP(b)(res.argmin[None]))[0]
    assert got == pytest.approx(res.min, abs=1e-9)


def test_coincidence_minimum_not_above_a_dense_sample():
    a, b = (1.0, 0.0, 0.0), (0.0, 0.6, 0.8)
    from nvfix.numerics.grid import fibonacci_sphere

    x = fibonacci_sphere(200_000)
    sample_min = float(np.min(rp2_distance(WP(a)(x), WP(b)(x))))
    assert coincidence_min_distance(WP(a), WP(b), "rp2").min <= sample_min + 1e-12


# --- degrees and classifiers


@pytest.mark.parametrize("m,deg", [(Identity(), 1), (F2(), 2), (Constant((0, 0, 1)), 0), (Antipodal(), -1),
                                   (Rotation((0, 1, 0), 1.0), 1), (make_f1((0, 0, 1), 0.1), 1),
                                   (antipodal_after(F2()), -2)])
def test_degree(m, deg):
    assert degree_sphere(m) == deg


def test_degree_independent_of_seed():
    assert {degree_sphere(F2Smooth(), seed=s) for s in range(3)} == {2}


@pytest.mark.parametrize("m,cls", [(Constant((0, 0, 1)), 0), (make_f1((0, 0, 1), 0.1), 1), (F2(), 2)])
def test_two_valued_sphere_classes(m, cls):
    assert classify_2valued_sphere(m) == cls
    assert classify_2valued_sphere(antipodal_after(m)) == cls


def test_classify_rp2():
    assert classify_rp2([ConstantRP2((1, 0, 0)), ConstantRP2((0, 0, 1))]) == "trivial"
    assert classify_rp2([WP((1, 0, 0)), WP(P_OFF)]) == "nontrivial"
    with pytest.raises(InconsistentClass):
        classify_rp2([ConstantRP2((0, 0, 1)), WP((1, 0, 0))])
    with pytest.raises(EmptyInput):
        classify_rp2([])


def test_up_has_even_preimage_count_trap():
    # U_P is even, so its signed degree vanishes although W_P is not trivial
    assert degree_sphere(UP(P_OFF)) == 0


# --- RP^2 representatives


def test_rp2_single_nontrivial_coordinate():
    maps = build_rp2_representative(1, "nontrivial")
    rep = find_fixed_points(maps, "rp2")
    assert rep.total_count == 1
    assert rp2_distance(np.array(rep.clusters[0].location), np.array(maps[0].P)) < 1e-6


def test_rp2_two_constants():
    maps = build_rp2_representative(2, "trivial")
    assert find_fixed_points(maps, "rp2").total_count == 2


def test_rp2_triple_pairwise_coincidence_free():
    maps = build_rp2_representative(3, "nontrivial")
    for i in range(3):
        for j in range(i + 1, 3):
            assert coincidence_min_distance(maps[i], maps[j], "rp2").min > 0


def test_rp2_surface_identifies_antipodes():
    surf = get_surface("rp2")
    x = np.array([[0.0, 0.6, -0.8]])
    assert np.array_equal(surf.canonical(x), canonical_rp2(x))
