from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nvfix.descriptor import NValuedMapDescriptor
from nvfix.errors import InconsistentPayload, SingularCovering, SplitInput
from nvfix.group import Permutation
from nvfix.torus import (
    DEGENERATE,
    TorusLinearPayload,
    TorusTwoValuedMap,
    coincidence_count_oracle,
    coincidence_points_snf,
    det2,
    enumerate_coincidences,
    hnf,
    kernel_lattice,
    lefschetz_coincidence,
    nielsen_torus_2valued,
    smith_normal_form,
)

SWAP, ID = Permutation((2, 1)), Permutation((1, 2))


def grid_count(Q, M, c=(0, 0)) -> int:
    """Count x in [0,1)^2 with (M-Q)x + c integral by scanning a fine
    rational grid whose step divides every solution's denominators."""
    A = np.array(M) - np.array(Q)
    det = abs(int(round(np.linalg.det(A))))
    c = [Fraction(v) for v in c]
    denom = det * int(np.lcm(c[0].denominator, c[1].denominator))
    hits = 0
    for a, b in itertools.product(range(denom), repeat=2):
        x = (Fraction(a, denom), Fraction(b, denom))
        y = [A[i, 0] * x[0] + A[i, 1] * x[1] + c[i] for i in range(2)]
        hits += all(v.denominator == 1 for v in y)
    return hits


def lattice_members(Q, box=2):
    Q = np.array(Q)
    out = set()
    for a, b in itertools.product(range(-4 * box, 4 * box + 1), repeat=2):
        v = Q @ np.array([a, b])
        if abs(v[0]) <= box and abs(v[1]) <= box:
            out.add(tuple(int(x) for x in v))
    return out


# --- kernel lattice


def test_kernel_of_first_generator_swap():
    assert kernel_lattice([SWAP, ID]).tolist() == [[2, 0], [0, 1]]


def test_kernel_of_second_generator_swap():
    assert kernel_lattice([ID, SWAP]).tolist() == [[1, 0], [0, 2]]


def test_kernel_of_both_swaps_is_even_sum_lattice():
    Q = kernel_lattice([SWAP, SWAP])
    assert abs(det2(Q)) == 2
    expected = {(a, b) for a in range(-2, 3) for b in range(-2, 3) if (a + b) % 2 == 0}
    assert lattice_members(Q) == expected


def test_kernel_rejects_split():
    with pytest.raises(SplitInput):
        kernel_lattice([ID, ID])


@pytest.mark.parametrize("sigma", [[SWAP, ID], [ID, SWAP], [SWAP, SWAP]])
def test_kernel_is_canonical(sigma):
    Q = kernel_lattice(sigma)
    assert abs(det2(Q)) == 2
    assert np.array_equal(hnf(Q), Q)
    assert Q[1, 0] == 0 and Q[0, 0] > 0 and Q[1, 1] > 0 and 0 <= Q[0, 1] < Q[0, 0]


# --- Lefschetz coincidence number and counting oracle


def test_lefschetz_examples():
    assert lefschetz_coincidence([[2, 0], [0, 1]], [[0, 0], [0, 0]]) == 2
    assert lefschetz_coincidence([[1, 2], [0, 3]], [[1, 2], [0, 3]]) == 0
    assert lefschetz_coincidence(np.eye(2, dtype=int), 3 * np.eye(2, dtype=int)) == 4
    with pytest.raises(SingularCovering):
        lefschetz_coincidence([[1, 1], [1, 1]], [[0, 0], [0, 0]])


def test_oracle_examples():
    assert coincidence_count_oracle([[2, 0], [0, 1]], [[0, 0], [0, 0]]) == 2
    assert coincidence_points_snf([[2, 0], [0, 1]], [[0, 0], [0, 0]]) == [(0, 0), (Fraction(1, 2), 0)]
    assert coincidence_count_oracle([[2, 1], [0, 1]], [[2, 1], [0, 1]]) == DEGENERATE
    assert coincidence_count_oracle(np.eye(2, dtype=int), 3 * np.eye(2, dtype=int)) == 4


def test_smith_form_reconstructs():
    A = np.array([[4, 6], [2, -3]])
    U, D, V = smith_normal_form(A)
    assert np.array_equal(U @ A @ V, D)
    assert abs(det2(U)) == 1 and abs(det2(V)) == 1
    assert D[1, 1] % D[0, 0] == 0


small = st.integers(-5, 5)
matrices = st.tuples(small, small, small, small).map(lambda t: np.array(t).reshape(2, 2))
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@settings(max_examples=150, deadline=None)
@given(matrices, matrices, rationals, rationals)
def test_counts_equal_absolute_determinant(Q, M, c0, c1):
    assume(det2(Q) != 0 and det2(M - Q) != 0)
    det = abs(lefschetz_coincidence(Q, M))
    assert coincidence_count_oracle(Q, M, (c0, c1)) == det
    assert len(enumerate_coincidences(Q, M, (c0, c1))) == det
    assert coincidence_points_snf(Q, M, (c0, c1)) == enumerate_coincidences(Q, M, (c0, c1))


@settings(max_examples=25, deadline=None)
@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)),
       st.fractions(min_value=0, max_value=1, max_denominator=3))
def test_counts_match_grid_scan(entries, c0):
    Q = np.array([[2, 0], [0, 1]])
    M = np.array(entries).reshape(2, 2)
    assume(0 < abs(det2(M - Q)) <= 8)
    assert coincidence_count_oracle(Q, M, (c0, 0)) == grid_count(Q, M, (c0, 0))


# --- two-valued Nielsen number


def torus_d(sigma, M, c=None, Q=None):
    return NValuedMapDescriptor.build("torus", 2, sigma, TorusLinearPayload.build(M, c, Q))


def test_zero_matrix_gives_two():
    r = nielsen_torus_2valued(torus_d(["(1 2)", "()"], [[0, 0], [0, 0]]))
    assert r.nielsen == 2 and r.oracle_count == 2 and r.brute_force_count == 2


def test_shifted_identity_gives_one():
    r = nielsen_torus_2valued(torus_d(["(1 2)", "()"], [[3, 0], [0, 2]]))
    assert r.nielsen == 1


def test_degenerate_reports_zero_with_flag():
    r = nielsen_torus_2valued(torus_d(["(1 2)", "()"], [[2, 0], [0, 1]]))
    assert r.nielsen == 0 and r.degenerate and r.oracle_count == DEGENERATE


def test_payload_consistency():
    with pytest.raises(InconsistentPayload):
        nielsen_torus_2valued(torus_d(["(1 2)", "()"], [[0, 0], [0, 0]], Q=[[1, 0], [0, 2]]))
    ok = nielsen_torus_2valued(torus_d(["(1 2)", "()"], [[0, 0], [0, 0]], Q=[[2, 0], [0, 1]]))
    assert ok.nielsen == 2
    with pytest.raises(SplitInput):
        nielsen_torus_2valued(torus_d(["()", "()"], [[0, 0], [0, 0]]))
    with pytest.raises(InconsistentPayload):
        nielsen_torus_2valued(NValuedMapDescriptor.build("torus", 2, ["(1 2)", "()"]))
    with pytest.raises(InconsistentPayload):
        TorusLinearPayload.build([[0, 0], [0, 0]], ["1/0", "0"])


def test_two_valued_model_swaps_under_deck_translation():
    T = TorusTwoValuedMap([SWAP, ID], TorusLinearPayload.build([[1, 1], [0, 3]], ["1/3", "0"]))
    assert not T.perturbed
    rng = np.random.default_rng(1)
    y = rng.random((50, 2))
    # going once round the meridian of the base exchanges the two values
    a = T.values(y)
    b = T.values(y + np.array([1.0, 0.0]))
    diff = np.abs(((a[::-1] - b) + 0.5) % 1.0 - 0.5)
    assert diff.max() < 1e-12


def test_perturbation_applied_when_values_would_coincide():
    T = TorusTwoValuedMap([SWAP, ID], TorusLinearPayload.build([[0, 0], [0, 0]]))
    assert T.perturbed
    v = T.values(np.random.default_rng(0).random((200, 2)))
    gap = np.abs((v[0] - v[1] + 0.5) % 1.0 - 0.5).max(axis=1)
    assert gap.min() > 1e-3
