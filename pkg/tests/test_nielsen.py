from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvfix.descriptor import NValuedMapDescriptor, analyze_group, covering_analysis
from nvfix.errors import EmptyInput, InconsistentInput, MissingRepresentative, NotFree, UnsupportedSurface
from nvfix.group import generate_group, parse_permutation
from nvfix.nielsen import (
    ORBIT_FORMULA,
    SPLIT_FORMULA,
    NielsenInput,
    classify_homotopy_count,
    nielsen_nonsplit,
    nielsen_split,
    nonsplit_section,
    single_map_nielsen,
    split_section,
)


def analysis(n, gens):
    return analyze_group(generate_group([parse_permutation(g, n) for g in gens], n), n)


# --- split additivity


def test_split_examples():
    assert nielsen_split([1, 0]) == 1
    assert nielsen_split([1, 1]) == 2
    assert nielsen_split([1] * 7) == 7


def test_split_rejects_empty_and_negative():
    with pytest.raises(EmptyInput):
        nielsen_split([])
    with pytest.raises(ValueError):
        nielsen_split([1, -1])


@settings(max_examples=100)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=8),
       st.lists(st.integers(0, 50), min_size=1, max_size=8),
       st.randoms())
def test_split_is_additive_and_order_free(a, b, rnd):
    shuffled = list(a)
    rnd.shuffle(shuffled)
    assert nielsen_split(shuffled) == nielsen_split(a)
    assert nielsen_split(a + b) == nielsen_split(a) + nielsen_split(b)


def test_split_section_names_formula():
    s = split_section([1, 0])
    assert s.to_dict() == {"formula_used": SPLIT_FORMULA, "terms": [1, 0], "total": 1}


# --- orbit sum


def test_single_orbit_sum():
    assert nielsen_nonsplit(NielsenInput(analysis(2, ["(1 2)"]), {1: 3})) == 3


def test_two_orbit_sum():
    a = analysis(4, ["(1 2)"])  # orbits {1,2},{3},{4} but not free on 3
    assert not a.free
    a = analysis(4, ["(1 2)(3 4)"])
    assert a.representatives == (1, 3)
    assert nielsen_nonsplit(NielsenInput(a, {1: 2, 3: 5})) == 7


def test_s3_rejected_with_witness():
    a = analysis(3, ["(1 2)", "(1 2 3)"])
    with pytest.raises(NotFree) as exc:
        nielsen_nonsplit(NielsenInput(a, {1: 1}))
    i, alpha = exc.value.witness
    assert i == 1 and alpha(1) == 1 and not alpha.is_identity()


def test_missing_representative():
    with pytest.raises(MissingRepresentative):
        nielsen_nonsplit(NielsenInput(analysis(4, ["(1 2)(3 4)"]), {1: 2}))


def test_values_rekeyed_to_representative():
    a = analysis(4, ["(1 2)(3 4)"])
    assert nielsen_nonsplit(NielsenInput(a, {2: 2, 4: 5})) == 7


def test_two_valued_pair_values_must_agree():
    a = analysis(2, ["(1 2)"])
    assert nielsen_nonsplit(NielsenInput(a, {1: 4, 2: 4})) == 4
    with pytest.raises(InconsistentInput):
        nielsen_nonsplit(NielsenInput(a, {1: 4, 2: 3}))


def test_nonsplit_section():
    d = NValuedMapDescriptor.build("torus", 2, ["(1 2)", "()"])
    s = nonsplit_section(NielsenInput(covering_analysis(d), {1: 2}))
    assert s.formula_used == ORBIT_FORMULA and s.total == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.permutations(range(1, n + 1)), max_size=2),
    st.lists(st.integers(0, 9), min_size=n, max_size=n))))
def test_orbit_sum_independent_of_representative(data):
    n, gens, vals = data
    a = analyze_group(generate_group([parse_permutation(str(list(g)).replace(" ", ""), n)
                                      for g in gens], n), n)
    if not a.free:
        return
    # give every member of an orbit the value of the orbit minimum
    rep_val = {r: vals[r - 1] for r in a.representatives}
    full = {i: rep_val[a.partition.representative_of(i)] for i in range(1, n + 1)}
    other = {max(a.partition.orbit_of(r)): v for r, v in rep_val.items()}
    total = sum(rep_val.values())
    assert nielsen_nonsplit(NielsenInput(a, full)) == total
    assert nielsen_nonsplit(NielsenInput(a, other)) == total


# --- single maps and classification


def test_single_map_nielsen_per_surface():
    assert single_map_nielsen("sphere", 2) == 1
    assert single_map_nielsen("sphere", 0) == 1
    assert single_map_nielsen("sphere", -1) == 0
    assert single_map_nielsen("rp2") == 1
    assert single_map_nielsen("disc") == 1
    assert single_map_nielsen("torus", [[3, 0], [0, 3]]) == 4
    assert single_map_nielsen("torus", [[1, 0], [0, 1]]) == 0


def test_rp2_any_n_has_nielsen_n():
    for n in range(1, 7):
        assert nielsen_split([single_map_nielsen("rp2")] * n) == n


def test_classification_counts():
    assert classify_homotopy_count("sphere", 5).to_dict() == {"count": 1}
    c2 = classify_homotopy_count("sphere", 2)
    assert c2.countable and "degree" in c2.index
    assert classify_homotopy_count("rp2", 4).finite == 2
    assert classify_homotopy_count("disc", 3).finite == 1
    with pytest.raises(UnsupportedSurface):
        classify_homotopy_count("torus", 2)
