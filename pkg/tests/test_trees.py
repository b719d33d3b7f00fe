import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tugdpp.trees import (
    HypothesisNotSatisfied,
    NotStrictlyBinary,
    build_tree,
    check_sparsity_conclusion,
    full_tree,
    left_comb,
    mass_profile,
    random_tree,
    satisfies_sum_estimate,
    sparsity_threshold,
)


def recursive_leaf_weights(nested, mu, w=1.0):
    """Leaf weights by plain recursion over the nested description."""
    if not nested:
        return [w]
    return recursive_leaf_weights(nested[0], mu, w * mu) + recursive_leaf_weights(
        nested[1], mu, w * (1 - mu)
    )


def test_single_root():
    t = build_tree([])
    assert len(t) == 1 and t.height == 0 and t.is_leaf(0)
    prof = mass_profile(t, 0.37)
    assert prof.a.tolist() == [1.0] and prof.b.tolist() == [1.0]


def test_full_depth_two():
    t = full_tree(2)
    assert len(t) == 7
    node = t.node("011")
    assert t.lturns[node] == 0 and t.rturns[node] == 2
    prof = mass_profile(t, 0.3)
    assert prof.a[1] == pytest.approx(1.0) and prof.a[2] == pytest.approx(1.0)
    assert prof.b[2] == pytest.approx(0.09 + 2 * 0.21 + 0.49)


def test_left_comb_three():
    t = left_comb(3)
    assert len(t) == 7
    assert sorted(t.depth[x] for x in t.leaves()) == [1, 2, 3, 3]
    prof = mass_profile(t, 0.5)
    assert prof.b.tolist() == [0.0, 0.5, 0.25, 0.25]


def test_nodes_in_total_order():
    t = build_tree([[[], []], [[[], []], []]])
    assert list(t.depth) == sorted(t.depth)
    assert [t.bits(x) for x in range(len(t))] == [
        "0", "00", "01", "000", "001", "010", "011", "0100", "0101",
    ]


@pytest.mark.parametrize("bad", [[[]], [[], [], []], "leaf", [[[], []], [[]]]])
def test_not_strictly_binary(bad):
    with pytest.raises(NotStrictlyBinary):
        build_tree(bad)


@pytest.mark.parametrize(
    "C, delta, K", [(10, 1, 22), (1, 2, 3), (0.5, 0.1, 12)]
)
def test_threshold(C, delta, K):
    assert sparsity_threshold(C, delta) == K


def test_sum_estimate_examples():
    assert satisfies_sum_estimate(build_tree([]), 0.5, 1e-9)
    comb = left_comb(40)
    assert mass_profile(comb, 0.5).interior_mass == pytest.approx(2 - 0.5**39)
    assert satisfies_sum_estimate(comb, 0.5, 3)
    # a full tree has interior mass equal to its depth
    assert not satisfies_sum_estimate(full_tree(7), 0.5, 3)


def test_sparsity_on_comb():
    comb = left_comb(40)
    assert mass_profile(comb, 0.5).top_mass == 0.5**39
    assert check_sparsity_conclusion(comb, 0.5, 3, 0.1)


def test_sparsity_needs_hypothesis():
    with pytest.raises(HypothesisNotSatisfied):
        check_sparsity_conclusion(full_tree(7), 0.5, 3, 0.1)


def test_every_small_tree_has_unit_leaf_mass():
    shapes = [[]]
    for _ in range(3):
        shapes = [[]] + [[a, b] for a, b in itertools.product(shapes, repeat=2)]
    assert len(shapes) == 26
    for nested in shapes:
        t = build_tree(nested)
        assert t.to_nested() == nested
        for mu in (0.2, 0.5, 0.8):
            leaf_w = recursive_leaf_weights(nested, mu)
            assert sum(leaf_w) == pytest.approx(1.0, abs=1e-15)
            assert mass_profile(t, mu).leaf_mass == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mu=st.floats(0.01, 0.99))
def test_random_tree_invariants(seed, mu):
    t = random_tree(np.random.default_rng(seed), max_depth=40, max_nodes=1500)
    prof = mass_profile(t, mu)
    assert abs(prof.leaf_mass - 1.0) <= 1e-12
    assert np.max(np.abs(prof.a[1:] - (prof.a[:-1] - prof.b[:-1])), initial=0) <= 1e-12
    assert sorted(recursive_leaf_weights(t.to_nested(), mu)) == pytest.approx(
        sorted(t.weights(mu)[t.leaves()].tolist()), rel=1e-12
    )
    for x in range(len(t)):
        b = t.bits(x)
        assert t.node(b) == x
        assert t.lturns[x] + t.rturns[x] == t.depth[x] == len(b) - 1
        assert t.lturns[x] == b[1:].count("0")
