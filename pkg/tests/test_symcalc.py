import itertools
from math import factorial

import pytest
from hypothesis import given, strategies as st

from cobarkit.errors import ArityMismatch, SlotOutOfRange
from cobarkit.symcalc import (Permutation, all_set_partitions, apply_permutation_to_tree, compositions,
                              elementary_tree, enumerate_shuffles, fork_tree, koszul_sign, multinomial,
                              ordered_set_partitions, reorder_sign)

from oracles import koszul_by_swaps


def perms(n):
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


def test_koszul_examples():
    assert koszul_sign(Permutation.identity(3), (1, 1, 1)) == 1
    assert koszul_sign(Permutation.transposition(2, 1, 2), (1, 1)) == -1
    assert koszul_sign(Permutation((2, 3, 1)), (1, 1, 0)) == 1


def test_koszul_length_mismatch():
    with pytest.raises(ArityMismatch):
        koszul_sign(Permutation.identity(2), (1, 1, 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_koszul_matches_adjacent_swap_oracle(n):
    for sigma in perms(n):
        for degs in itertools.product((0, 1), repeat=n):
            assert koszul_sign(sigma, degs) == koszul_by_swaps(sigma.images, degs)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_koszul_cocycle(n):
    ps = perms(n)
    # the full n = 5 product is 14400 pairs per degree vector; a fixed pair of degree vectors is enough
    degree_vectors = list(itertools.product((0, 1), repeat=n)) if n <= 4 else [(1, 0, 1, 1, 0), (1, 1, 1, 1, 1)]
    for degs in degree_vectors:
        for sigma in ps:
            for tau in ps:
                lhs = koszul_sign(sigma.compose(tau), degs)
                rhs = koszul_sign(sigma, tau.act_on_degrees(degs)) * koszul_sign(tau, degs)
                assert lhs == rhs


@given(st.permutations(list(range(6))), st.lists(st.integers(-2, 3), min_size=6, max_size=6))
def test_reorder_sign_agrees_with_koszul(order, degs):
    # listing old entries in `order` moves old entry order[p] to new position p
    images = [0] * 6
    for p, o in enumerate(order):
        images[o] = p + 1
    assert reorder_sign(order, degs) == koszul_sign(Permutation(images), degs)


def test_adjacent_word_rebuilds_permutation():
    for sigma in perms(4):
        out = Permutation.identity(4)
        for j in sigma.adjacent_word():
            out = out.compose(Permutation.transposition(4, j, j + 1))
        assert out == sigma


def test_shuffle_counts():
    assert {s.images for s in enumerate_shuffles(1, 1)} == {(1, 2), (2, 1)}
    assert len(enumerate_shuffles(2, 1)) == 3
    assert len(enumerate_shuffles(2, 2)) == 6


def block_monotone(sigma, ks):
    pos = 0
    for k in ks:
        block = sigma.images[pos:pos + k]
        if list(block) != sorted(block):
            return False
        pos += k
    return True


@pytest.mark.parametrize("ks", [(2, 1), (2, 2), (1, 2, 1), (3, 2)])
def test_shuffles_are_the_block_monotone_permutations(ks):
    n = sum(ks)
    want = {s.images for s in perms(n) if block_monotone(s, ks)}
    assert {s.images for s in enumerate_shuffles(*ks)} == want


@pytest.mark.parametrize("n", range(1, 8))
def test_shuffle_count_is_multinomial(n):
    for m in range(1, min(n, 3) + 1):
        for ks in compositions(n, m):
            assert len(enumerate_shuffles(*ks)) == multinomial(ks) == factorial(n) // _prod_fact(ks)


def _prod_fact(ks):
    out = 1
    for k in ks:
        out *= factorial(k)
    return out


def test_set_partition_counts():
    # Bell numbers
    assert [len(all_set_partitions(n)) for n in range(1, 6)] == [1, 2, 5, 15, 52]
    # ordered partitions into m blocks: m! S(n, m)
    assert len(ordered_set_partitions(4, 2)) == 2 * 7


def test_elementary_tree_labels():
    assert elementary_tree(1, 1, 1).leaf_partition() == [[], [1]]
    assert elementary_tree(2, 2, 1).leaf_partition() == [[3], [1, 2]]
    assert elementary_tree(3, 2, 2).leaf_partition() == [[1, 4], [2, 3]]
    with pytest.raises(SlotOutOfRange):
        elementary_tree(2, 2, 3)


def test_fork_trees():
    chain = fork_tree(1)
    assert chain.arities == (1, 1)
    assert fork_tree(2, 1).leaf_partition() == [[], [1, 2], [3]]
    assert fork_tree(1, 1, 1).arities == (3, 1, 1, 1)


def test_apply_permutation_to_tree():
    t = fork_tree(1, 1)
    assert apply_permutation_to_tree(Permutation.identity(2), t) == t
    assert apply_permutation_to_tree(Permutation((2, 1)), t).leaf_partition() == [[], [2], [1]]
    t21 = fork_tree(2, 1)
    for sigma in enumerate_shuffles(2, 1):
        parts = apply_permutation_to_tree(sigma, t21).leaf_partition()
        assert parts == [[], [sigma(1), sigma(2)], [sigma(3)]]
    with pytest.raises(ArityMismatch):
        apply_permutation_to_tree(Permutation.identity(2), t21)


def test_relabeling_is_an_action():
    t = elementary_tree(2, 2, 2)
    for sigma in perms(3):
        for tau in perms(3):
            lhs = apply_permutation_to_tree(sigma, apply_permutation_to_tree(tau, t))
            assert lhs == apply_permutation_to_tree(sigma.compose(tau), t)
