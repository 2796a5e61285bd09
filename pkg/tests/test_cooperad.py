import pytest

from cobarkit.cooperad import (CofreeElement, CofreeSpace, TruncatedCooperad, builtin, builtin_coas, builtin_cocom,
                               cofree_comultiplication, suspend, tree_cocomposition)
from cobarkit.errors import InvalidCooperad, TruncationExceeded
from cobarkit.exactlin import ChainComplex, GradedSpace
from cobarkit.symcalc import Permutation, elementary_tree, fork_tree


def as_word(name):
    return tuple(int(x) for x in name[name.index("[") + 1:name.index("]")].split(","))


def insert_monomial(mu, nu, i):
    """The word of x_{mu} ∘_i x_{nu} in the associative operad."""
    k = len(nu)
    out = []
    for letter in mu:
        if letter == i:
            out.extend(v + i - 1 for v in nu)
        else:
            out.append(letter if letter < i else letter + k - 1)
    return tuple(out)


def test_cocom_small_cases():
    C1 = builtin_cocom(1)
    assert C1.N == 1 and C1.dim(1) == 1
    C = builtin_cocom(4)
    assert C.elementary(2, 2, 1, 0) == {(0, 0): 1}
    assert C.validation_failures() == []


def test_coas_dimensions_and_unit():
    C = builtin_coas(4)
    assert [C.dim(n) for n in range(1, 5)] == [1, 2, 6, 24]
    assert C.elementary(1, 1, 1, C.unit) == {(C.unit, C.unit): 1}


def test_coas_pairs_with_insertions_of_the_associative_operad():
    C = builtin_coas(3)
    for n, k in ((1, 3), (2, 2), (3, 1)):
        words_low = [as_word(x) for x in C.space(n).names]
        words_up = [as_word(x) for x in C.space(k).names]
        big = C.space(n + k - 1).names
        for i in range(1, n + 1):
            for idx, name in enumerate(big):
                want = {(a, b): 1 for a, mu in enumerate(words_low) for b, nu in enumerate(words_up)
                        if insert_monomial(mu, nu, i) == as_word(name)}
                assert C.elementary(n, k, i, idx) == want


def test_desuspension_degrees():
    C = builtin("s^-1 coAs", 3)
    assert C.space(1).degrees == (0,)
    assert C.space(2).degrees == (-1, -1)
    assert set(C.space(3).degrees) == {-2}


def test_double_suspension_is_isomorphic_to_the_original():
    # the two line factors pick up (−1)^{(n−1)(k−1)} per cocomposition, which the
    # basis rescaling x ↦ (−1)^{(n−1)(n−2)/2} x on arity n absorbs
    C = builtin_coas(4)
    eps = {n: -1 if ((n - 1) * (n - 2) // 2) % 2 else 1 for n in range(1, 5)}
    S = suspend(suspend(C, 1), -1)
    strip = lambda name: name.replace("s^-1(s(", "", 1)[:-2] if name.startswith("s^-1(s(") else name
    for n in range(1, 5):
        assert [strip(x) for x in S.space(n).names] == list(C.space(n).names)
        assert S.space(n).degrees == C.space(n).degrees
        assert S.generator_actions[n] == C.generator_actions[n]
    for (n, k, i), table in C.cocompositions.items():
        factor = eps[n + k - 1] * eps[n] * eps[k]
        want = {c: {ab: factor * v for ab, v in img.items()} for c, img in table.items()}
        assert S.cocompositions[(n, k, i)] == want


@pytest.mark.parametrize("name", ["coCom", "coAs", "s^-1 coAs", "s^-1 coCom"])
def test_builtins_pass_validation_at_arity_four(name):
    # coassociativity, counit, equivariance and filtration checks run on construction
    assert builtin(name, 4).validation_failures() == []


def test_corrupted_cocomposition_is_rejected():
    C = builtin_coas(3)
    tables = {k: {c: dict(v) for c, v in t.items()} for k, t in C.cocompositions.items()}
    tables[(2, 2, 1)][0] = {(1, 0): 1}
    with pytest.raises(InvalidCooperad):
        TruncatedCooperad("broken", 3, C.components, C.generator_actions, tables, C.unit, C.filtration)


def test_tree_cocomposition_trivial_cases():
    C = builtin_coas(3)
    single = fork_tree(3).tree  # bottom arity 1 over a corolla
    assert C.tree(elementary_tree(2, 2, 1), 0) == {k: v for k, v in C.elementary(2, 2, 1, 0).items()}
    assert set(tree_cocomposition(C, elementary_tree(3, 1, 2)).columns) == set(range(6))
    assert single.arities() == (1, 3)


def test_fork_tree_factorizations_agree():
    C = builtin_coas(3)
    t = fork_tree(2, 1)  # vertices: bottom (2), upper-left (2), upper-right (1)
    for idx in range(C.dim(3)):
        via_left = {}
        for (low, up), c in C.elementary(2, 2, 1, idx).items():
            for (bottom, right), c2 in C.elementary(2, 1, 2, low).items():
                key = (bottom, up, right)
                via_left[key] = via_left.get(key, 0) + c * c2
        via_right = {}
        for (low, right), c in C.elementary(3, 1, 3, idx).items():
            for (bottom, up), c2 in C.elementary(2, 2, 1, low).items():
                key = (bottom, up, right)
                via_right[key] = via_right.get(key, 0) + c * c2
        clean = lambda d: {k: v for k, v in d.items() if v}
        assert clean(via_left) == clean(via_right) == clean(C.tree(t, idx))


def test_tree_beyond_truncation():
    with pytest.raises(TruncationExceeded):
        builtin_cocom(2).tree(fork_tree(2, 1), 0)


def line_carrier(degs):
    return ChainComplex(GradedSpace([(f"a{j}", d) for j, d in enumerate(degs)]))


def test_cofree_comultiplication_unary_case():
    C = builtin_cocom(3)
    A = line_carrier([0])
    sp = CofreeSpace(C, A)
    X = CofreeElement(sp, {(C.unit, (0,)): 1})
    assert cofree_comultiplication(C, A, 1, X) == {(C.unit, ((C.unit, (0,)),)): 1}


def test_cofree_comultiplication_leading_term_is_positive_in_degree_zero():
    C = builtin_cocom(3)
    A = line_carrier([0, 0])
    sp = CofreeSpace(C, A)
    X = CofreeElement(sp, {(0, (0, 1)): 1})
    out = cofree_comultiplication(C, A, 2, X)
    assert out[(0, ((C.unit, (0,)), (C.unit, (1,))))] == 1
    assert out[(0, ((C.unit, (1,)), (C.unit, (0,))))] == 1


@pytest.mark.parametrize("name", ["coCom", "s^-1 coAs"])
def test_cofree_comultiplication_is_invariant(name):
    C = builtin(name, 3)
    A = line_carrier([0, 1])
    sp = CofreeSpace(C, A)
    swap = Permutation((2, 1))
    act = C.act(swap)
    for key in sp.all_keys(2):
        out = cofree_comultiplication(C, A, 2, CofreeElement(sp, {key: 1}))
        moved = {}
        for (c0, (k1, k2)), v in out.items():
            sign = -1 if (sp.key_degree(k1) * sp.key_degree(k2)) % 2 else 1
            for g, w in act[c0].items():
                mk = (g, (k2, k1))
                moved[mk] = moved.get(mk, 0) + sign * v * w
        assert {k: v for k, v in moved.items() if v} == out


def test_cofree_element_normal_form_uses_the_action():
    C = builtin("s^-1 coAs", 2)
    A = line_carrier([1, 0])
    sp = CofreeSpace(C, A)
    a = CofreeElement(sp, {(0, (1, 0)): 1})
    b = CofreeElement(sp, {(0, (0, 1)): 1})
    # (γ; a1, a0) is a signed image of (γ^σ; a0, a1) and both normal forms are nonzero
    assert not a.is_zero() and not b.is_zero()
    assert len(a.data) == 1 and list(a.data)[0][1] == (0, 1)
