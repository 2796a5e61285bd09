import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cobarkit.errors import DegreeMismatch, NotAChainComplex, NotAContraction, SourceTargetMismatch
from cobarkit.exactlin import (ChainComplex, Contraction, GradedMap, GradedSpace, SparseLinearSystem, cohomology,
                               compose_maps, contraction_failures, contraction_from_complex, invert_dense,
                               normalize_contraction, rank, tensor_maps, tensor_spaces)
from cobarkit.fixtures import massey_fixture


def random_map(rng, source, target, degree, density=0.6, max_coeff=3):
    cols = {}
    for j in range(source.dim):
        col = {}
        for i in target.indices_in_degree(source.degrees[j] + degree):
            if rng.random() < density:
                c = rng.randint(-max_coeff, max_coeff)
                if c:
                    col[i] = Fraction(c)
        cols[j] = col
    return GradedMap(source, target, degree, cols)


def dense_product(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def test_compose_with_identity_returns_the_map():
    sp = GradedSpace([("a", 0), ("b", 1), ("c", 1)])
    g = random_map(random.Random(1), sp, sp, 0)
    assert compose_maps(GradedMap.identity(sp), g) == g
    assert compose_maps(g, GradedMap.identity(sp)) == g


def test_composition_matches_dense_matrix_product():
    rng = random.Random(5)
    sp = GradedSpace([("a", 0), ("b", 0), ("c", 0)])
    for _ in range(10):
        f, g = random_map(rng, sp, sp, 0), random_map(rng, sp, sp, 0)
        assert compose_maps(f, g).dense() == dense_product(f.dense(), g.dense())


def test_compose_rejects_mismatched_spaces():
    a = GradedSpace([("a", 0)])
    b = GradedSpace([("b", 0), ("c", 0)])
    with pytest.raises(SourceTargetMismatch):
        compose_maps(GradedMap.identity(a), GradedMap.identity(b))


def test_graded_map_checks_degrees():
    sp = GradedSpace([("a", 0), ("b", 1)])
    with pytest.raises(DegreeMismatch):
        GradedMap(sp, sp, 0, {0: {1: 1}})


def test_differential_squares_to_zero_is_enforced():
    with pytest.raises(NotAChainComplex, match="bad"):
        ChainComplex.from_differential([("a", 0), ("b", 1), ("c", 2)], {"a": {"b": 1}, "b": {"c": 1}}, name="bad")


def test_tensor_of_identities_is_identity():
    sp = GradedSpace([("a", 0), ("b", 1)])
    idm = GradedMap.identity(sp)
    assert tensor_maps(idm, idm) == GradedMap.identity(tensor_spaces(sp, sp))


def test_tensor_koszul_sign_on_odd_block():
    sp = GradedSpace([("v", 1), ("w", 0)])
    tgt = GradedSpace([("v", 1), ("w2", 1)])
    g = GradedMap(sp, tgt, 1, {1: {1: 1}})      # w -> w2, degree 1
    f = GradedMap.identity(sp)
    t = tensor_maps(f, g)
    # v⊗w: |g||v| = 1 so the sign is −1; w⊗w: sign +1
    assert t.columns[0 * 2 + 1] == {0 * 2 + 1: -1}
    assert t.columns[1 * 2 + 1] == {1 * 2 + 1: 1}


def test_tensor_differential_squares_to_zero():
    c = ChainComplex.from_differential([("x", 0), ("y", 1), ("z", 1)], {"x": {"y": 1, "z": 2}})
    d, one = c.differential, GradedMap.identity(c.space)
    D = tensor_maps(d, one) + tensor_maps(one, d)
    assert compose_maps(D, D).is_zero()


def test_cohomology_examples():
    assert cohomology(ChainComplex(GradedSpace([("a", 0), ("b", 0), ("c", 2)]))) == [(0, 2), (2, 1)]
    assert cohomology(ChainComplex.from_differential([("a", 0), ("b", 1)], {"a": {"b": 1}})) == [(0, 0), (1, 0)]
    c = ChainComplex.from_differential([("a", 0), ("b", 0), ("c", 1)], {"a": {"c": 1}, "b": {"c": -1}})
    assert cohomology(c) == [(0, 1), (1, 0)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_cohomology_is_rank_nullity(entries):
    # degree 0 has two vectors, degree 1 has three; ∂ is an arbitrary 3×2 block
    space = GradedSpace([("a", 0), ("b", 0), ("x", 1), ("y", 1), ("z", 1)])
    cols = {0: {2: entries[0], 3: entries[1], 4: entries[2]}, 1: {2: entries[3], 3: entries[4], 4: entries[5]}}
    d = GradedMap(space, space, 1, cols)
    c = ChainComplex(space, d)
    r = rank(d)
    assert cohomology(c) == [(0, 2 - r), (1, 3 - r)]


def test_invert_dense():
    m = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(1)]]
    inv = invert_dense(m)
    assert dense_product(m, inv) == [[1, 0], [0, 1]]


def test_sparse_system_solves_and_detects_inconsistency():
    sys = SparseLinearSystem()
    assert sys.add_equation({"x": 1, "y": 1}, Fraction(3))
    assert sys.add_equation({"x": 1, "y": -1}, Fraction(1))
    assert sys.solve() == {"x": 2, "y": 1}
    assert not sys.add_equation({"x": 2, "y": 2}, Fraction(7))


def test_contraction_from_zero_differential_is_trivial():
    c = ChainComplex(GradedSpace([("a", 0), ("b", 1)]))
    k = contraction_from_complex(c)
    assert k.include == GradedMap.identity(c.space)
    assert k.project == GradedMap.identity(c.space)
    assert k.homotopy.is_zero()


def test_contraction_of_acyclic_pair():
    c = ChainComplex.from_differential([("a", 0), ("b", 1)], {"a": {"b": 2}})
    k = contraction_from_complex(c)
    assert k.small.dim == 0
    # i∘p − id = −id = ∂h + h∂ forces h(b) = −a/2
    assert k.homotopy.columns == {1: {0: Fraction(-1, 2)}}


def test_contraction_of_massey_complex_matches_cohomology():
    big = massey_fixture(2).algebra.carrier
    k = contraction_from_complex(big)
    dims = dict(cohomology(big))
    assert k.small.space.dims_by_degree() == {d: n for d, n in dims.items() if n}
    assert not contraction_failures(big, k.small, k.include, k.project, k.homotopy)


def test_invalid_contraction_is_rejected():
    c = ChainComplex.from_differential([("a", 0), ("b", 1)], {"a": {"b": 1}})
    small = ChainComplex(GradedSpace([]))
    z = GradedMap.zero(c.space, c.space, -1)
    with pytest.raises(NotAContraction, match="∂h"):
        Contraction(c, small, GradedMap.zero(small.space, c.space), GradedMap.zero(c.space, small.space), z)


def test_normalize_keeps_good_contraction():
    c = ChainComplex.from_differential([("a", 0), ("b", 1), ("e", 0)], {"a": {"b": 1}})
    k = contraction_from_complex(c)
    k2 = normalize_contraction(c, k.small, k.include, k.project, k.homotopy)
    assert k2 == k


def test_normalize_enforces_side_conditions():
    # adding [∂, σ] to a homotopy keeps ip − id = ∂h + h∂; with σ(y) = c·e it breaks p∘h = 0
    basis = [("u", -1), ("v", 0), ("x", 0), ("y", 1), ("e", -1)]
    c = ChainComplex.from_differential(basis, {"u": {"v": 1}, "x": {"y": 1}})
    k = contraction_from_complex(c)
    broken = 0
    for coeff in (1, -2, 3):
        sigma = GradedMap(c.space, c.space, -2, {3: {4: coeff}})
        h = k.homotopy + compose_maps(c.differential, sigma) - compose_maps(sigma, c.differential)
        assert not contraction_failures(c, k.small, k.include, k.project, h, side_conditions=False)
        broken += bool(contraction_failures(c, k.small, k.include, k.project, h))
        k2 = normalize_contraction(c, k.small, k.include, k.project, h)
        assert not contraction_failures(c, k2.small, k2.include, k2.project, k2.homotopy)
    assert broken == 3


def test_normalize_rejects_broken_identity():
    c = ChainComplex.from_differential([("a", 0), ("b", 1)], {"a": {"b": 1}})
    small = ChainComplex(GradedSpace([]))
    with pytest.raises(NotAContraction):
        normalize_contraction(c, small, GradedMap.zero(small.space, c.space), GradedMap.zero(c.space, small.space),
                              GradedMap.zero(c.space, c.space, -1))
