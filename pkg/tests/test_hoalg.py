import random
from fractions import Fraction

import pytest

from cobarkit.convolution import AritySupportedMap, ConvAlgebra
from cobarkit.cooperad import builtin
from cobarkit.errors import SourceTargetMismatch
from cobarkit.exactlin import ChainComplex, GradedMap, GradedSpace, compose_maps
from cobarkit.fixtures import corpus, small_carriers
from cobarkit.hoalg import (CobarAlgebra, InfinityMorphism, ainfinity_operation, compose_morphisms, dga_structure,
                            is_quasi_iso, linear_term, morphism_residual, random_isomorphism_components,
                            structure_from_ainfinity, transport_structure, verify_cobar_structure,
                            verify_infinity_morphism)
from cobarkit.hochschild import dual_numbers, upper_triangular

from oracles import ainfinity_morphism_failures, morphism_components, operations, stasheff_failures


def product_table(table):
    return lambda i, j: dict(table.get((i, j), {}))


@pytest.fixture(scope="module")
def coas3():
    return builtin("s^-1 coAs", 3)


def test_trivial_structure_is_valid(coas3):
    for X in small_carriers().values():
        assert CobarAlgebra.trivial(coas3, X).residual().ok


@pytest.mark.parametrize("make", [dual_numbers, upper_triangular])
def test_associative_algebras_give_valid_structures(make):
    C = builtin("s^-1 coAs", 4)
    A = make().cobar_algebra(C)
    assert A.residual().ok
    assert stasheff_failures(operations(A), A.carrier.space.degrees, A.carrier.dim, 4) == []


def test_nonassociative_product_fails_at_arity_three(coas3):
    # x·x = x + y, y·x = y: (xx)x − x(xx) = y
    X = ChainComplex(GradedSpace([("x", 0), ("y", 0)]))
    table = {(0, 0): {0: 1, 1: 1}, (1, 0): {1: 1}}
    Q = dga_structure(coas3, X, product_table(table))
    rep = verify_cobar_structure(X, Q)
    assert not rep.ok and rep.lowest_arity == 3
    assert set(rep.arities()) == {3}
    # on the identity word the residual is the associator up to a global sign
    gamma = coas3.space(3).names.index("s^-1(as[1,2,3])")
    assert rep.entries[(gamma, (0, 0, 0))] in ({1: 1}, {1: -1})


def test_random_transported_structures_satisfy_stasheff():
    for entry in corpus(4, seed=3, cooperads=("s^-1 coAs",)):
        X = entry.A.carrier
        assert entry.A.residual().ok
        assert stasheff_failures(operations(entry.A), X.space.degrees, X.dim, 4) == []


def test_transported_morphisms_satisfy_the_ainfinity_morphism_equation():
    for entry in corpus(3, seed=4, cooperads=("s^-1 coAs",)):
        X = entry.A.carrier
        for F, src, tgt in ((entry.F, entry.A, entry.B), (entry.G, entry.B, entry.A)):
            assert verify_infinity_morphism(F).ok
            assert ainfinity_morphism_failures(operations(src), operations(tgt), morphism_components(F),
                                               X.space.degrees, X.dim, 3) == []


def test_ainfinity_round_trip():
    for entry in corpus(4, seed=5, cooperads=("s^-1 coAs",)):
        Q = entry.A.structure
        ops = {n: (lambda w: ainfinity_operation(Q, w)) for n in range(2, 5)}
        R = structure_from_ainfinity(entry.A.C, entry.A.carrier, ops)
        assert (R - Q.restricted(range(2, 5))).is_zero()


def test_identity_and_strict_morphisms(coas3):
    X = ChainComplex.from_differential([("x", 0), ("y", 1)], {"x": {"y": 1}})
    A = CobarAlgebra.trivial(coas3, X)
    assert verify_infinity_morphism(InfinityMorphism.identity(A)).ok
    chain = GradedMap(X.space, X.space, 0, {0: {0: 2}, 1: {1: 2}})
    assert verify_infinity_morphism(InfinityMorphism.strict(A, A, chain)).ok
    not_chain = GradedMap(X.space, X.space, 0, {0: {0: 1}})
    rep = verify_infinity_morphism(InfinityMorphism.strict(A, A, not_chain))
    assert rep.lowest_arity == 1
    defect = compose_maps(X.differential, not_chain) - compose_maps(not_chain, X.differential)
    unit = coas3.unit
    got = {a: rep.entries.get((unit, (a,)), {}) for a in range(X.dim)}
    assert {a: v for a, v in got.items() if v} in ({a: c for a, c in defect.columns.items()},
                                                   {a: {i: -v for i, v in c.items()} for a, c in defect.columns.items()})


def test_mismatched_components_are_rejected(coas3):
    X, Y = small_carriers()["line"], small_carriers()["arrow"]
    A, B = CobarAlgebra.trivial(coas3, X), CobarAlgebra.trivial(coas3, Y)
    with pytest.raises(SourceTargetMismatch):
        InfinityMorphism(A, B, AritySupportedMap.zero(coas3, Y, Y))


def random_components(C, X, Y, rng):
    lin = AritySupportedMap.random(C, X, Y, 0, rng, arities=[1], density=0.8, max_coeff=2)
    higher = AritySupportedMap.random(C, X, Y, 0, rng, arities=range(2, C.N + 1), density=0.5, max_coeff=2)
    return lin + higher


def test_composition_is_associative_and_unital():
    C = builtin("coCom", 4)
    rng = random.Random(11)
    X = ChainComplex(GradedSpace([("p", 0), ("q", 1)]))
    Y = ChainComplex(GradedSpace([("r", 0), ("s", -1)]))
    A, B = CobarAlgebra.trivial(C, X), CobarAlgebra.trivial(C, Y)
    F = InfinityMorphism(A, B, random_components(C, X, Y, rng))
    G = InfinityMorphism(B, A, random_components(C, Y, X, rng))
    H = InfinityMorphism(A, B, random_components(C, X, Y, rng))
    left = compose_morphisms(H, compose_morphisms(G, F))
    right = compose_morphisms(compose_morphisms(H, G), F)
    assert (left.components - right.components).is_zero()
    assert (compose_morphisms(InfinityMorphism.identity(B), F).components - F.components).is_zero()
    assert (compose_morphisms(F, InfinityMorphism.identity(A)).components - F.components).is_zero()
    assert linear_term(compose_morphisms(G, F)) == compose_maps(linear_term(G), linear_term(F))


def test_strict_composite_is_strict(coas3):
    X = small_carriers()["mixed"]
    A = CobarAlgebra.trivial(coas3, X)
    f = GradedMap(X.space, X.space, 0, {0: {0: 1}, 1: {1: 1}, 2: {2: 3, 0: 1}})
    g = GradedMap(X.space, X.space, 0, {0: {0: 2}, 1: {1: 2}, 2: {2: 1}})
    GF = compose_morphisms(InfinityMorphism.strict(A, A, g), InfinityMorphism.strict(A, A, f))
    assert GF.components.arities() == [1]
    assert linear_term(GF) == compose_maps(g, f)


def test_transport_gives_inverse_morphisms():
    for entry in corpus(3, seed=6):
        GF = compose_morphisms(entry.G, entry.F)
        ident = InfinityMorphism.identity(entry.A)
        assert (GF.components - ident.components).is_zero()
        assert is_quasi_iso(entry.F)


def test_hoalg_residual_matches_convolution_mc_residual(coas3):
    rng = random.Random(8)
    X = small_carriers()["mixed"]
    B = CobarAlgebra.trivial(coas3, X)
    A, _, _ = transport_structure(B, random_isomorphism_components(coas3, X, rng))
    L = ConvAlgebra(coas3, A, B)
    for _ in range(4):
        Fc = L.random_element(0, rng, density=0.5)
        ours = morphism_residual(A, B, Fc).entries
        theirs = L.mc_residual(Fc).data
        assert ours == {k: v for k, v in theirs.items() if v}


def test_quasi_iso_detection(coas3):
    X = small_carriers()["line"]
    A = CobarAlgebra.trivial(coas3, X)
    assert is_quasi_iso(InfinityMorphism.identity(A))
    zero = InfinityMorphism.strict(A, A, GradedMap.zero(X.space, X.space))
    assert not is_quasi_iso(zero)


def test_dga_structure_reads_back_its_product(coas3):
    X = small_carriers()["odd"]
    table = {(1, 1): {1: Fraction(1)}, (1, 0): {0: Fraction(1)}, (0, 1): {0: Fraction(1)}}
    Q = dga_structure(coas3, X, product_table(table))
    for (i, j), v in table.items():
        assert ainfinity_operation(Q, (i, j)) == v
    assert ainfinity_operation(Q, (0, 0)) == {}
