import itertools
import random

import pytest

from cobarkit.convolution import AritySupportedMap
from cobarkit.cooperad import builtin
from cobarkit.errors import NotAContraction, SourceTargetMismatch
from cobarkit.exactlin import Contraction, GradedMap, compose_maps, contraction_from_complex
from cobarkit.fixtures import basis_change_contraction, corpus, massey_fixture, small_carriers
from cobarkit.hoalg import (CobarAlgebra, InfinityMorphism, ainfinity_operation, is_quasi_iso, linear_term,
                            verify_infinity_morphism)
from cobarkit.paths import chain_homotopy_from_cell, endpoint, verify_one_cell
from cobarkit.transfer import CylinderTriple, homotopy_transfer, transfer_uniqueness_cell, verify_cylinder

from oracles import operations, stasheff_failures, transferred_m3


@pytest.fixture(scope="module")
def massey():
    return massey_fixture(4)


@pytest.fixture(scope="module")
def massey_transfer(massey):
    return homotopy_transfer(massey.algebra, massey.first)


def test_transfer_is_certified(massey, massey_transfer):
    r = massey_transfer
    assert all(rep.ok for rep in r.certificates)
    assert linear_term(r.morphism) == massey.first.include
    assert is_quasi_iso(r.morphism)
    assert verify_cylinder(r.as_cylinder()).ok


def test_transferred_triple_product_is_nonzero(massey, massey_transfer):
    Q = massey_transfer.transferred.structure
    assert ainfinity_operation(Q, massey.triple) in ({massey.target: 1}, {massey.target: -1})
    # the binary products of the classes a, b and b, c vanish on cohomology
    a, b, c = massey.triple
    assert ainfinity_operation(Q, (a, b)) == {}
    assert ainfinity_operation(Q, (b, c)) == {}


@pytest.mark.parametrize("which", ["first", "second"])
def test_arity_three_matches_the_tree_oracle(massey, which):
    con = getattr(massey, which)
    r = homotopy_transfer(massey.algebra, con)
    mu = operations(massey.algebra)
    degs = con.small.space.degrees
    for word in itertools.product(range(con.small.dim), repeat=3):
        want = transferred_m3(mu, con.include, con.project, con.homotopy, degs, word)
        assert ainfinity_operation(r.transferred.structure, word) == want


def test_transferred_structure_satisfies_stasheff(massey_transfer):
    A = massey_transfer.transferred
    assert stasheff_failures(operations(A), A.carrier.space.degrees, A.carrier.dim, 4) == []


def test_arity_two_closed_form(massey, massey_transfer):
    Q = massey_transfer.transferred.structure
    QB = massey.algebra.structure
    i, p = massey.first.include, massey.first.project
    for g, t in Q.space.keys(2):
        big = {}
        for x, cx in i.column(t[0]).items():
            for y, cy in i.column(t[1]).items():
                for k, v in QB.value(g, (x, y)).items():
                    big[k] = big.get(k, 0) + cx * cy * v
        assert Q.value(g, t) == p.apply({k: v for k, v in big.items() if v})


@pytest.mark.parametrize("name", ["coCom", "s^-1 coAs"])
def test_arity_two_closed_form_on_the_corpus(name):
    for en in corpus(3, seed=1, cooperads=(name,)):
        B = en.A
        con = contraction_from_complex(B.carrier)
        r = homotopy_transfer(B, con)
        Q = r.transferred.structure
        for g, t in Q.space.keys(2):
            big = {}
            for x, cx in con.include.column(t[0]).items():
                for y, cy in con.include.column(t[1]).items():
                    for k, v in B.structure.value(g, (x, y)).items():
                        big[k] = big.get(k, 0) + cx * cy * v
            assert Q.value(g, t) == con.project.apply({k: v for k, v in big.items() if v})


def conjugated_structure(B, con):
    """p∘Q_B∘(γ; i, .., i), the expected result when h = 0."""
    Q = B.structure
    data = {}
    for g, t in AritySupportedMap.zero(Q.C, con.small, con.small).space.all_keys():
        raw = {(g, ()): 1}
        for a in t:
            new = {}
            for (gg, tt), c in raw.items():
                for i, v in con.include.column(a).items():
                    new[(gg, tt + (i,))] = new.get((gg, tt + (i,)), 0) + c * v
            raw = new
        v = con.project.apply(Q.apply_raw(raw))
        if v:
            data[(g, t)] = v
    return AritySupportedMap(Q.C, con.small, con.small, 1, data)


def test_isomorphism_case_is_conjugation(massey):
    con = basis_change_contraction(massey.algebra.carrier, random.Random(3))
    assert con.homotopy.is_zero() and con.include != GradedMap.identity(con.big.space)
    r = homotopy_transfer(massey.algebra, con)
    assert r.transferred.structure == conjugated_structure(massey.algebra, con)
    assert r.morphism.components.arities() == [1]


def test_trivial_structure_transfers_to_zero():
    C = builtin("s^-1 coAs", 3)
    X = small_carriers()["mixed"]
    r = homotopy_transfer(CobarAlgebra(C, X), contraction_from_complex(X))
    assert r.transferred.structure.is_zero()
    assert r.morphism.components.arities() == [1]


def test_identity_contraction_returns_the_input():
    for en in corpus(3, seed=2):
        X = en.A.carrier
        ident = GradedMap.identity(X.space)
        con = Contraction(X, X, ident, ident, GradedMap.zero(X.space, X.space, -1))
        r = homotopy_transfer(en.A, con)
        assert r.transferred.structure == en.A.structure
        assert r.morphism.components == InfinityMorphism.identity(en.A).components


def test_transfer_input_errors(massey):
    with pytest.raises(NotAContraction):
        homotopy_transfer(massey.algebra, (massey.first.include, massey.first.project))
    other = CobarAlgebra(massey.algebra.C, small_carriers()["line"])
    with pytest.raises(SourceTargetMismatch):
        homotopy_transfer(other, massey.first)


@pytest.fixture(scope="module")
def massey3():
    return massey_fixture(3)


@pytest.fixture(scope="module")
def uniqueness(massey3):
    r1 = homotopy_transfer(massey3.algebra, massey3.first)
    r2 = homotopy_transfer(massey3.algebra, massey3.second)
    return r1, r2, transfer_uniqueness_cell(r1, r2)


def test_uniqueness_cell_joins_the_two_transfers(uniqueness):
    r1, r2, cell = uniqueness
    assert verify_one_cell(cell).ok
    assert not cell.is_constant()
    (t0, t1) = cell.endpoints()
    assert t0.A.structure == r1.transferred.structure and t1.A.structure == r2.transferred.structure
    assert t0.F == r1.morphism.components and t1.F == r2.morphism.components
    assert verify_cylinder(t0).ok and verify_cylinder(t1).ok


def test_uniqueness_cell_gives_a_chain_homotopy(uniqueness):
    r1, r2, cell = uniqueness
    s = chain_homotopy_from_cell(cell)
    line = cell.morphism_line()
    X, Y = line.ambient.V.differential, line.ambient.W.differential
    lin = lambda f: GradedMap(f.source.space, f.target.space, 0,
                              {a: dict(f.data.get((f.C.unit, (a,)), {})) for a in range(f.source.dim)})
    diff = lin(endpoint(line, 1)) - lin(endpoint(line, 0))
    assert diff == compose_maps(Y, s) + compose_maps(s, X)
    # both transfers have the inclusion as linear term, so the certified homotopy is zero
    assert diff.is_zero() and s.is_zero()


def test_uniqueness_cell_for_equal_transfers_is_constant(massey3):
    r = homotopy_transfer(massey3.algebra, massey3.first)
    cell = transfer_uniqueness_cell(r, r)
    assert cell.is_constant() and verify_one_cell(cell).ok


def test_uniqueness_cell_rejects_different_inclusions(massey3):
    r1 = homotopy_transfer(massey3.algebra, massey3.first)
    con = basis_change_contraction(massey3.algebra.carrier, random.Random(4))
    r2 = homotopy_transfer(massey3.algebra, con)
    with pytest.raises(SourceTargetMismatch):
        transfer_uniqueness_cell(r1, r2)


def cylinder_triples():
    out = []
    for seed in (0, 1):
        for en in corpus(3, seed=seed):
            out.append((en.label, CylinderTriple(en.A, en.B, en.F.components)))
    return out


def test_cylinder_trivial_strict_case():
    C = builtin("coCom", 3)
    X = small_carriers()["arrow"]
    A = CobarAlgebra(C, X)
    chain = GradedMap(X.space, X.space, 0, {0: {0: 3}, 1: {1: 3}})
    assert verify_cylinder(CylinderTriple(A, A, InfinityMorphism.strict(A, A, chain).components)).ok
    not_chain = GradedMap(X.space, X.space, 0, {0: {0: 1}})
    rep = verify_cylinder(CylinderTriple(A, A, InfinityMorphism.strict(A, A, not_chain).components))
    assert rep.failing() == ["morphism"]


def corrupt(f, rng, degree):
    noise = AritySupportedMap.random(f.C, f.source, f.target, degree, rng, arities=range(2, f.C.N + 1),
                                     density=1.0, skip_unit=True)
    return f + noise


def test_cylinder_is_the_conjunction_of_its_checks():
    rng = random.Random(5)
    assert len(cylinder_triples()) == 16
    for label, c in cylinder_triples():
        variants = [c]
        variants.append(CylinderTriple(CobarAlgebra(c.A.C, c.A.carrier, corrupt(c.A.structure, rng, 1)), c.B, c.F))
        variants.append(CylinderTriple(c.A, CobarAlgebra(c.B.C, c.B.carrier, corrupt(c.B.structure, rng, 1)), c.F))
        variants.append(CylinderTriple(c.A, c.B, corrupt(c.F, rng, 0)))
        for v in variants:
            rep = verify_cylinder(v)
            parts = (v.A.residual().ok, v.B.residual().ok, verify_infinity_morphism(InfinityMorphism(v.A, v.B, v.F)).ok)
            assert rep.ok == all(parts), label
        assert verify_cylinder(c).ok, label


def test_morphism_corruption_is_localized():
    # where both structures vanish and ∂ = 0 every F is MC, so a few corruptions are invisible
    rng = random.Random(6)
    detected = 0
    for label, c in cylinder_triples():
        bad = CylinderTriple(c.A, c.B, corrupt(c.F, rng, 0))
        failing = verify_cylinder(bad).failing()
        assert failing in ([], ["morphism"]), label
        detected += failing == ["morphism"]
    assert detected >= 12


def test_structure_corruption_is_localized_for_zero_morphisms():
    # the morphism check also reads Q_A and Q_B, so exact localization needs F = 0, which is MC for any pair
    rng = random.Random(7)
    checked = 0
    for label, c in cylinder_triples():
        zero = AritySupportedMap.zero(c.A.C, c.A.carrier, c.B.carrier)
        assert verify_cylinder(CylinderTriple(c.A, c.B, zero)).ok
        badA = CobarAlgebra(c.A.C, c.A.carrier, corrupt(c.A.structure, rng, 1))
        badB = CobarAlgebra(c.B.C, c.B.carrier, corrupt(c.B.structure, rng, 1))
        if not badA.residual().ok:
            assert verify_cylinder(CylinderTriple(badA, c.B, zero)).failing() == ["structure_A"], label
            checked += 1
        if not badB.residual().ok:
            assert verify_cylinder(CylinderTriple(c.A, badB, zero)).failing() == ["structure_B"], label
            checked += 1
    assert checked > 0


def test_structure_corruption_never_leaks_into_the_other_structure():
    rng = random.Random(8)
    for label, c in cylinder_triples():
        badA = CobarAlgebra(c.A.C, c.A.carrier, corrupt(c.A.structure, rng, 1))
        failing = verify_cylinder(CylinderTriple(badA, c.B, c.F)).failing()
        assert "structure_B" not in failing
        if not badA.residual().ok:
            assert failing[0] == "structure_A"
