import random
from fractions import Fraction

import pytest

from cobarkit.convolution import AritySupportedMap, ConvAlgebra
from cobarkit.cooperad import builtin
from cobarkit.errors import DegreeBoundExceeded, DegreeMismatch, NotAOneCell
from cobarkit.exactlin import ChainComplex, GradedMap, compose_maps
from cobarkit.hoalg import CobarAlgebra, InfinityMorphism, random_isomorphism_components, transport_structure
from cobarkit.paths import (LineElement, OneCell, chain_homotopy_from_cell, endpoint, fiber_integrate,
                            line_differential, verify_one_cell)

from oracles import leibniz_line_differential


@pytest.fixture(scope="module")
def setting():
    """Conv(A, B) for a transported A on the mixed complex, plus the morphism F: A → B."""
    C = builtin("s^-1 coAs", 3)
    X = ChainComplex.from_differential([("e0", 0), ("e1", 1), ("f", 0)], {"e0": {"e1": 1}})
    B = CobarAlgebra(C, X)
    A, F, _ = transport_structure(B, random_isomorphism_components(C, X, random.Random(1)))
    return C, X, ConvAlgebra(C, A, B), F


def random_line(L, rng, degree=None, powers=3):
    d = rng.choice([-1, 0, 1]) if degree is None else degree
    z = {j: L.random_element(d, rng, density=0.5) for j in range(powers)}
    o = {j: L.random_element(d - 1, rng, density=0.5) for j in range(powers)}
    return LineElement(L, d, z, o)


def same_line(x, y):
    return (x - y).is_zero()


def test_differential_squares_to_zero(setting):
    _, _, L, _ = setting
    rng = random.Random(2)
    for _ in range(16):
        x = random_line(L, rng)
        assert line_differential(line_differential(x)).is_zero()


def test_differential_matches_the_leibniz_oracle(setting):
    _, _, L, _ = setting
    rng = random.Random(3)
    for _ in range(8):
        x = random_line(L, rng)
        zero, one = leibniz_line_differential(L.bracket1, x.zero_forms, x.one_forms, x.degree)
        assert same_line(line_differential(x), LineElement(L, x.degree + 1, zero, one))


def test_differential_trivial_cases(setting):
    _, _, L, F = setting
    assert line_differential(LineElement.constant(L, L.bracket1(L.random_element(0, random.Random(4))))).is_zero()
    closed = L.bracket1(L.random_element(-2, random.Random(5)))
    assert line_differential(LineElement(L, 0, {}, {0: closed})).is_zero()


def test_t_maps_to_bracket_plus_signed_dt(setting):
    _, _, L, _ = setting
    b = L.random_element(1, random.Random(6), density=0.8)
    dx = line_differential(LineElement(L, 1, {1: b}))
    assert dx.zero_forms == {1: L.bracket1(b)}
    assert dx.one_forms == {0: -b}


def test_endpoints(setting):
    _, _, L, _ = setting
    rng = random.Random(7)
    f, g = L.random_element(0, rng), L.random_element(0, rng)
    c = LineElement.constant(L, f)
    assert endpoint(c, 0) == endpoint(c, 1) == f
    line = LineElement.straight_line(L, f, g)
    assert endpoint(line, 0) == f and endpoint(line, 1) == g
    bump = LineElement(L, 0, {2: f, 1: -f})
    assert endpoint(bump, 0).is_zero() and endpoint(bump, 1).is_zero()
    with pytest.raises(ValueError):
        endpoint(c, 2)


def test_fiber_integration(setting):
    _, _, L, _ = setting
    rng = random.Random(8)
    for d in (0, 1):
        b = L.random_element(d, rng, density=0.8)
        sign = -1 if d % 2 else 1
        assert fiber_integrate(LineElement(L, d, {2: b})).is_zero()
        assert fiber_integrate(LineElement(L, d + 1, {}, {0: b})) == b.scale(sign)
        assert fiber_integrate(LineElement(L, d + 1, {}, {2: b.scale(3)})) == b.scale(sign)


def test_endpoints_commute_with_the_differential(setting):
    _, _, L, _ = setting
    rng = random.Random(9)
    for _ in range(8):
        x = random_line(L, rng)
        for which in (0, 1):
            assert endpoint(line_differential(x), which) == L.bracket1(endpoint(x, which))


def test_stokes(setting):
    _, _, L, _ = setting
    rng = random.Random(10)
    for _ in range(16):
        x = random_line(L, rng)
        lhs = endpoint(x, 1) - endpoint(x, 0)
        rhs = L.bracket1(fiber_integrate(x)) + fiber_integrate(line_differential(x))
        assert lhs == rhs


def test_degree_bound_is_enforced(setting):
    _, _, L, _ = setting
    f = L.random_element(0, random.Random(11))
    with pytest.raises(DegreeBoundExceeded):
        LineElement(L, 0, {9: f})
    with pytest.raises(DegreeBoundExceeded):
        LineElement(L, 0, {}, {3: L.random_element(-1, random.Random(11))}, bound=2)
    assert LineElement(L, 0, {8: f}).max_power() == 8


def test_coefficient_degrees_are_checked(setting):
    _, _, L, _ = setting
    with pytest.raises(DegreeMismatch):
        LineElement(L, 0, {0: L.random_element(1, random.Random(12))})
    with pytest.raises(DegreeMismatch):
        OneCell(LineElement(L, 1))


def test_constant_cell(setting):
    _, _, L, F = setting
    K = OneCell(LineElement.constant(L, F.components))
    rep = verify_one_cell(K)
    assert rep.ok
    assert rep.endpoints == (F.components, F.components)
    assert chain_homotopy_from_cell(K).is_zero()


def homotopy_cell(C, X, coeff=1):
    """A cell between id and id + ∂h + h∂ for trivial structures, with h: e1 ↦ e0."""
    A0 = CobarAlgebra(C, X)
    L0 = ConvAlgebra(C, A0, A0)
    h = GradedMap(X.space, X.space, -1, {1: {0: Fraction(1)}})
    diff = compose_maps(X.differential, h) + compose_maps(h, X.differential)
    f0 = InfinityMorphism.identity(A0).components
    f1 = f0 + InfinityMorphism.strict(A0, A0, diff).components
    phi = AritySupportedMap(C, X, X, -1, {(C.unit, (1,)): {0: Fraction(-coeff)}})
    return OneCell(LineElement(L0, 0, {0: f0, 1: f1 - f0}, {0: phi})), h, f0, f1


def test_homotopy_cell_between_strict_maps(setting):
    C, X, _, _ = setting
    K, h, f0, f1 = homotopy_cell(C, X)
    rep = verify_one_cell(K)
    assert rep.ok and rep.endpoints == (f0, f1)
    # the certified s is I(φ) = (−1)^{|φ|} φ = h
    assert chain_homotopy_from_cell(K) == h


def test_corrupted_dt_coefficient_is_localized(setting):
    C, X, _, _ = setting
    K, _, _, _ = homotopy_cell(C, X, coeff=2)
    rep = verify_one_cell(K)
    assert not rep.ok
    assert rep.offending() == ["1 dt"]
    assert "1 dt" in rep.summary()
    with pytest.raises(NotAOneCell):
        chain_homotopy_from_cell(K)


def test_straight_line_between_distinct_morphisms_is_not_a_cell(setting):
    C, X, _, _ = setting
    _, _, f0, f1 = homotopy_cell(C, X)
    L0 = ConvAlgebra(C, CobarAlgebra(C, X), CobarAlgebra(C, X))
    rep = verify_one_cell(OneCell(LineElement.straight_line(L0, f0, f1)))
    assert rep.offending() == ["1 dt"]


def test_cell_with_higher_arity_dt_part(setting):
    # a dt-part in arity ≥ 2 leaves the linear terms equal and s = 0
    C, X, _, _ = setting
    A0 = CobarAlgebra(C, X)
    L0 = ConvAlgebra(C, A0, A0)
    f0 = InfinityMorphism.identity(A0).components
    phi = L0.random_element(-1, random.Random(13), arities=[2], density=0.7)
    assert not phi.is_zero() and not L0.bracket1(phi).is_zero()
    K = OneCell(LineElement(L0, 0, {0: f0, 1: L0.bracket1(phi).scale(-1)}, {0: phi}), L0)
    # with trivial structures only the unary bracket survives, so f0 − t{φ} + φ dt is exactly MC
    assert verify_one_cell(K).ok
    assert chain_homotopy_from_cell(K).is_zero()
