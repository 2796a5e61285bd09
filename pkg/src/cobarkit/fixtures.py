"""Reusable example objects: small carriers, a seeded random corpus, and a dga with a Massey product.

Everything here is deterministic given its arguments.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from .convolution import AritySupportedMap
from .cooperad import TruncatedCooperad, builtin
from .exactlin import ChainComplex, Contraction, GradedMap, GradedSpace, invert_dense
from .hoalg import CobarAlgebra, InfinityMorphism, dga_structure, random_isomorphism_components, transport_structure

CORPUS_COOPERADS = ("coCom", "s^-1 coAs")


def small_carriers() -> Dict[str, ChainComplex]:
    """Carriers of dimension ≤ 3 with and without differential, covering even and odd degrees."""
    return {
        "line": ChainComplex(GradedSpace([("v", 0)]), name="line"),
        "arrow": ChainComplex.from_differential([("x", 0), ("y", 1)], {"x": {"y": 1}}, name="arrow"),
        "mixed": ChainComplex.from_differential([("e0", 0), ("e1", 1), ("f", 0)], {"e0": {"e1": 1}}, name="mixed"),
        "odd": ChainComplex(GradedSpace([("u", 1), ("w", 0)]), name="odd"),
    }


@dataclass
class CorpusEntry:
    """A transported algebra A, its strict counterpart B on the same carrier, and F: A → B, G: B → A."""

    label: str
    A: CobarAlgebra
    B: CobarAlgebra
    F: InfinityMorphism
    G: InfinityMorphism


def transported_entry(C: TruncatedCooperad, carrier: ChainComplex, seed: int, density: float = 0.5,
                      base: CobarAlgebra = None, label: str = "") -> CorpusEntry:
    """Pull a structure back along a seeded random ∞-isomorphism with identity linear term."""
    B = base if base is not None else CobarAlgebra(C, carrier, name=f"{carrier.name}")
    rng = random.Random(seed)
    F = random_isomorphism_components(C, carrier, rng, density=density)
    A, Fm, Gm = transport_structure(B, F, name=f"{carrier.name}~{seed}")
    return CorpusEntry(label or f"{C.name}/{carrier.name}/{seed}", A, B, Fm, Gm)


def base_structure(C: TruncatedCooperad, carrier_name: str, X: ChainComplex) -> CobarAlgebra:
    """A strict structure on a corpus carrier; trivial where no simple binary operation fits.

    For the desuspended coAs, ``line`` is ℚ with its product and ``odd`` is
    ℚ[u]/(u²) with unit w.  For coCom, ``odd`` carries the degree-1 bracket
    {w, w} = u.
    """
    if C.name == "s^-1 coAs" and carrier_name in ("line", "odd"):
        if carrier_name == "line":
            table = {(0, 0): {0: 1}}
        else:
            table = {(1, 1): {1: 1}, (1, 0): {0: 1}, (0, 1): {0: 1}}
        return CobarAlgebra(C, X, dga_structure(C, X, lambda i, j: dict(table.get((i, j), {}))), name=carrier_name)
    if C.name == "coCom" and carrier_name == "odd":
        Q = AritySupportedMap(C, X, X, 1, {(0, (1, 1)): {0: Fraction(1)}})
        return CobarAlgebra(C, X, Q, name=carrier_name)
    return CobarAlgebra(C, X, name=carrier_name)


def corpus(N: int, seed: int = 0, max_dim: int = 3, cooperads=CORPUS_COOPERADS) -> List[CorpusEntry]:
    """One transported entry per (cooperad, carrier) pair with carrier dimension ≤ max_dim."""
    out = []
    for name in cooperads:
        C = builtin(name, N)
        for j, (cname, X) in enumerate(sorted(small_carriers().items())):
            if X.dim <= max_dim:
                out.append(transported_entry(C, X, seed * 101 + j, base=base_structure(C, cname, X)))
    return out


# ---------------------------------------------------------------------------
# a dga with a nonzero triple Massey product


@dataclass
class MasseyFixture:
    """B = ⟨a, b, c, u | ab = bc = x = ∂u, uc = z⟩ with two contractions onto span(a, b, c, z)."""

    algebra: CobarAlgebra
    small: ChainComplex
    first: Contraction
    second: Contraction
    triple: Tuple[int, int, int]
    target: int


def massey_fixture(N: int = 4) -> MasseyFixture:
    """Six-dimensional dga whose classes a, b, c have ⟨a, b, c⟩ = ±[z].

    ab and bc are both the exact element x = ∂u, and uc = z represents a
    nonzero class that no product of cohomology classes hits, so the triple
    product has zero indeterminacy.  The second contraction differs from the
    first by sending u to a, which changes h as well.
    """
    C = builtin("s^-1 coAs", N)
    basis = [("a", 1), ("b", 1), ("c", 1), ("u", 1), ("x", 2), ("z", 2)]
    big = ChainComplex.from_differential(basis, {"u": {"x": 1}}, name="massey")
    idx = {n: i for i, (n, _) in enumerate(basis)}
    products = {("a", "b"): "x", ("b", "c"): "x", ("u", "c"): "z"}

    def multiply(i: int, j: int) -> Dict[int, Fraction]:
        k = products.get((basis[i][0], basis[j][0]))
        return {idx[k]: Fraction(1)} if k else {}

    B = CobarAlgebra(C, big, dga_structure(C, big, multiply), name="massey")
    small = ChainComplex(GradedSpace([("a", 1), ("b", 1), ("c", 1), ("z", 2)]), name="massey.H")
    include = GradedMap(small.space, big.space, 0, {0: {0: 1}, 1: {1: 1}, 2: {2: 1}, 3: {5: 1}})
    p1 = GradedMap(big.space, small.space, 0, {0: {0: 1}, 1: {1: 1}, 2: {2: 1}, 5: {3: 1}})
    h1 = GradedMap(big.space, big.space, -1, {4: {3: -1}})
    p2 = GradedMap(big.space, small.space, 0, {0: {0: 1}, 1: {1: 1}, 2: {2: 1}, 5: {3: 1}, 3: {0: 1}})
    h2 = GradedMap(big.space, big.space, -1, {4: {0: 1, 3: -1}})
    return MasseyFixture(B, small, Contraction(big, small, include, p1, h1),
                         Contraction(big, small, include, p2, h2), (0, 1, 2), 3)


def basis_change_contraction(X: ChainComplex, rng: random.Random, max_coeff: int = 2) -> Contraction:
    """A contraction with h = 0 whose inclusion is a random chain isomorphism of X.

    Basis vectors involved in the differential are fixed; on the remaining
    cycles of each degree the inclusion is unitriangular with random entries,
    so it commutes with ∂ and is invertible over ℤ.
    """
    space = X.space
    cols: Dict[int, Dict[int, Fraction]] = {}
    touched = set()
    for j, col in X.differential.columns.items():
        touched.add(j)
        touched.update(col)
    for d in space.occupied_degrees():
        block = [i for i in space.indices_in_degree(d) if i not in touched]
        for pos, j in enumerate(block):
            col = {j: Fraction(1)}
            for i in block[:pos]:
                c = rng.randint(-max_coeff, max_coeff)
                if c:
                    col[i] = Fraction(c)
            cols[j] = col
        for j in space.indices_in_degree(d):
            if j in touched:
                cols[j] = {j: Fraction(1)}
    include = GradedMap(space, space, 0, cols)
    dense = include.dense()
    inv = invert_dense([[Fraction(x) for x in row] for row in dense])
    pcols = {j: {i: inv[i][j] for i in range(space.dim) if inv[i][j]} for j in range(space.dim)}
    project = GradedMap(space, space, 0, pcols)
    return Contraction(X, X, include, project, GradedMap.zero(space, space, -1))
