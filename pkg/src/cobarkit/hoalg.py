"""Cobar(C)-algebras, their ∞-morphisms, composition and linear terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .convolution import (AritySupportedMap, ConvAlgebra, apply_through_comultiplication, coderivation_raw,
                          cofree_differential_raw, cofree_space)
from .cooperad import Key, TruncatedCooperad
from .errors import DegreeMismatch, SourceTargetMismatch
from .exactlin import ONE, ChainComplex, GradedMap, Vec, induced_on_cohomology_is_iso, vec_axpy
from .symcalc import Permutation, reorder_sign


@dataclass
class ResidualReport:
    """Nonzero residual values keyed by basis input; empty means the identity holds."""

    label: str
    entries: Dict[Key, Vec] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.entries

    def __bool__(self) -> bool:
        return self.ok

    @property
    def lowest_arity(self) -> Optional[int]:
        if not self.entries:
            return None
        return min(len(t) for _, t in self.entries)

    @property
    def witness(self) -> Optional[Tuple[Key, Vec]]:
        if not self.entries:
            return None
        n = self.lowest_arity
        key = min(k for k in self.entries if len(k[1]) == n)
        return key, self.entries[key]

    def arities(self) -> List[int]:
        return sorted({len(t) for _, t in self.entries})

    def summary(self) -> str:
        if self.ok:
            return f"{self.label}: ok"
        key, val = self.witness
        return f"{self.label}: {len(self.entries)} nonzero entries, lowest arity {self.lowest_arity}, witness {key}"


class CobarAlgebra:
    """A complex A with a degree-1 structure map Q′: C(A) → A vanishing on A itself."""

    def __init__(self, C: TruncatedCooperad, carrier: ChainComplex, structure: Optional[AritySupportedMap] = None,
                 name: str = "", validate: bool = False):
        self.C = C
        self.carrier = carrier
        self.name = name
        if structure is None:
            structure = AritySupportedMap.zero(C, carrier, carrier, 1)
        if structure.source != carrier or structure.target != carrier:
            raise SourceTargetMismatch("structure map must be C(A) → A")
        if structure.data and structure.degree != 1:
            raise DegreeMismatch("structure maps have degree +1")
        space = structure.space
        if any(space.is_unit_key(k) for k in structure.data):
            raise DegreeMismatch("structure maps must vanish on the unit component")
        self.structure = structure
        if validate:
            rep = verify_cobar_structure(carrier, structure)
            if not rep.ok:
                from .errors import NotMaurerCartan
                raise NotMaurerCartan(rep.summary())

    @classmethod
    def trivial(cls, C: TruncatedCooperad, carrier: ChainComplex, name: str = "") -> "CobarAlgebra":
        return cls(C, carrier, None, name)

    def residual(self) -> ResidualReport:
        return verify_cobar_structure(self.carrier, self.structure)

    def __repr__(self) -> str:
        return f"CobarAlgebra({self.name or self.carrier.name!r}, arities={self.structure.arities()})"


def verify_cobar_structure(A: ChainComplex, Q: AritySupportedMap, keys: Optional[Iterable[Key]] = None) -> ResidualReport:
    """∂_A Q′ + Q′∂ + Q′∘coder(Q′) on every key of C(A) up to the truncation."""
    if Q.data and Q.degree != 1:
        raise DegreeMismatch("structure maps have degree +1")
    space = Q.space
    keys = space.all_keys() if keys is None else keys
    entries = {}
    for key in keys:
        v = A.differential.apply(Q.data.get(key, {}))
        vec_axpy(v, Q.apply_raw(cofree_differential_raw(space, key)))
        vec_axpy(v, Q.apply_raw(coderivation_raw(Q, key, space)))
        if v:
            entries[key] = v
    return ResidualReport("structure", entries)


class InfinityMorphism:
    """An ∞-morphism A → B stored as F′: C(A) → B of degree 0."""

    def __init__(self, source: CobarAlgebra, target: CobarAlgebra, components: AritySupportedMap, name: str = ""):
        if source.C is not target.C:
            raise SourceTargetMismatch("source and target use different cooperads")
        if components.source != source.carrier or components.target != target.carrier:
            raise SourceTargetMismatch("components must map C(source) to target")
        if components.data and components.degree != 0:
            raise DegreeMismatch("∞-morphism components have degree 0")
        self.source = source
        self.target = target
        self.components = components
        self.C = source.C
        self.name = name

    @classmethod
    def strict(cls, source: CobarAlgebra, target: CobarAlgebra, f: GradedMap) -> "InfinityMorphism":
        C = source.C
        unit = C.unit
        data = {(unit, (a,)): f.column(a) for a in range(source.carrier.dim)}
        return cls(source, target, AritySupportedMap(C, source.carrier, target.carrier, 0, data))

    @classmethod
    def identity(cls, A: CobarAlgebra) -> "InfinityMorphism":
        return cls.strict(A, A, GradedMap.identity(A.carrier.space))

    def residual(self) -> ResidualReport:
        return verify_infinity_morphism(self)

    def __repr__(self) -> str:
        return f"InfinityMorphism(arities={self.components.arities()})"


def pushforward_raw(F: AritySupportedMap, key: Key) -> Dict[Key, Any]:
    """U_F applied to one key: Σ_m (1⊗F′^{⊗m}) Δ_m in coinvariant form, as normal keys of C(B)."""
    space = F.space
    target_space = cofree_space(F.C, F.target)
    g, t = key
    out: Dict[Key, Any] = {}
    from .cooperad import delta_terms
    for m in range(1, len(t) + 1):
        for coeff, c0, keys, degs in delta_terms(space, m, g, t, unordered=True):
            vals = []
            for j in range(m):
                v = F.value(*keys[j])
                if not v:
                    break
                vals.append(v)
            else:
                partial = [((), coeff)]
                for v in vals:
                    partial = [(ws + (b,), c * x) for ws, c in partial for b, x in v.items()]
                for ws, c in partial:
                    for k2, c2 in target_space.normalize_key(c0, ws).items():
                        acc = out.get(k2, 0) + c * c2
                        if acc:
                            out[k2] = acc
                        else:
                            out.pop(k2, None)
    return out


def morphism_residual(source: CobarAlgebra, target: CobarAlgebra, F: AritySupportedMap,
                      keys: Optional[Iterable[Key]] = None) -> ResidualReport:
    """∂_B F′ + Q′_B∘U_F − F′∘(∂ + coder Q_A), evaluated key by key."""
    space = F.space
    keys = space.all_keys() if keys is None else keys
    QA, QB = source.structure, target.structure
    B = target.carrier
    entries = {}
    for key in keys:
        v = B.differential.apply(F.data.get(key, {}))
        if QB.data:
            vec_axpy(v, QB.apply_raw(pushforward_raw(F, key)))
        raw = cofree_differential_raw(space, key)
        if QA.data:
            for k, c in coderivation_raw(QA, key, space).items():
                raw[k] = raw.get(k, 0) + c
        vec_axpy(v, F.apply_raw(raw), -1)
        if v:
            entries[key] = v
    return ResidualReport("morphism", entries)


def verify_infinity_morphism(F: InfinityMorphism, keys: Optional[Iterable[Key]] = None) -> ResidualReport:
    if F.components.data and F.components.degree != 0:
        raise DegreeMismatch("∞-morphism components have degree 0")
    return morphism_residual(F.source, F.target, F.components, keys)


def compose_components(G: AritySupportedMap, F: AritySupportedMap) -> AritySupportedMap:
    """(G∘F)′ = G′∘U_F."""
    if F.target != G.source:
        raise SourceTargetMismatch("middle algebras differ")
    space = F.space
    data = {}
    for key in space.all_keys():
        v = G.apply_raw(pushforward_raw(F, key))
        if v:
            data[key] = v
    return AritySupportedMap(F.C, F.source, G.target, 0, data, check=False)


def compose_morphisms(G: InfinityMorphism, F: InfinityMorphism) -> InfinityMorphism:
    if F.target.carrier != G.source.carrier:
        raise SourceTargetMismatch("F must land where G starts")
    return InfinityMorphism(F.source, G.target, compose_components(G.components, F.components))


def linear_term(F: InfinityMorphism) -> GradedMap:
    """a ↦ F′(unit; a)."""
    C = F.C
    A, B = F.source.carrier, F.target.carrier
    cols = {a: F.components.value(C.unit, (a,)) for a in range(A.dim)}
    return GradedMap(A.space, B.space, 0, cols)


def is_quasi_iso(F: InfinityMorphism) -> bool:
    return induced_on_cohomology_is_iso(linear_term(F), F.source.carrier, F.target.carrier)


# ---------------------------------------------------------------------------
# A∞ conventions over the desuspended associative cooperad


def ainfinity_sign(n: int) -> int:
    """Sign ε_n = (−1)^{n(n−1)/2} with m_n(a_1..a_n) = ε_n q_n(s⁻¹δ_id; a_1..a_n).

    The sign does not depend on the degrees of the inputs; with m_1 = ∂ the
    operations m_n then satisfy the Stasheff identities
    Σ (−1)^{r+st} m_{r+1+t}(1^r ⊗ m_s ⊗ 1^t) = 0.
    """
    return -1 if (n * (n - 1) // 2) & 1 else 1


def _word_of(C: TruncatedCooperad, n: int, gamma: int) -> Tuple[int, ...]:
    name = C.space(n).names[gamma]
    inner = name[name.index("as[") + 3:name.index("]")]
    return tuple(int(x) for x in inner.split(","))


def multilinear_map(C: TruncatedCooperad, source: ChainComplex, target: ChainComplex, degree: int,
                    operations: Mapping[int, Callable[[Tuple[int, ...]], Vec]],
                    sign: Callable[[int], int]) -> AritySupportedMap:
    """The map C(source) → target with (s⁻¹δ_id; a_1..a_n) ↦ sign(n)·operations[n](a_1..a_n).

    Values on the other basis elements s⁻¹δ_w of C(n) follow from equivariance.
    The basis of C(n) must be the one from :func:`cobarkit.cooperad.builtin_coas`
    suspended once downward.
    """
    adeg = source.space.degrees
    space = cofree_space(C, source)

    def fn(gamma: int, t: Tuple[int, ...]) -> Vec:
        n = len(t)
        op = operations.get(n)
        if op is None:
            return {}
        w = _word_of(C, n, gamma)
        # (γ_w; a) = ε sgn(w) (γ_id; a_{w(1)}..a_{w(n)})
        order = [x - 1 for x in w]
        eps = reorder_sign(order, [adeg[a] for a in t]) * Permutation(w).sign()
        val = op(tuple(t[p] for p in order))
        if not val:
            return {}
        s = eps * sign(n)
        return {i: s * c for i, c in val.items()}

    arities = [n for n in operations if 1 <= n <= space.N]
    return AritySupportedMap.from_function(C, source, target, degree, fn, arities=arities)


def read_multilinear(f: AritySupportedMap, word: Sequence[int], sign: Callable[[int], int]) -> Vec:
    """Inverse of :func:`multilinear_map`: sign(n)·f(s⁻¹δ_id; a_word)."""
    C = f.C
    n = len(word)
    words = [_word_of(C, n, g) for g in range(C.dim(n))]
    gid = words.index(tuple(range(1, n + 1)))
    s = sign(n)
    return {i: s * c for i, c in f.value(gid, tuple(word)).items()}


def structure_from_ainfinity(C: TruncatedCooperad, A: ChainComplex,
                             products: Mapping[int, Callable[[Tuple[int, ...]], Vec]]) -> AritySupportedMap:
    """Q′ on C(A) for the desuspended coAs from operations m_n (n ≥ 2) on basis words.

    ``products[n](word)`` returns m_n(a_word) as a sparse vector of degree
    Σ|a| + 2 − n.
    """
    ops = {n: op for n, op in products.items() if n >= 2}
    return multilinear_map(C, A, A, 1, ops, ainfinity_sign)


def ainfinity_operation(Q: AritySupportedMap, word: Sequence[int]) -> Vec:
    """Inverse translation: m_n(a_word) read off from Q′."""
    return read_multilinear(Q, word, ainfinity_sign)


def dga_structure(C: TruncatedCooperad, A: ChainComplex, multiply: Callable[[int, int], Vec]) -> AritySupportedMap:
    """Q′ for a dg associative algebra over the desuspended coAs: m_2 = product."""
    return structure_from_ainfinity(C, A, {2: lambda w: multiply(w[0], w[1])})


# ---------------------------------------------------------------------------
# transport along ∞-isomorphisms with identity linear term


def inverse_components(F: AritySupportedMap) -> AritySupportedMap:
    """G′ with (G∘F)′ = id′, for F′ whose linear term is the identity and which vanishes on C∘(1)."""
    C = F.C
    space = F.space
    if F.source != F.target:
        raise SourceTargetMismatch("inversion needs equal carriers")
    for a in range(F.source.dim):
        if F.value(C.unit, (a,)) != {a: ONE}:
            raise DegreeMismatch("inverse_components needs identity linear term")
    data: Dict[Key, Vec] = {}
    G = AritySupportedMap(C, F.target, F.source, 0, {}, check=False)
    for n in range(1, space.N + 1):
        new = {}
        for key in space.keys(n):
            target = {key[1][0]: ONE} if space.is_unit_key(key) else {}
            corr: Vec = {}
            for k2, c in pushforward_raw(F, key).items():
                if len(k2[1]) < n:
                    vec_axpy(corr, G.data.get(k2, {}), c)
                elif k2 != key or c != 1:
                    if len(k2[1]) == n and k2 != key:
                        raise DegreeMismatch("linear term is not the identity on this key")
            vec_axpy(target, corr, -1)
            if target:
                new[key] = target
        data.update(new)
        G = AritySupportedMap(C, F.target, F.source, 0, data, check=False)
    return G


def transport_structure(B: CobarAlgebra, F: AritySupportedMap, name: str = "") -> Tuple[CobarAlgebra, InfinityMorphism, InfinityMorphism]:
    """Pull Q_B back along an ∞-isomorphism F′ with identity linear term.

    Returns (A, F: A → B, G: B → A) where A has the same carrier as B and
    the structure U_G∘(∂+Q_B)∘U_F − ∂.
    """
    C = B.C
    G = inverse_components(F)
    carrier = B.carrier
    space = F.space
    data = {}
    for key in space.all_keys():
        raw: Dict[Key, Any] = {}
        for k2, c in pushforward_raw(F, key).items():
            for k3, c3 in cofree_differential_raw(space, k2).items():
                raw[k3] = raw.get(k3, 0) + c * c3
            if B.structure.data:
                for k3, c3 in coderivation_raw(B.structure, k2, space).items():
                    raw[k3] = raw.get(k3, 0) + c * c3
        v = G.apply_raw(raw)
        for k3, c3 in cofree_differential_raw(space, key).items():
            if space.is_unit_key(k3):
                v[k3[1][0]] = v.get(k3[1][0], 0) - c3
                if not v[k3[1][0]]:
                    del v[k3[1][0]]
        if v:
            data[key] = v
    Q = AritySupportedMap(C, carrier, carrier, 1, data)
    A = CobarAlgebra(C, carrier, Q, name=name)
    return A, InfinityMorphism(A, B, F), InfinityMorphism(B, A, G)


def random_isomorphism_components(C: TruncatedCooperad, carrier: ChainComplex, rng, density: float = 0.5,
                                  max_coeff: int = 2) -> AritySupportedMap:
    """Identity linear term plus random higher components (zero on C∘(1))."""
    space = cofree_space(C, carrier)
    higher = AritySupportedMap.random(C, carrier, carrier, 0, rng, arities=range(2, space.N + 1),
                                      density=density, max_coeff=max_coeff)
    ident = {(C.unit, (a,)): {a: ONE} for a in range(carrier.dim)}
    return higher + AritySupportedMap(C, carrier, carrier, 0, ident)
