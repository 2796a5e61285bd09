"""Maps out of cofree coalgebras and the convolution shifted L∞ brackets.

An :class:`AritySupportedMap` is a homogeneous linear map C(V) → W stored by
its values on the normal keys of :class:`~cobarkit.cooperad.CofreeSpace`.
Structures Q′, ∞-morphisms F′ and all convolution elements are of this form.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .cooperad import CofreeSpace, Key, TruncatedCooperad, delta_terms
from .errors import ArityMismatch, DegreeMismatch, NotMaurerCartan, SourceTargetMismatch
from .exactlin import ONE, ZERO, ChainComplex, Vec, vec_add_term, vec_axpy
from .symcalc import Permutation, enumerate_shuffles, koszul_sign, reorder_sign

Raw = Dict[Key, Any]


@lru_cache(maxsize=None)
def cofree_space(C: TruncatedCooperad, carrier: ChainComplex, max_arity: Optional[int] = None) -> CofreeSpace:
    """Shared :class:`CofreeSpace` per (cooperad, carrier, truncation)."""
    return CofreeSpace(C, carrier, max_arity)


class AritySupportedMap:
    """A degree-``degree`` map C(source) → target given on normal keys."""

    __slots__ = ("C", "source", "target", "degree", "data", "space")

    def __init__(self, C: TruncatedCooperad, source: ChainComplex, target: ChainComplex, degree: int,
                 data: Mapping[Key, Mapping[int, Any]] = (), check: bool = True):
        self.C = C
        self.source = source
        self.target = target
        self.degree = int(degree)
        self.space = cofree_space(C, source)
        clean: Dict[Key, Vec] = {}
        for key, vec in dict(data).items():
            v = {i: c for i, c in vec.items() if c}
            if v:
                clean[key] = v
        if check:
            tdeg = target.space.degrees
            for key, vec in clean.items():
                want = self.space.key_degree(key) + self.degree
                for i in vec:
                    if tdeg[i] != want:
                        raise DegreeMismatch(f"value on {key} has degree {tdeg[i]}, expected {want}")
        self.data = clean

    # construction ------------------------------------------------------

    @classmethod
    def zero(cls, C, source, target, degree=0) -> "AritySupportedMap":
        return cls(C, source, target, degree, {}, check=False)

    @classmethod
    def from_function(cls, C, source, target, degree, fn: Callable[[int, Tuple[int, ...]], Mapping[int, Any]],
                      arities: Optional[Iterable[int]] = None, check: bool = True) -> "AritySupportedMap":
        """Tabulate ``fn(gamma, t)`` on normal keys; fn must already be equivariant."""
        space = cofree_space(C, source)
        ars = range(1, space.N + 1) if arities is None else arities
        data = {}
        for n in ars:
            for key in space.keys(n):
                val = fn(*key)
                if val:
                    data[key] = dict(val)
        return cls(C, source, target, degree, data, check=check)

    @classmethod
    def from_raw_function(cls, C, source, target, degree, fn: Callable[[int, Tuple[int, ...]], Mapping[int, Any]],
                          arities: Optional[Iterable[int]] = None) -> "AritySupportedMap":
        """Average an arbitrary ``fn`` over stabilizers so that it descends to coinvariants."""
        space = cofree_space(C, source)
        ars = range(1, space.N + 1) if arities is None else arities
        data: Dict[Key, Vec] = {}
        for n in ars:
            for g, t in space.keys(n):
                stab = space.stabilizer(t)
                acc: Vec = {}
                w = Fraction(1, len(stab))
                for sigma, sign in stab:
                    for g2, c in C.act(sigma)[g].items():
                        vec_axpy(acc, fn(g2, t), w * sign * c)
                if acc:
                    data[(g, t)] = acc
        return cls(C, source, target, degree, data)

    @classmethod
    def random(cls, C, source, target, degree, rng: random.Random, arities: Optional[Iterable[int]] = None,
               density: float = 0.5, max_coeff: int = 3, skip_unit: bool = False) -> "AritySupportedMap":
        """Seeded random homogeneous element with small integer coefficients."""
        space = cofree_space(C, source)
        tdeg = target.space.degrees
        drawn: Dict[Key, Vec] = {}

        def fn(g: int, t: Tuple[int, ...]) -> Vec:
            hit = drawn.get((g, t))
            if hit is not None:
                return hit
            out = {}
            if not (skip_unit and space.is_unit_key((g, t))):
                want = space.key_degree((g, t)) + degree
                for i, d in enumerate(tdeg):
                    if d == want and rng.random() < density:
                        c = rng.randint(-max_coeff, max_coeff)
                        if c:
                            out[i] = Fraction(c)
            drawn[(g, t)] = out
            return out

        return cls.from_raw_function(C, source, target, degree, fn, arities)

    # evaluation --------------------------------------------------------

    def value(self, gamma: int, t: Sequence[int]) -> Vec:
        """Value on the pure tensor (γ; a_t) for any order of t."""
        ts = tuple(t)
        if all(ts[p] <= ts[p + 1] for p in range(len(ts) - 1)):
            v = self.data.get((gamma, ts))
            return dict(v) if v else {}
        out: Vec = {}
        for key, c in self.space.normalize_key(gamma, ts).items():
            v = self.data.get(key)
            if v:
                vec_axpy(out, v, c)
        return out

    def apply_raw(self, raw: Mapping[Key, Any]) -> Vec:
        out: Vec = {}
        for (g, t), c in raw.items():
            if c:
                vec_axpy(out, self.value(g, t), c)
        return out

    def apply(self, X) -> Vec:
        """Evaluate on a :class:`~cobarkit.cooperad.CofreeElement`."""
        return self.apply_raw(X.data)

    # algebra -----------------------------------------------------------

    def _compatible(self, other: "AritySupportedMap") -> None:
        if (self.C is not other.C or self.source != other.source or self.target != other.target):
            raise SourceTargetMismatch("maps live in different Hom spaces")

    def __add__(self, other: "AritySupportedMap") -> "AritySupportedMap":
        self._compatible(other)
        if other.degree != self.degree and self.data and other.data:
            raise DegreeMismatch("cannot add maps of different degrees")
        deg = self.degree if self.data else other.degree
        data = {k: dict(v) for k, v in self.data.items()}
        for k, v in other.data.items():
            acc = data.setdefault(k, {})
            vec_axpy(acc, v)
            if not acc:
                del data[k]
        return AritySupportedMap(self.C, self.source, self.target, deg, data, check=False)

    def scale(self, c: Any) -> "AritySupportedMap":
        return AritySupportedMap(self.C, self.source, self.target, self.degree,
                                 {k: {i: c * x for i, x in v.items()} for k, v in self.data.items()}, check=False)

    def __neg__(self) -> "AritySupportedMap":
        return self.scale(-1)

    def __sub__(self, other: "AritySupportedMap") -> "AritySupportedMap":
        return self + other.scale(-1)

    def is_zero(self) -> bool:
        return not self.data

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AritySupportedMap):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.data == other.data and (self.degree == other.degree or not self.data))

    def __hash__(self) -> int:
        return id(self)

    def arities(self) -> List[int]:
        return sorted({len(t) for _, t in self.data})

    def restricted(self, arities: Iterable[int]) -> "AritySupportedMap":
        keep = set(arities)
        return AritySupportedMap(self.C, self.source, self.target, self.degree,
                                 {k: v for k, v in self.data.items() if len(k[1]) in keep}, check=False)

    def component(self, n: int) -> "AritySupportedMap":
        return self.restricted([n])

    def without_unit(self) -> "AritySupportedMap":
        return AritySupportedMap(self.C, self.source, self.target, self.degree,
                                 {k: v for k, v in self.data.items() if not self.space.is_unit_key(k)}, check=False)

    def equivariance_failures(self) -> List[Key]:
        """Normal keys where the stored value is not stabilizer-consistent."""
        bad = []
        for (g, t), v in self.data.items():
            for sigma, sign in self.space.stabilizer(t):
                acc: Vec = {}
                for g2, c in self.C.act(sigma)[g].items():
                    vec_axpy(acc, self.data.get((g2, t), {}), sign * c)
                if acc != v:
                    bad.append((g, t))
                    break
        return bad

    def __repr__(self) -> str:
        return f"AritySupportedMap(deg={self.degree}, arities={self.arities()}, {len(self.data)} keys)"


def arity_filtration_level(f: AritySupportedMap) -> int:
    """Largest n with f vanishing below arity n; N+1 for the zero map."""
    ars = f.arities()
    return ars[0] if ars else f.space.N + 1


# ---------------------------------------------------------------------------
# differentials and coderivations on C(V)


def cofree_differential_raw(space: CofreeSpace, key: Key) -> Raw:
    """∂(γ; a) = (∂γ; a) + Σ_j ± (γ; .., ∂a_j, ..), as raw terms."""
    C, A = space.C, space.carrier
    g, t = key
    n = len(t)
    out: Raw = {}
    for r, c in C.d(n, g).items():
        vec_add_term(out, (r, t), c)
    parity = C.degree(n, g)
    dA = A.differential
    for j, a in enumerate(t):
        col = dA.columns.get(a)
        if col:
            sign = -1 if parity & 1 else 1
            for b, c in col.items():
                vec_add_term(out, (g, t[:j] + (b,) + t[j + 1:]), sign * c)
        parity += space.adeg[a]
    return out


def coderivation_raw(Q: AritySupportedMap, key: Key, space: Optional[CofreeSpace] = None) -> Raw:
    """The coderivation of C(V) lifting Q (Q must vanish on unit keys)."""
    space = Q.space if space is None else space
    C = space.C
    g, t = key
    n = len(t)
    adeg = [space.adeg[a] for a in t]
    qdeg = Q.degree & 1
    out: Raw = {}
    for k in range(1, n + 1):
        lower = n - k + 1
        for sigma in enumerate_shuffles(k, n - k):
            order = [p - 1 for p in sigma.images]
            sign_v = reorder_sign(order, adeg)
            block = tuple(t[p] for p in order[:k])
            rest = tuple(t[p] for p in order[k:])
            gvec = {g: ONE} if sigma.is_identity() else C.act(sigma)[g]
            for g2, cg in gvec.items():
                for (c_low, c_up), cv in C.elementary(lower, k, 1, g2).items():
                    y = Q.value(c_up, block)
                    if not y:
                        continue
                    coeff = sign_v * cg * cv
                    if qdeg and C.degree(lower, c_low) & 1:
                        coeff = -coeff
                    for b, yb in y.items():
                        vec_add_term(out, (c_low, (b,) + rest), coeff * yb)
    return out


def apply_through_comultiplication(outer: AritySupportedMap, inners: Sequence[AritySupportedMap], key: Key,
                                   space: CofreeSpace, unordered: bool = False) -> Vec:
    """outer((1⊗f_1⊗..⊗f_m)(Δ_m(key))) with the Koszul signs of passing c_0 and earlier blocks.

    With ``unordered`` the coinvariant form of Δ_m is used (meaningful when all
    f_j coincide); the default ordered form lands in S_m-invariants.
    """
    g, t = key
    m = len(inners)
    out: Vec = {}
    C = space.C
    fdeg = [f.degree for f in inners]
    for coeff, c0, keys, degs in delta_terms(space, m, g, t, unordered=unordered):
        parity = 0
        passed = C.degree(m, c0)
        vals = []
        for j in range(m):
            if fdeg[j] & passed & 1:
                parity ^= 1
            passed += degs[j]
            v = inners[j].value(*keys[j])
            if not v:
                break
            vals.append(v)
        else:
            if parity:
                coeff = -coeff
            partial: List[Tuple[Tuple[int, ...], Any]] = [((), coeff)]
            for v in vals:
                partial = [(ws + (b,), c * x) for ws, c in partial for b, x in v.items()]
            for ws, c in partial:
                y = outer.value(c0, ws)
                if y:
                    vec_axpy(out, y, c)
    return out


# ---------------------------------------------------------------------------
# the convolution algebra


class ConvAlgebra:
    """Conv(C(V), W) for Cobar(C)-algebras V (source) and W (target).

    ``source`` and ``target`` are anything with ``carrier`` (ChainComplex)
    and ``structure`` (the Q′ map, vanishing on unit keys) attributes.
    """

    def __init__(self, C: TruncatedCooperad, source, target):
        self.C = C
        self.source = source
        self.target = target
        self.V = source.carrier
        self.W = target.carrier
        self.space = cofree_space(C, self.V)
        self.N = self.space.N
        self._dv: Dict[Key, Dict[Key, Any]] = {}
        self.QW = target.structure
        self.QV = source.structure
        self._qw_arities = set(self.QW.arities()) if self.QW is not None else set()

    # the differential ∂ + Q_V on C(V), in normal keys
    def source_differential(self, key: Key) -> Dict[Key, Any]:
        hit = self._dv.get(key)
        if hit is None:
            raw = cofree_differential_raw(self.space, key)
            if self.QV is not None and self.QV.data:
                for k, c in coderivation_raw(self.QV, key, self.space).items():
                    vec_add_term(raw, k, c)
            hit = self.space.normalize_raw(raw)
            self._dv[key] = hit
        return hit

    def keys(self, arities: Optional[Iterable[int]] = None) -> List[Key]:
        if arities is None:
            return self.space.all_keys()
        out: List[Key] = []
        for n in arities:
            out.extend(self.space.keys(n))
        return out

    def zero(self, degree: int = 0) -> AritySupportedMap:
        return AritySupportedMap.zero(self.C, self.V, self.W, degree)

    def random_element(self, degree: int, rng: random.Random, **kw) -> AritySupportedMap:
        return AritySupportedMap.random(self.C, self.V, self.W, degree, rng, **kw)

    def _unary_value(self, f: AritySupportedMap, key: Key) -> Vec:
        out: Vec = {}
        v = f.data.get(key)
        if v:
            vec_axpy(out, self.W.differential.apply(v))
        sign = -1 if f.degree & 1 else 1
        for k, c in self.source_differential(key).items():
            val = f.data.get(k)
            if val:
                vec_axpy(out, val, sign * -c)
        if 1 in self._qw_arities:
            vec_axpy(out, apply_through_comultiplication(self.QW, [f], key, self.space))
        return out

    def bracket1(self, f: AritySupportedMap, keys: Optional[Iterable[Key]] = None) -> AritySupportedMap:
        keys = self.keys() if keys is None else keys
        data = {}
        for key in keys:
            v = self._unary_value(f, key)
            if v:
                data[key] = v
        return AritySupportedMap(self.C, self.V, self.W, f.degree + 1, data, check=False)

    def bracketm(self, fs: Sequence[AritySupportedMap], keys: Optional[Iterable[Key]] = None) -> AritySupportedMap:
        m = len(fs)
        if m < 2:
            raise ArityMismatch("bracketm needs at least two arguments")
        degree = sum(f.degree for f in fs) + 1
        data = {}
        if m in self._qw_arities and all(f.data for f in fs):
            keys = self.keys(range(m, self.N + 1)) if keys is None else keys
            for key in keys:
                if len(key[1]) < m:
                    continue
                v = apply_through_comultiplication(self.QW, fs, key, self.space)
                if v:
                    data[key] = v
        return AritySupportedMap(self.C, self.V, self.W, degree, data, check=False)

    def bracket(self, fs: Sequence[AritySupportedMap], keys: Optional[Iterable[Key]] = None) -> AritySupportedMap:
        if len(fs) == 1:
            return self.bracket1(fs[0], keys)
        return self.bracketm(fs, keys)

    @property
    def max_bracket(self) -> int:
        return self.N

    def mc_residual(self, alpha: AritySupportedMap, keys: Optional[Iterable[Key]] = None) -> AritySupportedMap:
        """{α} + Σ_{m≥2} {α,..,α}_m / m!, finite because Δ_m vanishes below arity m."""
        if alpha.degree != 0 and alpha.data:
            raise DegreeMismatch("MC elements have degree 0")
        keys = self.keys() if keys is None else list(keys)
        data = {}
        for key in keys:
            v = self._unary_value(alpha, key)
            n = len(key[1])
            for m in range(2, n + 1):
                if m in self._qw_arities:
                    w = apply_through_comultiplication(self.QW, [alpha] * m, key, self.space)
                    if w:
                        vec_axpy(v, w, Fraction(1, factorial(m)))
            if v:
                data[key] = v
        return AritySupportedMap(self.C, self.V, self.W, 1, data, check=False)

    def twist(self, alpha: AritySupportedMap, check: bool = True) -> "TwistedConv":
        if check and not self.mc_residual(alpha).is_zero():
            raise NotMaurerCartan("cannot twist by an element with nonzero MC residual")
        return TwistedConv(self, alpha)


class TwistedConv:
    """Brackets {x_1..x_k}^α = Σ_n {α^n, x_1..x_k}/n! of a convolution algebra."""

    def __init__(self, base, alpha: AritySupportedMap):
        self.base = base
        self.alpha = alpha
        self.N = base.N
        self.C = base.C

    @property
    def max_bracket(self) -> int:
        return self.N

    def bracket(self, xs: Sequence[AritySupportedMap], keys=None) -> AritySupportedMap:
        total = None
        for n in range(0, self.N - len(xs) + 1):
            term = self.base.bracket([self.alpha] * n + list(xs), keys)
            term = term.scale(Fraction(1, factorial(n))) if n > 1 else term
            total = term if total is None else total + term
        return total

    def bracket1(self, f, keys=None):
        return self.bracket([f], keys)

    def bracketm(self, fs, keys=None):
        return self.bracket(fs, keys)

    def zero(self, degree: int = 0):
        return self.base.zero(degree)

    def keys(self, arities=None):
        return self.base.keys(arities)

    def mc_residual(self, beta: AritySupportedMap) -> AritySupportedMap:
        total = self.bracket([beta])
        for m in range(2, self.N + 1):
            total = total + self.bracket([beta] * m).scale(Fraction(1, factorial(m)))
        return total

    def twist(self, beta, check=True):
        if check and not self.mc_residual(beta).is_zero():
            raise NotMaurerCartan("cannot twist by an element with nonzero MC residual")
        return TwistedConv(self, beta)


# ---------------------------------------------------------------------------
# the End-convolution Lie algebra


def star_product(Q1: AritySupportedMap, Q2: AritySupportedMap) -> AritySupportedMap:
    """Q1 ⋆ Q2 = Q1 ∘ coder(Q2) as maps C(A) → A."""
    space = Q1.space
    data = {}
    for key in space.all_keys():
        raw = coderivation_raw(Q2, key, space)
        v = Q1.apply_raw(raw)
        if v:
            data[key] = v
    return AritySupportedMap(Q1.C, Q1.source, Q1.target, Q1.degree + Q2.degree, data, check=False)


def end_conv_bracket(Q1: AritySupportedMap, Q2: AritySupportedMap) -> AritySupportedMap:
    """[Q1, Q2] = Q1⋆Q2 − (−1)^{|Q1||Q2|} Q2⋆Q1 in Conv(C∘, End_A)."""
    if Q1.source != Q2.source or Q1.source != Q1.target or Q2.target != Q2.source:
        raise SourceTargetMismatch("End-convolution elements need matching carriers")
    a = star_product(Q1.without_unit(), Q2.without_unit())
    b = star_product(Q2.without_unit(), Q1.without_unit())
    sign = -1 if (Q1.degree & Q2.degree & 1) else 1
    return a - b.scale(sign) if sign == 1 else a + b


def end_differential(Q: AritySupportedMap) -> AritySupportedMap:
    """d(Q) = ∂_A∘Q − (−1)^{|Q|} Q∘∂ on C(A) → A."""
    space = Q.space
    A = Q.target
    data = {}
    sign = -1 if Q.degree & 1 else 1
    for key in space.all_keys():
        v = A.differential.apply(Q.data.get(key, {}))
        vec_axpy(v, Q.apply_raw(cofree_differential_raw(space, key)), -sign)
        if v:
            data[key] = v
    return AritySupportedMap(Q.C, Q.source, Q.target, Q.degree + 1, data, check=False)


# ---------------------------------------------------------------------------
# the generalized Jacobi verifier


class ShLieReport:
    """Outcome of :func:`verify_shlie_relations`."""

    def __init__(self):
        self.failures: List[Tuple[str, Any, Vec]] = []
        self.checked = 0

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return f"ShLieReport(ok={self.ok}, checked={self.checked}, failures={len(self.failures)})"


def _sample_keys(L, seed: int, exhaustive_limit: int = 200, samples: int = 64,
                 exhaustive: Optional[bool] = None) -> List[Key]:
    keys = L.keys()
    if exhaustive or (exhaustive is None and len(keys) <= exhaustive_limit):
        return keys
    rng = random.Random(seed)
    return sorted(rng.sample(keys, min(samples, len(keys))))


def jacobi_sum(L, fs: Sequence[AritySupportedMap], keys: Iterable[Key]) -> Dict[Key, Vec]:
    """Σ_{p} Σ_{σ∈Sh_{p,m−p}} ε(σ) {{f_σ(1..p)}, f_σ(p+1..m)} on the given keys."""
    m = len(fs)
    degs = [f.degree for f in fs]
    keys = list(keys)
    total: Dict[Key, Vec] = {}
    inner_cache: Dict[Tuple[int, ...], AritySupportedMap] = {}
    for p in range(1, m + 1):
        for sigma in enumerate_shuffles(p, m - p):
            idx = [sigma(j) - 1 for j in range(1, m + 1)]
            # ε(σ): sign of reordering (f_1..f_m) into (f_σ(1)..f_σ(m))
            eps = reorder_sign(idx, degs)
            inner_ids = tuple(idx[:p])
            inner = inner_cache.get(inner_ids)
            if inner is None:
                inner = L.bracket([fs[j] for j in inner_ids])
                inner_cache[inner_ids] = inner
            outer = L.bracket([inner] + [fs[j] for j in idx[p:]], keys)
            for key, v in outer.data.items():
                acc = total.setdefault(key, {})
                vec_axpy(acc, v, eps)
                if not acc:
                    del total[key]
    return total


def verify_shlie_relations(L, fs: Sequence[AritySupportedMap], max_m: Optional[int] = None, seed: int = 0,
                           exhaustive: Optional[bool] = None) -> ShLieReport:
    """Generalized Jacobi identities for all sub-lists of fs of length ≤ max_m."""
    report = ShLieReport()
    keys = _sample_keys(L, seed, exhaustive=exhaustive)
    max_m = len(fs) if max_m is None else max_m
    for m in range(1, max_m + 1):
        for combo in combinations_with_replacement(range(len(fs)), m):
            sub = [fs[j] for j in combo]
            res = jacobi_sum(L, sub, keys)
            report.checked += len(keys)
            for key, v in res.items():
                report.failures.append((f"jacobi{combo}", key, v))
    return report


def bracket_symmetry_failures(L, fs: Sequence[AritySupportedMap], keys=None) -> List[str]:
    """Check {f_σ} = ε(σ){f} for adjacent transpositions of the argument list."""
    fails = []
    base = L.bracket(list(fs), keys)
    degs = [f.degree for f in fs]
    for j in range(len(fs) - 1):
        swapped = list(fs)
        swapped[j], swapped[j + 1] = swapped[j + 1], swapped[j]
        other = L.bracket(swapped, keys)
        sign = -1 if degs[j] & degs[j + 1] & 1 else 1
        if other != base.scale(sign):
            fails.append(f"swap {j}<->{j + 1}")
    return fails
