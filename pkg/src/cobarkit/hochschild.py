"""Hochschild cochains of an ungraded associative algebra, compared with the twisted convolution differential.

An associative algebra A (concentrated in degree 0) is a Cobar(𝔖⁻¹coAs)-algebra
with only a binary operation.  Twisting Conv(𝔖⁻¹coAs(A), A) by the identity
∞-morphism turns its differential into a differential on cochains; with the
convention f(s⁻¹δ_id; a_1..a_n) = (−1)^{n−1} φ(a_1..a_n) it is the textbook
Hochschild differential

    (δφ)(a_0..a_n) = a_0 φ(a_1..a_n) + Σ_i (−1)^{i+1} φ(.., a_i a_{i+1}, ..) + (−1)^{n+1} φ(a_0..a_{n−1}) a_n.

The differential here is computed directly from structure constants and
shares no code with the convolution brackets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .convolution import AritySupportedMap, ConvAlgebra
from .cooperad import TruncatedCooperad
from .exactlin import ChainComplex, GradedSpace, Vec, as_scalar, vec_axpy
from .hoalg import CobarAlgebra, InfinityMorphism, dga_structure, multilinear_map, read_multilinear

# a cochain of arity n: {input word: output vector}
Cochain = Dict[Tuple[int, ...], Vec]


def cochain_sign(n: int) -> int:
    return -1 if (n - 1) & 1 else 1


class AssociativeAlgebra:
    """Finite-dimensional associative algebra in degree 0 given by structure constants."""

    def __init__(self, names: Sequence[str], table: Mapping[Tuple[int, int], Mapping[int, object]], name: str = ""):
        self.names = list(names)
        self.name = name
        self.table = {(i, j): {k: as_scalar(v) for k, v in vec.items() if v}
                      for (i, j), vec in table.items()}
        self.complex = ChainComplex(GradedSpace([(n, 0) for n in self.names]))
        bad = self.associativity_failures()
        if bad:
            raise ValueError(f"structure constants are not associative at {bad[0]}")

    @property
    def dim(self) -> int:
        return len(self.names)

    def multiply(self, i: int, j: int) -> Vec:
        return dict(self.table.get((i, j), {}))

    def multiply_vectors(self, u: Mapping[int, object], v: Mapping[int, object]) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            for j, b in v.items():
                vec_axpy(out, self.multiply(i, j), a * b)
        return out

    def associativity_failures(self) -> List[Tuple[int, int, int]]:
        out = []
        for i, j, k in product(range(self.dim), repeat=3):
            left = self.multiply_vectors(self.multiply(i, j), {k: 1})
            right = self.multiply_vectors({i: 1}, self.multiply(j, k))
            if left != right:
                out.append((i, j, k))
        return out

    def cobar_algebra(self, C: TruncatedCooperad) -> CobarAlgebra:
        return CobarAlgebra(C, self.complex, dga_structure(C, self.complex, self.multiply), name=self.name)


def dual_numbers() -> AssociativeAlgebra:
    """ℚ[x]/(x²) on the basis 1, x."""
    return AssociativeAlgebra(["1", "x"], {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}, name="dual numbers")


def upper_triangular() -> AssociativeAlgebra:
    """Upper-triangular 2×2 matrices on the basis e11, e12, e22."""
    return AssociativeAlgebra(["e11", "e12", "e22"],
                              {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 2): {1: 1}, (2, 2): {2: 1}},
                              name="upper triangular 2x2")


def _apply(phi: Mapping[Tuple[int, ...], Vec], word: Tuple[int, ...]) -> Vec:
    return dict(phi.get(word, {}))


def hochschild_differential(alg: AssociativeAlgebra, phi: Mapping[Tuple[int, ...], Vec], n: int) -> Cochain:
    """δφ for a cochain φ of arity n ≥ 1, as a cochain of arity n + 1."""
    out: Cochain = {}
    for word in product(range(alg.dim), repeat=n + 1):
        val = alg.multiply_vectors({word[0]: 1}, _apply(phi, word[1:]))
        for i in range(n):
            for k, c in alg.multiply(word[i], word[i + 1]).items():
                vec_axpy(val, _apply(phi, word[:i] + (k,) + word[i + 2:]), c if i & 1 else -c)
        last = alg.multiply_vectors(_apply(phi, word[:n]), {word[n]: 1})
        vec_axpy(val, last, 1 if (n + 1) % 2 == 0 else -1)
        if val:
            out[word] = val
    return out


def cochain_to_conv(C: TruncatedCooperad, alg: AssociativeAlgebra, phi: Mapping[Tuple[int, ...], Vec],
                    n: int) -> AritySupportedMap:
    """The arity-n convolution element of degree n − 1 attached to φ."""
    return multilinear_map(C, alg.complex, alg.complex, n - 1, {n: lambda w: _apply(phi, w)}, cochain_sign)


def conv_to_cochain(f: AritySupportedMap, n: int) -> Cochain:
    dim = f.source.dim
    out: Cochain = {}
    for word in product(range(dim), repeat=n):
        v = read_multilinear(f, word, cochain_sign)
        if v:
            out[word] = v
    return out


@dataclass
class HochschildReport:
    algebra: str
    checked: int = 0
    mismatches: List[Tuple[int, Tuple[int, ...], int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        if self.ok:
            return f"{self.algebra}: twisted differential equals the Hochschild differential on {self.checked} basis cochains"
        n, word, out = self.mismatches[0]
        return (f"{self.algebra}: {len(self.mismatches)} of {self.checked} basis cochains differ, "
                f"first at arity {n}, input {word}, output {out}")


def compare_twisted_differential(alg: AssociativeAlgebra, C: TruncatedCooperad,
                                 max_arity: Optional[int] = None) -> HochschildReport:
    """Compare the twisted differential with δ on every basis cochain of arity ≤ max_arity (default N − 1)."""
    N = C.N
    max_arity = N - 1 if max_arity is None else max_arity
    if max_arity >= N:
        raise ValueError("the differential of an arity-n cochain needs truncation N ≥ n + 1")
    A = alg.cobar_algebra(C)
    L = ConvAlgebra(C, A, A)
    twisted = L.twist(InfinityMorphism.identity(A).components)
    report = HochschildReport(alg.name)
    for n in range(1, max_arity + 1):
        for word in product(range(alg.dim), repeat=n):
            for out in range(alg.dim):
                phi = {word: {out: 1}}
                report.checked += 1
                df = twisted.bracket1(cochain_to_conv(C, alg, phi, n))
                stray = [a for a in df.arities() if a != n + 1]
                if stray or conv_to_cochain(df, n + 1) != hochschild_differential(alg, phi, n):
                    report.mismatches.append((n, word, out))
    return report
