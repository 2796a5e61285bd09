"""Polynomial forms on the interval, 1-cells between MC elements, integration over the fiber.

A :class:`LineElement` is a finite sum Σ g_j t^j + Σ h_j t^j dt with
coefficients in a shifted L∞ algebra (a convolution algebra or a twist of
one).  Coefficients sit to the left of the forms, so the differential is
d(b⊗ω) = {b}⊗ω + (−1)^{|b|} b⊗dω.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement
from math import factorial
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .convolution import AritySupportedMap
from .errors import DegreeBoundExceeded, DegreeMismatch, NotAOneCell
from .exactlin import GradedMap, compose_maps

DEFAULT_DEGREE_BOUND = 8

# residual coefficients are labelled by (power of t, whether a dt is present)
FormLabel = Tuple[int, bool]


def _label(label: FormLabel) -> str:
    j, dt = label
    base = "1" if j == 0 else ("t" if j == 1 else f"t^{j}")
    return base + (" dt" if dt else "")


def describe_label(label: Tuple) -> str:
    """"t^2 dt" for (2, True); a leading part name is kept, as in "morphism t dt"."""
    head = " ".join(str(x) for x in label[:-2])
    tail = _label(label[-2:])
    return f"{head} {tail}" if head else tail


def _accumulate(acc: Dict[int, AritySupportedMap], j: int, f: AritySupportedMap) -> None:
    if f.is_zero():
        return
    if j in acc:
        s = acc[j] + f
        if s.is_zero():
            del acc[j]
        else:
            acc[j] = s
    else:
        acc[j] = f


class LineElement:
    """Σ_j g_j t^j + Σ_j h_j t^j dt over an ambient shifted L∞ algebra."""

    def __init__(self, ambient: Any, degree: int, zero_forms: Optional[Mapping[int, AritySupportedMap]] = None,
                 one_forms: Optional[Mapping[int, AritySupportedMap]] = None, bound: int = DEFAULT_DEGREE_BOUND):
        self.ambient = ambient
        self.degree = degree
        self.bound = bound
        self.zero_forms: Dict[int, AritySupportedMap] = {}
        self.one_forms: Dict[int, AritySupportedMap] = {}
        for j, g in (zero_forms or {}).items():
            self._put(self.zero_forms, j, g, degree)
        for j, h in (one_forms or {}).items():
            self._put(self.one_forms, j, h, degree - 1)

    def _put(self, table: Dict[int, AritySupportedMap], j: int, f: AritySupportedMap, want: int) -> None:
        if f.is_zero():
            return
        if j < 0:
            raise ValueError("negative powers of t are not allowed")
        if j > self.bound:
            raise DegreeBoundExceeded(f"t^{j} exceeds the polynomial degree bound {self.bound}")
        if f.degree != want:
            raise DegreeMismatch(f"coefficient of degree {f.degree} where {want} is required")
        _accumulate(table, j, f)

    @classmethod
    def constant(cls, ambient: Any, f: AritySupportedMap, bound: int = DEFAULT_DEGREE_BOUND) -> "LineElement":
        return cls(ambient, f.degree, {0: f}, {}, bound)

    @classmethod
    def straight_line(cls, ambient: Any, start: AritySupportedMap, end: AritySupportedMap,
                      bound: int = DEFAULT_DEGREE_BOUND) -> "LineElement":
        """start + (end − start) t, with no dt-part."""
        return cls(ambient, start.degree, {0: start, 1: end - start}, {}, bound)

    def _like(self, zero_forms, one_forms) -> "LineElement":
        return LineElement(self.ambient, self.degree, zero_forms, one_forms, self.bound)

    def __add__(self, other: "LineElement") -> "LineElement":
        if other.degree != self.degree:
            raise DegreeMismatch("cannot add line elements of different degrees")
        z = dict(self.zero_forms)
        o = dict(self.one_forms)
        for j, g in other.zero_forms.items():
            _accumulate(z, j, g)
        for j, h in other.one_forms.items():
            _accumulate(o, j, h)
        return self._like(z, o)

    def scale(self, c: Any) -> "LineElement":
        return self._like({j: g.scale(c) for j, g in self.zero_forms.items()},
                          {j: h.scale(c) for j, h in self.one_forms.items()})

    def __neg__(self) -> "LineElement":
        return self.scale(-1)

    def __sub__(self, other: "LineElement") -> "LineElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.zero_forms and not self.one_forms

    def max_power(self) -> int:
        return max(list(self.zero_forms) + list(self.one_forms) + [0])

    def at(self, t: Any) -> AritySupportedMap:
        """The 0-form part evaluated at a scalar t (dt ↦ 0)."""
        out = self.ambient.zero(self.degree)
        for j, g in self.zero_forms.items():
            out = out + g.scale(Fraction(t) ** j)
        return out

    def restricted(self, arities: Iterable[int]) -> "LineElement":
        ar = list(arities)
        return self._like({j: g.restricted(ar) for j, g in self.zero_forms.items()},
                          {j: h.restricted(ar) for j, h in self.one_forms.items()})

    def __repr__(self) -> str:
        return (f"LineElement(deg={self.degree}, t-powers={sorted(self.zero_forms)}, "
                f"dt-powers={sorted(self.one_forms)})")


def line_differential(x: LineElement) -> LineElement:
    """{·} on coefficients plus the de Rham differential, with the Koszul sign of passing the coefficient."""
    L = x.ambient
    z: Dict[int, AritySupportedMap] = {}
    o: Dict[int, AritySupportedMap] = {}
    for j, g in x.zero_forms.items():
        _accumulate(z, j, L.bracket1(g))
        if j:
            sign = -1 if g.degree & 1 else 1
            _accumulate(o, j - 1, g.scale(sign * j))
    for j, h in x.one_forms.items():
        _accumulate(o, j, L.bracket1(h))
    return LineElement(L, x.degree + 1, z, o, x.bound)


def endpoint(x: LineElement, which: int) -> AritySupportedMap:
    if which not in (0, 1):
        raise ValueError("endpoints are t = 0 and t = 1")
    return x.at(which)


def fiber_integrate(x: LineElement) -> AritySupportedMap:
    """I(b q + b̃ q̃ dt) = (−1)^{|b̃|} b̃ ∫₀¹ q̃, a map of degree −1."""
    out = x.ambient.zero(x.degree - 1)
    for j, h in x.one_forms.items():
        sign = -1 if h.degree & 1 else 1
        out = out + h.scale(Fraction(sign, j + 1))
    return out


def _power_products(powers: Sequence[int], m: int):
    """Multisets of m powers with weight 1/Π(multiplicity!), the symmetric expansion of (Σ x_j t^j)^m / m!."""
    for combo in combinations_with_replacement(powers, m):
        weight = Fraction(1)
        for j in set(combo):
            weight /= factorial(combo.count(j))
        yield combo, weight


def mc_residual_coefficients(L: Any, K: LineElement) -> Dict[FormLabel, AritySupportedMap]:
    """Coefficients of the MC residual of a degree-0 K in L⊗ℚ[t, dt].

    The t-part is the MC residual of K(t) and the dt-part is
    K′(t) + {φ} + Σ_{m≥2} {K(t)^{m−1}, φ}/(m−1)! where φ is the dt-coefficient.
    """
    if K.degree != 0:
        raise DegreeMismatch("1-cells have total degree 0")
    out: Dict[FormLabel, AritySupportedMap] = {}

    def add(label: FormLabel, f: AritySupportedMap) -> None:
        if f.is_zero():
            return
        out[label] = out[label] + f if label in out else f
        if out[label].is_zero():
            del out[label]

    gs = K.zero_forms
    powers = sorted(gs)
    N = L.N
    for m in range(1, N + 1):
        for combo, weight in _power_products(powers, m):
            val = L.bracket([gs[j] for j in combo])
            add((sum(combo), False), val.scale(weight) if weight != 1 else val)
    for j, g in gs.items():
        if j:
            add((j - 1, True), g.scale(j))
    for k, h in K.one_forms.items():
        for m in range(1, N + 1):
            for combo, weight in _power_products(powers, m - 1):
                val = L.bracket([gs[j] for j in combo] + [h])
                add((sum(combo) + k, True), val.scale(weight) if weight != 1 else val)
    return out


class OneCellReport:
    def __init__(self, residual: Dict[FormLabel, Any], endpoints: Tuple[Any, Any], label: str = "1-cell"):
        self.residual = residual
        self.endpoints = endpoints
        self.label = label

    @property
    def ok(self) -> bool:
        return not self.residual

    def __bool__(self) -> bool:
        return self.ok

    def offending(self) -> List[str]:
        """The offending coefficients, lowest power first."""
        return [describe_label(k) for k in sorted(self.residual, key=lambda k: (str(k[:-2]), k[-2], k[-1]))]

    def summary(self) -> str:
        if self.ok:
            return f"{self.label}: ok"
        return f"{self.label}: nonzero residual at {', '.join(self.offending())}"


class OneCell:
    """A degree-0 line element in a convolution algebra, claimed to satisfy the MC equation."""

    def __init__(self, element: LineElement, ambient: Any = None):
        self.element = element
        self.ambient = element.ambient if ambient is None else ambient
        if element.degree != 0:
            raise DegreeMismatch("1-cells have total degree 0")

    def residual_coefficients(self) -> Dict[FormLabel, Any]:
        return mc_residual_coefficients(self.ambient, self.element)

    def endpoints(self) -> Tuple[AritySupportedMap, AritySupportedMap]:
        return endpoint(self.element, 0), endpoint(self.element, 1)

    def morphism_line(self) -> LineElement:
        return self.element


def verify_one_cell(K: Any) -> OneCellReport:
    """Coefficientwise MC residual together with the two endpoints."""
    return OneCellReport(K.residual_coefficients(), K.endpoints())


def _linear_part(f: AritySupportedMap) -> GradedMap:
    C = f.C
    cols = {a: dict(f.data.get((C.unit, (a,)), {})) for a in range(f.source.dim)}
    return GradedMap(f.source.space, f.target.space, f.degree, cols, check=False)


def chain_homotopy_from_cell(K: Any) -> GradedMap:
    """s = I(arity-1 part); certifies lin(endpoint₁) − lin(endpoint₀) = ∂s + s∂."""
    rep = verify_one_cell(K)
    if not rep.ok:
        raise NotAOneCell(rep.summary())
    line = K.morphism_line()
    s = _linear_part(fiber_integrate(line.restricted([1])))
    dA, dB = line.ambient.V.differential, line.ambient.W.differential
    diff = _linear_part(endpoint(line, 1)) - _linear_part(endpoint(line, 0))
    if not (diff - compose_maps(dB, s) - compose_maps(s, dA)).is_zero():
        raise NotAOneCell("linear terms of the endpoints do not differ by ∂s + s∂")
    return s
