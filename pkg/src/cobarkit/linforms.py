"""Affine forms Σ c_u x_u + c₀ over ℚ, usable as scalars in sparse vectors.

Evaluating a linear formula on maps whose entries are unknowns yields its
coefficients as affine forms, which then feed a linear solver directly.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Any, Dict, Hashable, Mapping, Tuple


class LinForm:
    __slots__ = ("terms", "const")

    def __init__(self, terms: Mapping[Hashable, Any] = (), const: Any = 0):
        self.terms: Dict[Hashable, Fraction] = {k: Fraction(v) for k, v in dict(terms).items() if v}
        self.const = Fraction(const)

    @classmethod
    def var(cls, name: Hashable) -> "LinForm":
        return cls({name: 1})

    @staticmethod
    def _lift(other: Any) -> "LinForm":
        if isinstance(other, LinForm):
            return other
        if isinstance(other, (int, Rational)):
            return LinForm((), other)
        raise TypeError(f"cannot combine a linear form with {type(other).__name__}")

    def __add__(self, other: Any) -> "LinForm":
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for k, v in o.terms.items():
            terms[k] = terms.get(k, 0) + v
        return LinForm(terms, self.const + o.const)

    __radd__ = __add__

    def __neg__(self) -> "LinForm":
        return LinForm({k: -v for k, v in self.terms.items()}, -self.const)

    def __sub__(self, other: Any) -> "LinForm":
        return self + (-self._lift(other))

    def __rsub__(self, other: Any) -> "LinForm":
        return self._lift(other) + (-self)

    def __mul__(self, other: Any) -> "LinForm":
        if isinstance(other, LinForm):
            if other.terms and self.terms:
                raise TypeError("product of two non-constant linear forms is not linear")
            if other.terms:
                return other * self.const
            other = other.const
        if not isinstance(other, (int, Rational)):
            return NotImplemented
        c = Fraction(other)
        return LinForm({k: v * c for k, v in self.terms.items()}, self.const * c)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "LinForm":
        return self * (1 / Fraction(other))

    def __bool__(self) -> bool:
        return bool(self.terms) or bool(self.const)

    def __eq__(self, other: object) -> bool:
        try:
            o = self._lift(other)
        except TypeError:
            return NotImplemented
        return self.terms == o.terms and self.const == o.const

    def __hash__(self) -> int:
        return hash((frozenset(self.terms.items()), self.const))

    def evaluate(self, values: Mapping[Hashable, Any]) -> Fraction:
        return self.const + sum((v * values.get(k, 0) for k, v in self.terms.items()), Fraction(0))

    def as_equation(self) -> Tuple[Dict[Hashable, Fraction], Fraction]:
        """(row, rhs) for the equation self = 0."""
        return dict(self.terms), -self.const

    def __repr__(self) -> str:
        parts = [f"{v}·{k}" for k, v in self.terms.items()]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)
