"""Cylinder triples, homotopy transfer along contractions, and 1-cells between transfers.

The transferred structure and ∞-morphism are built one arity at a time.
With F′ and Q′_A fixed below arity n, the morphism residual R_n at arity n
is a cocycle, and q_n = p∘R_n, F′_n = h∘R_n solve the equation at that
arity because i∘p − id = ∂h + h∂.  Unrolling the recursion gives the
familiar sum over trees with q^B at vertices, h on internal edges and i on
leaves.  Every result is certified before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .convolution import (AritySupportedMap, ConvAlgebra, cofree_space, end_conv_bracket, end_differential,
                          star_product)
from .cooperad import TruncatedCooperad
from .errors import (NotAContraction, ObstructionAtArity, SourceTargetMismatch, TransferInternalError)
from .exactlin import (ChainComplex, Contraction, GradedMap, SparseLinearSystem, compose_maps, contraction_failures,
                       invert_dense)
from .hoalg import (CobarAlgebra, InfinityMorphism, ResidualReport, is_quasi_iso, linear_term, morphism_residual,
                    verify_cobar_structure, verify_infinity_morphism)
from .linforms import LinForm
from .paths import LineElement, OneCellReport, _power_products, verify_one_cell


# ---------------------------------------------------------------------------
# cylinder triples


@dataclass
class CylinderTriple:
    """Candidate (Q′_A, Q′_B, F′); an MC element of the cylinder iff all three checks pass."""

    A: CobarAlgebra
    B: CobarAlgebra
    F: AritySupportedMap

    def __post_init__(self) -> None:
        if self.A.C is not self.B.C:
            raise SourceTargetMismatch("both algebras must use one cooperad")
        if self.F.source != self.A.carrier or self.F.target != self.B.carrier:
            raise SourceTargetMismatch("components must map C(A) to B")


@dataclass
class CylinderReport:
    structure_A: ResidualReport
    structure_B: ResidualReport
    morphism: ResidualReport

    @property
    def ok(self) -> bool:
        return self.structure_A.ok and self.structure_B.ok and self.morphism.ok

    def __bool__(self) -> bool:
        return self.ok

    def failing(self) -> List[str]:
        return [name for name, rep in (("structure_A", self.structure_A), ("structure_B", self.structure_B),
                                       ("morphism", self.morphism)) if not rep.ok]

    def summary(self) -> str:
        return "cylinder: ok" if self.ok else "cylinder: failing " + ", ".join(self.failing())


def verify_cylinder(c: CylinderTriple) -> CylinderReport:
    return CylinderReport(
        ResidualReport("structure_A", verify_cobar_structure(c.A.carrier, c.A.structure).entries),
        ResidualReport("structure_B", verify_cobar_structure(c.B.carrier, c.B.structure).entries),
        morphism_residual(c.A, c.B, c.F),
    )


# ---------------------------------------------------------------------------
# homotopy transfer


@dataclass
class TransferResult:
    transferred: CobarAlgebra
    morphism: InfinityMorphism
    contraction: Any
    certificates: Tuple[ResidualReport, ResidualReport] = field(default=None)

    def as_cylinder(self) -> CylinderTriple:
        return CylinderTriple(self.transferred, self.morphism.target, self.morphism.components)


def _transfer_components(B: CobarAlgebra, small: ChainComplex, include: GradedMap, project: GradedMap,
                         homotopy: GradedMap) -> Tuple[AritySupportedMap, AritySupportedMap]:
    C = B.C
    space = cofree_space(C, small)
    F_data = {(C.unit, (a,)): include.column(a) for a in range(small.dim) if include.column(a)}
    Q_data: Dict[Any, Dict[int, Any]] = {}
    for n in range(2, space.N + 1):
        QA = AritySupportedMap(C, small, small, 1, Q_data, check=False)
        F = AritySupportedMap(C, small, B.carrier, 0, F_data, check=False)
        partial = CobarAlgebra(C, small, QA)
        residual = morphism_residual(partial, B, F, space.keys(n))
        for key, vec in residual.entries.items():
            q = project.apply(vec)
            f = homotopy.apply(vec)
            if q:
                Q_data[key] = q
            if f:
                F_data[key] = f
    return (AritySupportedMap(C, small, small, 1, Q_data, check=False),
            AritySupportedMap(C, small, B.carrier, 0, F_data, check=False))


def homotopy_transfer(B: CobarAlgebra, c: Contraction, name: str = "") -> TransferResult:
    """Transferred structure on the small side of ``c`` and an ∞-quasi-isomorphism with linear term i."""
    if not isinstance(c, Contraction):
        raise NotAContraction("homotopy_transfer needs a validated Contraction")
    if c.big != B.carrier:
        raise SourceTargetMismatch("the contraction must start from the carrier of B")
    QA, F = _transfer_components(B, c.small, c.include, c.project, c.homotopy)
    A = CobarAlgebra(B.C, c.small, QA, name=name or f"transfer of {B.name or 'B'}")
    morphism = InfinityMorphism(A, B, F)
    cert_structure = A.residual()
    cert_morphism = verify_infinity_morphism(morphism)
    if not cert_structure.ok or not cert_morphism.ok:
        raise TransferInternalError(f"{cert_structure.summary()}; {cert_morphism.summary()}")
    if linear_term(morphism) != c.include or not is_quasi_iso(morphism):
        raise TransferInternalError("transferred morphism does not have the inclusion as linear term")
    return TransferResult(A, morphism, c, (cert_structure, cert_morphism))


# ---------------------------------------------------------------------------
# 1-cells in the cylinder between two transfers


class CylinderCell:
    """A family (Q_A(t) + λ(t)dt, F(t) + φ(t)dt) of cylinder triples with Q_B fixed.

    The dt-part of the MC equation has two components:
      −Q′(t) + ∂λ − λ∂ + Q(t)⋆λ − λ⋆Q(t) = 0 on the structure side, and
      F′(t) + ∂φ + φ∂ + φ⋆Q(t) + Σ_{m≥2} {F(t)^{m−1}, φ}/(m−1)! − F(t)⋆λ = 0 on the morphism side.
    """

    def __init__(self, B: CobarAlgebra, structure: LineElement, morphism: LineElement):
        self.B = B
        self.structure = structure
        self.morphism = morphism
        self.C = B.C
        self.small = structure.ambient.V

    def residual_coefficients(self) -> Dict[Tuple[str, int, bool], AritySupportedMap]:
        L0 = self.morphism.ambient
        out: Dict[Tuple[str, int, bool], AritySupportedMap] = {}
        for (j, dt), f in _structure_equations(self.structure.zero_forms, self.structure.one_forms).items():
            out[("structure", j, dt)] = f
        for (j, dt), f in _morphism_equations(L0, self.structure.zero_forms, self.morphism.zero_forms,
                                              self.structure.one_forms, self.morphism.one_forms).items():
            out[("morphism", j, dt)] = f
        return out

    def endpoints(self) -> Tuple[CylinderTriple, CylinderTriple]:
        out = []
        for t in (0, 1):
            A = CobarAlgebra(self.C, self.small, self.structure.at(t).without_unit())
            out.append(CylinderTriple(A, self.B, self.morphism.at(t)))
        return out[0], out[1]

    def morphism_line(self) -> LineElement:
        return self.morphism

    def is_constant(self) -> bool:
        return (set(self.structure.zero_forms) <= {0} and set(self.morphism.zero_forms) <= {0}
                and not self.structure.one_forms and not self.morphism.one_forms)


def _add(out: Dict, label: Any, f: AritySupportedMap) -> None:
    if f.is_zero():
        return
    if label in out:
        s = out[label] + f
        if s.is_zero():
            del out[label]
        else:
            out[label] = s
    else:
        out[label] = f


def _structure_equations(Q: Dict[int, AritySupportedMap], lam: Dict[int, AritySupportedMap]) -> Dict[Tuple[int, bool], AritySupportedMap]:
    out: Dict[Tuple[int, bool], AritySupportedMap] = {}
    for b, q in Q.items():
        _add(out, (b, False), end_differential(q))
        for c, q2 in Q.items():
            _add(out, (b + c, False), star_product(q, q2))
        if b:
            _add(out, (b - 1, True), q.scale(-b))
    for a, l in lam.items():
        _add(out, (a, True), end_differential(l))
        for b, q in Q.items():
            _add(out, (a + b, True), end_conv_bracket(q, l))
    return out


def _morphism_equations(L0: ConvAlgebra, Q: Dict[int, AritySupportedMap], F: Dict[int, AritySupportedMap],
                        lam: Dict[int, AritySupportedMap], phi: Dict[int, AritySupportedMap]) -> Dict[Tuple[int, bool], AritySupportedMap]:
    """Coefficients of the t- and dt-parts; L0 is Conv(C(A), B) with the trivial structure on A."""
    out: Dict[Tuple[int, bool], AritySupportedMap] = {}
    powers = sorted(F)
    N = L0.N
    for m in range(1, N + 1):
        for combo, weight in _power_products(powers, m):
            val = L0.bracket([F[j] for j in combo])
            _add(out, (sum(combo), False), val.scale(weight))
    for b, f in F.items():
        for c, q in Q.items():
            _add(out, (b + c, False), star_product(f, q).scale(-1))
        if b:
            _add(out, (b - 1, True), f.scale(b))
    for a, ph in phi.items():
        for m in range(1, N + 1):
            for combo, weight in _power_products(powers, m - 1):
                val = L0.bracket([F[j] for j in combo] + [ph])
                _add(out, (sum(combo) + a, True), val.scale(weight))
        for c, q in Q.items():
            _add(out, (a + c, True), star_product(ph, q))
    for a, l in lam.items():
        for b, f in F.items():
            _add(out, (a + b, True), star_product(f, l).scale(-1))
    return out


def _interpolate(samples: Sequence[AritySupportedMap], points: Sequence[Fraction]) -> Dict[int, AritySupportedMap]:
    """Coefficients of the polynomial in t through (points[k], samples[k])."""
    n = len(points)
    vander_inv = invert_dense([[Fraction(x) ** j for j in range(n)] for x in points])
    proto = samples[0]
    coeffs: Dict[int, Dict[Any, Dict[int, Fraction]]] = {j: {} for j in range(n)}
    keys = set()
    for s in samples:
        for key, vec in s.data.items():
            for o in vec:
                keys.add((key, o))
    for key, o in keys:
        ys = [s.data.get(key, {}).get(o, 0) for s in samples]
        for j in range(n):
            c = sum((vander_inv[j][k] * ys[k] for k in range(n)), Fraction(0))
            if c:
                coeffs[j].setdefault(key, {})[o] = c
    return {j: AritySupportedMap(proto.C, proto.source, proto.target, proto.degree, d, check=False)
            for j, d in coeffs.items() if d}


def _unknown_map(C: TruncatedCooperad, source: ChainComplex, target: ChainComplex, degree: int, tag: str, power: int,
                 min_arity: int) -> AritySupportedMap:
    space = cofree_space(C, source)
    tdeg = target.space.degrees
    data = {}
    for key in space.all_keys(min_arity):
        want = space.key_degree(key) + degree
        outs = {o: LinForm.var((tag, power, key, o)) for o in range(target.dim) if tdeg[o] == want}
        if outs:
            data[key] = outs
    return AritySupportedMap(C, source, target, degree, data, check=False)


def _substitute(f: AritySupportedMap, sol: Dict[Any, Fraction]) -> AritySupportedMap:
    data = {}
    for key, vec in f.data.items():
        v = {o: c.evaluate(sol) for o, c in vec.items()}
        v = {o: c for o, c in v.items() if c}
        if v:
            data[key] = v
    return AritySupportedMap(f.C, f.source, f.target, f.degree, data, check=False)


def transfer_uniqueness_cell(r1: TransferResult, r2: TransferResult,
                             max_extra_degree: int = 2) -> CylinderCell:
    """A certified 1-cell joining the two transferred cylinder triples.

    Q(t), F(t) come from transferring along the straight line of
    contractions (i, p₁ + t(p₂−p₁), h₁ + t(h₂−h₁)); the dt-parts solve the
    linear dt-equations arity by arity.
    """
    B = r1.morphism.target
    if r2.morphism.target is not B:
        raise SourceTargetMismatch("both transfers must start from the same algebra B")
    c1, c2 = r1.contraction, r2.contraction
    if c1.small != c2.small or c1.include != c2.include:
        raise SourceTargetMismatch("the two contractions must share the small complex and the inclusion")
    for r in (r1, r2):
        if not all(rep.ok for rep in r.certificates):
            raise TransferInternalError("transfer results must carry empty certificates")
    C = B.C
    small = c1.small
    N = cofree_space(C, small).N
    end_amb = ConvAlgebra(C, CobarAlgebra(C, small), CobarAlgebra(C, small))
    L0 = ConvAlgebra(C, CobarAlgebra(C, small), B)

    dp = c2.project - c1.project
    dh = c2.homotopy - c1.homotopy
    points = [Fraction(k) for k in range(N + 1)]
    Qs, Fs = [], []
    for t in points:
        p_t = c1.project + dp.scale(t)
        h_t = c1.homotopy + dh.scale(t)
        fails = contraction_failures(c1.big, small, c1.include, p_t, h_t, side_conditions=False)
        if fails:
            raise TransferInternalError("straight line of contractions leaves the space of contractions: " + "; ".join(fails))
        q, f = _transfer_components(B, small, c1.include, p_t, h_t)
        Qs.append(q)
        Fs.append(f)
    Qpoly = _interpolate(Qs, points)
    Fpoly = _interpolate(Fs, points)

    if (r1.transferred.structure == r2.transferred.structure
            and r1.morphism.components == r2.morphism.components and set(Qpoly) <= {0} and set(Fpoly) <= {0}):
        cell = CylinderCell(B, LineElement(end_amb, 1, Qpoly, {}), LineElement(L0, 0, Fpoly, {}))
        _certify(cell)
        return cell

    top = max(list(Qpoly) + list(Fpoly) + [1])
    last_failure: Optional[int] = None
    for extra in range(0, max_extra_degree + 1):
        P = top - 1 + extra
        lam = {a: _unknown_map(C, small, small, 0, "lam", a, 2) for a in range(P + 1)}
        phi = {a: _unknown_map(C, small, B.carrier, -1, "phi", a, 1) for a in range(P + 1)}
        eqs = {}
        for (j, dt), f in _structure_equations(Qpoly, lam).items():
            if dt:
                eqs[("structure", j)] = f
        for (j, dt), f in _morphism_equations(L0, Qpoly, Fpoly, lam, phi).items():
            if dt:
                eqs[("morphism", j)] = f
        rows: List[Tuple[int, Dict, Fraction]] = []
        for label, f in eqs.items():
            for key, vec in f.data.items():
                for o, form in vec.items():
                    if isinstance(form, LinForm):
                        row, rhs = form.as_equation()
                    else:
                        row, rhs = {}, -Fraction(form)
                    rows.append((len(key[1]), row, rhs))
        rows.sort(key=lambda r: r[0])
        system = SparseLinearSystem()
        failed_at = None
        for arity, row, rhs in rows:
            if not system.add_equation(row, rhs):
                failed_at = arity
                break
        if failed_at is not None:
            last_failure = failed_at
            continue
        sol = system.solve()
        lam_num = {a: _substitute(l, sol) for a, l in lam.items()}
        phi_num = {a: _substitute(p, sol) for a, p in phi.items()}
        cell = CylinderCell(B, LineElement(end_amb, 1, Qpoly, {a: l for a, l in lam_num.items() if not l.is_zero()}),
                            LineElement(L0, 0, Fpoly, {a: p for a, p in phi_num.items() if not p.is_zero()}))
        _certify(cell)
        return cell
    raise ObstructionAtArity(last_failure, f"dt-equations have no polynomial solution of degree ≤ {top - 1 + max_extra_degree}")


def _certify(cell: CylinderCell) -> OneCellReport:
    rep = verify_one_cell(cell)
    if not rep.ok:
        raise TransferInternalError(rep.summary())
    return rep
