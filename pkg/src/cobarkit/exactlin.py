"""Exact rational linear algebra on finite graded spaces.

Vectors are sparse dictionaries ``{basis_index: coefficient}`` whose
coefficients are :class:`fractions.Fraction` (or any scalar type that
supports ring operations with Fractions, see :mod:`cobarkit.scalars`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import DegreeMismatch, NotAChainComplex, NotAContraction, SourceTargetMismatch

Scalar = Fraction
Vec = Dict[int, Any]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_scalar(value: Any) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


# ---------------------------------------------------------------------------
# sparse vector helpers


def vec_axpy(acc: Vec, vec: Mapping[int, Any], coeff: Any = 1) -> Vec:
    """acc += coeff * vec, dropping entries that cancel."""
    for key, val in vec.items():
        new = acc.get(key, 0) + coeff * val
        if new:
            acc[key] = new
        elif key in acc:
            del acc[key]
    return acc


def vec_add_term(acc: dict, key: Any, val: Any) -> None:
    new = acc.get(key, 0) + val
    if new:
        acc[key] = new
    elif key in acc:
        del acc[key]


def vec_scale(vec: Mapping[int, Any], coeff: Any) -> Vec:
    if not coeff:
        return {}
    return {k: coeff * v for k, v in vec.items() if coeff * v}


def vec_clean(vec: Mapping[Any, Any]) -> dict:
    return {k: v for k, v in vec.items() if v}


# ---------------------------------------------------------------------------
# graded spaces and maps


class GradedSpace:
    """An ordered basis of named, homogeneous vectors."""

    __slots__ = ("names", "degrees", "_index", "_by_degree")

    def __init__(self, basis: Iterable[Tuple[str, int]]):
        items = [(str(n), int(d)) for n, d in basis]
        self.names: Tuple[str, ...] = tuple(n for n, _ in items)
        self.degrees: Tuple[int, ...] = tuple(d for _, d in items)
        self._index = {n: i for i, n in enumerate(self.names)}
        if len(self._index) != len(self.names):
            raise ValueError("basis names must be unique")
        by_degree: Dict[int, List[int]] = {}
        for i, d in enumerate(self.degrees):
            by_degree.setdefault(d, []).append(i)
        self._by_degree = by_degree

    @property
    def dim(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self._index[name]

    def degree(self, i: int) -> int:
        return self.degrees[i]

    def indices_in_degree(self, d: int) -> List[int]:
        return list(self._by_degree.get(d, ()))

    def occupied_degrees(self) -> List[int]:
        return sorted(self._by_degree)

    def dims_by_degree(self) -> Dict[int, int]:
        return {d: len(ix) for d, ix in sorted(self._by_degree.items())}

    def basis(self) -> List[Tuple[str, int]]:
        return list(zip(self.names, self.degrees))

    def vector_degree(self, vec: Mapping[int, Any]) -> Optional[int]:
        """Degree of a homogeneous vector (None for zero); raises if mixed."""
        degs = {self.degrees[i] for i, c in vec.items() if c}
        if not degs:
            return None
        if len(degs) > 1:
            raise DegreeMismatch(f"vector is not homogeneous: degrees {sorted(degs)}")
        return degs.pop()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GradedSpace) and self.names == other.names and self.degrees == other.degrees

    def __hash__(self) -> int:
        return hash((self.names, self.degrees))

    def __repr__(self) -> str:
        return f"GradedSpace({self.basis()!r})"


def tensor_spaces(*spaces: GradedSpace) -> GradedSpace:
    """Tensor product basis, lexicographic in the factors (first factor slowest)."""
    basis: List[Tuple[str, int]] = [("", 0)]
    for sp in spaces:
        basis = [(f"{n}|{m}" if n else m, d + e) for n, d in basis for m, e in sp.basis()]
    return GradedSpace(basis)


class GradedMap:
    """A homogeneous linear map stored column by column.

    ``columns[j]`` is the image of source basis vector ``j`` as a sparse
    vector in the target.
    """

    __slots__ = ("source", "target", "degree", "columns")

    def __init__(self, source: GradedSpace, target: GradedSpace, degree: int,
                 columns: Mapping[int, Mapping[int, Any]], check: bool = True):
        self.source = source
        self.target = target
        self.degree = int(degree)
        cols: Dict[int, Vec] = {}
        for j, col in columns.items():
            clean = vec_clean(col)
            if clean:
                cols[int(j)] = clean
        if check:
            for j, col in cols.items():
                want = source.degrees[j] + self.degree
                for i in col:
                    if target.degrees[i] != want:
                        raise DegreeMismatch(
                            f"entry {source.names[j]} -> {target.names[i]} breaks degree {self.degree}")
        self.columns = cols

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls, space: GradedSpace) -> "GradedMap":
        return cls(space, space, 0, {i: {i: ONE} for i in range(space.dim)}, check=False)

    @classmethod
    def zero(cls, source: GradedSpace, target: GradedSpace, degree: int = 0) -> "GradedMap":
        return cls(source, target, degree, {}, check=False)

    @classmethod
    def from_dense(cls, source: GradedSpace, target: GradedSpace, degree: int,
                   rows: Sequence[Sequence[Any]]) -> "GradedMap":
        cols: Dict[int, Vec] = {}
        for i, row in enumerate(rows):
            for j, val in enumerate(row):
                if val:
                    cols.setdefault(j, {})[i] = as_scalar(val) if isinstance(val, (int, str)) else val
        return cls(source, target, degree, cols)

    # evaluation ---------------------------------------------------------
    def apply(self, vec: Mapping[int, Any]) -> Vec:
        out: Vec = {}
        for j, c in vec.items():
            col = self.columns.get(j)
            if col and c:
                vec_axpy(out, col, c)
        return out

    __call__ = apply

    def column(self, j: int) -> Vec:
        return dict(self.columns.get(j, {}))

    def entry(self, i: int, j: int) -> Any:
        return self.columns.get(j, {}).get(i, ZERO)

    def dense(self) -> List[List[Any]]:
        rows = [[ZERO] * self.source.dim for _ in range(self.target.dim)]
        for j, col in self.columns.items():
            for i, v in col.items():
                rows[i][j] = v
        return rows

    # algebra ------------------------------------------------------------
    def _check_parallel(self, other: "GradedMap") -> None:
        if self.source != other.source or self.target != other.target:
            raise SourceTargetMismatch("maps have different source or target")
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise DegreeMismatch(f"cannot add maps of degree {self.degree} and {other.degree}")

    def __add__(self, other: "GradedMap") -> "GradedMap":
        self._check_parallel(other)
        cols = {j: dict(c) for j, c in self.columns.items()}
        for j, c in other.columns.items():
            vec_axpy(cols.setdefault(j, {}), c)
        deg = self.degree if not self.is_zero() else other.degree
        return GradedMap(self.source, self.target, deg, cols, check=False)

    def __neg__(self) -> "GradedMap":
        return self.scale(-1)

    def __sub__(self, other: "GradedMap") -> "GradedMap":
        return self + other.scale(-1)

    def scale(self, coeff: Any) -> "GradedMap":
        return GradedMap(self.source, self.target, self.degree,
                         {j: vec_scale(c, coeff) for j, c in self.columns.items()}, check=False)

    def is_zero(self) -> bool:
        return not self.columns

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedMap):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.columns == other.columns

    def __repr__(self) -> str:
        return f"GradedMap(deg={self.degree}, {self.source.dim}->{self.target.dim}, nnz={sum(map(len, self.columns.values()))})"


def compose_maps(f: GradedMap, g: GradedMap) -> GradedMap:
    """Return f∘g."""
    if g.target != f.source:
        raise SourceTargetMismatch("g.target must equal f.source")
    cols = {j: f.apply(col) for j, col in g.columns.items()}
    return GradedMap(g.source, f.target, f.degree + g.degree, cols, check=False)


def tensor_maps(f: GradedMap, g: GradedMap) -> GradedMap:
    """(f⊗g)(v⊗w) = (-1)^{|g||v|} f(v)⊗g(w) on the lexicographic tensor basis."""
    src = tensor_spaces(f.source, g.source)
    tgt = tensor_spaces(f.target, g.target)
    wdim_src = g.source.dim
    wdim_tgt = g.target.dim
    cols: Dict[int, Vec] = {}
    for v, fcol in f.columns.items():
        sign = -1 if (g.degree * f.source.degrees[v]) % 2 else 1
        for w, gcol in g.columns.items():
            out: Vec = {}
            for i, a in fcol.items():
                for k, b in gcol.items():
                    out[i * wdim_tgt + k] = sign * a * b
            cols[v * wdim_src + w] = out
    return GradedMap(src, tgt, f.degree + g.degree, cols, check=False)


# ---------------------------------------------------------------------------
# complexes


class ChainComplex:
    """A finite graded space with a degree +1 square-zero differential."""

    __slots__ = ("space", "differential", "name")

    def __init__(self, space: GradedSpace, differential: Optional[GradedMap] = None, name: str = ""):
        if differential is None:
            differential = GradedMap.zero(space, space, 1)
        if differential.source != space or differential.target != space:
            raise NotAChainComplex(f"complex {name!r}: differential must be an endomorphism of the space")
        if not differential.is_zero() and differential.degree != 1:
            raise NotAChainComplex(f"complex {name!r}: differential has degree {differential.degree}, expected 1")
        if not compose_maps(differential, differential).is_zero():
            raise NotAChainComplex(f"complex {name!r}: differential does not square to zero")
        self.space = space
        self.differential = GradedMap(space, space, 1, differential.columns, check=False)
        self.name = name

    @classmethod
    def from_differential(cls, basis: Iterable[Tuple[str, int]],
                          images: Mapping[str, Mapping[str, Any]], name: str = "") -> "ChainComplex":
        """Build from ``{source_name: {target_name: coeff}}``."""
        space = GradedSpace(basis)
        cols = {space.index(s): {space.index(t): as_scalar(c) for t, c in img.items()}
                for s, img in images.items()}
        return cls(space, GradedMap(space, space, 1, cols), name=name)

    @property
    def dim(self) -> int:
        return self.space.dim

    def d(self, vec: Mapping[int, Any]) -> Vec:
        return self.differential.apply(vec)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, ChainComplex) and self.space == other.space
                and self.differential == other.differential)

    def __hash__(self) -> int:
        return hash(self.space)

    def __repr__(self) -> str:
        return f"ChainComplex({self.name or '?'}, dims={self.space.dims_by_degree()})"


# ---------------------------------------------------------------------------
# Gaussian elimination


class Echelon:
    """Incremental row echelon form; pivot = first nonzero index in basis order.

    Each stored row may carry a ``tag`` vector that is transformed along
    with it, which records how the row was produced from the inputs.
    """

    def __init__(self) -> None:
        self.rows: Dict[int, Tuple[Vec, Vec]] = {}

    def reduce(self, vec: Mapping[int, Any], tag: Optional[Mapping[int, Any]] = None) -> Tuple[Vec, Vec]:
        v = dict(vec)
        t = dict(tag or {})
        while v:
            hits = [k for k in v if k in self.rows]
            if not hits:
                break
            k = min(hits)
            row, rtag = self.rows[k]
            c = v[k] / row[k]
            vec_axpy(v, row, -c)
            vec_axpy(t, rtag, -c)
        return v, t

    def add(self, vec: Mapping[int, Any], tag: Optional[Mapping[int, Any]] = None) -> Tuple[bool, Vec, Vec]:
        """Insert vec; returns (was_independent, reduced_vec, reduced_tag)."""
        v, t = self.reduce(vec, tag)
        if not v:
            return False, v, t
        self.rows[min(v)] = (v, t)
        return True, v, t

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank_of_columns(columns: Iterable[Mapping[int, Any]]) -> int:
    ech = Echelon()
    for col in columns:
        ech.add(col)
    return ech.rank


def rank(f: GradedMap) -> int:
    return rank_of_columns(f.columns.values())


def invert_dense(matrix: List[List[Fraction]]) -> List[List[Fraction]]:
    """Exact Gauss-Jordan inverse; raises ValueError when singular."""
    n = len(matrix)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [x - c * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class SparseLinearSystem:
    """Incrementally assembled exact system ``Σ coeff·x_var = rhs``.

    Equations are reduced as they arrive, so an inconsistency is detected
    at the moment the offending equation is added.
    """

    def __init__(self) -> None:
        self._pivots: Dict[Any, Tuple[dict, Any]] = {}
        self._order: Dict[Any, int] = {}

    def _rank_key(self, var: Any) -> int:
        if var not in self._order:
            self._order[var] = len(self._order)
        return self._order[var]

    def add_equation(self, row: Mapping[Any, Any], rhs: Any = ZERO) -> bool:
        """Add an equation; returns False when it contradicts earlier ones."""
        r = {k: v for k, v in row.items() if v}
        b = rhs
        for var in r:
            self._rank_key(var)
        while True:
            hits = [k for k in r if k in self._pivots]
            if not hits:
                break
            k = min(hits, key=self._order.__getitem__)
            prow, prhs = self._pivots[k]
            c = r[k] / prow[k]
            for var, val in prow.items():
                new = r.get(var, 0) - c * val
                if new:
                    r[var] = new
                else:
                    r.pop(var, None)
            b = b - c * prhs
        if not r:
            return not b
        piv = min(r, key=self._order.__getitem__)
        self._pivots[piv] = (r, b)
        return True

    @property
    def rank(self) -> int:
        return len(self._pivots)

    def solve(self) -> Dict[Any, Any]:
        """A particular solution with every free variable set to zero."""
        sol: Dict[Any, Any] = {}
        for piv in sorted(self._pivots, key=self._order.__getitem__, reverse=True):
            row, b = self._pivots[piv]
            acc = b
            for var, val in row.items():
                if var != piv and var in sol:
                    acc = acc - val * sol[var]
            sol[piv] = acc / row[piv]
        return {k: v for k, v in sol.items() if v}


# ---------------------------------------------------------------------------
# cohomology and contractions


def _degree_block(c: ChainComplex, d: int) -> List[int]:
    return c.space.indices_in_degree(d)


def cohomology(c: ChainComplex) -> List[Tuple[int, int]]:
    """[(degree, dim H^degree)] for every degree carrying basis vectors."""
    out = []
    for d in c.space.occupied_degrees():
        src = _degree_block(c, d)
        rk_here = rank_of_columns(c.differential.column(j) for j in src)
        rk_in = rank_of_columns(c.differential.column(j) for j in _degree_block(c, d - 1))
        out.append((d, len(src) - rk_here - rk_in))
    return out


@dataclass(frozen=True)
class Contraction:
    """Deformation retract data B ⇄ A with homotopy h on B.

    Conventions: ``p∘i = id_A`` and ``i∘p − id_B = ∂h + h∂``; the side
    conditions ``h∘i = 0``, ``p∘h = 0``, ``h∘h = 0`` are also required.
    """

    big: ChainComplex
    small: ChainComplex
    include: GradedMap
    project: GradedMap
    homotopy: GradedMap
    validated: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        failures = contraction_failures(self.big, self.small, self.include, self.project, self.homotopy)
        if failures:
            raise NotAContraction("; ".join(failures))
        object.__setattr__(self, "validated", True)


def contraction_failures(big: ChainComplex, small: ChainComplex, i: GradedMap, p: GradedMap,
                         h: GradedMap, side_conditions: bool = True) -> List[str]:
    """Names of the violated contraction identities (empty when all hold)."""
    fails: List[str] = []
    if i.source != small.space or i.target != big.space:
        return ["include must map small to big"]
    if p.source != big.space or p.target != small.space:
        return ["project must map big to small"]
    if h.source != big.space or h.target != big.space:
        return ["homotopy must be an endomorphism of big"]
    for name, f, want in (("include", i, 0), ("project", p, 0), ("homotopy", h, -1)):
        if not f.is_zero() and f.degree != want:
            fails.append(f"{name} has degree {f.degree}, expected {want}")
    if fails:
        return fails
    if not (compose_maps(big.differential, i) - compose_maps(i, small.differential)).is_zero():
        fails.append("include is not a chain map")
    if not (compose_maps(small.differential, p) - compose_maps(p, big.differential)).is_zero():
        fails.append("project is not a chain map")
    if compose_maps(p, i) != GradedMap.identity(small.space):
        fails.append("project∘include ≠ id")
    lhs = compose_maps(i, p) - GradedMap.identity(big.space)
    rhs = compose_maps(big.differential, h) + compose_maps(h, big.differential)
    if lhs != rhs:
        fails.append("include∘project − id ≠ ∂h + h∂")
    if side_conditions:
        if not compose_maps(h, i).is_zero():
            fails.append("side condition h∘i = 0 fails")
        if not compose_maps(p, h).is_zero():
            fails.append("side condition p∘h = 0 fails")
        if not compose_maps(h, h).is_zero():
            fails.append("side condition h∘h = 0 fails")
    return fails


def normalize_contraction(big: ChainComplex, small: ChainComplex, include: GradedMap,
                          project: GradedMap, homotopy: GradedMap) -> Contraction:
    """Replace the homotopy so that all three side conditions hold.

    With π = id − i∘p the two replacements h ↦ π h π and then h ↦ h ∂ h
    keep ``i∘p − id = ∂h + h∂`` and enforce h∘i = p∘h = h∘h = 0.
    Already side-conditioned input comes back unchanged.
    """
    fails = contraction_failures(big, small, include, project, homotopy, side_conditions=False)
    if fails:
        raise NotAContraction("; ".join(fails))
    ident = GradedMap.identity(big.space)
    proj = ident - compose_maps(include, project)
    h1 = compose_maps(proj, compose_maps(homotopy, proj))
    h1 = GradedMap(big.space, big.space, -1, h1.columns, check=False)
    # the sign of the homotopy flips between conventions, h∂h is odd in h
    h2 = compose_maps(h1, compose_maps(big.differential, h1)).scale(-1)
    h2 = GradedMap(big.space, big.space, -1, h2.columns)
    return Contraction(big, small, include, project, h2)


def contraction_from_complex(c: ChainComplex) -> Contraction:
    """Contract a complex onto its cohomology (zero differential).

    Per degree the space is split as cohomology representatives ⊕ boundaries
    ⊕ chosen preimages of the next boundaries, using Gaussian elimination
    with first-nonzero pivots.  The small basis vectors reuse the name of
    the big basis vector whose kernel vector generated them.
    """
    space = c.space
    degrees = space.occupied_degrees()
    preimages: Dict[int, List[Vec]] = {}   # degree -> c_j (in that degree)
    boundaries: Dict[int, List[Vec]] = {}  # degree -> b_j = ∂c_j (in that degree)
    kernels: Dict[int, List[Tuple[int, Vec]]] = {}
    for d in degrees:
        ech = Echelon()
        preimages[d] = []
        kernels[d] = []
        for s in _degree_block(c, d):
            img = c.differential.column(s)
            new, red, tag = ech.add(img, {s: ONE})
            if new:
                preimages[d].append({s: ONE})
                boundaries.setdefault(d + 1, []).append(img)
            else:
                kernels[d].append((s, tag))
    found: List[Tuple[int, int, Vec]] = []
    hsrc: Dict[int, List[int]] = {}
    change: Dict[int, Tuple[List[int], List[List[Fraction]]]] = {}
    layout: Dict[int, Tuple[int, int, int]] = {}
    for d in degrees:
        ech = Echelon()
        for b in boundaries.get(d, []):
            ech.add(b)
        hreps: List[Vec] = []
        hsrc[d] = []
        for s, z in kernels[d]:
            new, _, _ = ech.add(z)
            if new:
                hreps.append(z)
                hsrc[d].append(s)
                found.append((s, d, z))
        block = _degree_block(c, d)
        newbasis = hreps + boundaries.get(d, []) + preimages[d]
        if len(newbasis) != len(block):
            raise NotAContraction("internal splitting failed")  # pragma: no cover
        pos = {g: r for r, g in enumerate(block)}
        mat = [[ZERO] * len(block) for _ in block]
        for col, v in enumerate(newbasis):
            for g, val in v.items():
                mat[pos[g]][col] = val
        change[d] = (block, invert_dense(mat) if block else [])
        layout[d] = (len(hreps), len(boundaries.get(d, [])), len(preimages[d]))
    found.sort(key=lambda item: item[0])
    small_index = {s: k for k, (s, _, _) in enumerate(found)}
    small_space = GradedSpace((space.names[s], d) for s, d, _ in found)
    small = ChainComplex(space=small_space, name=(c.name + "_H") if c.name else "H")
    include = GradedMap(small_space, space, 0, {k: rep for k, (_, _, rep) in enumerate(found)})
    proj_cols: Dict[int, Vec] = {}
    hom_cols: Dict[int, Vec] = {}
    for d in degrees:
        block, inv = change[d]
        nh, nb, _ = layout[d]
        prev_pre = preimages.get(d - 1, [])
        for colpos, g in enumerate(block):
            coords = [inv[r][colpos] for r in range(len(block))]
            pc = {small_index[hsrc[d][k]]: coords[k] for k in range(nh) if coords[k]}
            if pc:
                proj_cols[g] = pc
            hv: Vec = {}
            for j in range(nb):
                beta = coords[nh + j]
                if beta:
                    vec_axpy(hv, prev_pre[j], -beta)
            if hv:
                hom_cols[g] = hv
    project = GradedMap(space, small_space, 0, proj_cols)
    homotopy = GradedMap(space, space, -1, hom_cols)
    return Contraction(c, small, include, project, homotopy)


def induced_on_cohomology_is_iso(f: GradedMap, source: ChainComplex, target: ChainComplex) -> bool:
    """True iff the degree-0 chain map f induces isomorphisms on cohomology."""
    cs = contraction_from_complex(source)
    ct = contraction_from_complex(target)
    if cs.small.space.dims_by_degree() != ct.small.space.dims_by_degree():
        return False
    induced = compose_maps(ct.project, compose_maps(f, cs.include))
    return rank(induced) == cs.small.dim
