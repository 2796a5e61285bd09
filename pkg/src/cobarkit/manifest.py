"""JSON manifests: loading with validation, and serialization of every object the commands emit.

Format conventions:

* rationals are strings ``"p/q"`` (integers are also accepted on input);
* a graded map is ``{"degree": d, "columns": {source: {target: coeff}}}``;
* a map out of C(A) is ``{"degree": d, "entries": [[cooperad basis, [inputs], {output: coeff}], ...]}``
  with the input names listed in basis order of A, which is the normal form
  of the coinvariants;
* every other object refers to complexes, structures and morphisms by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .convolution import AritySupportedMap, ConvAlgebra
from .cooperad import TruncatedCooperad, builtin
from .errors import CobarKitError, DegreeMismatch, ManifestError, NotAChainComplex
from .exactlin import ChainComplex, Contraction, GradedMap, GradedSpace, contraction_from_complex, normalize_contraction
from .hoalg import CobarAlgebra, InfinityMorphism, structure_from_ainfinity
from .paths import LineElement, OneCell

DEFAULT_ARITY_LIMIT = 6


# ---------------------------------------------------------------------------
# scalars


def parse_scalar(value: Any, where: str = "") -> Fraction:
    if isinstance(value, bool):
        raise ManifestError(f"{where}: booleans are not coefficients")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise ManifestError(f"{where}: expected a rational written as \"p/q\", got {value!r}")


def format_scalar(value: Any) -> str:
    return str(Fraction(value))


# ---------------------------------------------------------------------------
# serialization


def complex_to_json(c: ChainComplex) -> Dict[str, Any]:
    names = c.space.names
    diff = {names[j]: {names[i]: format_scalar(v) for i, v in sorted(col.items())}
            for j, col in sorted(c.differential.columns.items())}
    return {"basis": [[n, d] for n, d in c.space.basis()], "differential": diff}


def graded_map_to_json(f: GradedMap) -> Dict[str, Any]:
    src, tgt = f.source.names, f.target.names
    cols = {src[j]: {tgt[i]: format_scalar(v) for i, v in sorted(col.items())}
            for j, col in sorted(f.columns.items())}
    return {"degree": f.degree, "columns": cols}


def arity_map_to_json(f: AritySupportedMap) -> Dict[str, Any]:
    C = f.C
    src, tgt = f.source.space.names, f.target.space.names
    entries = []
    for (g, t), vec in sorted(f.data.items(), key=lambda kv: (len(kv[0][1]), kv[0])):
        n = len(t)
        entries.append([C.space(n).names[g], [src[a] for a in t],
                        {tgt[i]: format_scalar(v) for i, v in sorted(vec.items())}])
    return {"degree": f.degree, "entries": entries}


def vector_to_json(vec: Mapping[int, Any], space: GradedSpace) -> Dict[str, str]:
    return {space.names[i]: format_scalar(v) for i, v in sorted(vec.items())}


def key_to_json(C: TruncatedCooperad, key: Tuple[int, Tuple[int, ...]], space: GradedSpace) -> List[Any]:
    g, t = key
    return [C.space(len(t)).names[g], [space.names[a] for a in t]]


def cooperad_to_json(C: TruncatedCooperad) -> Dict[str, Any]:
    """Explicit tables; reloading them gives the same cooperad up to its name."""
    comps = {str(n): complex_to_json(C.components[n]) for n in range(1, C.N + 1)}
    actions = {}
    for n in range(2, C.N + 1):
        names = C.space(n).names
        actions[str(n)] = [{names[c]: {names[r]: format_scalar(v) for r, v in sorted(img.items())}
                            for c, img in sorted(gen.items())} for gen in C.generator_actions[n]]
    cocomps = []
    for (n, k, i), table in sorted(C.cocompositions.items()):
        big, low, up = C.space(n + k - 1).names, C.space(n).names, C.space(k).names
        for col, img in sorted(table.items()):
            for (a, b), v in sorted(img.items()):
                cocomps.append([n, k, i, big[col], low[a], up[b], format_scalar(v)])
    filt = {str(n): list(C.filtration[n]) for n in range(1, C.N + 1)}
    return {"name": C.name, "components": comps, "actions": actions, "cocompositions": cocomps,
            "unit": C.space(1).names[C.unit], "filtration": filt}


def morphism_fragment(name: str, F: InfinityMorphism, source: str, target: str) -> Dict[str, Any]:
    return {"source": source, "target": target, "map": arity_map_to_json(F.components)}


# ---------------------------------------------------------------------------
# loading


@dataclass
class Manifest:
    cooperad: TruncatedCooperad
    max_arity: int
    seed: int
    complexes: Dict[str, ChainComplex] = field(default_factory=dict)
    structures: Dict[str, CobarAlgebra] = field(default_factory=dict)
    morphisms: Dict[str, InfinityMorphism] = field(default_factory=dict)
    contractions: Dict[str, Contraction] = field(default_factory=dict)
    one_cells: Dict[str, OneCell] = field(default_factory=dict)
    commands: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict)
    path: str = ""

    def structure_of_complex(self, complex_name: str) -> Optional[str]:
        for name, A in self.structures.items():
            if A.carrier is self.complexes.get(complex_name):
                return name
        return None

    def complex_name(self, c: ChainComplex) -> str:
        for name, x in self.complexes.items():
            if x is c:
                return name
        raise KeyError("complex not registered in the manifest")


def _need(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if not isinstance(obj, Mapping):
        raise ManifestError(f"{where}: expected an object")
    if key not in obj:
        raise ManifestError(f"{where}: missing field {key!r}")
    return obj[key]


def _lookup(table: Mapping[str, Any], name: Any, kind: str, where: str) -> Any:
    if not isinstance(name, str) or name not in table:
        raise ManifestError(f"{where}: unresolved {kind} name {name!r}")
    return table[name]


def _index(space: GradedSpace, name: Any, where: str) -> int:
    try:
        return space.index(name)
    except (KeyError, ValueError):
        raise ManifestError(f"{where}: unknown basis element {name!r}") from None


def _vector(obj: Any, space: GradedSpace, where: str) -> Dict[int, Fraction]:
    if not isinstance(obj, Mapping):
        raise ManifestError(f"{where}: expected {{basis name: coefficient}}")
    out: Dict[int, Fraction] = {}
    for name, c in obj.items():
        v = parse_scalar(c, where)
        if v:
            out[_index(space, name, where)] = v
    return out


def load_complex(obj: Any, name: str) -> ChainComplex:
    where = f"complex {name!r}"
    basis = _need(obj, "basis", where)
    try:
        pairs = [(str(b[0]), int(b[1])) for b in basis]
    except (TypeError, ValueError, IndexError):
        raise ManifestError(f"{where}: basis must be a list of [name, degree] pairs") from None
    if len({p[0] for p in pairs}) != len(pairs):
        raise ManifestError(f"{where}: basis names must be unique")
    space = GradedSpace(pairs)
    diff = obj.get("differential", {})
    cols = {_index(space, s, where): _vector(img, space, where) for s, img in diff.items()}
    try:
        return ChainComplex(space, GradedMap(space, space, 1, cols), name=name)
    except NotAChainComplex as exc:
        # the complex already carries its name in the message
        raise ManifestError(str(exc)) from None
    except CobarKitError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def load_graded_map(obj: Any, source: GradedSpace, target: GradedSpace, where: str) -> GradedMap:
    degree = int(_need(obj, "degree", where))
    cols = {_index(source, s, where): _vector(img, target, where) for s, img in obj.get("columns", {}).items()}
    try:
        return GradedMap(source, target, degree, cols)
    except NotAChainComplex as exc:
        # the complex already carries its name in the message
        raise ManifestError(str(exc)) from None
    except CobarKitError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def load_arity_map(obj: Any, C: TruncatedCooperad, source: ChainComplex, target: ChainComplex,
                   where: str) -> AritySupportedMap:
    degree = int(_need(obj, "degree", where))
    data: Dict[Tuple[int, Tuple[int, ...]], Dict[int, Fraction]] = {}
    for entry in obj.get("entries", []):
        try:
            gname, inputs, value = entry
        except (TypeError, ValueError):
            raise ManifestError(f"{where}: entries are [cooperad basis, [inputs], {{output: coeff}}]") from None
        n = len(inputs)
        if not 1 <= n <= C.N:
            raise ManifestError(f"{where}: arity {n} outside 1..{C.N}")
        try:
            g = C.space(n).index(gname)
        except (KeyError, ValueError):
            raise ManifestError(f"{where}: {gname!r} is not a basis element of C({n})") from None
        t = tuple(_index(source.space, a, where) for a in inputs)
        if list(t) != sorted(t):
            raise ManifestError(f"{where}: inputs {inputs} must be listed in basis order")
        vec = _vector(value, target.space, where)
        if (g, t) in data:
            raise ManifestError(f"{where}: duplicate entry for {gname} on {inputs}")
        data[(g, t)] = vec
    try:
        f = AritySupportedMap(C, source, target, degree, data)
    except DegreeMismatch as exc:
        raise ManifestError(f"{where}: {exc}") from None
    bad = f.equivariance_failures()
    if bad:
        raise ManifestError(f"{where}: value on {key_to_json(C, bad[0], source.space)} is not invariant "
                            f"under its stabilizer")
    return f


def load_cooperad(selector: Any, N: int) -> TruncatedCooperad:
    if isinstance(selector, str):
        try:
            return builtin(selector, N)
        except KeyError as exc:
            raise ManifestError(str(exc.args[0])) from None
    where = "cooperad"
    comps_obj = _need(selector, "components", where)
    comps = {}
    for n in range(1, N + 1):
        if str(n) not in comps_obj:
            raise ManifestError(f"{where}: component of arity {n} missing for maxArity {N}")
        comps[n] = load_complex(comps_obj[str(n)], f"C({n})")
    actions = {}
    for n in range(1, N + 1):
        gens = selector.get("actions", {}).get(str(n), [])
        if n >= 2 and len(gens) != n - 1:
            raise ManifestError(f"{where}: arity {n} needs {n - 1} adjacent transposition matrices")
        sp = comps[n].space
        actions[n] = [{_index(sp, c, where): _vector(img, sp, where) for c, img in gen.items()} for gen in gens]
    cocomps: Dict[Tuple[int, int, int], Dict[int, Dict[Tuple[int, int], Fraction]]] = {}
    for n in range(1, N + 1):
        for k in range(1, N + 2 - n):
            for i in range(1, n + 1):
                cocomps[(n, k, i)] = {}
    for row in selector.get("cocompositions", []):
        try:
            n, k, i, big, low, up, c = row
        except (TypeError, ValueError):
            raise ManifestError(f"{where}: cocomposition rows are [n, k, i, source, lower, upper, coeff]") from None
        if (n, k, i) not in cocomps:
            continue
        col = _index(comps[n + k - 1].space, big, where)
        key = (_index(comps[n].space, low, where), _index(comps[k].space, up, where))
        cocomps[(n, k, i)].setdefault(col, {})[key] = parse_scalar(c, where)
    unit = _index(comps[1].space, _need(selector, "unit", where), where)
    filt_obj = selector.get("filtration")
    if filt_obj is None:
        filt = {n: [0 if (n == 1 and j == unit) else n - 1 for j in range(comps[n].dim)] for n in comps}
    else:
        filt = {n: [int(x) for x in filt_obj[str(n)]] for n in comps}
    try:
        return TruncatedCooperad(str(selector.get("name", "explicit")), N, comps, actions, cocomps, unit, filt)
    except NotAChainComplex as exc:
        # the complex already carries its name in the message
        raise ManifestError(str(exc)) from None
    except CobarKitError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def _load_structure(obj: Any, name: str, m: Manifest) -> CobarAlgebra:
    where = f"structure {name!r}"
    cname = _need(obj, "complex", where)
    X = _lookup(m.complexes, cname, "complex", where)
    C = m.cooperad
    if "map" in obj:
        Q = load_arity_map(obj["map"], C, X, X, where)
    elif "operations" in obj:
        if not C.name.startswith("s^-1 coAs"):
            raise ManifestError(f"{where}: operations m_n are only meaningful for the cooperad 's^-1 coAs'")
        ops = {}
        for n_str, rows in obj["operations"].items():
            table = {}
            for row in rows:
                try:
                    inputs, value = row
                except (TypeError, ValueError):
                    raise ManifestError(f"{where}: operation rows are [[inputs], {{output: coeff}}]") from None
                t = tuple(_index(X.space, a, where) for a in inputs)
                if len(t) != int(n_str):
                    raise ManifestError(f"{where}: operation of arity {n_str} applied to {len(t)} inputs")
                table[t] = _vector(value, X.space, where)
            ops[int(n_str)] = (lambda tab: (lambda w: dict(tab.get(tuple(w), {}))))(table)
        try:
            Q = structure_from_ainfinity(C, X, ops)
        except DegreeMismatch as exc:
            raise ManifestError(f"{where}: {exc}") from None
    else:
        Q = None
    try:
        return CobarAlgebra(C, X, Q, name=name)
    except NotAChainComplex as exc:
        # the complex already carries its name in the message
        raise ManifestError(str(exc)) from None
    except CobarKitError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def _load_morphism(obj: Any, name: str, m: Manifest) -> InfinityMorphism:
    where = f"morphism {name!r}"
    A = _lookup(m.structures, _need(obj, "source", where), "structure", where)
    B = _lookup(m.structures, _need(obj, "target", where), "structure", where)
    try:
        if "linear" in obj:
            f = load_graded_map(obj["linear"], A.carrier.space, B.carrier.space, where)
            return InfinityMorphism.strict(A, B, f)
        F = load_arity_map(_need(obj, "map", where), m.cooperad, A.carrier, B.carrier, where)
        return InfinityMorphism(A, B, F, name=name)
    except CobarKitError as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(f"{where}: {exc}") from None


def _load_contraction(obj: Any, name: str, m: Manifest) -> Contraction:
    where = f"contraction {name!r}"
    try:
        if "from_complex" in obj:
            big = _lookup(m.complexes, obj["from_complex"], "complex", where)
            c = contraction_from_complex(big)
            small_name = obj.get("small_name", f"{name}.small")
            m.complexes.setdefault(small_name, c.small)
            return c
        big = _lookup(m.complexes, _need(obj, "big", where), "complex", where)
        small = _lookup(m.complexes, _need(obj, "small", where), "complex", where)
        i = load_graded_map(_need(obj, "include", where), small.space, big.space, where + " include")
        p = load_graded_map(_need(obj, "project", where), big.space, small.space, where + " project")
        h = load_graded_map(_need(obj, "homotopy", where), big.space, big.space, where + " homotopy")
        if obj.get("normalize", False):
            return normalize_contraction(big, small, i, p, h)
        return Contraction(big, small, i, p, h)
    except CobarKitError as exc:
        if isinstance(exc, ManifestError):
            raise
        raise ManifestError(f"{where}: {exc}") from None


def _load_one_cell(obj: Any, name: str, m: Manifest) -> OneCell:
    where = f"one-cell {name!r}"
    A = _lookup(m.structures, _need(obj, "source", where), "structure", where)
    B = _lookup(m.structures, _need(obj, "target", where), "structure", where)
    L = ConvAlgebra(m.cooperad, A, B)
    forms = []
    for part in ("zero_forms", "one_forms"):
        table = {}
        for power, fobj in obj.get(part, {}).items():
            table[int(power)] = load_arity_map(fobj, m.cooperad, A.carrier, B.carrier, f"{where} {part} t^{power}")
        forms.append(table)
    try:
        return OneCell(LineElement(L, 0, forms[0], forms[1]))
    except NotAChainComplex as exc:
        # the complex already carries its name in the message
        raise ManifestError(str(exc)) from None
    except CobarKitError as exc:
        raise ManifestError(f"{where}: {exc}") from None


def build_manifest(doc: Mapping[str, Any], max_arity: Optional[int] = None, seed: Optional[int] = None,
                   allow_large_arity: bool = False, path: str = "") -> Manifest:
    """Validate a parsed manifest document and build its object graph."""
    if not isinstance(doc, Mapping):
        raise ManifestError("manifest must be a JSON object")
    N = int(max_arity if max_arity is not None else doc.get("max_arity", 4))
    if N < 1:
        raise ManifestError("maxArity must be at least 1")
    if N > DEFAULT_ARITY_LIMIT and not allow_large_arity:
        raise ManifestError(f"maxArity {N} exceeds {DEFAULT_ARITY_LIMIT}; pass --allow-large-arity to proceed")
    seed = int(seed if seed is not None else doc.get("seed", 0))
    C = load_cooperad(_need(doc, "cooperad", "manifest"), N)
    m = Manifest(C, N, seed, raw=dict(doc), path=path)
    for name, obj in doc.get("complexes", {}).items():
        m.complexes[name] = load_complex(obj, name)
    for name, obj in doc.get("structures", {}).items():
        m.structures[name] = _load_structure(obj, name, m)
    for name, obj in doc.get("morphisms", {}).items():
        m.morphisms[name] = _load_morphism(obj, name, m)
    for name, obj in doc.get("contractions", {}).items():
        m.contractions[name] = _load_contraction(obj, name, m)
    for name, obj in doc.get("one_cells", {}).items():
        m.one_cells[name] = _load_one_cell(obj, name, m)
    commands = doc.get("commands", {})
    if not isinstance(commands, Mapping):
        raise ManifestError("commands must be an object keyed by command name")
    m.commands = {k: dict(v) for k, v in commands.items()}
    return m


def load_manifest(path: str, max_arity: Optional[int] = None, seed: Optional[int] = None,
                  allow_large_arity: bool = False) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return build_manifest(doc, max_arity, seed, allow_large_arity, path)


def dumps(doc: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
