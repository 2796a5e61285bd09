"""Arity-truncated reduced cooperads and the cofree coalgebras they generate.

Conventions
-----------
* ``C(n)`` carries a right action of S_n, stored on adjacent transpositions.
* A pure tensor ``(γ; v_1..v_n)`` of the cofree coalgebra is identified with
  ``ε·(γ^σ; v_σ(1)..v_σ(n))`` where ε is the Koszul sign of that reordering.
* The elementary cocomposition Δ_{n,k,i}: C(n+k−1) → C(n)⊗C(k) splits off
  the leaves i..i+k−1 (the upper vertex) from the lower vertex.
* ``C(1)`` has a designated coaugmentation element called the unit; the
  counit is the coefficient of the unit.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from math import factorial
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from .errors import ArityMismatch, InvalidCooperad, TruncationExceeded
from .exactlin import (ONE, ChainComplex, GradedMap, GradedSpace, Vec, tensor_spaces, vec_add_term, vec_axpy)
from .symcalc import (Permutation, PlantedTree, TreeSchedule, elementary_tree, ordered_set_partitions,
                      reorder_sign, set_partitions)

TensorVec = Dict[Tuple[int, ...], Any]


def _parity(x: int) -> int:
    return x & 1


class TruncatedCooperad:
    """A reduced coaugmented dg cooperad known up to arity N.

    Parameters
    ----------
    components:
        ``{n: ChainComplex}`` for 1 ≤ n ≤ N.
    generator_actions:
        ``{n: [M_1, ..., M_{n-1}]}`` where ``M_j[col]`` is the sparse image
        of basis vector ``col`` under the right action of (j j+1).
    cocompositions:
        ``{(n, k, i): {col: {(a, b): coeff}}}`` for every n+k−1 ≤ N.
    unit:
        index of the coaugmentation element in C(1).
    filtration:
        ``{n: [level per basis index]}``; the level of a basis vector is the
        smallest m with the vector in F^m.  The unit is ignored.
    """

    def __init__(self, name: str, max_arity: int, components: Mapping[int, ChainComplex],
                 generator_actions: Mapping[int, Sequence[Mapping[int, Mapping[int, Any]]]],
                 cocompositions: Mapping[Tuple[int, int, int], Mapping[int, Mapping[Tuple[int, int], Any]]],
                 unit: int, filtration: Mapping[int, Sequence[int]], validate: bool = True):
        if max_arity < 1:
            raise InvalidCooperad("maxArity must be at least 1")
        self.name = name
        self.N = int(max_arity)
        self.components = {n: components[n] for n in range(1, self.N + 1)}
        if 0 in components:
            raise InvalidCooperad("reduced cooperads have no arity-0 component")
        self.generator_actions = {n: [dict(m) for m in generator_actions.get(n, [])]
                                  for n in range(1, self.N + 1)}
        self.cocompositions = {key: {c: dict(v) for c, v in table.items()}
                               for key, table in cocompositions.items()}
        self.unit = int(unit)
        self.filtration = {n: list(filtration[n]) for n in range(1, self.N + 1)}
        self._act_cache: Dict[Tuple[int, ...], Dict[int, Vec]] = {}
        self._tree_cache: Dict[Tuple[tuple, int], TensorVec] = {}
        self._fork_cache: Dict[Tuple[Tuple[int, ...], int], List[Tuple[Any, Tuple[int, ...]]]] = {}
        if validate:
            problems = self.validation_failures()
            if problems:
                raise InvalidCooperad(f"cooperad {name!r}: " + "; ".join(problems[:5]))

    # ------------------------------------------------------------------
    # basic data

    def space(self, n: int) -> GradedSpace:
        if n < 1:
            raise ArityMismatch("reduced cooperads have no arity-0 component")
        if n > self.N:
            raise TruncationExceeded(f"arity {n} exceeds truncation {self.N}")
        return self.components[n].space

    def dim(self, n: int) -> int:
        return self.space(n).dim

    def degree(self, n: int, idx: int) -> int:
        return self.components[n].space.degrees[idx]

    def counit(self, idx: int) -> Fraction:
        return ONE if idx == self.unit else Fraction(0)

    def reduced_indices(self, n: int) -> List[int]:
        """Basis of the coaugmentation coideal C∘(n)."""
        idx = list(range(self.dim(n)))
        return [i for i in idx if not (n == 1 and i == self.unit)]

    def filtration_level(self, n: int, idx: int) -> int:
        return self.filtration[n][idx]

    def d(self, n: int, idx: int) -> Vec:
        return self.components[n].differential.column(idx)

    # ------------------------------------------------------------------
    # symmetric group actions

    def act(self, sigma: Permutation) -> Dict[int, Vec]:
        """Matrix of γ ↦ γ^σ on C(n) as {col: sparse image}."""
        key = sigma.images
        cached = self._act_cache.get(key)
        if cached is not None:
            return cached
        n = sigma.size
        dim = self.dim(n)
        current: Dict[int, Vec] = {i: {i: ONE} for i in range(dim)}
        gens = self.generator_actions[n]
        for j in sigma.adjacent_word():
            gen = gens[j - 1]
            nxt: Dict[int, Vec] = {}
            for col, vec in current.items():
                out: Vec = {}
                for r, c in vec.items():
                    vec_axpy(out, gen.get(r, {}), c)
                nxt[col] = out
            current = nxt
        self._act_cache[key] = current
        return current

    def act_vec(self, sigma: Permutation, vec: Mapping[int, Any]) -> Vec:
        mat = self.act(sigma)
        out: Vec = {}
        for i, c in vec.items():
            vec_axpy(out, mat[i], c)
        return out

    # ------------------------------------------------------------------
    # cocompositions

    def elementary(self, n: int, k: int, i: int, idx: int) -> Dict[Tuple[int, int], Any]:
        if n + k - 1 > self.N:
            raise TruncationExceeded(f"cocomposition into arities ({n},{k}) exceeds {self.N}")
        return self.cocompositions[(n, k, i)].get(idx, {})

    def elementary_map(self, n: int, k: int, i: int) -> GradedMap:
        src = self.space(n + k - 1)
        tgt = tensor_spaces(self.space(n), self.space(k))
        kdim = self.dim(k)
        cols = {c: {a * kdim + b: v for (a, b), v in table.items()}
                for c, table in self.cocompositions[(n, k, i)].items()}
        return GradedMap(src, tgt, 0, cols)

    def tree(self, t: TreeSchedule, idx: int) -> TensorVec:
        """Δ_t(basis idx) as {(c_v for v in canonical vertex order): coeff}."""
        tree = t.tree
        labels = tree.leaves()
        n = len(labels)
        if n > self.N:
            raise TruncationExceeded(f"tree with {n} leaves exceeds truncation {self.N}")
        planar = tree.planar()
        if labels == list(range(1, n + 1)):
            return self._planar_tree(planar.shape, idx)
        sigma = Permutation(tuple(labels))
        out: TensorVec = {}
        for j, c in self.act(sigma)[idx].items():
            for key, v in self._planar_tree(planar.shape, j).items():
                vec_add_term(out, key, c * v)
        return out

    def _planar_tree(self, shape: tuple, idx: int) -> TensorVec:
        cache_key = (shape, idx)
        hit = self._tree_cache.get(cache_key)
        if hit is not None:
            return hit
        child_positions = [p for p, ch in enumerate(shape) if isinstance(ch, tuple)]
        if not child_positions:
            result: TensorVec = {(idx,): ONE}
        else:
            p = child_positions[-1]
            sub = shape[p]
            k = _count_leaves(sub)
            # slot of the collapsed subtree among the leaves of the remaining tree
            slot = sum(_count_leaves(ch) if isinstance(ch, tuple) else 1 for ch in shape[:p]) + 1
            n_rest = _count_leaves(shape) - k + 1
            rest_shape = _renumber(shape[:p] + (0,) + shape[p + 1:])
            sub_shape = _renumber(sub)
            result = {}
            for (a, b), c in self.elementary(n_rest, k, slot, idx).items():
                left = self._planar_tree(rest_shape, a)
                right = self._planar_tree(sub_shape, b)
                for lk, lv in left.items():
                    for rk, rv in right.items():
                        vec_add_term(result, lk + rk, c * lv * rv)
        self._tree_cache[cache_key] = result
        return result

    def fork(self, ks: Tuple[int, ...], idx: int) -> List[Tuple[Any, Tuple[int, ...]]]:
        """Δ along the fork tree with blocks ks, as a list of (coeff, (c0, c1..cm))."""
        key = (ks, idx)
        hit = self._fork_cache.get(key)
        if hit is None:
            shape = []
            start = 1
            for k in ks:
                shape.append(tuple(range(start, start + k)))
                start += k
            hit = list((v, k_) for k_, v in self._planar_tree(tuple(shape), idx).items())
            self._fork_cache[key] = hit
        return hit

    # ------------------------------------------------------------------
    # validation

    def validation_failures(self) -> List[str]:
        fails: List[str] = []
        if not (0 <= self.unit < self.dim(1)) or self.degree(1, self.unit) != 0:
            fails.append("unit must be a degree-0 basis vector of C(1)")
        fails.extend(self._check_actions())
        fails.extend(self._check_counit())
        fails.extend(self._check_differentials())
        fails.extend(self._check_coassociativity())
        fails.extend(self._check_equivariance())
        fails.extend(self._check_filtration())
        return fails

    def _check_actions(self) -> List[str]:
        fails = []
        for n in range(1, self.N + 1):
            gens = self.generator_actions[n]
            if len(gens) != max(n - 1, 0):
                fails.append(f"arity {n}: expected {n - 1} generator actions")
                continue
            sp = self.space(n)
            for j, gen in enumerate(gens, start=1):
                for col in range(sp.dim):
                    img = gen.get(col, {})
                    if any(sp.degrees[r] != sp.degrees[col] for r in img):
                        fails.append(f"arity {n}: action of s{j} is not degree-preserving")
                    back: Vec = {}
                    for r, c in img.items():
                        vec_axpy(back, gen.get(r, {}), c)
                    if back != {col: ONE}:
                        fails.append(f"arity {n}: s{j} does not square to the identity")
            # braid relations
            for j in range(1, n - 1):
                a = Permutation.transposition(n, j, j + 1)
                b = Permutation.transposition(n, j + 1, j + 2)
                w1 = self._apply_word(n, [j, j + 1, j])
                w2 = self._apply_word(n, [j + 1, j, j + 1])
                if w1 != w2:
                    fails.append(f"arity {n}: braid relation fails at {j}")
                del a, b
            for j in range(1, n - 1):
                for l in range(j + 2, n):
                    if self._apply_word(n, [j, l]) != self._apply_word(n, [l, j]):
                        fails.append(f"arity {n}: s{j}, s{l} do not commute")
        return fails

    def _apply_word(self, n: int, word: Sequence[int]) -> Dict[int, Vec]:
        gens = self.generator_actions[n]
        cur: Dict[int, Vec] = {i: {i: ONE} for i in range(self.dim(n))}
        for j in word:
            nxt = {}
            for col, vec in cur.items():
                out: Vec = {}
                for r, c in vec.items():
                    vec_axpy(out, gens[j - 1].get(r, {}), c)
                nxt[col] = out
            cur = nxt
        return cur

    def _check_counit(self) -> List[str]:
        fails = []
        for n in range(1, self.N + 1):
            for idx in range(self.dim(n)):
                # counit on the lower vertex of Δ_{1,n,1} and on the upper vertex of Δ_{n,1,i}
                low: Vec = {}
                for (a, b), c in self.elementary(1, n, 1, idx).items():
                    if a == self.unit:
                        vec_add_term(low, b, c)
                if low != {idx: ONE}:
                    fails.append(f"counit fails on the root side at arity {n}")
                for i in range(1, n + 1):
                    up: Vec = {}
                    for (a, b), c in self.elementary(n, 1, i, idx).items():
                        if b == self.unit:
                            vec_add_term(up, a, c)
                    if up != {idx: ONE}:
                        fails.append(f"counit fails in slot {i} at arity {n}")
        return fails

    def _check_differentials(self) -> List[str]:
        fails = []
        for n in range(1, self.N + 1):
            dn = self.components[n].differential
            for j, gen in enumerate(self.generator_actions[n], start=1):
                for col in range(self.dim(n)):
                    lhs: Vec = {}
                    for r, c in gen.get(col, {}).items():
                        vec_axpy(lhs, dn.column(r), c)
                    rhs: Vec = {}
                    for r, c in dn.column(col).items():
                        vec_axpy(rhs, gen.get(r, {}), c)
                    if lhs != rhs:
                        fails.append(f"arity {n}: differential does not commute with s{j}")
        for (n, k, i), table in self.cocompositions.items():
            src = n + k - 1
            for col in range(self.dim(src)):
                lhs: TensorVec = {}
                for r, c in self.d(src, col).items():
                    for key, v in table.get(r, {}).items():
                        vec_add_term(lhs, key, c * v)
                rhs: TensorVec = {}
                for (a, b), c in table.get(col, {}).items():
                    for r, v in self.d(n, a).items():
                        vec_add_term(rhs, (r, b), c * v)
                    sign = -1 if _parity(self.degree(n, a)) else 1
                    for r, v in self.d(k, b).items():
                        vec_add_term(rhs, (a, r), sign * c * v)
                if lhs != rhs:
                    fails.append(f"differential does not commute with Δ_({n},{k},{i})")
                    break
        return fails

    def _check_coassociativity(self) -> List[str]:
        fails = []
        N = self.N
        for n in range(1, N + 1):
            for k in range(1, N + 1):
                for l in range(1, N + 1):
                    total = n + k + l - 2
                    if total > N:
                        continue
                    for idx in range(self.dim(total)):
                        # nested: l grafted into slot j of k, which sits in slot i of n
                        for i in range(1, n + 1):
                            for j in range(1, k + 1):
                                a = self._nested_a(n, k, l, i, j, idx)
                                b = self._nested_b(n, k, l, i, j, idx)
                                if a != b:
                                    fails.append(f"sequential coassociativity fails at ({n},{k},{l},{i},{j})")
                        # parallel: k in slot i, l in slot j > i of n
                        for i in range(1, n + 1):
                            for j in range(i + 1, n + 1):
                                a = self._parallel_a(n, k, l, i, j, idx)
                                b = self._parallel_b(n, k, l, i, j, idx)
                                if a != b:
                                    fails.append(f"parallel coassociativity fails at ({n},{k},{l},{i},{j})")
        return fails

    def _nested_a(self, n, k, l, i, j, idx) -> TensorVec:
        out: TensorVec = {}
        for (a, bc), c in self.elementary(n, k + l - 1, i, idx).items():
            for (b, cc), v in self.elementary(k, l, j, bc).items():
                vec_add_term(out, (a, b, cc), c * v)
        return out

    def _nested_b(self, n, k, l, i, j, idx) -> TensorVec:
        out: TensorVec = {}
        for (ab, cc), c in self.elementary(n + k - 1, l, i + j - 1, idx).items():
            for (a, b), v in self.elementary(n, k, i, ab).items():
                vec_add_term(out, (a, b, cc), c * v)
        return out

    def _parallel_a(self, n, k, l, i, j, idx) -> TensorVec:
        # split the right subtree first, then the left one
        out: TensorVec = {}
        for (ab, cc), c in self.elementary(n + k - 1, l, j + k - 1, idx).items():
            for (a, b), v in self.elementary(n, k, i, ab).items():
                vec_add_term(out, (a, b, cc), c * v)
        return out

    def _parallel_b(self, n, k, l, i, j, idx) -> TensorVec:
        out: TensorVec = {}
        for (ac, b), c in self.elementary(n + l - 1, k, i, idx).items():
            for (a, cc), v in self.elementary(n, l, j, ac).items():
                sign = -1 if _parity(self.degree(k, b)) and _parity(self.degree(l, cc)) else 1
                vec_add_term(out, (a, b, cc), sign * c * v)
        return out

    def _check_equivariance(self) -> List[str]:
        """Reordering the inputs of either vertex of a two-vertex tree acts on that factor."""
        fails = []
        for (n, k, i) in sorted(self.cocompositions):
            base = elementary_tree(n, k, i).tree.shape
            upper_pos = i - 1
            for rho_low in permutations(range(n)):
                for rho_up in permutations(range(k)):
                    upper = tuple(base[upper_pos][q] for q in rho_up)
                    children = [upper if p == upper_pos else base[p] for p in range(n)]
                    shape = tuple(children[q] for q in rho_low)
                    t = TreeSchedule.of(PlantedTree(shape))
                    low_sigma = Permutation(tuple(q + 1 for q in rho_low))
                    up_sigma = Permutation(tuple(q + 1 for q in rho_up))
                    low_act = self.act(low_sigma)
                    up_act = self.act(up_sigma)
                    for idx in range(self.dim(n + k - 1)):
                        expected: TensorVec = {}
                        for (a, b), c in self.elementary(n, k, i, idx).items():
                            for a2, va in low_act[a].items():
                                for b2, vb in up_act[b].items():
                                    vec_add_term(expected, (a2, b2), c * va * vb)
                        if self.tree(t, idx) != expected:
                            fails.append(f"Δ_({n},{k},{i}) is not equivariant")
                            break
                    else:
                        continue
                    break
        return fails

    def _check_filtration(self) -> List[str]:
        fails = []
        for n in range(1, self.N + 1):
            if len(self.filtration[n]) != self.dim(n):
                fails.append(f"arity {n}: filtration must list one level per basis vector")
                return fails
        for (n, k, i), table in self.cocompositions.items():
            src = n + k - 1
            for col, img in table.items():
                if src == 1 and col == self.unit:
                    continue
                level = self.filtration[src][col]
                for (a, b), c in img.items():
                    la = 0 if (n == 1 and a == self.unit) else self.filtration[n][a]
                    lb = 0 if (k == 1 and b == self.unit) else self.filtration[k][b]
                    if la + lb > level:
                        fails.append(f"Δ_({n},{k},{i}) does not respect the filtration")
                        break
        return fails

    def __repr__(self) -> str:
        return f"TruncatedCooperad({self.name!r}, N={self.N})"


def _count_leaves(node: Any) -> int:
    if isinstance(node, int):
        return 1
    return sum(_count_leaves(c) for c in node)


def _renumber(shape: tuple) -> tuple:
    counter = iter(range(1, 10 ** 6))

    def walk(node: Any) -> Any:
        if isinstance(node, int):
            return next(counter)
        return tuple(walk(c) for c in node)

    return walk(shape)


def tree_cocomposition(C: TruncatedCooperad, t: TreeSchedule) -> GradedMap:
    """Δ_t: C(n) → C(r_1)⊗...⊗C(r_k) along the canonical vertex order."""
    n = t.n_leaves
    if n > C.N:
        raise TruncationExceeded(f"tree with {n} leaves exceeds truncation {C.N}")
    spaces = [C.space(r) for r in t.arities]
    tgt = tensor_spaces(*spaces)
    dims = [sp.dim for sp in spaces]

    def flat(key: Tuple[int, ...]) -> int:
        pos = 0
        for d, k in zip(dims, key):
            pos = pos * d + k
        return pos

    cols = {}
    for idx in range(C.dim(n)):
        cols[idx] = {flat(key): v for key, v in C.tree(t, idx).items()}
    return GradedMap(C.space(n), tgt, 0, cols)


# ---------------------------------------------------------------------------
# built-ins


def default_filtration(C_dims: Mapping[int, int], unit: int) -> Dict[int, List[int]]:
    """F^m C∘(n) = C∘(n) iff m ≥ n − 1."""
    return {n: [0 if (n == 1 and i == unit) else n - 1 for i in range(d)] for n, d in C_dims.items()}


def builtin_cocom(N: int) -> TruncatedCooperad:
    comps = {n: ChainComplex(GradedSpace([(f"com{n}", 0)]), name=f"coCom({n})") for n in range(1, N + 1)}
    actions = {n: [{0: {0: ONE}} for _ in range(n - 1)] for n in range(1, N + 1)}
    cocomps = {}
    for n in range(1, N + 1):
        for k in range(1, N + 2 - n):
            for i in range(1, n + 1):
                cocomps[(n, k, i)] = {0: {(0, 0): ONE}}
    filt = default_filtration({n: 1 for n in comps}, 0)
    return TruncatedCooperad("coCom", N, comps, actions, cocomps, unit=0, filtration=filt)


def _as_name(word: Tuple[int, ...]) -> str:
    return "as[" + ",".join(map(str, word)) + "]"


def builtin_coas(N: int) -> TruncatedCooperad:
    """Linear dual of As: basis δ_w dual to the monomial x_{w(1)}⋯x_{w(n)}."""
    words = {n: list(permutations(range(1, n + 1))) for n in range(1, N + 1)}
    index = {n: {w: i for i, w in enumerate(ws)} for n, ws in words.items()}
    comps = {n: ChainComplex(GradedSpace([(_as_name(w), 0) for w in ws]), name=f"coAs({n})")
             for n, ws in words.items()}
    actions: Dict[int, List[Dict[int, Vec]]] = {}
    for n, ws in words.items():
        gens = []
        for j in range(1, n):
            swap = {j: j + 1, j + 1: j}
            gens.append({i: {index[n][tuple(swap.get(x, x) for x in w)]: ONE} for i, w in enumerate(ws)})
        actions[n] = gens
    cocomps: Dict[Tuple[int, int, int], Dict[int, Dict[Tuple[int, int], Any]]] = {}
    for n in range(1, N + 1):
        for k in range(1, N + 2 - n):
            for i in range(1, n + 1):
                table = {}
                for col, w in enumerate(words[n + k - 1]):
                    split = _coas_split(w, k, i)
                    if split is not None:
                        lower, upper = split
                        table[col] = {(index[n][lower], index[k][upper]): ONE}
                cocomps[(n, k, i)] = table
    filt = default_filtration({n: len(ws) for n, ws in words.items()}, 0)
    return TruncatedCooperad("coAs", N, comps, actions, cocomps, unit=0, filtration=filt)


def _coas_split(w: Tuple[int, ...], k: int, i: int) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Inverse of substituting a k-letter monomial for the letter i."""
    block = set(range(i, i + k))
    pos = [p for p, x in enumerate(w) if x in block]
    if pos[-1] - pos[0] != k - 1:
        return None
    upper = tuple(w[p] - (i - 1) for p in pos)
    lower: List[int] = []
    for p, x in enumerate(w):
        if x in block:
            if p == pos[0]:
                lower.append(i)
        elif x > i + k - 1:
            lower.append(x - (k - 1))
        else:
            lower.append(x)
    return tuple(lower), upper


def suspension_sign(n: int, k: int, i: int) -> int:
    """Structure sign of the one-dimensional suspension collection."""
    return -1 if ((k - 1) * (i - 1)) % 2 else 1


def suspend(C: TruncatedCooperad, direction: int) -> TruncatedCooperad:
    """Arity-wise tensor with a line in degree direction·(n−1) carrying the sign representation."""
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    tag = "s" if direction > 0 else "s^-1"
    comps = {}
    for n in range(1, C.N + 1):
        sp = C.space(n)
        shift = direction * (n - 1)
        new_space = GradedSpace([(f"{tag}({name})" if n > 1 else name, d + shift)
                                 for name, d in sp.basis()])
        sgn = -1 if _parity(shift) else 1
        dcols = {j: {r: sgn * v for r, v in col.items()} for j, col in C.components[n].differential.columns.items()}
        comps[n] = ChainComplex(new_space, GradedMap(new_space, new_space, 1, dcols), name=f"{tag} {C.name}({n})")
    actions = {n: [{col: {r: -v for r, v in img.items()} for col, img in gen.items()}
                   for gen in C.generator_actions[n]] for n in range(1, C.N + 1)}
    cocomps = {}
    for (n, k, i), table in C.cocompositions.items():
        eps = suspension_sign(n, k, i)
        upper_shift = _parity(k - 1)
        new_table = {}
        for col, img in table.items():
            out = {}
            for (a, b), v in img.items():
                koszul = -1 if upper_shift and _parity(C.degree(n, a)) else 1
                out[(a, b)] = eps * koszul * v
            new_table[col] = out
        cocomps[(n, k, i)] = new_table
    name = f"{tag} {C.name}"
    if C.name.startswith("s^-1 ") and direction > 0:
        name = C.name[len("s^-1 "):] + " (resuspended)"
    return TruncatedCooperad(name, C.N, comps, actions, cocomps, unit=C.unit, filtration=C.filtration)


def builtin(name: str, N: int) -> TruncatedCooperad:
    """Look up a built-in cooperad by its selector name."""
    key = " ".join(name.split())
    table = {
        "coCom": lambda: builtin_cocom(N),
        "coAs": lambda: builtin_coas(N),
        "s^-1 coCom": lambda: suspend(builtin_cocom(N), -1),
        "s^-1 coAs": lambda: suspend(builtin_coas(N), -1),
    }
    if key not in table:
        raise KeyError(f"unknown built-in cooperad {name!r}; choose from {sorted(table)}")
    return table[key]()


# ---------------------------------------------------------------------------
# the cofree coalgebra C(A)

Key = Tuple[int, Tuple[int, ...]]


class CofreeSpace:
    """Bookkeeping for C(A) = ⊕_{n≤N} (C(n)⊗A^{⊗n})_{S_n}.

    A key ``(γ, t)`` denotes the class of the pure tensor (γ; a_t1..a_tn).
    Normal keys have ``t`` sorted.
    """

    def __init__(self, C: TruncatedCooperad, carrier: ChainComplex, max_arity: Optional[int] = None):
        self.C = C
        self.carrier = carrier
        self.N = C.N if max_arity is None else min(int(max_arity), C.N)
        self.adeg = carrier.space.degrees
        self._keys: Dict[int, List[Key]] = {}
        self._stab: Dict[Tuple[int, ...], List[Tuple[Permutation, int]]] = {}
        self._norm: Dict[Tuple[int, Tuple[int, ...]], Dict[Key, Any]] = {}

    def key_degree(self, key: Key) -> int:
        gamma, t = key
        return self.C.degree(len(t), gamma) + sum(self.adeg[a] for a in t)

    def tuples(self, n: int) -> List[Tuple[int, ...]]:
        return list(combinations_with_replacement(range(self.carrier.dim), n))

    def keys(self, n: int) -> List[Key]:
        hit = self._keys.get(n)
        if hit is None:
            hit = [(g, t) for t in self.tuples(n) for g in range(self.C.dim(n))]
            self._keys[n] = hit
        return hit

    def all_keys(self, min_arity: int = 1) -> List[Key]:
        out: List[Key] = []
        for n in range(min_arity, self.N + 1):
            out.extend(self.keys(n))
        return out

    def is_unit_key(self, key: Key) -> bool:
        return len(key[1]) == 1 and key[0] == self.C.unit

    def sort_term(self, t: Sequence[int]) -> Tuple[int, Optional[Permutation], Tuple[int, ...]]:
        """(sign, σ, sorted t) with (γ; t) = sign·(γ^σ; sorted t); σ is None if already sorted."""
        n = len(t)
        if all(t[p] <= t[p + 1] for p in range(n - 1)):
            return 1, None, tuple(t)
        order = sorted(range(n), key=lambda p: t[p])
        sign = reorder_sign(order, [self.adeg[a] for a in t])
        sigma = Permutation(tuple(p + 1 for p in order))
        return sign, sigma, tuple(t[p] for p in order)

    def normalize_terms(self, gamma_vec: Mapping[int, Any], t: Sequence[int]) -> Dict[Key, Any]:
        """Rewrite Σ c_γ (γ; t) on sorted keys (no stabilizer averaging)."""
        sign, sigma, st = self.sort_term(t)
        out: Dict[Key, Any] = {}
        if sigma is None:
            for g, c in gamma_vec.items():
                vec_add_term(out, (g, st), c)
            return out
        mat = self.C.act(sigma)
        for g, c in gamma_vec.items():
            for g2, v in mat[g].items():
                vec_add_term(out, (g2, st), sign * c * v)
        return out

    def normalize_key(self, gamma: int, t: Tuple[int, ...]) -> Dict[Key, Any]:
        """Cached :meth:`normalize_terms` for a single basis element of C(n)."""
        key = (gamma, t)
        hit = self._norm.get(key)
        if hit is None:
            hit = self.normalize_terms({gamma: ONE}, t)
            self._norm[key] = hit
        return hit

    def normalize_raw(self, raw: Mapping[Key, Any]) -> Dict[Key, Any]:
        """Rewrite {(γ, unsorted t): c} on sorted keys."""
        out: Dict[Key, Any] = {}
        for (g, t), c in raw.items():
            if not c:
                continue
            for key, v in self.normalize_key(g, t).items():
                vec_add_term(out, key, v * c)
        return out

    def stabilizer(self, t: Tuple[int, ...]) -> List[Tuple[Permutation, int]]:
        """Permutations fixing the sorted tuple t, with their Koszul signs."""
        hit = self._stab.get(t)
        if hit is not None:
            return hit
        n = len(t)
        runs: List[List[int]] = []
        for p in range(n):
            if p and t[p] == t[p - 1]:
                runs[-1].append(p)
            else:
                runs.append([p])
        perms: List[List[int]] = [list(range(n))]
        for run in runs:
            if len(run) < 2:
                continue
            new = []
            for base in perms:
                for arr in permutations(run):
                    b = list(base)
                    for src, dst in zip(run, arr):
                        b[src] = dst
                    new.append(b)
            perms = new
        out = []
        degs = [self.adeg[a] for a in t]
        for order in perms:
            sigma = Permutation(tuple(p + 1 for p in order))
            out.append((sigma, reorder_sign(order, degs)))
        self._stab[t] = out
        return out

    def average(self, data: Mapping[Key, Any]) -> Dict[Key, Any]:
        """Project sorted-key data onto the canonical (stabilizer-averaged) form."""
        out: Dict[Key, Any] = {}
        for (g, t), c in data.items():
            stab = self.stabilizer(t)
            if len(stab) == 1:
                vec_add_term(out, (g, t), c)
                continue
            w = Fraction(1, len(stab))
            for sigma, sign in stab:
                for g2, v in self.C.act(sigma)[g].items():
                    vec_add_term(out, (g2, t), w * sign * c * v)
        return out


class CofreeElement:
    """An element of C(A) in canonical normal form."""

    __slots__ = ("space", "data")

    def __init__(self, space: CofreeSpace, terms: Mapping[Key, Any] = (), normalized: bool = False):
        self.space = space
        if normalized:
            self.data = {k: v for k, v in dict(terms).items() if v}
        else:
            sorted_data: Dict[Key, Any] = {}
            for (g, t), c in dict(terms).items():
                for key, v in space.normalize_terms({g: c}, t).items():
                    vec_add_term(sorted_data, key, v)
            self.data = space.average(sorted_data)
        for (g, t) in self.data:
            if len(t) > space.N:
                raise TruncationExceeded(f"arity {len(t)} exceeds truncation {space.N}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CofreeElement) and self.data == other.data

    def __add__(self, other: "CofreeElement") -> "CofreeElement":
        d = dict(self.data)
        vec_axpy(d, other.data)
        return CofreeElement(self.space, d, normalized=True)

    def scale(self, c: Any) -> "CofreeElement":
        return CofreeElement(self.space, {k: c * v for k, v in self.data.items()}, normalized=True)

    def is_zero(self) -> bool:
        return not self.data

    def arity_part(self, n: int) -> "CofreeElement":
        return CofreeElement(self.space, {k: v for k, v in self.data.items() if len(k[1]) == n}, normalized=True)

    def __repr__(self) -> str:
        return f"CofreeElement({len(self.data)} terms)"


def delta_terms(space: CofreeSpace, m: int, gamma: int, t: Sequence[int],
                unordered: bool = False) -> Iterator[Tuple[Any, int, List[Key], List[int]]]:
    """Terms of the m-th comultiplication of the pure tensor (γ; a_t).

    Yields ``(coeff, c0, [(c_j, t_j)], [deg X_j])``.  With ``unordered`` the
    blocks run over set partitions ordered by their minima (the coinvariant
    form, no 1/m! needed); otherwise over all ordered partitions, which
    lands in S_m-invariants.
    """
    C = space.C
    n = len(t)
    if m < 1 or m > n:
        return
    adeg = [space.adeg[a] for a in t]
    parts = set_partitions(n, m) if unordered else ordered_set_partitions(n, m)
    for blocks in parts:
        order = [p for b in blocks for p in b]
        sign_v = reorder_sign(order, adeg)
        ks = tuple(len(b) for b in blocks)
        sigma = Permutation(tuple(p + 1 for p in order))
        if sigma.is_identity():
            gvec = {gamma: ONE}
        else:
            gvec = C.act(sigma)[gamma]
        block_t = [tuple(t[p] for p in b) for b in blocks]
        block_adeg = [sum(adeg[p] for p in b) for b in blocks]
        for g2, cg in gvec.items():
            for cv, cs in C.fork(ks, g2):
                coeff = sign_v * cg * cv
                parity = 0
                passed = 0
                keys = []
                degs = []
                for j in range(m):
                    cj = cs[j + 1]
                    dj = C.degree(ks[j], cj)
                    parity ^= (dj & passed & 1)
                    passed += block_adeg[j]
                    keys.append((cj, block_t[j]))
                    degs.append(dj + block_adeg[j])
                if parity:
                    coeff = -coeff
                yield coeff, cs[0], keys, degs


def cofree_comultiplication(C: TruncatedCooperad, A: ChainComplex, m: int, X: CofreeElement,
                            unordered: bool = False) -> Dict[Tuple[int, Tuple[Key, ...]], Any]:
    """Δ_m(X) as {(c0, (normal key_1, ..., key_m)): coeff}.

    Each tensor factor is rewritten in sorted normal form, so the output
    is canonical up to stabilizer averaging within factors.
    """
    space = X.space
    if m > space.N:
        raise TruncationExceeded(f"m = {m} exceeds truncation {space.N}")
    out: Dict[Tuple[int, Tuple[Key, ...]], Any] = {}
    for (g, t), c in X.data.items():
        for coeff, c0, keys, _ in delta_terms(space, m, g, t, unordered=unordered):
            factors = [space.average(space.normalize_key(cj, tj)) for cj, tj in keys]
            _accumulate_product(out, c0, factors, c * coeff)
    return out


def _accumulate_product(out: dict, c0: int, factors: List[Dict[Key, Any]], coeff: Any) -> None:
    partial: List[Tuple[Tuple[Key, ...], Any]] = [((), coeff)]
    for fac in factors:
        partial = [(ks + (k,), v * w) for ks, v in partial for k, w in fac.items()]
    for ks, v in partial:
        vec_add_term(out, (c0, ks), v)
