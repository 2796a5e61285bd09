"""Permutations, shuffles, Koszul signs and planted planar trees."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Iterator, List, Sequence, Tuple, Union

from .errors import ArityMismatch, SlotOutOfRange


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..n} given by its list of images (1-based)."""

    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"{imgs} is not a permutation of 1..{len(imgs)}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        imgs = list(range(1, n + 1))
        imgs[a - 1], imgs[b - 1] = b, a
        return cls(tuple(imgs))

    @property
    def size(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self∘other)(i) = self(other(i))."""
        if self.size != other.size:
            raise ArityMismatch("cannot compose permutations of different sizes")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    __mul__ = compose

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.images == tuple(range(1, self.size + 1))

    def inversions(self) -> List[Tuple[int, int]]:
        imgs = self.images
        n = len(imgs)
        return [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if imgs[i] > imgs[j]]

    def sign(self) -> int:
        return -1 if len(self.inversions()) % 2 else 1

    def adjacent_word(self) -> List[int]:
        """Indices j with self = s_{j1}∘s_{j2}∘... (s_j swaps j and j+1)."""
        imgs = list(self.images)
        word: List[int] = []
        # strip descents from the right: σ = σ'∘s_j whenever σ(j) > σ(j+1)
        while True:
            for j in range(len(imgs) - 1):
                if imgs[j] > imgs[j + 1]:
                    imgs[j], imgs[j + 1] = imgs[j + 1], imgs[j]
                    word.append(j + 1)
                    break
            else:
                break
        word.reverse()
        return word

    def act_on_degrees(self, degrees: Sequence[int]) -> Tuple[int, ...]:
        """The degree list after moving entry i to position σ(i)."""
        if len(degrees) != self.size:
            raise ArityMismatch("degree list length differs from permutation size")
        out = [0] * self.size
        for i, d in enumerate(degrees):
            out[self.images[i] - 1] = d
        return tuple(out)


def koszul_sign(sigma: Permutation, degrees: Sequence[int]) -> int:
    """Product over inversions i<j of sigma of (−1)^{d_i d_j}.

    This is the sign picked up when entry i of a tensor word is moved to
    position sigma(i).
    """
    if len(degrees) != sigma.size:
        raise ArityMismatch(f"{len(degrees)} degrees for a permutation of size {sigma.size}")
    imgs = sigma.images
    odd = [d % 2 for d in degrees]
    parity = 0
    n = len(imgs)
    for i in range(n):
        if odd[i]:
            for j in range(i + 1, n):
                if odd[j] and imgs[i] > imgs[j]:
                    parity ^= 1
    return -1 if parity else 1


def reorder_sign(order: Sequence[int], degrees: Sequence[int]) -> int:
    """Koszul sign of listing the entries in ``order`` (0-based old positions).

    Position p of the new word holds old entry ``order[p]``.
    """
    parity = 0
    # count pairs p<q with order[p] > order[q] where both entries are odd
    odd_positions = [o for o in order if degrees[o] % 2]
    for a in range(len(odd_positions)):
        oa = odd_positions[a]
        for b in range(a + 1, len(odd_positions)):
            if oa > odd_positions[b]:
                parity ^= 1
    return -1 if parity else 1


def enumerate_shuffles(*ks: int) -> List[Permutation]:
    """All (k1,...,km)-shuffles: permutations increasing on each block."""
    if not ks:
        raise ArityMismatch("at least one block size is required")
    if any(k < 0 for k in ks):
        raise ValueError("block sizes must be non-negative")
    n = sum(ks)
    out = []
    for blocks in _ordered_splits(tuple(range(1, n + 1)), tuple(ks)):
        out.append(Permutation(tuple(x for block in blocks for x in block)))
    return out


def _ordered_splits(items: Tuple[int, ...], ks: Tuple[int, ...]) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    if not ks:
        yield ()
        return
    k = ks[0]
    for chosen in combinations(items, k):
        rest = tuple(x for x in items if x not in chosen)
        for tail in _ordered_splits(rest, ks[1:]):
            yield (chosen,) + tail


def multinomial(ks: Sequence[int]) -> int:
    out = factorial(sum(ks))
    for k in ks:
        out //= factorial(k)
    return out


@lru_cache(maxsize=None)
def compositions(n: int, m: int) -> Tuple[Tuple[int, ...], ...]:
    """Ordered tuples of m positive integers summing to n."""
    if m == 1:
        return ((n,),) if n >= 1 else ()
    out = []
    for first in range(1, n - m + 2):
        for tail in compositions(n - first, m - 1):
            out.append((first,) + tail)
    return tuple(out)


@lru_cache(maxsize=None)
def ordered_set_partitions(n: int, m: int) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """Ordered lists of m nonempty blocks (each sorted) partitioning {0..n-1}.

    Equivalently the pairs (composition k, σ ∈ Sh_k).
    """
    out = []
    items = tuple(range(n))
    for ks in compositions(n, m):
        out.extend(_ordered_splits(items, ks))
    return tuple(out)


@lru_cache(maxsize=None)
def set_partitions(n: int, m: int) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """Unordered partitions of {0..n-1} into m blocks, blocks ordered by minimum."""
    return tuple(p for p in ordered_set_partitions(n, m)
                 if all(p[j][0] < p[j + 1][0] for j in range(m - 1)))


@lru_cache(maxsize=None)
def all_set_partitions(n: int) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    out: List[Tuple[Tuple[int, ...], ...]] = []
    for m in range(1, n + 1):
        out.extend(set_partitions(n, m))
    return tuple(out)


# ---------------------------------------------------------------------------
# trees

Node = Union[int, tuple]


class PlantedTree:
    """A planted planar tree with labeled leaves.

    Stored as nested tuples: a nodal vertex is the tuple of its incoming
    children (left to right), a child being another nodal vertex or an
    integer leaf label.  The planted root edge is implicit below the
    outermost tuple.  The canonical order on nodal vertices is depth-first
    preorder, so the vertex adjacent to the root comes first.
    """

    __slots__ = ("shape",)

    def __init__(self, shape: tuple):
        if not isinstance(shape, tuple):
            raise ValueError("a planted tree needs at least one nodal vertex")
        self.shape = shape
        labels = self.leaves()
        if sorted(labels) != list(range(1, len(labels) + 1)):
            raise ValueError(f"leaf labels {labels} must be a bijection onto 1..n")

    def leaves(self) -> List[int]:
        out: List[int] = []

        def walk(node: Node) -> None:
            if isinstance(node, int):
                out.append(node)
            else:
                for child in node:
                    walk(child)

        walk(self.shape)
        return out

    def vertices(self) -> List[tuple]:
        out: List[tuple] = []

        def walk(node: Node) -> None:
            if isinstance(node, tuple):
                out.append(node)
                for child in node:
                    walk(child)

        walk(self.shape)
        return out

    def arities(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.vertices())

    @property
    def n_leaves(self) -> int:
        return len(self.leaves())

    def relabel(self, sigma: Permutation) -> "PlantedTree":
        def walk(node: Node) -> Node:
            if isinstance(node, int):
                return sigma(node)
            return tuple(walk(c) for c in node)

        return PlantedTree(walk(self.shape))

    def planar(self) -> "PlantedTree":
        """Same shape with leaves relabeled 1..n from left to right."""
        counter = iter(range(1, self.n_leaves + 1))

        def walk(node: Node) -> Node:
            if isinstance(node, int):
                return next(counter)
            return tuple(walk(c) for c in node)

        return PlantedTree(walk(self.shape))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PlantedTree) and self.shape == other.shape

    def __hash__(self) -> int:
        return hash(self.shape)

    def __repr__(self) -> str:
        return f"PlantedTree({self.shape!r})"


@dataclass(frozen=True)
class TreeSchedule:
    """A planted tree together with the in-arities of its nodal vertices."""

    tree: PlantedTree
    arities: Tuple[int, ...]

    @classmethod
    def of(cls, tree: PlantedTree) -> "TreeSchedule":
        return cls(tree, tree.arities())

    @property
    def n_leaves(self) -> int:
        return self.tree.n_leaves

    def leaf_partition(self) -> List[List[int]]:
        """Leaf labels attached directly to each nodal vertex, in vertex order."""
        return [[c for c in v if isinstance(c, int)] for v in self.tree.vertices()]


def elementary_tree(n: int, k: int, i: int) -> TreeSchedule:
    """Two nodal vertices: arity k grafted into slot i of arity n."""
    if n < 1 or k < 1:
        raise ArityMismatch("arities must be positive")
    if not 1 <= i <= n:
        raise SlotOutOfRange(f"slot {i} not in 1..{n}")
    upper = tuple(range(i, i + k))
    lower = tuple(range(1, i)) + (upper,) + tuple(range(i + k, n + k))
    return TreeSchedule.of(PlantedTree(lower))


def fork_tree(*ks: int) -> TreeSchedule:
    """A bottom vertex of arity m carrying m upper vertices of arities k_j."""
    if not ks or any(k < 1 for k in ks):
        raise ArityMismatch("fork trees need m ≥ 1 blocks of positive size")
    blocks = []
    start = 1
    for k in ks:
        blocks.append(tuple(range(start, start + k)))
        start += k
    return TreeSchedule.of(PlantedTree(tuple(blocks)))


def apply_permutation_to_tree(sigma: Permutation, t: TreeSchedule) -> TreeSchedule:
    """Replace every leaf label ℓ by sigma(ℓ)."""
    if sigma.size != t.n_leaves:
        raise ArityMismatch(f"permutation of size {sigma.size} on a tree with {t.n_leaves} leaves")
    return TreeSchedule(t.tree.relabel(sigma), t.arities)
