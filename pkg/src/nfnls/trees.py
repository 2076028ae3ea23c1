"""Ordered ternary interaction trees, their chronicles, and index assignments.

A tree of generation j has 3j + 1 nodes: j internal nodes with exactly three
ordered children each, and 2j + 1 terminal nodes.  It is built from the single
root by j conversions; the chronicle records which node was converted at each
generation.  Conjugation flags alternate through the middle child: the root is
unconjugated, and a conversion of a node with flag c gives its children the
flags (c, not c, c).

An index assignment attaches an integer frequency to every node so that each
internal node a with children (a1, a2, a3) satisfies

    (i)  n_a = n_{a1} - n_{a2} + n_{a3},
    (ii) {n_a, n_{a2}} and {n_{a1}, n_{a3}} are disjoint,

and every terminal frequency lies in [-n_max, n_max].  Internal frequencies
(including the root) are not clamped to the lattice here; evaluation layers
that work on a truncated lattice apply their own clamp.

Each conversion k carries the phase of its interaction quadruple,

    mu_k = n_a^2 - n_{a1}^2 + n_{a2}^2 - n_{a3}^2,

and the sign sigma_k = +1 if the converted node is unconjugated, -1 if it is
conjugated (a conjugated node contributes the conjugate phase).  The signed
partial sums mu~_k = sum_{l <= k} sigma_l mu_l drive all modulation cutoffs
and denominators downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from ._util import double_factorial

__all__ = [
    "OrderedTree",
    "IndexAssignment",
    "one_generation_tree",
    "grow",
    "enumerate_trees",
    "enumerate_indices",
    "signed_phase",
    "generation_phases",
    "MAX_GENERATIONS",
]

#: hard guard on full tree enumeration; (2J-1)!! growth makes more hopeless
MAX_GENERATIONS = 8


@dataclass(frozen=True)
class OrderedTree:
    """Immutable ordered ternary tree with conjugation flags and chronicle.

    children[i] is the ordered child triple of node i, or None for terminals.
    chronicle[k-1] is the node converted at generation k (chronicle[0] == 0).
    """

    generations: int
    chronicle: tuple[int, ...]
    children: tuple[Optional[tuple[int, int, int]], ...]
    conj: tuple[bool, ...]

    def __post_init__(self) -> None:
        j = self.generations
        if j < 1:
            raise ValueError(f"tree needs at least one generation, got {j}")
        if len(self.children) != 3 * j + 1 or len(self.conj) != 3 * j + 1:
            raise ValueError("node arrays inconsistent with generation count")
        if len(self.chronicle) != j or self.chronicle[0] != 0:
            raise ValueError("chronicle must have length j and start at the root")

    @property
    def node_count(self) -> int:
        return 3 * self.generations + 1

    @property
    def terminals(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.children) if ch is None)

    def sigma(self, k: int) -> int:
        """Sign of generation k: +1 for an unconjugated converted node."""
        if not 1 <= k <= self.generations:
            raise ValueError(f"generation {k} out of range 1..{self.generations}")
        return -1 if self.conj[self.chronicle[k - 1]] else 1

    def subtree_terminals(self, node: int) -> int:
        """Number of terminal nodes in the subtree rooted at node."""
        ch = self.children[node]
        if ch is None:
            return 1
        return sum(self.subtree_terminals(c) for c in ch)


def one_generation_tree() -> OrderedTree:
    """The unique tree of generation 1."""
    return OrderedTree(
        generations=1,
        chronicle=(0,),
        children=((1, 2, 3), None, None, None),
        conj=(False, False, True, False),
    )


def grow(tree: OrderedTree, terminal: int) -> OrderedTree:
    """Convert one terminal into an internal node with three fresh children.

    New nodes get the next three ids; the child flags are (c, not c, c) for a
    parent with flag c.
    """
    if tree.children[terminal] is not None:
        raise ValueError(f"node {terminal} is not a terminal")
    base = tree.node_count
    kids = (base, base + 1, base + 2)
    children = list(tree.children) + [None, None, None]
    children[terminal] = kids
    c = tree.conj[terminal]
    conj = tree.conj + (c, not c, c)
    return OrderedTree(
        generations=tree.generations + 1,
        chronicle=tree.chronicle + (terminal,),
        children=tuple(children),
        conj=conj,
    )


def enumerate_trees(J: int) -> list[OrderedTree]:
    """All ordered trees of generation exactly J; there are (2J-1)!! of them."""
    if not 1 <= J <= MAX_GENERATIONS:
        raise ValueError(f"J must be in 1..{MAX_GENERATIONS}, got {J}")
    trees = [one_generation_tree()]
    for _ in range(J - 1):
        trees = [grow(t, term) for t in trees for term in t.terminals]
    assert len(trees) == double_factorial(2 * J - 1)
    return trees


@dataclass(frozen=True)
class IndexAssignment:
    """Frequencies per node id for one tree, as an immutable tuple."""

    freqs: tuple[int, ...]

    def __getitem__(self, node: int) -> int:
        return self.freqs[node]

    def terminal_values(self, tree: OrderedTree) -> tuple[int, ...]:
        return tuple(self.freqs[i] for i in tree.terminals)


def enumerate_indices(
    tree: OrderedTree, root_freq: int, n_max: int
) -> Iterator[IndexAssignment]:
    """Yield every admissible index assignment with the given root frequency.

    Terminal frequencies range over [-n_max, n_max]; internal frequencies are
    whatever the decomposition rules force (the root itself is taken as given,
    even outside the lattice).  Enumeration replays the chronicle: at each
    conversion the first and third child frequencies run in ascending order
    and the middle child is determined by rule (i).
    """
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")

    def child_bound(node: int) -> int:
        # an internal frequency is an alternating sum of its terminal leaves
        return tree.subtree_terminals(node) * n_max

    freqs = [0] * tree.node_count
    freqs[0] = root_freq

    def convert(k: int) -> Iterator[IndexAssignment]:
        if k > tree.generations:
            yield IndexAssignment(tuple(freqs))
            return
        node = tree.chronicle[k - 1]
        f = freqs[node]
        c1, c2, c3 = tree.children[node]
        b1, b2, b3 = child_bound(c1), child_bound(c2), child_bound(c3)
        for v1 in range(-b1, b1 + 1):
            for v3 in range(-b3, b3 + 1):
                v2 = v1 + v3 - f
                if abs(v2) > b2:
                    continue
                if v2 == v1 or v2 == v3 or f == v1 or f == v3:
                    continue
                freqs[c1], freqs[c2], freqs[c3] = v1, v2, v3
                yield from convert(k + 1)

    yield from convert(1)


def generation_phases(tree: OrderedTree, idx: IndexAssignment) -> tuple[int, ...]:
    """The interaction phases (mu_1, ..., mu_j) along the chronicle."""
    out = []
    for node in tree.chronicle:
        c1, c2, c3 = tree.children[node]
        n, n1, n2, n3 = idx[node], idx[c1], idx[c2], idx[c3]
        out.append(n * n - n1 * n1 + n2 * n2 - n3 * n3)
    return tuple(out)


def signed_phase(
    tree: OrderedTree, idx: IndexAssignment, upto: Optional[int] = None
) -> int:
    """Signed partial phase sum mu~_k = sum_{l <= k} sigma_l mu_l.

    With upto=None the sum runs over all generations of the tree.
    """
    k = tree.generations if upto is None else upto
    if not 1 <= k <= tree.generations:
        raise ValueError(f"upto must be in 1..{tree.generations}, got {upto}")
    mus = generation_phases(tree, idx)
    return sum(tree.sigma(l) * mus[l - 1] for l in range(1, k + 1))
