import itertools

import pytest
from hypothesis import given, settings, strategies as st

from nfnls.trees import (
    IndexAssignment,
    enumerate_indices,
    enumerate_trees,
    generation_phases,
    grow,
    one_generation_tree,
    signed_phase,
)

# frozen: (2J-1)!! for J = 1..6
EXPECTED_COUNTS = [1, 3, 15, 105, 945, 10395]


def test_tree_counts_match_double_factorial():
    for J, expected in enumerate(EXPECTED_COUNTS, start=1):
        assert len(enumerate_trees(J)) == expected


def test_tree_shape_invariants():
    for J in (1, 2, 3, 4):
        for tree in enumerate_trees(J):
            assert tree.node_count == 3 * J + 1
            assert len(tree.terminals) == 2 * J + 1
            assert len(tree.chronicle) == J
            assert tree.chronicle[0] == 0
            assert tree.conj[0] is False
            for node, kids in enumerate(tree.children):
                if kids is None:
                    continue
                c = tree.conj[node]
                assert tree.conj[kids[0]] is c
                assert tree.conj[kids[1]] is (not c)
                assert tree.conj[kids[2]] is c


def test_chronicle_replay_reproduces_tree():
    for tree in enumerate_trees(3):
        rebuilt = one_generation_tree()
        for node in tree.chronicle[1:]:
            rebuilt = grow(rebuilt, node)
        assert rebuilt == tree


def test_grow_rejects_internal_node():
    tree = grow(one_generation_tree(), 1)
    with pytest.raises(ValueError):
        grow(tree, 1)


def test_enumerate_trees_guards():
    with pytest.raises(ValueError):
        enumerate_trees(0)
    with pytest.raises(ValueError):
        enumerate_trees(9)


def test_sigma_signs():
    base = one_generation_tree()
    assert base.sigma(1) == 1
    # growth at the conjugated middle child flips the second generation sign
    assert grow(base, 2).sigma(2) == -1
    assert grow(base, 1).sigma(2) == 1
    assert grow(base, 3).sigma(2) == 1


# frozen: the only admissible leaf triple for root 3 on the lattice [-1, 1]
def test_index_enumeration_frozen_example():
    tree = one_generation_tree()
    found = [a.terminal_values(tree) for a in enumerate_indices(tree, 3, 1)]
    assert found == [(1, -1, 1)]


def _node_freqs_from_terminals(tree, terminal_values):
    """Independent bottom-up reconstruction of all node frequencies."""
    freqs = {}
    for node, value in zip(tree.terminals, terminal_values):
        freqs[node] = value

    def fill(node):
        kids = tree.children[node]
        if kids is None:
            return freqs[node]
        v = fill(kids[0]) - fill(kids[1]) + fill(kids[2])
        freqs[node] = v
        return v

    fill(0)
    return freqs


def _brute_force_assignments(tree, root_freq, n_max):
    """Filter all terminal tuples by the decomposition rules."""
    out = set()
    terminals = tree.terminals
    for values in itertools.product(
        range(-n_max, n_max + 1), repeat=len(terminals)
    ):
        freqs = _node_freqs_from_terminals(tree, values)
        if freqs[0] != root_freq:
            continue
        ok = True
        for node, kids in enumerate(tree.children):
            if kids is None:
                continue
            n, n1, n2, n3 = (freqs[node], *[freqs[c] for c in kids])
            if {n, n2} & {n1, n3}:
                ok = False
                break
        if ok:
            out.add(tuple(freqs[i] for i in range(tree.node_count)))
    return out


@pytest.mark.parametrize("J", [1, 2])
def test_index_enumeration_matches_brute_force(J):
    for tree in enumerate_trees(J):
        for n_max in (1, 2, 3):
            for root in range(-n_max - 2, n_max + 3):
                got = {a.freqs for a in enumerate_indices(tree, root, n_max)}
                want = _brute_force_assignments(tree, root, n_max)
                assert got == want


def test_signed_phase_hand_example():
    # grow at the conjugated middle child: mu~_2 = mu_1 - mu_2
    tree = grow(one_generation_tree(), 2)
    # root 0 -> (2, 1, -1); node 2 (freq 1) -> (3, 2, 0)
    idx = IndexAssignment((0, 2, 1, -1, 3, 2, 0))
    mu1 = 0 - 4 + 1 - 1          # = -4
    mu2 = 1 - 9 + 4 - 0          # = -4
    assert generation_phases(tree, idx) == (mu1, mu2)
    assert signed_phase(tree, idx, upto=1) == mu1
    assert signed_phase(tree, idx) == mu1 - mu2
    with pytest.raises(ValueError):
        signed_phase(tree, idx, upto=3)


@settings(deadline=None, max_examples=40)
@given(choice=st.integers(0, 10 ** 9), root=st.integers(-3, 3))
def test_signed_phase_consistency(choice, root):
    trees = enumerate_trees(3)
    tree = trees[choice % len(trees)]
    assignments = list(enumerate_indices(tree, root, 1))
    if not assignments:
        return
    idx = assignments[choice % len(assignments)]
    mus = generation_phases(tree, idx)
    acc = 0
    for k in range(1, tree.generations + 1):
        acc += tree.sigma(k) * mus[k - 1]
        assert signed_phase(tree, idx, upto=k) == acc
    # rule (i) everywhere
    for node, kids in enumerate(tree.children):
        if kids is not None:
            assert idx[node] == idx[kids[0]] - idx[kids[1]] + idx[kids[2]]
