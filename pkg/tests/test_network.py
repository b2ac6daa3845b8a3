from __future__ import annotations

import itertools
import random

import pytest

from ra_kit import (
    LabeledStructure,
    Network,
    ParseError,
    canonical_labels,
    format_network,
    is_atomic,
    net_to_struct,
    normalize,
    parse_network,
    path_consistency,
    refine_solve,
    struct_to_net,
)
from ra_kit.network import _freeze

from conftest import corpus_text
from oracles import (
    brute_force_satisfiable,
    random_network,
    weak_order_matrices,
)


def _net(ra, text):
    return parse_network(ra, text)


# -- parsing -------------------------------------------------------------------


def test_parse_defaults(point):
    net = _net(point, "network t\nnodes x y z\nedge x y : lt\n")
    assert net.label("x", "y") == point.element("lt")
    assert net.label("y", "x") == point.element("gt")  # converse default
    assert net.label("x", "z") == point.top  # unspecified pair
    assert net.label("x", "x") == point.identity  # loop default


def test_parse_both_directions_kept(point):
    net = _net(point, "network t\nnodes x y\nedge x y : lt\nedge y x : lt\n")
    assert net.label("y", "x") == point.element("lt")


def test_parse_duplicate_edge_is_met(point):
    net = _net(point, "network t\nnodes x y\nedge x y : lt eq\nedge x y : eq gt\n")
    assert net.label("x", "y") == point.element("eq")


def test_parse_zero_and_empty_nodes(point):
    net = _net(point, "network t\nnodes x y\nedge x y : 0\n")
    assert net.label("x", "y") == 0
    empty = _net(point, "network e\nnodes\n")
    assert len(empty) == 0


def test_parse_errors(point):
    with pytest.raises(ParseError, match="unknown node"):
        _net(point, "network t\nnodes x\nedge x y : lt\n")
    with pytest.raises(ParseError, match="unknown atom"):
        _net(point, "network t\nnodes x y\nedge x y : zz\n")
    with pytest.raises(ParseError, match="expected: edge"):
        _net(point, "network t\nnodes x y\nedge x y lt\n")


# -- normalize -------------------------------------------------------------------


def test_normalize_detects_converse_conflict(point):
    net = _net(point, "network t\nnodes x y\nedge x y : lt\nedge y x : lt\n")
    assert normalize(point, net) is None


def test_normalize_idempotent_and_loop_meet(point):
    net = Network("t", ("x", "y"), _freeze([[point.top, point.top], [point.top, point.top]]))
    normalized = normalize(point, net)
    assert normalized.label("x", "x") == point.identity
    assert normalized.label("x", "y") == point.top
    assert normalize(point, normalized) == normalized


# -- path consistency -------------------------------------------------------------


def test_pc_chain_infers_transitivity(point):
    net = _net(point, corpus_text("chain3.net"))
    refined = path_consistency(point, normalize(point, net))
    assert refined.label("x", "z") == point.element("lt")


def test_pc_cycle_inconsistent_and_oracle_agrees(point):
    net = _net(point, corpus_text("cycle3.net"))
    assert path_consistency(point, normalize(point, net)) is None
    assert not brute_force_satisfiable(point, net)


def test_pc_b9_network_unchanged(b9):
    net = _net(b9, corpus_text("b9_n.net"))
    refined = path_consistency(b9, normalize(b9, net))
    assert refined is not None
    assert refined.labels == net.labels


def _pc_reference(ra, net, schedule_seed=None, reverse=False):
    """Naive full-sweep fixpoint used to check schedule independence."""
    n = len(net.nodes)
    labels = [list(row) for row in net.labels]
    triples = [
        (x, y, z) for x in range(n) for y in range(n) for z in range(n)
    ]
    if schedule_seed is not None:
        random.Random(schedule_seed).shuffle(triples)
    if reverse:
        triples.reverse()
    changed = True
    while changed:
        changed = False
        for x, y, z in triples:
            new = labels[x][z] & ra.compose(labels[x][y], labels[y][z])
            if new != labels[x][z]:
                if new == 0:
                    return None
                labels[x][z] = new
                changed = True
    return _freeze(labels)


def test_pc_properties_randomized(point, leftlinear, b9):
    rng = random.Random(42)
    cases = []
    for ra in (point, leftlinear, b9):
        for _ in range(40):
            n = rng.randint(2, 6)
            net = random_network(ra, rng, n, coherent=True)
            if normalize(ra, net) is not None:
                cases.append((ra, normalize(ra, net)))
    assert len(cases) > 50
    for ra, net in cases:
        refined = path_consistency(ra, net)
        for seed, rev in ((None, False), (1, False), (2, False), (None, True)):
            ref = _pc_reference(ra, net, schedule_seed=seed, reverse=rev)
            if refined is None:
                assert ref is None
            else:
                assert ref == refined.labels
        if refined is not None:
            # idempotent and contracting
            assert path_consistency(ra, refined) == refined
            n = len(net.nodes)
            for i in range(n):
                for j in range(n):
                    assert refined.labels[i][j] & ~net.labels[i][j] == 0


def _coherent_networks_exhaustive(ra, n):
    """Every normalized network shape: nonzero label per unordered pair."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for combo in itertools.product(range(1, ra.top + 1), repeat=len(pairs)):
        labels = [[ra.identity] * n for _ in range(n)]
        for (i, j), mask in zip(pairs, combo):
            labels[i][j] = mask
            labels[j][i] = ra.converse(mask)
        yield Network("e", tuple(f"n{i}" for i in range(n)), _freeze(labels))


def _point_iso_representatives(np, point, n):
    """Deduplicate the exhaustive family up to node permutation, vectorized."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    slot = {p: s for s, p in enumerate(pairs)}
    npairs = len(pairs)
    combos = np.array(
        list(itertools.product(range(1, point.top + 1), repeat=npairs)),
        dtype=np.int64,
    )
    conv = np.array([point.converse(m) for m in range(point.top + 1)], dtype=np.int64)
    best = None
    for perm in itertools.permutations(range(n)):
        enc = np.zeros(len(combos), dtype=np.int64)
        for s, (i, j) in enumerate(pairs):
            a, b = perm[i], perm[j]
            if a < b:
                values = combos[:, slot[(a, b)]]
            else:
                values = conv[combos[:, slot[(b, a)]]]
            enc |= values << (3 * s)
        best = enc if best is None else np.minimum(best, enc)
    _, first = np.unique(best, return_index=True)
    return combos[np.sort(first)]


def test_two_independent_atomicity_oracles_agree(point):
    # the DFS refinement enumerator and the weak-order construction must
    # produce the same family of complete atomic labelings
    from oracles import valid_labelings

    for n in (2, 3, 4):
        assert set(valid_labelings(point, n)) == set(weak_order_matrices(point, n))


def test_pc_soundness_exhaustive_point(point):
    """Atomic refinements survive path consistency, for all networks n <= 4."""
    np = pytest.importorskip("numpy")
    for n in (2, 3, 4):
        atomics = weak_order_matrices(point, n)
        amat = np.array(atomics, dtype=np.int64)  # (A, n, n)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        reps = _point_iso_representatives(np, point, n)
        for combo in reps:
            labels = [[point.identity] * n for _ in range(n)]
            for (i, j), mask in zip(pairs, combo):
                labels[i][j] = int(mask)
                labels[j][i] = point.converse(int(mask))
            net = Network("e", tuple(f"n{i}" for i in range(n)), _freeze(labels))
            lab = np.array(net.labels, dtype=np.int64)
            refines = ((amat & ~lab) == 0).all(axis=(1, 2))
            if not refines.any():
                continue
            refined = path_consistency(point, net)
            assert refined is not None
            out = np.array(refined.labels, dtype=np.int64)
            assert ((amat[refines] & ~out) == 0).all()


def test_pc_equivariant_under_relabeling(point):
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(2, 5)
        net = random_network(point, rng, n, coherent=True)
        perm = list(range(n))
        rng.shuffle(perm)
        permuted = Network(
            "p",
            net.nodes,
            _freeze([[net.labels[perm[i]][perm[j]] for j in range(n)] for i in range(n)]),
        )
        na = normalize(point, net)
        nb = normalize(point, permuted)
        if na is None or nb is None:
            assert (na is None) == (nb is None)
            continue
        a = path_consistency(point, na)
        b = path_consistency(point, nb)
        if a is None or b is None:
            assert a is None and b is None
        else:
            assert b.labels == tuple(
                tuple(a.labels[perm[i]][perm[j]] for j in range(n)) for i in range(n)
            )


# -- atomicity ---------------------------------------------------------------------


def test_is_atomic_examples(point, b9):
    n = _net(b9, corpus_text("b9_n.net"))
    assert is_atomic(b9, n)
    cycle = _net(point, corpus_text("cycle3.net"))
    assert not is_atomic(point, cycle)
    single = _net(point, "network s\nnodes x\nedge x x : eq\n")
    assert is_atomic(point, single)


def test_is_atomic_requires_coherence(point):
    bad_loop = _net(point, "network s\nnodes x\nedge x x : lt\n")
    assert not is_atomic(point, bad_loop)
    mismatch = _net(point, "network s\nnodes x y\nedge x y : lt\nedge y x : lt\n")
    assert not is_atomic(point, mismatch)
    non_singleton = _net(point, "network s\nnodes x y\nedge x y : lt eq\n")
    assert not is_atomic(point, non_singleton)


# -- refinement solver ----------------------------------------------------------------


def test_refine_solve_chain(point):
    net = _net(point, corpus_text("chain3.net"))
    witness = refine_solve(point, net)
    assert witness.label("x", "z") == point.element("lt")
    assert is_atomic(point, witness)


def test_refine_solve_cycle_unsat(point):
    assert refine_solve(point, _net(point, corpus_text("cycle3.net"))) is None


def test_refine_solve_atomic_fixed_point(b9):
    net = _net(b9, corpus_text("b9_n.net"))
    assert refine_solve(b9, net) == net


def test_refine_solve_oracle_smoke(point, leftlinear):
    rng = random.Random(99)
    for ra, count, max_n in ((point, 150, 3), (leftlinear, 80, 4)):
        for _ in range(count):
            net = random_network(ra, rng, rng.randint(2, max_n), coherent=rng.random() < 0.5)
            got = refine_solve(ra, net)
            assert (got is not None) == brute_force_satisfiable(ra, net)
            if got is not None:
                assert is_atomic(ra, got)


# -- structure translation ---------------------------------------------------------------


def test_struct_to_net_empty_structure(point):
    s = LabeledStructure("s", ("x", "y"), ((0, 0), (0, 0)))
    net = struct_to_net(point, s)
    assert net.label("x", "y") == point.top
    assert net.label("x", "x") == point.top


def test_struct_with_conflicting_atoms_unsat(point):
    both = point.element("lt") | point.element("gt")
    s = LabeledStructure(
        "s",
        ("x", "y"),
        ((point.element("eq"), both), (0, point.element("eq"))),
    )
    net = struct_to_net(point, s)
    assert net.label("x", "y") == 0
    assert refine_solve(point, net) is None


def test_roundtrip_on_atomic_networks(point):
    from ra_kit import grow_limit

    for seed in range(6):
        net = grow_limit(point, 6, seed=seed)
        s = net_to_struct(point, net)
        assert struct_to_net(point, s).labels == net.labels
        assert net_to_struct(point, struct_to_net(point, s)) == s


# -- canonical forms ------------------------------------------------------------------------


def test_canonical_labels_invariant_under_permutation(point):
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(1, 4)
        net = random_network(point, rng, n)
        perm = list(range(n))
        rng.shuffle(perm)
        permuted = _freeze(
            [[net.labels[perm[i]][perm[j]] for j in range(n)] for i in range(n)]
        )
        assert canonical_labels(net.labels) == canonical_labels(permuted)


def test_format_network_roundtrip(point):
    net = _net(point, corpus_text("chain3.net"))
    again = parse_network(point, format_network(point, net))
    assert again.labels == net.labels
