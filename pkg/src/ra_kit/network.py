"""Constraint networks over a relation algebra, and their structure view.

A network assigns an element of the algebra to every ordered node pair.
This module covers the network file format, normalization, path
consistency, the atomicity check, the backtracking refinement solver, and
the translation between networks and atom-labeled structures.

Network file format::

    network <name>
    nodes <x1> <x2> ... <xn>
    edge <x> <y> : <a1> [<a2> ...]   # element as an atom list; "0" = empty

Unspecified pairs default to the top element, unspecified loops to Id, and
an unspecified reverse direction to the converse of the given one.  If the
same directed edge appears twice the labels are intersected.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

from .algebra import Element, RelationAlgebra, iter_bits, popcount
from .parsing import ParseError, iter_lines

Matrix = tuple[tuple[Element, ...], ...]


@dataclass(frozen=True)
class Network:
    """A finite node set with an element label on every ordered pair."""

    name: str
    nodes: tuple[str, ...]
    labels: Matrix

    def __len__(self) -> int:
        return len(self.nodes)

    def node_index(self, name: str) -> int:
        return self.nodes.index(name)

    def label(self, x: str, y: str) -> Element:
        return self.labels[self.node_index(x)][self.node_index(y)]


@dataclass(frozen=True)
class LabeledStructure:
    """A relational structure over the atom signature.

    ``rel[i][j]`` is the bitmask of atoms that hold on the ordered pair
    (i, j); unlike a network label it may be empty or contain several atoms.
    """

    name: str
    nodes: tuple[str, ...]
    rel: Matrix

    def __len__(self) -> int:
        return len(self.nodes)


def _freeze(matrix: list[list[Element]]) -> Matrix:
    return tuple(tuple(row) for row in matrix)


def _thaw(matrix: Matrix) -> list[list[Element]]:
    return [list(row) for row in matrix]


# -- parsing and formatting -----------------------------------------------


def parse_network(ra: RelationAlgebra, text: str) -> Network:
    """Parse a network file over the given algebra."""
    name = None
    nodes: list[str] = []
    index: dict[str, int] = {}
    seen_nodes = False
    edges: dict[tuple[int, int], Element] = {}
    last_line = 0

    for lineno, tokens, cols in iter_lines(text):
        last_line = lineno
        head = tokens[0]
        if head == "network":
            if name is not None:
                raise ParseError("duplicate 'network' line", lineno, cols[0])
            if len(tokens) != 2:
                raise ParseError("expected: network <name>", lineno, cols[0])
            name = tokens[1]
        elif head == "nodes":
            if seen_nodes:
                raise ParseError("duplicate 'nodes' line", lineno, cols[0])
            seen_nodes = True
            for tok, col in zip(tokens[1:], cols[1:]):
                if tok in index:
                    raise ParseError(f"duplicate node {tok!r}", lineno, col)
                index[tok] = len(nodes)
                nodes.append(tok)
        elif head == "edge":
            if len(tokens) < 5 or tokens[3] != ":":
                raise ParseError("expected: edge <x> <y> : <a1> ...", lineno, cols[0])
            for tok, col in ((tokens[1], cols[1]), (tokens[2], cols[2])):
                if tok not in index:
                    raise ParseError(f"unknown node {tok!r} in edge line", lineno, col)
            i, j = index[tokens[1]], index[tokens[2]]
            rhs = tokens[4:]
            if rhs == ["0"]:
                mask = 0
            else:
                mask = 0
                for tok, col in zip(rhs, cols[4:]):
                    try:
                        mask |= 1 << ra.atom_index(tok)
                    except ValueError:
                        raise ParseError(f"unknown atom {tok!r}", lineno, col) from None
            if (i, j) in edges:
                edges[(i, j)] &= mask
            else:
                edges[(i, j)] = mask
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, cols[0])

    if name is None:
        raise ParseError("missing 'network' line", last_line)
    if not seen_nodes:
        raise ParseError("missing 'nodes' line", last_line)

    n = len(nodes)
    labels = [[ra.top] * n for _ in range(n)]
    for i in range(n):
        labels[i][i] = ra.identity
    for (i, j), mask in edges.items():
        labels[i][j] = mask
    for (i, j), mask in edges.items():
        if i != j and (j, i) not in edges:
            labels[j][i] = ra.converse(mask)
    return Network(name, tuple(nodes), _freeze(labels))


def format_network(ra: RelationAlgebra, net: Network) -> str:
    """Render a network with every ordered pair spelled out."""
    lines = [f"network {net.name}", ("nodes " + " ".join(net.nodes)).rstrip()]
    n = len(net.nodes)
    for i in range(n):
        for j in range(n):
            mask = net.labels[i][j]
            rhs = " ".join(ra.atom_names(mask)) if mask else "0"
            lines.append(f"edge {net.nodes[i]} {net.nodes[j]} : {rhs}")
    return "\n".join(lines) + "\n"


def format_structure(ra: RelationAlgebra, s: LabeledStructure) -> str:
    """Render a structure in the network syntax (labels are atom sets)."""
    net = Network(s.name, s.nodes, s.rel)
    return format_network(ra, net)


# -- normalization and path consistency -------------------------------------


def normalize(ra: RelationAlgebra, net: Network) -> Network | None:
    """Meet each label with the converse of its reverse, and loops with Id.

    Returns None if some label becomes empty (the network is trivially
    unsatisfiable).  Idempotent.
    """
    n = len(net.nodes)
    labels = _thaw(net.labels)
    for i in range(n):
        labels[i][i] &= ra.identity
        if labels[i][i] == 0:
            return None
    for i in range(n):
        for j in range(i + 1, n):
            meet = labels[i][j] & ra.converse(labels[j][i])
            if meet == 0:
                return None
            labels[i][j] = meet
            labels[j][i] = ra.converse(meet)
    return Network(net.name, net.nodes, _freeze(labels))


def path_consistency(
    ra: RelationAlgebra, net: Network, stats: dict | None = None
) -> Network | None:
    """Refine to the greatest fixpoint of f(x,z) ← f(x,z) ∧ f(x,y)∘f(y,z).

    The refinement runs over all ordered triples, so the result does not
    depend on the processing order.  Returns None as soon as a label
    becomes empty.  Expects a normalized network.
    """
    n = len(net.nodes)
    labels = _thaw(net.labels)
    result = _pc_matrix(ra, labels, n, stats)
    if result is None:
        return None
    return Network(net.name, net.nodes, _freeze(labels))


def _pc_matrix(
    ra: RelationAlgebra, labels: list[list[Element]], n: int, stats: dict | None = None
) -> bool | None:
    """In-place path consistency on a label matrix; None means inconsistent."""
    compose = ra.compose
    queue = deque((i, j) for i in range(n) for j in range(n))
    queued = set(queue)
    revisions = 0
    while queue:
        i, j = queue.popleft()
        queued.discard((i, j))
        lij = labels[i][j]
        for k in range(n):
            # (i, j, k): refine (i, k) through j
            new = labels[i][k] & compose(lij, labels[j][k])
            if new != labels[i][k]:
                if new == 0:
                    if stats is not None:
                        stats["revisions"] = revisions + 1
                    return None
                labels[i][k] = new
                revisions += 1
                if (i, k) not in queued:
                    queue.append((i, k))
                    queued.add((i, k))
            # (k, i, j): refine (k, j) through i
            new = labels[k][j] & compose(labels[k][i], lij)
            if new != labels[k][j]:
                if new == 0:
                    if stats is not None:
                        stats["revisions"] = revisions + 1
                    return None
                labels[k][j] = new
                revisions += 1
                if (k, j) not in queued:
                    queue.append((k, j))
                    queued.add((k, j))
    if stats is not None:
        stats["revisions"] = revisions
    return True


# -- atomicity ---------------------------------------------------------------


def is_atomic(ra: RelationAlgebra, net: Network) -> bool:
    """Whether the network is an atomic network.

    Requires every label to be a single atom, loops to lie below Id,
    reverse labels to be converses, and the triangle condition
    f(x,z) ≤ f(x,y)∘f(y,z) to hold for all ordered triples.  Loop and
    converse coherence follow the network conventions of the qualitative
    reasoning literature; without them unsatisfiable labelings such as a
    strict-order loop would slip through the triangle condition.
    """
    return _is_atomic_matrix(ra, net.labels, len(net.nodes))


def _is_atomic_matrix(ra: RelationAlgebra, labels, n: int) -> bool:
    table = ra.table
    conv = ra.converse_atom
    atom_of = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            mask = labels[i][j]
            if mask == 0 or mask & (mask - 1):
                return False
            atom_of[i][j] = mask.bit_length() - 1
    for i in range(n):
        if not (1 << atom_of[i][i]) & ra.identity:
            return False
        for j in range(n):
            if atom_of[j][i] != conv[atom_of[i][j]]:
                return False
    for i in range(n):
        row_i = atom_of[i]
        for j in range(n):
            a = row_i[j]
            row_j = atom_of[j]
            for k in range(n):
                if not table[a][row_j[k]] & (1 << row_i[k]):
                    return False
    return True


# -- refinement solver ---------------------------------------------------------


def refine_solve(
    ra: RelationAlgebra, net: Network, stats: dict | None = None
) -> Network | None:
    """Search for an atomic refinement of the network, or return None.

    Backtracking over ordered pairs with path consistency propagated after
    every decision.  Pairs are chosen fewest-atoms-first and atoms are tried
    in file order, so the witness (not just its existence) is deterministic.
    An already-atomic network is returned unchanged.
    """
    decisions = 0
    normalized = normalize(ra, net)
    if normalized is None:
        if stats is not None:
            stats["decisions"] = 0
        return None
    n = len(net.nodes)
    labels = _thaw(normalized.labels)
    if _pc_matrix(ra, labels, n) is None:
        if stats is not None:
            stats["decisions"] = 0
        return None

    conv = ra.converse_atom

    def search(labels: list[list[Element]]) -> list[list[Element]] | None:
        nonlocal decisions
        best = None
        for i in range(n):
            for j in range(n):
                c = popcount(labels[i][j])
                if c > 1 and (best is None or c < best[0]):
                    best = (c, i, j)
        if best is None:
            # all singletons: the fixpoint property is exactly the triangle
            # condition, but unvalidated tables can still leave converse
            # mismatches, so confirm before accepting the leaf
            return labels if _is_atomic_matrix(ra, labels, n) else None
        _, i, j = best
        for a in iter_bits(labels[i][j]):
            decisions += 1
            trial = [row[:] for row in labels]
            trial[i][j] = 1 << a
            trial[j][i] = 1 << conv[a]
            if _pc_matrix(ra, trial, n) is not None:
                found = search(trial)
                if found is not None:
                    return found
        return None

    solution = search(labels)
    if stats is not None:
        stats["decisions"] = decisions
    if solution is None:
        return None
    return Network(net.name, net.nodes, _freeze(solution))


# -- network / structure translation ------------------------------------------


def struct_to_net(ra: RelationAlgebra, s: LabeledStructure) -> Network:
    """View a structure as a network: label = meet of the atoms on the pair.

    A pair with no atoms gets the top element; with two or more distinct
    atoms the meet is empty.
    """
    n = len(s.nodes)
    labels = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            mask = s.rel[i][j]
            if mask == 0:
                labels[i][j] = ra.top
            elif mask & (mask - 1):
                labels[i][j] = 0
            else:
                labels[i][j] = mask
    return Network(s.name, s.nodes, _freeze(labels))


def net_to_struct(ra: RelationAlgebra, net: Network) -> LabeledStructure:
    """View a network as a structure: an atom holds iff it equals the label."""
    n = len(net.nodes)
    rel = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            mask = net.labels[i][j]
            if mask and not mask & (mask - 1):
                rel[i][j] = mask
    return LabeledStructure(net.name, net.nodes, _freeze(rel))


# -- canonical forms -----------------------------------------------------------


def canonical_labels(labels: Matrix) -> Matrix:
    """Lexicographically minimal label matrix over all node permutations."""
    n = len(labels)
    if n <= 1:
        return labels
    best = None
    for perm in itertools.permutations(range(n)):
        candidate = tuple(tuple(labels[perm[i]][perm[j]] for j in range(n)) for i in range(n))
        if best is None or candidate < best:
            best = candidate
    return best
