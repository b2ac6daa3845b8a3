"""Independent brute-force oracles used by the tests.

Everything here works directly from atom-level table data and exhaustive
enumeration; none of it calls the library's normalize / path-consistency /
solver code paths it is used to check.
"""
from __future__ import annotations

import itertools

from ra_kit import LabeledStructure, Network
from ra_kit.algebra import RelationAlgebra, iter_bits
from ra_kit.network import _freeze


def pair_schedule(n: int) -> list[tuple[int, int]]:
    """Fixed assignment order: loops first, then both directions per pair."""
    pairs = [(i, i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            pairs.append((i, j))
            pairs.append((j, i))
    return pairs


def brute_force_refinements(ra: RelationAlgebra, net: Network):
    """Enumerate every atom choice per ordered pair that satisfies Eq-style
    triangle closure f(x,z) ≤ f(x,y)∘f(y,z) on all ordered triples.

    Yields complete label matrices (masks).  Partial assignments are pruned
    as soon as a fully assigned triple fails, which cannot lose solutions
    because a failed triple stays failed.
    """
    n = len(net.nodes)
    pairs = pair_schedule(n)
    table = ra.table
    assigned: dict[tuple[int, int], int] = {}

    def ok_after(i: int, j: int) -> bool:
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    ps = ((x, y), (y, z), (x, z))
                    if (i, j) not in ps:
                        continue
                    if all(p in assigned for p in ps):
                        if not table[assigned[(x, y)]][assigned[(y, z)]] & (
                            1 << assigned[(x, z)]
                        ):
                            return False
        return True

    def rec(idx: int):
        if idx == len(pairs):
            matrix = [[0] * n for _ in range(n)]
            for (x, y), a in assigned.items():
                matrix[x][y] = 1 << a
            yield _freeze(matrix)
            return
        i, j = pairs[idx]
        for a in iter_bits(net.labels[i][j]):
            assigned[(i, j)] = a
            if ok_after(i, j):
                yield from rec(idx + 1)
            del assigned[(i, j)]

    yield from rec(0)


def brute_force_satisfiable(ra: RelationAlgebra, net: Network) -> bool:
    return next(brute_force_refinements(ra, net), None) is not None


def valid_labelings(ra: RelationAlgebra, n: int) -> list:
    """All triangle-closed complete atom labelings with identity loops."""
    labels = [[ra.top] * n for _ in range(n)]
    for i in range(n):
        labels[i][i] = ra.identity
    top_net = Network("top", tuple(f"x{i}" for i in range(n)), _freeze(labels))
    return list(brute_force_refinements(ra, top_net))


def assignment_oracle(cr, net: Network):
    """Exhaustive search over all domain assignments; None if unsatisfiable."""
    n = len(net.nodes)
    allowed = [[set() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = set()
            for a in iter_bits(net.labels[i][j]):
                acc |= cr.relations[a]
            allowed[i][j] = acc
    for values in itertools.product(range(cr.domain_size), repeat=n):
        if all(
            (values[i], values[j]) in allowed[i][j]
            for i in range(n)
            for j in range(n)
        ):
            return dict(zip(net.nodes, values))
    return None


def hom_exists(cr, s: LabeledStructure) -> bool:
    """Whether the structure maps homomorphically into the representation."""
    n = len(s.nodes)
    for values in itertools.product(range(cr.domain_size), repeat=n):
        ok = True
        for i in range(n):
            for j in range(n):
                for a in iter_bits(s.rel[i][j]):
                    if (values[i], values[j]) not in cr.relations[a]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def ordered_set_partitions(items: tuple):
    """All ways to split items into a sequence of nonempty blocks."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for parts in ordered_set_partitions(rest):
        for idx in range(len(parts)):
            yield parts[:idx] + ((first,) + parts[idx],) + parts[idx + 1 :]
        for idx in range(len(parts) + 1):
            yield parts[:idx] + ((first,),) + parts[idx:]


def weak_order_matrices(point: RelationAlgebra, n: int) -> list:
    """Every atomic point-algebra labeling on n nodes, built from weak orders.

    Independent of the library's atomicity code: a total preorder assigns
    eq within a block and lt across increasing blocks.
    """
    eq = point.element("eq")
    lt = point.element("lt")
    gt = point.element("gt")
    out = []
    seen = set()
    for parts in ordered_set_partitions(tuple(range(n))):
        rank = {}
        for level, block in enumerate(parts):
            for item in block:
                rank[item] = level
        matrix = tuple(
            tuple(
                eq if rank[i] == rank[j] else (lt if rank[i] < rank[j] else gt)
                for j in range(n)
            )
            for i in range(n)
        )
        if matrix not in seen:
            seen.add(matrix)
            out.append(matrix)
    return out


def strict_edges_acyclic(point: RelationAlgebra, net: Network) -> bool:
    """Kahn topological sort over the lt-labeled edges."""
    lt = point.element("lt")
    n = len(net.nodes)
    indeg = [0] * n
    succs = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if net.labels[i][j] == lt:
                succs[i].append(j)
                indeg[j] += 1
    queue = [i for i in range(n) if indeg[i] == 0]
    removed = 0
    while queue:
        node = queue.pop()
        removed += 1
        for nxt in succs[node]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                queue.append(nxt)
    return removed == n


def random_network(ra: RelationAlgebra, rng, n: int, *, coherent: bool = False) -> Network:
    """Random network with identity loops; labels may be empty (0)."""
    labels = [[ra.identity] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            labels[i][j] = rng.randrange(ra.top + 1)
            if coherent:
                labels[j][i] = ra.converse(labels[i][j])
            else:
                labels[j][i] = rng.randrange(ra.top + 1)
    return Network("rand", tuple(f"n{i}" for i in range(n)), _freeze(labels))


def random_structure(ra: RelationAlgebra, rng, n: int) -> LabeledStructure:
    """Random complete structure: exactly one atom on every ordered pair."""
    rel = [
        [1 << rng.randrange(ra.k) for _ in range(n)]
        for _ in range(n)
    ]
    return LabeledStructure("rand", tuple(f"n{i}" for i in range(n)), _freeze(rel))
