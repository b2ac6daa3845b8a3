"""Forbidden-substructure bound sets characterizing atomic networks.

For a fully universal square representation, the finite structures that
embed into it are exactly the atomic networks; this module generates a
finite list of forbidden structures with at most three elements whose
absence (under induced-substructure embedding) characterizes that class,
and tests membership.

Families:
  F1 - one-element structures that are not atomic networks (bad loops);
  F2 - two-element structures with clean loops that are not atomic networks;
  F3 - three-element structures that are atomic on every two-element subset
       but violate the triangle condition on some triple of distinct nodes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import RelationAlgebra, iter_bits
from .network import (
    LabeledStructure,
    Network,
    _freeze,
    canonical_labels,
    format_structure,
    is_atomic,
)


@dataclass(frozen=True)
class Bound:
    family: str  # "F1", "F2", or "F3"
    structure: LabeledStructure


@dataclass(frozen=True)
class BoundSet:
    algebra_name: str
    bounds: tuple[Bound, ...]

    def family(self, name: str) -> tuple[LabeledStructure, ...]:
        return tuple(b.structure for b in self.bounds if b.family == name)


def _structure_is_atomic(ra: RelationAlgebra, rel) -> bool:
    """Whether a complete singleton-labeled structure is an atomic network."""
    for row in rel:
        for mask in row:
            if mask == 0 or mask & (mask - 1):
                return False
    return is_atomic(ra, Network("s", tuple(f"x{i}" for i in range(len(rel))), rel))


def generate_bounds(ra: RelationAlgebra) -> BoundSet:
    """Generate the F1/F2/F3 bound families, deduplicated up to isomorphism.

    Each family only adds obstructions that are invisible to the smaller
    ones: a structure with a bad loop is already caught by F1, so F2 ranges
    over identity-atom loops only, and F3 over pairwise-atomic triangles.
    """
    bounds: list[Bound] = []
    identity_atoms = [1 << e for e in iter_bits(ra.identity)]

    # F1: every loop label that is not a single identity atom.
    for mask in range(ra.top + 1):
        if mask in identity_atoms:
            continue
        structure = LabeledStructure(f"F1_{len(bounds)}", ("x0",), ((mask,),))
        bounds.append(Bound("F1", structure))

    # F2: clean loops, any off-diagonal pair labels, not an atomic network.
    seen = set()
    f2 = []
    for e1, e2 in itertools.product(identity_atoms, repeat=2):
        for xy in range(ra.top + 1):
            for yx in range(ra.top + 1):
                rel = ((e1, xy), (yx, e2))
                if _structure_is_atomic(ra, rel):
                    continue
                key = canonical_labels(rel)
                if key not in seen:
                    seen.add(key)
                    f2.append(key)
    for idx, key in enumerate(sorted(f2)):
        bounds.append(Bound("F2", LabeledStructure(f"F2_{idx}", ("x0", "x1"), key)))

    # F3: atomic on every 2-subset, triangle violation on distinct nodes.
    seen = set()
    f3 = []
    atoms = range(ra.k)
    for e_loops in itertools.product(identity_atoms, repeat=3):
        for a01, a02, a12 in itertools.product(atoms, repeat=3):
            rel = [
                [e_loops[0], 1 << a01, 1 << a02],
                [1 << ra.converse_atom[a01], e_loops[1], 1 << a12],
                [1 << ra.converse_atom[a02], 1 << ra.converse_atom[a12], e_loops[2]],
            ]
            pairwise_ok = all(
                _structure_is_atomic(
                    ra,
                    ((rel[i][i], rel[i][j]), (rel[j][i], rel[j][j])),
                )
                for i, j in ((0, 1), (0, 2), (1, 2))
            )
            if not pairwise_ok:
                continue
            if _structure_is_atomic(ra, _freeze(rel)):
                continue
            key = canonical_labels(_freeze(rel))
            if key not in seen:
                seen.add(key)
                f3.append(key)
    for idx, key in enumerate(sorted(f3)):
        bounds.append(
            Bound("F3", LabeledStructure(f"F3_{idx}", ("x0", "x1", "x2"), key))
        )

    return BoundSet(ra.name, tuple(bounds))


def embeds(small: LabeledStructure, big: LabeledStructure) -> bool:
    """Whether `small` embeds into `big` as an induced substructure.

    An embedding is an injection under which the atom set on every ordered
    pair (loops included) matches exactly.  Backtracking over injections.
    """
    ns, nb = len(small.nodes), len(big.nodes)
    if ns > nb:
        return False
    srel, brel = small.rel, big.rel
    image: list[int] = []
    used = [False] * nb

    def place(i: int) -> bool:
        if i == ns:
            return True
        for v in range(nb):
            if used[v] or srel[i][i] != brel[v][v]:
                continue
            if all(
                srel[i][j] == brel[v][image[j]] and srel[j][i] == brel[image[j]][v]
                for j in range(i)
            ):
                used[v] = True
                image.append(v)
                if place(i + 1):
                    return True
                image.pop()
                used[v] = False
        return False

    return place(0)


def check_membership(bs: BoundSet, s: LabeledStructure) -> bool:
    """True iff no bound embeds into the structure."""
    return not any(embeds(b.structure, s) for b in bs.bounds)


def format_bounds(ra: RelationAlgebra, bs: BoundSet) -> str:
    """Serialize as a concatenation of network files, one per bound."""
    parts = []
    for b in bs.bounds:
        parts.append(f"# family: {b.family}")
        parts.append(format_structure(ra, b.structure).rstrip("\n"))
    return "\n".join(parts) + "\n"
