"""Finite concrete representations: explicit binary relations over a finite domain.

A representation lists, per atom, the set of ordered pairs it denotes.  It
can be validated as a square proper relation algebra, the abstract
composition table can be derived from it, and networks can be model-checked
against it.

File format::

    representation <name> over <algebra-name>
    domain <n>
    pairs <atom> : (i,j) (i,j) ...   # may span several lines per atom
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .algebra import (
    RelationAlgebra,
    ValidationReport,
    Violation,
    iter_bits,
)
from .network import Network
from .parsing import ParseError, iter_lines

_PAIR = re.compile(r"^\((\d+),(\d+)\)$")


@dataclass(frozen=True)
class ConcreteRepresentation:
    """A candidate square representation given by explicit pair lists."""

    name: str
    algebra_name: str | None
    domain_size: int
    atoms: tuple[str, ...]
    relations: tuple[frozenset[tuple[int, int]], ...]

    def relation(self, atom: str) -> frozenset[tuple[int, int]]:
        return self.relations[self.atoms.index(atom)]


def parse_representation(
    text: str, algebra: RelationAlgebra | None = None
) -> ConcreteRepresentation:
    """Parse a representation file.  Structural load only, no validation.

    When `algebra` is given, atom names are checked against it and the
    atom order is taken from it; otherwise atoms are ordered by first
    appearance.
    """
    name = None
    algebra_name = None
    domain = None
    order: list[str] = []
    pairs: dict[str, set[tuple[int, int]]] = {}
    last_line = 0

    for lineno, tokens, cols in iter_lines(text):
        last_line = lineno
        head = tokens[0]
        if head == "representation":
            if name is not None:
                raise ParseError("duplicate 'representation' line", lineno, cols[0])
            if len(tokens) != 4 or tokens[2] != "over":
                raise ParseError(
                    "expected: representation <name> over <algebra-name>", lineno, cols[0]
                )
            name = tokens[1]
            algebra_name = tokens[3]
        elif head == "domain":
            if domain is not None:
                raise ParseError("duplicate 'domain' line", lineno, cols[0])
            if len(tokens) != 2 or not tokens[1].isdigit() or int(tokens[1]) < 1:
                raise ParseError("expected: domain <n> with n >= 1", lineno, cols[0])
            domain = int(tokens[1])
        elif head == "pairs":
            if domain is None:
                raise ParseError("'pairs' before 'domain'", lineno, cols[0])
            if len(tokens) < 3 or tokens[2] != ":":
                raise ParseError("expected: pairs <atom> : (i,j) ...", lineno, cols[0])
            atom = tokens[1]
            if algebra is not None:
                try:
                    algebra.atom_index(atom)
                except ValueError:
                    raise ParseError(f"unknown atom {atom!r}", lineno, cols[1]) from None
            if atom not in pairs:
                pairs[atom] = set()
                order.append(atom)
            seen = pairs[atom]
            for tok, col in zip(tokens[3:], cols[3:]):
                m = _PAIR.match(tok)
                if not m:
                    raise ParseError(f"malformed pair {tok!r}", lineno, col)
                i, j = int(m.group(1)), int(m.group(2))
                if i >= domain or j >= domain:
                    raise ParseError(
                        f"pair ({i},{j}) out of range for domain {domain}", lineno, col
                    )
                if (i, j) in seen:
                    raise ParseError(
                        f"duplicate pair ({i},{j}) for atom {atom!r}", lineno, col
                    )
                seen.add((i, j))
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, cols[0])

    if name is None:
        raise ParseError("missing 'representation' line", last_line)
    if domain is None:
        raise ParseError("missing 'domain' line", last_line)
    if algebra is not None:
        atoms = algebra.atoms
        for atom in atoms:
            pairs.setdefault(atom, set())
    else:
        atoms = tuple(order)
    return ConcreteRepresentation(
        name=name,
        algebra_name=algebra_name,
        domain_size=domain,
        atoms=atoms,
        relations=tuple(frozenset(pairs[a]) for a in atoms),
    )


def format_representation(cr: ConcreteRepresentation) -> str:
    lines = [f"representation {cr.name} over {cr.algebra_name or cr.name}"]
    lines.append(f"domain {cr.domain_size}")
    for atom, rel in zip(cr.atoms, cr.relations):
        body = " ".join(f"({i},{j})" for i, j in sorted(rel))
        lines.append(f"pairs {atom} : {body}")
    return "\n".join(lines) + "\n"


def validate_representation(cr: ConcreteRepresentation) -> ValidationReport:
    """Check that the pair lists form a square proper relation algebra.

    Checked: the atom relations partition the full square, each atom is
    nonempty, identity-candidate atoms lie on the diagonal and cover it
    exactly, every converse of an atom relation is again an atom relation,
    and relation composition of two atoms is a union of atom relations.
    """
    violations: list[Violation] = []
    n = cr.domain_size
    atoms = cr.atoms

    for atom, rel in zip(atoms, cr.relations):
        if not rel:
            violations.append(
                Violation("empty-atom", (atom,), "atom denotes the empty relation")
            )

    covered: dict[tuple[int, int], str] = {}
    overlap_reported = set()
    for atom, rel in zip(atoms, cr.relations):
        for pair in rel:
            if pair in covered and (covered[pair], atom) not in overlap_reported:
                overlap_reported.add((covered[pair], atom))
                violations.append(
                    Violation(
                        "partition-overlap",
                        (covered[pair], atom),
                        f"pair {pair} belongs to both atoms",
                    )
                )
            covered[pair] = atom
    missing = [
        (i, j) for i in range(n) for j in range(n) if (i, j) not in covered
    ]
    if missing:
        violations.append(
            Violation(
                "partition-coverage",
                (),
                f"{len(missing)} pairs uncovered, first {missing[0]}",
            )
        )

    diagonal = {(x, x) for x in range(n)}
    identity_union: set[tuple[int, int]] = set()
    for atom, rel in zip(atoms, cr.relations):
        on = rel & diagonal
        if on and rel - diagonal:
            violations.append(
                Violation(
                    "identity-diagonal",
                    (atom,),
                    "atom relation straddles the identity diagonal",
                )
            )
        identity_union |= on
    if identity_union != diagonal:
        violations.append(
            Violation(
                "identity-diagonal",
                (),
                "identity-candidate atoms do not cover the diagonal exactly",
            )
        )

    rel_index = {rel: atom for atom, rel in zip(atoms, cr.relations)}
    for atom, rel in zip(atoms, cr.relations):
        conv = frozenset((j, i) for i, j in rel)
        if conv not in rel_index:
            violations.append(
                Violation(
                    "converse-closure",
                    (atom,),
                    "converse of the atom relation is not an atom relation",
                )
            )

    by_first: dict[str, dict[int, set[int]]] = {}
    for atom, rel in zip(atoms, cr.relations):
        succ: dict[int, set[int]] = {}
        for i, j in rel:
            succ.setdefault(i, set()).add(j)
        by_first[atom] = succ
    for a, rel_a in zip(atoms, cr.relations):
        for b in atoms:
            succ_b = by_first[b]
            composed: set[tuple[int, int]] = set()
            for x, y in rel_a:
                for z in succ_b.get(y, ()):
                    composed.add((x, z))
            for c, rel_c in zip(atoms, cr.relations):
                inter = rel_c & composed
                if inter and inter != rel_c:
                    violations.append(
                        Violation(
                            "composition-closure",
                            (a, b, c),
                            "relation composition cuts an atom relation in half",
                        )
                    )

    return ValidationReport(tuple(violations))


def derive_algebra(cr: ConcreteRepresentation) -> RelationAlgebra:
    """Read the abstract algebra off a validated representation.

    Raises ValueError when the representation does not validate (in
    particular when composition closure fails, so the pair lists are not a
    proper relation algebra).
    """
    report = validate_representation(cr)
    if not report.ok:
        first = report.violations[0]
        raise ValueError(
            f"representation {cr.name!r} is not a proper relation algebra: {first}"
        )
    atoms = cr.atoms
    k = len(atoms)
    diagonal_atoms = 0
    for idx, rel in enumerate(cr.relations):
        if all(i == j for i, j in rel):
            diagonal_atoms |= 1 << idx
    conv_map = []
    rel_index = {rel: idx for idx, rel in enumerate(cr.relations)}
    for rel in cr.relations:
        conv_map.append(rel_index[frozenset((j, i) for i, j in rel)])

    by_first: list[dict[int, set[int]]] = []
    for rel in cr.relations:
        succ: dict[int, set[int]] = {}
        for i, j in rel:
            succ.setdefault(i, set()).add(j)
        by_first.append(succ)
    table = []
    for a in range(k):
        row = []
        for b in range(k):
            composed: set[tuple[int, int]] = set()
            succ_b = by_first[b]
            for x, y in cr.relations[a]:
                for z in succ_b.get(y, ()):
                    composed.add((x, z))
            entry = 0
            for c in range(k):
                if cr.relations[c] & composed:
                    entry |= 1 << c
            row.append(entry)
        table.append(tuple(row))

    return RelationAlgebra(
        name=cr.algebra_name or cr.name,
        atoms=atoms,
        converse_atom=tuple(conv_map),
        identity=diagonal_atoms,
        table=tuple(table),
    )


def model_check(
    cr: ConcreteRepresentation,
    net: Network,
    stats: dict | None = None,
) -> dict[str, int] | None:
    """Find an assignment of domain elements satisfying every label, or None.

    Backtracking with forward checking; the next node is always the one
    with the fewest remaining candidates.
    """
    n = len(net.nodes)
    size = cr.domain_size
    if n == 0:
        if stats is not None:
            stats["assignments"] = 0
        return {}

    # allowed[i][j] = set of domain pairs permitted by the label on (i, j)
    allowed: list[list[frozenset[tuple[int, int]]]] = []
    full = frozenset((x, y) for x in range(size) for y in range(size))
    for i in range(n):
        row = []
        for j in range(n):
            mask = net.labels[i][j]
            if mask == (1 << len(cr.atoms)) - 1:
                row.append(full)
            else:
                acc: set[tuple[int, int]] = set()
                for a in iter_bits(mask):
                    acc |= cr.relations[a]
                row.append(frozenset(acc))
        allowed.append(row)

    domains: list[set[int]] = []
    for i in range(n):
        cands = {v for v in range(size) if (v, v) in allowed[i][i]}
        domains.append(cands)

    assignment: dict[int, int] = {}
    tried = 0

    def pick() -> int | None:
        best = None
        for i in range(n):
            if i in assignment:
                continue
            c = len(domains[i])
            if best is None or c < best[0]:
                best = (c, i)
        return None if best is None else best[1]

    def search() -> bool:
        nonlocal tried
        node = pick()
        if node is None:
            return True
        for value in sorted(domains[node]):
            tried += 1
            ok = all(
                (assignment[other], value) in allowed[other][node]
                and (value, assignment[other]) in allowed[node][other]
                for other in assignment
            )
            if not ok:
                continue
            assignment[node] = value
            pruned: list[tuple[int, int]] = []
            feasible = True
            for other in range(n):
                if other in assignment:
                    continue
                for cand in list(domains[other]):
                    if (value, cand) not in allowed[node][other] or (
                        cand,
                        value,
                    ) not in allowed[other][node]:
                        domains[other].discard(cand)
                        pruned.append((other, cand))
                if not domains[other]:
                    feasible = False
                    break
            if feasible and search():
                return True
            for other, cand in pruned:
                domains[other].add(cand)
            del assignment[node]
        return False

    found = search()
    if stats is not None:
        stats["assignments"] = tried
    if not found:
        return None
    return {net.nodes[i]: assignment[i] for i in range(n)}
