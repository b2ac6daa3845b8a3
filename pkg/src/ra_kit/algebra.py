"""Finite relation algebras given by their atom structure.

An algebra is described by its atoms, a converse map, the set of identity
atoms, and an atom-level composition table.  Elements of the algebra are
arbitrary atom sets, represented throughout as plain int bitmasks: bit i
stands for ``atoms[i]``, in file order.  All element-level operations
(composition, converse, meet, join, complement) are derived from the table.

File format (UTF-8, line oriented, ``#`` starts a comment)::

    algebra <name>
    atoms <a1> <a2> ... <ak>
    identity <ai> [<aj> ...]
    converse <a> <b>            # one line per unordered pair; "converse a a"
                                # for self-converse; every atom exactly once
    compose <a> <b> = <c1> ...  # k*k lines; right side "0" = empty set
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .parsing import ParseError, iter_lines

# An element of the algebra: a bitmask over the atom list.
Element = int


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of `mask`, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Violation:
    """One broken law, with the atoms that witness it."""

    law: str
    witness: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        where = ", ".join(self.witness)
        return f"{self.law} at ({where}): {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class RelationAlgebra:
    """A finite relation algebra presented by atoms and a composition table.

    Immutable after construction; all operations are pure, so instances can
    be shared freely between threads.
    """

    name: str
    atoms: tuple[str, ...]
    converse_atom: tuple[int, ...]  # atom index -> index of its converse
    identity: Element  # mask of the atoms below Id
    table: tuple[tuple[Element, ...], ...]  # table[a][b] = atoms below a∘b
    _index: dict = field(init=False, compare=False, repr=False)
    _compose_cache: dict = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.atoms)})
        object.__setattr__(self, "_compose_cache", {})

    # -- basic structure ----------------------------------------------------

    @property
    def k(self) -> int:
        return len(self.atoms)

    @property
    def top(self) -> Element:
        return (1 << self.k) - 1

    def atom_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown atom {name!r} in algebra {self.name!r}") from None

    def element(self, names: Iterable[str] | str) -> Element:
        """Build an element from atom names; a string is split on commas."""
        if isinstance(names, str):
            names = [t for t in names.split(",") if t]
            if names == ["0"]:
                return 0
        mask = 0
        for name in names:
            mask |= 1 << self.atom_index(name)
        return mask

    def atom_names(self, x: Element) -> tuple[str, ...]:
        return tuple(self.atoms[i] for i in iter_bits(x))

    # -- element operations -------------------------------------------------

    def compose(self, x: Element, y: Element) -> Element:
        """Union of the table entries over all atom pairs of x and y."""
        cached = self._compose_cache.get((x, y))
        if cached is not None:
            return cached
        acc = 0
        for a in iter_bits(x):
            row = self.table[a]
            for b in iter_bits(y):
                acc |= row[b]
        self._compose_cache[(x, y)] = acc
        return acc

    def converse(self, x: Element) -> Element:
        acc = 0
        for a in iter_bits(x):
            acc |= 1 << self.converse_atom[a]
        return acc

    def meet(self, x: Element, y: Element) -> Element:
        return x & y

    def join(self, x: Element, y: Element) -> Element:
        return x | y

    def complement(self, x: Element) -> Element:
        return self.top & ~x

    def leq(self, x: Element, y: Element) -> bool:
        return x & ~y == 0


# -- parsing ------------------------------------------------------------------


def parse_algebra(text: str) -> RelationAlgebra:
    """Parse an algebra file.  Structural checks only; laws are not validated."""
    name = None
    atoms: list[str] = []
    index: dict[str, int] = {}
    identity = None
    converse: dict[int, int] = {}
    table: dict[tuple[int, int], Element] = {}
    last_line = 0

    def need_atom(tok: str, lineno: int, col: int) -> int:
        if tok not in index:
            raise ParseError(f"unknown atom name {tok!r}", lineno, col)
        return index[tok]

    for lineno, tokens, cols in iter_lines(text):
        last_line = lineno
        head = tokens[0]
        if head == "algebra":
            if name is not None:
                raise ParseError("duplicate 'algebra' line", lineno, cols[0])
            if len(tokens) != 2:
                raise ParseError("expected: algebra <name>", lineno, cols[0])
            name = tokens[1]
        elif head == "atoms":
            if atoms:
                raise ParseError("duplicate 'atoms' line", lineno, cols[0])
            if len(tokens) < 2:
                raise ParseError("expected at least one atom", lineno, cols[0])
            for tok, col in zip(tokens[1:], cols[1:]):
                if tok in index:
                    raise ParseError(f"duplicate atom {tok!r}", lineno, col)
                index[tok] = len(atoms)
                atoms.append(tok)
        elif head == "identity":
            if identity is not None:
                raise ParseError("duplicate 'identity' line", lineno, cols[0])
            if len(tokens) < 2:
                raise ParseError("identity needs at least one atom", lineno, cols[0])
            identity = 0
            for tok, col in zip(tokens[1:], cols[1:]):
                bit = 1 << need_atom(tok, lineno, col)
                if identity & bit:
                    raise ParseError(f"duplicate identity atom {tok!r}", lineno, col)
                identity |= bit
        elif head == "converse":
            if len(tokens) != 3:
                raise ParseError("expected: converse <a> <b>", lineno, cols[0])
            a = need_atom(tokens[1], lineno, cols[1])
            b = need_atom(tokens[2], lineno, cols[2])
            if a in converse or b in converse:
                raise ParseError("atom already has a converse line", lineno, cols[1])
            converse[a] = b
            converse[b] = a
        elif head == "compose":
            if len(tokens) < 5 or tokens[3] != "=":
                raise ParseError("expected: compose <a> <b> = <c1> ...", lineno, cols[0])
            a = need_atom(tokens[1], lineno, cols[1])
            b = need_atom(tokens[2], lineno, cols[2])
            if (a, b) in table:
                raise ParseError(
                    f"duplicate table entry for ({tokens[1]}, {tokens[2]})", lineno, cols[1]
                )
            rhs = tokens[4:]
            if rhs == ["0"]:
                table[(a, b)] = 0
            else:
                mask = 0
                for tok, col in zip(rhs, cols[4:]):
                    mask |= 1 << need_atom(tok, lineno, col)
                table[(a, b)] = mask
        else:
            raise ParseError(f"unknown directive {head!r}", lineno, cols[0])

    if name is None:
        raise ParseError("missing 'algebra' line", last_line)
    if not atoms:
        raise ParseError("missing 'atoms' line", last_line)
    if identity is None:
        raise ParseError("missing 'identity' line", last_line)
    k = len(atoms)
    for i in range(k):
        if i not in converse:
            raise ParseError(f"missing converse line for atom {atoms[i]!r}", last_line)
    for a in range(k):
        for b in range(k):
            if (a, b) not in table:
                raise ParseError(
                    f"missing table entry: compose {atoms[a]} {atoms[b]}", last_line
                )
    rows = tuple(tuple(table[(a, b)] for b in range(k)) for a in range(k))
    return RelationAlgebra(
        name=name,
        atoms=tuple(atoms),
        converse_atom=tuple(converse[i] for i in range(k)),
        identity=identity,
        table=rows,
    )


def format_algebra(ra: RelationAlgebra) -> str:
    """Render an algebra in the file format, deterministically."""
    lines = [f"algebra {ra.name}", "atoms " + " ".join(ra.atoms)]
    lines.append("identity " + " ".join(ra.atom_names(ra.identity)))
    for i, a in enumerate(ra.atoms):
        j = ra.converse_atom[i]
        if j >= i:
            lines.append(f"converse {a} {ra.atoms[j]}")
    for a in range(ra.k):
        for b in range(ra.k):
            entry = ra.table[a][b]
            rhs = " ".join(ra.atom_names(entry)) if entry else "0"
            lines.append(f"compose {ra.atoms[a]} {ra.atoms[b]} = {rhs}")
    return "\n".join(lines) + "\n"


# -- validation ---------------------------------------------------------------


def validate_algebra(ra: RelationAlgebra) -> ValidationReport:
    """Check the algebra laws, reporting every violation with a witness.

    Laws checked: converse involution, self-converse identity atoms, the
    identity law at atom level, converse of composition, the Peircean
    triangle rotations, and associativity lifted to atoms.  Empty table
    entries are reported as warnings, not violations.
    """
    violations: list[Violation] = []
    warnings: list[Violation] = []
    k = ra.k
    conv = ra.converse_atom
    names = ra.atoms

    for a in range(k):
        if conv[conv[a]] != a:
            violations.append(
                Violation(
                    "converse-involution",
                    (names[a],),
                    f"converse(converse({names[a]})) = {names[conv[conv[a]]]}",
                )
            )
    for e in iter_bits(ra.identity):
        if conv[e] != e:
            violations.append(
                Violation(
                    "identity-self-converse",
                    (names[e],),
                    f"identity atom has converse {names[conv[e]]}",
                )
            )

    for a in range(k):
        right = 0
        left = 0
        for e in iter_bits(ra.identity):
            right |= ra.table[a][e]
            left |= ra.table[e][a]
        if right != 1 << a:
            violations.append(
                Violation(
                    "identity-law",
                    (names[a],),
                    f"{names[a]} ∘ Id = {{{','.join(ra.atom_names(right))}}}",
                )
            )
        if left != 1 << a:
            violations.append(
                Violation(
                    "identity-law",
                    (names[a],),
                    f"Id ∘ {names[a]} = {{{','.join(ra.atom_names(left))}}}",
                )
            )

    for a in range(k):
        for b in range(k):
            entry = ra.table[a][b]
            if entry == 0:
                warnings.append(
                    Violation(
                        "empty-composition",
                        (names[a], names[b]),
                        "table entry is the empty element",
                    )
                )
            for c in range(k):
                holds = bool(entry & (1 << c))
                mirrored = bool(ra.table[conv[b]][conv[a]] & (1 << conv[c]))
                if holds != mirrored:
                    violations.append(
                        Violation(
                            "converse-of-composition",
                            (names[a], names[b], names[c]),
                            "c ≤ a∘b does not match converse(c) ≤ converse(b)∘converse(a)",
                        )
                    )
                rot1 = bool(ra.table[c][conv[b]] & (1 << a))
                if holds != rot1:
                    violations.append(
                        Violation(
                            "rotation",
                            (names[a], names[b], names[c]),
                            "c ≤ a∘b does not match a ≤ c∘converse(b)",
                        )
                    )
                rot2 = bool(ra.table[conv[a]][c] & (1 << b))
                if holds != rot2:
                    violations.append(
                        Violation(
                            "rotation",
                            (names[a], names[b], names[c]),
                            "c ≤ a∘b does not match b ≤ converse(a)∘c",
                        )
                    )

    for a in range(k):
        for b in range(k):
            ab = ra.table[a][b]
            for c in range(k):
                left = 0
                for d in iter_bits(ab):
                    left |= ra.table[d][c]
                right = 0
                for e in iter_bits(ra.table[b][c]):
                    right |= ra.table[a][e]
                if left != right:
                    violations.append(
                        Violation(
                            "associativity",
                            (names[a], names[b], names[c]),
                            f"(a∘b)∘c = {{{','.join(ra.atom_names(left))}}} but "
                            f"a∘(b∘c) = {{{','.join(ra.atom_names(right))}}}",
                        )
                    )

    return ValidationReport(tuple(violations), tuple(warnings))
