"""Shared line-oriented tokenizer for the algebra, network, and representation file formats."""
from __future__ import annotations

import re

_TOKEN = re.compile(r"\S+")


class ParseError(ValueError):
    """Input file violates its format. Carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        location = f"{line}:{column}: " if line else ""
        super().__init__(f"{location}{message}")
        self.message = message
        self.line = line
        self.column = column


def iter_lines(text: str):
    """Yield (lineno, tokens, columns) for every non-blank line, comments stripped.

    `#` starts a comment that runs to the end of the line.  Columns are
    1-based positions of each token, used for error reporting.
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0]
        matches = list(_TOKEN.finditer(code))
        if not matches:
            continue
        tokens = [m.group(0) for m in matches]
        columns = [m.start() + 1 for m in matches]
        yield lineno, tokens, columns
