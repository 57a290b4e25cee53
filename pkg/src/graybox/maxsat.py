"""DIMACS CNF / WCNF reader producing clause-form landscapes."""

from __future__ import annotations

import io
from typing import BinaryIO

from .landscape import MkLandscape, Subfunction


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def parse_maxsat(stream: BinaryIO | bytes | str, format: str = "cnf") -> MkLandscape:
    """Read a DIMACS ``p cnf n m`` or ``p wcnf n m [top]`` instance.

    Clauses may span lines and end with ``0``.  Unweighted clauses get weight 1;
    hard clauses (weight ``top``) are kept as ordinary heavy clauses.  Literal
    ``v`` maps to variable ``|v|-1``.
    """
    if format not in ("cnf", "wcnf"):
        raise ValueError(f"unknown format {format!r}")
    if isinstance(stream, (bytes, str)):
        data = stream.encode() if isinstance(stream, str) else stream
    else:
        data = stream.read()
    text = io.StringIO(data.decode("utf-8", errors="strict"))

    header = None
    clauses: list[Subfunction] = []
    pending: list[int] = []
    pending_line = last_line = 0
    weighted = format == "wcnf"

    def close(lineno):
        if weighted:
            weight, lits = pending[0], pending[1:]
        else:
            weight, lits = 1, pending[:]
        seen = {}
        for lit in lits:
            var = abs(lit) - 1
            if var in seen and seen[var] != (lit < 0):
                raise ParseError(lineno, f"tautological clause on variable {abs(lit)}")
            seen[var] = lit < 0
        clauses.append(Subfunction(tuple(seen), negated=tuple(seen.values()), weight=weight))

    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError(lineno, "duplicate header")
            parts = line.split()
            if len(parts) < 4 or parts[1] != format or (format == "cnf" and len(parts) != 4) \
                    or len(parts) > 5:
                raise ParseError(lineno, f"malformed header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(lineno, f"malformed header {line!r}") from None
            if n < 1 or m < 0:
                raise ParseError(lineno, f"malformed header {line!r}")
            header = (n, m)
            continue
        if header is None:
            raise ParseError(lineno, "clause before 'p' header")
        try:
            tokens = [int(t) for t in line.split()]
        except ValueError:
            raise ParseError(lineno, f"non-integer token in {line!r}") from None
        for tok in tokens:
            if not pending:
                pending_line = lineno
                if weighted:
                    if tok <= 0:
                        raise ParseError(lineno, f"non-positive clause weight {tok}")
                    pending.append(tok)
                    continue
            if tok == 0:
                if len(pending) == int(weighted):
                    raise ParseError(lineno, "empty clause")
                close(lineno)
                pending.clear()
                continue
            if abs(tok) > header[0]:
                raise ParseError(lineno, f"literal {tok} out of range 1..{header[0]}")
            pending.append(tok)
        last_line = lineno
    if header is None:
        raise ParseError(0, "missing 'p' header")
    if pending:
        raise ParseError(pending_line, "clause missing terminating 0")
    if len(clauses) != header[1]:
        raise ParseError(last_line, f"header declares {header[1]} clauses, found {len(clauses)}")
    return MkLandscape(header[0], clauses, name=f"{format}-n{header[0]}-m{header[1]}")
