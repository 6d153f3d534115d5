"""Extended DIMACS reading and writing.

Clause lines are the usual ``l1 l2 ... 0``; xor lines carry an ``x``
prefix, either as a separate token (``x 1 -2 3 0``) or glued to the first
literal (``x1 -2 3 0``). An xor line states that the xor of the listed
variables is true, with the parity flipped once per negative literal. The
header count covers clauses and xor lines together.
"""

from __future__ import annotations

import io
import logging
from pathlib import Path
from typing import IO, Iterable, Optional, Union

from .decompose import DEFAULT_CLAUSIFY_LIMIT, Decomposition, clausify_singletons, decompose
from .formula import CnfXorFormula, lit_from_dimacs, lit_to_dimacs, normalize_clause, normalize_xor

log = logging.getLogger(__name__)


class DimacsError(ValueError):
    def __init__(self, msg: str, line: int, col: int = 1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def _tokens(text: str):
    """(token, column) pairs, columns 1-based."""
    col = 0
    n = len(text)
    while col < n:
        while col < n and text[col].isspace():
            col += 1
        if col >= n:
            break
        start = col
        while col < n and not text[col].isspace():
            col += 1
        yield text[start:col], start + 1


def parse(source: Union[str, Path, IO[str]]) -> CnfXorFormula:
    """Parse a path or an open text stream."""
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            return parse_lines(fh)
    return parse_lines(source)


def parse_string(text: str) -> CnfXorFormula:
    return parse_lines(io.StringIO(text))


def parse_lines(lines: Iterable[str]) -> CnfXorFormula:
    num_vars: Optional[int] = None
    declared = 0
    clauses = []
    xors = []
    pending: list = []  # literals of a constraint continued over several lines
    pending_xor = False
    pending_at = (0, 0)
    for lineno, raw in enumerate(lines, 1):
        text = raw.strip()
        if not text or text[0] == "c" or text[0] == "%":
            continue
        if text[0] == "p":
            parts = text.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError("expected 'p cnf <vars> <constraints>'", lineno)
            if num_vars is not None:
                raise DimacsError("duplicate header", lineno)
            try:
                num_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError("header counts must be integers", lineno) from None
            if num_vars < 0 or declared < 0:
                raise DimacsError("header counts must be non-negative", lineno)
            continue
        if num_vars is None:
            raise DimacsError("constraint before 'p cnf' header", lineno)
        for tok, col in _tokens(text):
            if not pending and not pending_xor and tok[0] == "x":
                pending_xor = True
                pending_at = (lineno, col)
                tok = tok[1:]
                if not tok:
                    continue
                col += 1
            try:
                val = int(tok)
            except ValueError:
                raise DimacsError(f"unexpected token {tok!r}", lineno, col) from None
            if abs(val) > num_vars:
                raise DimacsError(f"literal {val} exceeds declared {num_vars} variables", lineno, col)
            if not pending and not pending_xor:
                pending_at = (lineno, col)
            if val != 0:
                pending.append(val)
                continue
            if pending_xor:
                parity = True
                for d in pending:
                    if d < 0:
                        parity = not parity
                xors.append(normalize_xor([abs(d) - 1 for d in pending], parity))
            else:
                clauses.append(tuple(lit_from_dimacs(d) for d in pending))
            pending = []
            pending_xor = False
    if pending or pending_xor:
        raise DimacsError("last constraint is not terminated by 0", *pending_at)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header", 1)
    if declared != len(clauses) + len(xors):
        log.warning("header declares %d constraints, found %d", declared, len(clauses) + len(xors))
    out_clauses = []
    for cl in clauses:
        n = normalize_clause(cl)
        if n is not None:
            out_clauses.append(n)
    return CnfXorFormula(num_vars, out_clauses, [x for x in xors if not x.is_tautology()])


def format_xor(x) -> str:
    lits = [v + 1 for v in x.vars]
    if lits and not x.parity:
        lits[0] = -lits[0]
    body = " ".join(map(str, lits))
    if not lits and not x.parity:
        return ""
    return f"x {body} 0" if body else "x 0"


def emit(f: CnfXorFormula, out: Optional[IO[str]] = None, comments: Iterable[str] = ()) -> str:
    """Write ``f`` in extended DIMACS; returns the text as well."""
    lines = [f"c {c}" for c in comments]
    xor_lines = [s for s in (format_xor(x) for x in f.xors) if s]
    lines.append(f"p cnf {f.num_vars} {len(f.clauses) + len(xor_lines)}")
    for cl in f.clauses:
        lines.append(" ".join(str(lit_to_dimacs(l)) for l in cl) + (" 0" if cl else "0"))
    lines.extend(xor_lines)
    text = "\n".join(lines) + "\n"
    if out is not None:
        out.write(text)
    return text


def export(
    f: CnfXorFormula,
    out: Optional[IO[str]] = None,
    *,
    clausify: bool = False,
    width_limit: int = DEFAULT_CLAUSIFY_LIMIT,
    decomposition: Optional[Decomposition] = None,
):
    """Emit ``f``, optionally with singleton-component xors written as clauses.

    Returns ``(text, refused)``; ``refused`` lists xor indices too wide to clausify.
    """
    refused: list = []
    comments = []
    if clausify and f.xors:
        d = decomposition or decompose(f.xors)
        f, refused = clausify_singletons(f, d, width_limit)
        for i in refused:
            comments.append(f"xor #{i} kept: wider than {width_limit}")
    return emit(f, out, comments), refused
