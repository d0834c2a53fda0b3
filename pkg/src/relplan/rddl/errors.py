"""Diagnostics for RDDL parsing and validation.

Every error carries a 1-based line/column of the offending token so callers
can point at source text.  Exactly one diagnostic is raised per bad input.
"""

from __future__ import annotations

from typing import Optional


class RddlError(Exception):
    """Base class for every parse/validation diagnostic."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        self.message = message
        self.line = line
        self.col = col
        where = f" at {line}:{col}" if line is not None else ""
        super().__init__(f"{message}{where}")


class LexicalError(RddlError):
    pass


class RddlSyntaxError(RddlError):
    pass


class UnsupportedConstructError(RddlError):
    """A recognized RDDL construct outside the supported subset."""

    def __init__(self, construct: str, line: Optional[int] = None, col: Optional[int] = None):
        self.construct = construct
        super().__init__(f"unsupported construct: {construct}", line, col)


class DuplicateAssignmentError(RddlError):
    pass


class ValidationError(RddlError):
    """Cross-validation failure; carries the offending symbol."""

    def __init__(self, kind: str, symbol: str, message: str,
                 line: Optional[int] = None, col: Optional[int] = None):
        self.kind = kind  # unknown-symbol | arity-mismatch | type-mismatch | domain-mismatch
        self.symbol = symbol
        super().__init__(f"{kind}: {message}", line, col)
