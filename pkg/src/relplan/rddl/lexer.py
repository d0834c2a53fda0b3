"""Tokeniser for the RDDL subset.

Identifiers may contain interior dashes when the dash is followed by a letter
or underscore (``out-of-fuel``, ``max-nondef-actions``), so subtraction
between named operands must be written with whitespace: ``a - b``.
``//`` and ``/* */`` comments are stripped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexicalError

# token kinds
IDENT = "IDENT"
VAR = "VAR"       # ?name
NUMBER = "NUMBER"
PUNCT = "PUNCT"   # value holds the symbol text
EOF = "EOF"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z_][A-Za-z0-9_]*)*'?")
_NUMBER_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")

# longest match first
_SYMBOLS = ("<=>", "==", "<=", ">=", "=>", "~=",
            "{", "}", "(", ")", "[", "]", ",", ";", ":", "=",
            "~", "^", "|", "+", "-", "*", "/", "<", ">", "@", "$", "'")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    line_start = 0
    n = len(text)

    def col(at: int) -> int:
        return at - line_start + 1

    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            i += 1
            line_start = i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end == -1:
                raise LexicalError("unterminated block comment", line, col(i))
            # keep line numbering accurate across the comment
            for j in range(i, end + 2):
                if text[j] == "\n":
                    line += 1
                    line_start = j + 1
            i = end + 2
            continue
        if ch == "?":
            m = _IDENT_RE.match(text, i + 1)
            if not m:
                raise LexicalError("expected variable name after '?'", line, col(i))
            tokens.append(Token(VAR, "?" + m.group(0), line, col(i)))
            i = m.end()
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            m = _NUMBER_RE.match(text, i)
            tokens.append(Token(NUMBER, m.group(0), line, col(i)))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(text, i)
            value = m.group(0)
            # a trailing prime belongs to CPF left-hand sides; split it off
            if value.endswith("'"):
                tokens.append(Token(IDENT, value[:-1], line, col(i)))
                tokens.append(Token(PUNCT, "'", line, col(m.end() - 1)))
            else:
                tokens.append(Token(IDENT, value, line, col(i)))
            i = m.end()
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(PUNCT, sym, line, col(i)))
                i += len(sym)
                break
        else:
            raise LexicalError(f"unexpected character {ch!r}", line, col(i))

    tokens.append(Token(EOF, "", line, col(i)))
    return tokens
