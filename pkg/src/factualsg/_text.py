"""Tokenizer shared by the MR and scene-graph grammars."""

from __future__ import annotations

import re

from .errors import TextSyntaxError

_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase and collapse interior whitespace to single spaces."""
    return _WS.sub(" ", text).strip().lower()


def split_facts(text: str) -> list[list[str]]:
    """Split ``(a, b), (c, d, e)`` into per-fact lists of stripped fields.

    Facts must be separated by exactly one comma; parentheses do not nest.
    Fields are returned verbatim apart from surrounding whitespace, so callers
    decide how to treat empty ones.
    """
    facts: list[list[str]] = []
    i, n = 0, len(text)
    expect_fact = True  # False right after a fact until a separating comma
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            if not expect_fact:
                raise TextSyntaxError(f"missing comma before fact at offset {i}")
            end = i + 1
            while end < n and text[end] not in "()":
                end += 1
            if end == n:
                raise TextSyntaxError(f"unbalanced '(' at offset {i}")
            if text[end] == "(":
                raise TextSyntaxError(f"nested '(' at offset {end}")
            fields = [f.strip() for f in text[i + 1:end].split(",")]
            for f in fields:
                if not f:
                    raise TextSyntaxError(f"empty field in fact at offset {i}")
            facts.append(fields)
            expect_fact = False
            i = end + 1
        elif ch == ",":
            if expect_fact:
                raise TextSyntaxError(f"unexpected ',' at offset {i}")
            expect_fact = True
            i += 1
        elif ch == ")":
            raise TextSyntaxError(f"unbalanced ')' at offset {i}")
        else:
            raise TextSyntaxError(f"text outside parentheses at offset {i}: {ch!r}")
    if facts and expect_fact:
        raise TextSyntaxError("trailing ',' after last fact")
    return facts
