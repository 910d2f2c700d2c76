"""Closed lexicons: prepositions, quantifier modifiers, verbs, morphology.

Files are UTF-8, one entry per line. Blank lines and lines starting with
``#`` are ignored. Two-column files use a single TAB separator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from ._text import normalize
from .errors import FormatError

PathLike = Union[str, Path]


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _read(path: Optional[PathLike], bundled: str) -> str:
    if path is None:
        return resources.files("factualsg.data").joinpath(bundled).read_text("utf-8")
    return Path(path).read_text(encoding="utf-8")


def parse_list(text: str) -> frozenset[str]:
    return frozenset(normalize(line) for _, line in _lines(text))


def parse_pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in _lines(text):
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise FormatError(f"line {lineno}: expected 'key<TAB>value', got {line!r}")
        out[normalize(parts[0])] = normalize(parts[1])
    return out


@dataclass(frozen=True)
class Lexicons:
    """Read-only annotation vocabularies used by the MR parser and validator."""

    prepositions: frozenset[str]
    modifiers: Mapping[str, str]
    verbs: Optional[frozenset[str]] = None

    @classmethod
    def load(
        cls,
        prepositions: Optional[PathLike] = None,
        modifiers: Optional[PathLike] = None,
        verbs: Optional[PathLike] = None,
    ) -> "Lexicons":
        """Load lexicon files; ``None`` selects the bundled default (no verb list)."""
        return cls(
            prepositions=parse_list(_read(prepositions, "prepositions.txt")),
            modifiers=parse_pairs(_read(modifiers, "modifiers.tsv")),
            verbs=parse_list(Path(verbs).read_text(encoding="utf-8")) if verbs else None,
        )


def default_lexicons() -> Lexicons:
    return Lexicons.load()


@dataclass(frozen=True)
class MorphTable:
    """Irregular past participles and plural exceptions."""

    participles: Mapping[str, str] = field(default_factory=dict)
    plurals: Mapping[str, str] = field(default_factory=dict)

    @classmethod
    def load(
        cls, morphology: Optional[PathLike] = None, plurals: Optional[PathLike] = None
    ) -> "MorphTable":
        return cls(
            participles=parse_pairs(_read(morphology, "morphology.tsv")),
            plurals=parse_pairs(_read(plurals, "plurals.tsv")),
        )


def default_morphology() -> MorphTable:
    return MorphTable.load()
