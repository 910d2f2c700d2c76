"""FACTUAL-MR types, text grammar and lexicon validator.

Grammar (see docs/grammar.md for the EBNF)::

    (men, watch, men:1), (3, tennis balls, has_attribute, white),
    (cup, p:fill, with, water), (3, men, read, 3, books)

A fact holding the field ``has_attribute`` is an attribute fact; anything
else is a relation fact whose one or two middle fields are resolved to a
verb and/or preposition with the preposition lexicon.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Literal, Optional, Union

from ._text import normalize, split_facts
from .errors import AmbiguousSlot, DuplicateFact, TextSyntaxError, UnknownModifier
from .lexicons import Lexicons

HAS_ATTRIBUTE = "has_attribute"
MANY = "many"
UNCOUNTABLE = "unaccountable"
PASSIVE_PREFIX = "p:"

_QUANT_RE = re.compile(r"^([0-9]+)([a-z]*)$")
_FORBIDDEN = set(",()")


def looks_like_quantifier(field_text: str) -> bool:
    return bool(_QUANT_RE.match(field_text)) or field_text in (MANY, UNCOUNTABLE)


def _check_token(kind: str, value: str, colon_ok: bool = False) -> None:
    if not isinstance(value, str) or not value.strip():
        raise TextSyntaxError(f"empty {kind}")
    if value != normalize(value):
        raise TextSyntaxError(f"{kind} {value!r} is not lowercase/space-normalized")
    bad = _FORBIDDEN if colon_ok else _FORBIDDEN | {":"}
    if any(ch in bad for ch in value):
        raise TextSyntaxError(f"{kind} {value!r} contains a reserved character")


@dataclass(frozen=True)
class ObjectRef:
    """A collective object; ``suffix_id`` separates same-named groups."""

    name: str
    suffix_id: int = 0

    def __post_init__(self):
        _check_token("object name", self.name)
        if looks_like_quantifier(self.name):
            raise AmbiguousSlot(f"object name {self.name!r} reads as a quantifier")
        if isinstance(self.suffix_id, bool) or not isinstance(self.suffix_id, int) or self.suffix_id < 0:
            raise TextSyntaxError(f"suffix must be a non-negative int, got {self.suffix_id!r}")

    def __str__(self) -> str:
        return f"{self.name}:{self.suffix_id}" if self.suffix_id else self.name

    @classmethod
    def parse(cls, text: str) -> "ObjectRef":
        name, sep, suffix = text.partition(":")
        if not sep:
            return cls(name.strip())
        if not suffix.isdigit():
            raise TextSyntaxError(f"bad object suffix in {text!r}")
        return cls(name.strip(), int(suffix))


Count = Union[int, Literal["many", "unaccountable"]]


@dataclass(frozen=True)
class Quantifier:
    """Exact count (optionally with a modifier key), ``many`` or ``unaccountable``."""

    count: Count
    modifier: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.count, bool):
            raise TextSyntaxError("quantifier count cannot be a bool")
        if isinstance(self.count, int):
            if self.count < 1:
                raise TextSyntaxError(f"quantifier count must be positive, got {self.count}")
            if self.modifier is not None and not re.fullmatch(r"[a-z]+", self.modifier):
                raise TextSyntaxError(f"bad modifier key {self.modifier!r}")
        elif self.count in (MANY, UNCOUNTABLE):
            if self.modifier is not None:
                raise TextSyntaxError(f"{self.count!r} cannot take a modifier")
        else:
            raise TextSyntaxError(f"bad quantifier count {self.count!r}")

    @property
    def is_exact(self) -> bool:
        return isinstance(self.count, int)

    def __str__(self) -> str:
        if self.is_exact:
            return f"{self.count}{self.modifier or ''}"
        return self.count

    @classmethod
    def parse(cls, text: str, lexicons: Lexicons) -> "Quantifier":
        if text in (MANY, UNCOUNTABLE):
            return cls(text)
        m = _QUANT_RE.match(text)
        if not m:
            raise TextSyntaxError(f"{text!r} is not a quantifier")
        n, key = int(m.group(1)), m.group(2) or None
        if key is not None and key not in lexicons.modifiers:
            raise UnknownModifier(f"quantifier modifier {key!r} not in lexicon")
        return cls(n, key)


@dataclass(frozen=True)
class VerbSlot:
    lemma: str
    passive: bool = False

    def __post_init__(self):
        _check_token("verb", self.lemma)
        if " " in self.lemma:
            raise AmbiguousSlot(f"verb {self.lemma!r} contains whitespace")
        if looks_like_quantifier(self.lemma) or self.lemma == HAS_ATTRIBUTE:
            raise AmbiguousSlot(f"{self.lemma!r} cannot be a verb")

    def __str__(self) -> str:
        return PASSIVE_PREFIX + self.lemma if self.passive else self.lemma

    @classmethod
    def parse(cls, text: str) -> "VerbSlot":
        if text.startswith(PASSIVE_PREFIX):
            return cls(text[len(PASSIVE_PREFIX):], True)
        return cls(text)


@dataclass(frozen=True)
class AttributeFact:
    object: ObjectRef
    attribute: str
    quantifier: Optional[Quantifier] = None

    def __post_init__(self):
        _check_token("attribute", self.attribute, colon_ok=True)
        if self.attribute == HAS_ATTRIBUTE:
            raise TextSyntaxError("attribute cannot be 'has_attribute'")

    def fields(self) -> list[str]:
        head = [str(self.quantifier)] if self.quantifier else []
        return head + [str(self.object), HAS_ATTRIBUTE, self.attribute]


@dataclass(frozen=True)
class RelationFact:
    subject: ObjectRef
    object: ObjectRef
    verb: Optional[VerbSlot] = None
    preposition: Optional[str] = None
    quantifier_sub: Optional[Quantifier] = None
    quantifier_obj: Optional[Quantifier] = None

    def __post_init__(self):
        if self.verb is None and self.preposition is None:
            raise TextSyntaxError("relation fact needs a verb or a preposition")
        if self.preposition is not None:
            _check_token("preposition", self.preposition)
            if looks_like_quantifier(self.preposition) or self.preposition == HAS_ATTRIBUTE:
                raise AmbiguousSlot(f"{self.preposition!r} cannot be a preposition")

    def fields(self) -> list[str]:
        out = []
        if self.quantifier_sub:
            out.append(str(self.quantifier_sub))
        out.append(str(self.subject))
        if self.verb:
            out.append(str(self.verb))
        if self.preposition:
            out.append(self.preposition)
        if self.quantifier_obj:
            out.append(str(self.quantifier_obj))
        out.append(str(self.object))
        return out


MRFact = Union[AttributeFact, RelationFact]


def fact_to_text(fact: MRFact) -> str:
    return "(" + ", ".join(fact.fields()) + ")"


@dataclass(frozen=True)
class MRGraph:
    facts: tuple[MRFact, ...] = ()
    source_caption: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(self.facts))
        seen = set()
        for fact in self.facts:
            key = fact_to_text(fact)
            if key in seen:
                raise DuplicateFact(f"duplicate fact {key}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)


def _parse_attribute(fields: list[str], lexicons: Lexicons) -> AttributeFact:
    if len(fields) == 3 and fields[1] == HAS_ATTRIBUTE:
        quant, obj, attr = None, fields[0], fields[2]
    elif len(fields) == 4 and fields[2] == HAS_ATTRIBUTE:
        if not looks_like_quantifier(fields[0]):
            raise TextSyntaxError(f"expected a quantifier, got {fields[0]!r}")
        quant, obj, attr = Quantifier.parse(fields[0], lexicons), fields[1], fields[3]
    else:
        raise TextSyntaxError(f"bad attribute fact arity or layout: {fields}")
    return AttributeFact(ObjectRef.parse(obj), attr, quant)


def _parse_relation(fields: list[str], lexicons: Lexicons) -> RelationFact:
    if len(fields) < 3:
        raise TextSyntaxError(f"relation fact needs at least 3 fields: {fields}")
    rest = fields
    q_sub = q_obj = None
    if looks_like_quantifier(rest[0]):
        q_sub = Quantifier.parse(rest[0], lexicons)
        rest = rest[1:]
    if len(rest) >= 3 and looks_like_quantifier(rest[-2]):
        q_obj = Quantifier.parse(rest[-2], lexicons)
        middle = rest[1:-2]
    else:
        middle = rest[1:-1]
    if not rest or not middle:
        raise TextSyntaxError(f"relation fact lacks a verb or preposition: {fields}")
    subject, obj = ObjectRef.parse(rest[0]), ObjectRef.parse(rest[-1])

    if len(middle) == 2:
        verb_text, prep = middle
        if prep.startswith(PASSIVE_PREFIX):
            raise AmbiguousSlot(f"passive marker in preposition slot: {prep!r}")
        verb = VerbSlot.parse(verb_text)
    elif len(middle) == 1:
        (only,) = middle
        if not only.startswith(PASSIVE_PREFIX) and only in lexicons.prepositions:
            verb, prep = None, only
        elif " " in only:
            raise AmbiguousSlot(f"{only!r} is neither a known preposition nor a verb lemma")
        else:
            verb, prep = VerbSlot.parse(only), None
    else:
        raise TextSyntaxError(f"too many middle fields: {middle}")
    return RelationFact(subject, obj, verb, prep, q_sub, q_obj)


def parse_mr(text: str, lexicons: Lexicons, source_caption: Optional[str] = None) -> MRGraph:
    """Parse MR surface text into an :class:`MRGraph`.

    Input is lowercased and whitespace-collapsed first. Raises
    ``TextSyntaxError``, ``UnknownModifier`` or ``AmbiguousSlot``.
    """
    facts = []
    for fields in split_facts(normalize(text)):
        if HAS_ATTRIBUTE in fields:
            facts.append(_parse_attribute(fields, lexicons))
        else:
            facts.append(_parse_relation(fields, lexicons))
    return MRGraph(tuple(facts), source_caption)


def serialize_mr(graph: MRGraph) -> str:
    return ", ".join(fact_to_text(f) for f in graph.facts)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    fact_index: int
    value: str = ""

    def to_dict(self) -> dict:
        return {"code": self.code, "fact": self.fact_index, "value": self.value, "message": self.message}


def _non_lemma_suspect(lemma: str) -> bool:
    if lemma.endswith("ing") and len(lemma) > 4:
        return True
    if lemma.endswith("ed") and not lemma.endswith("eed") and len(lemma) > 3:
        return True
    return lemma.endswith("s") and not lemma.endswith(("ss", "us", "is")) and len(lemma) > 3


def validate_mr(graph: MRGraph, lexicons: Lexicons) -> list[Diagnostic]:
    """Check a parsed graph against the closed lexicons.

    Reports unknown prepositions, unknown verbs (only when a verb lexicon is
    loaded), verbs that do not look lemmatized, and object identifiers that
    carry conflicting explicit quantifiers. The last case means one suffix is
    standing in for two different groups (``DuplicateSuffix``).
    """
    diags: list[Diagnostic] = []
    quants: dict[ObjectRef, dict[str, int]] = defaultdict(dict)

    for i, fact in enumerate(graph.facts):
        if isinstance(fact, AttributeFact):
            pairs = [(fact.object, fact.quantifier)]
        else:
            pairs = [(fact.subject, fact.quantifier_sub), (fact.object, fact.quantifier_obj)]
            if fact.preposition is not None and fact.preposition not in lexicons.prepositions:
                diags.append(Diagnostic("UnknownPreposition", f"preposition {fact.preposition!r} not in lexicon", i, fact.preposition))
            if fact.verb is not None:
                lemma = fact.verb.lemma
                known = lexicons.verbs is not None and lemma in lexicons.verbs
                if lexicons.verbs is not None and not known:
                    diags.append(Diagnostic("UnknownVerb", f"verb {lemma!r} not in lexicon", i, lemma))
                if not known and _non_lemma_suspect(lemma):
                    diags.append(Diagnostic("NonLemmaVerbSuspect", f"verb {lemma!r} may not be a lemma", i, lemma))
        for ref, q in pairs:
            if q is None:
                continue
            seen = quants[ref]
            if seen and str(q) not in seen:
                first = next(iter(seen))
                diags.append(Diagnostic(
                    "DuplicateSuffix",
                    f"object {ref} quantified as both {first} and {q}; use a distinct suffix",
                    i, str(ref),
                ))
            seen.setdefault(str(q), i)
    return diags
