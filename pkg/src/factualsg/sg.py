"""Scene graphs as sets of linearized ``(subject, predicate, object)`` facts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from ._text import normalize, split_facts
from .errors import TextSyntaxError

HAS_ATTRIBUTE = "has_attribute"


class SGFact(NamedTuple):
    subject: str
    predicate: str
    object: str

    @property
    def is_attribute(self) -> bool:
        return self.predicate == HAS_ATTRIBUTE

    def __str__(self) -> str:
        return f"({self.subject}, {self.predicate}, {self.object})"


def make_fact(subject: str, predicate: str, obj: str) -> SGFact:
    """Build a normalized fact, rejecting empty fields and reserved characters."""
    fields = tuple(normalize(f) for f in (subject, predicate, obj))
    for f in fields:
        if not f:
            raise TextSyntaxError("empty scene-graph field")
        if any(ch in f for ch in ",()"):
            raise TextSyntaxError(f"scene-graph field {f!r} contains ',', '(' or ')'")
    return SGFact(*fields)


@dataclass(frozen=True)
class SceneGraph:
    facts: frozenset[SGFact] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "facts", frozenset(self.facts))

    @classmethod
    def of(cls, facts: Iterable[tuple[str, str, str]]) -> "SceneGraph":
        return cls(frozenset(make_fact(*f) for f in facts))

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> list[SGFact]:
        return sorted(self.facts)

    def union(self, other: "SceneGraph") -> "SceneGraph":
        return SceneGraph(self.facts | other.facts)


def parse_sg(text: str) -> SceneGraph:
    facts = set()
    for fields in split_facts(text):
        if len(fields) != 3:
            raise TextSyntaxError(f"scene-graph fact must have 3 fields, got {len(fields)}: {fields}")
        facts.add(make_fact(*fields))
    return SceneGraph(frozenset(facts))


def serialize_sg(graph: SceneGraph) -> str:
    return ", ".join(str(f) for f in graph.sorted())


@dataclass(frozen=True)
class SpiceComponents:
    """Objects, "object attribute" pairs and "subject predicate object" triples."""

    objects: frozenset[str]
    attribute_pairs: frozenset[str]
    relation_triples: frozenset[str]

    def tagged(self) -> list[tuple[str, str]]:
        """All components as ``(kind, text)``, sorted; kinds keep the three sets disjoint."""
        return sorted(
            [("object", t) for t in self.objects]
            + [("attribute", t) for t in self.attribute_pairs]
            + [("relation", t) for t in self.relation_triples]
        )

    def __len__(self) -> int:
        return len(self.objects) + len(self.attribute_pairs) + len(self.relation_triples)


def decompose(graph: SceneGraph) -> SpiceComponents:
    objects, pairs, triples = set(), set(), set()
    for f in graph.facts:
        s, p, o = (normalize(x) for x in f)
        objects.add(s)
        if p == HAS_ATTRIBUTE:
            pairs.add(f"{s} {o}")
        else:
            objects.add(o)
            triples.add(f"{s} {p} {o}")
    return SpiceComponents(frozenset(objects), frozenset(pairs), frozenset(triples))
