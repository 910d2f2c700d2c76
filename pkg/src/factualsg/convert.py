"""Deterministic FACTUAL-MR to scene-graph conversion."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import EmptySlot
from .lexicons import MorphTable, default_lexicons, default_morphology
from .mr import MANY, AttributeFact, MRGraph, ObjectRef, Quantifier, RelationFact, VerbSlot
from .sg import HAS_ATTRIBUTE, SceneGraph, SGFact, make_fact

_VOWELS = set("aeiou")


def past_participle(lemma: str, morphology: MorphTable) -> str:
    if lemma in morphology.participles:
        return morphology.participles[lemma]
    if lemma.endswith("e"):
        return lemma + "d"
    if len(lemma) > 1 and lemma.endswith("y") and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ied"
    return lemma + "ed"


def realize_predicate(
    verb: Optional[VerbSlot], preposition: Optional[str], morphology: Optional[MorphTable] = None
) -> str:
    """Compose the relation phrase: ``hold``, ``filled with``, ``on``."""
    if verb is None and preposition is None:
        raise EmptySlot("predicate needs a verb or a preposition")
    parts = []
    if verb is not None:
        if verb.passive:
            parts.append(past_participle(verb.lemma, morphology or default_morphology()))
        else:
            parts.append(verb.lemma)
    if preposition is not None:
        parts.append(preposition)
    return " ".join(parts)


def singularize(name: str, plurals: Mapping[str, str]) -> str:
    """Singularize the head (last word) of an object name.

    Irregular table first, then suffix rules; names no rule covers are kept.
    """
    head, sep, last = name.rpartition(" ")
    if last in plurals:
        single = plurals[last]
    elif last.endswith("ies") and len(last) > 3:
        single = last[:-3] + "y"
    elif last.endswith(("ses", "xes", "ches", "shes")):
        single = last[:-2]
    elif last.endswith("s") and not last.endswith("ss") and len(last) > 1:
        single = last[:-1]
    else:
        single = last
    return head + sep + single


# Exact(n) rendered as a digit string; set numerals to e.g. {3: "three"} for words.
@dataclass(frozen=True)
class ConvertOptions:
    morphology: MorphTable = field(default_factory=default_morphology)
    modifiers: Mapping[str, str] = field(default_factory=lambda: default_lexicons().modifiers)
    numerals: Mapping[int, str] = field(default_factory=dict)
    distributive: bool = True


def quantifier_attribute(q: Optional[Quantifier], options: ConvertOptions) -> Optional[str]:
    """Attribute text for a quantifier, or None when nothing is emitted."""
    if q is None:
        return None
    if q.is_exact:
        number = options.numerals.get(q.count, str(q.count))
        if q.modifier:
            return f"{number} {options.modifiers.get(q.modifier, q.modifier)}"
        return number
    if q.count == MANY:
        return MANY
    return None


def is_distributive(fact: RelationFact) -> bool:
    qs, qo = fact.quantifier_sub, fact.quantifier_obj
    return (
        qs is not None and qo is not None
        and qs.is_exact and qo.is_exact
        and qs.modifier is None and qo.modifier is None
        and qs.count == qo.count and qs.count >= 2
    )


class _Individuals:
    """Allocates distinct individual node names for distributed collectives.

    The same collective object maps to the same individuals in every fact.
    Names already used by collective nodes of the graph are skipped.
    """

    def __init__(self, reserved: set[str], plurals: Mapping[str, str]):
        self._reserved = reserved
        self._plurals = plurals
        self._next: dict[str, int] = {}
        self._assigned: dict[ObjectRef, list[str]] = {}

    def get(self, ref: ObjectRef, n: int) -> list[str]:
        names = self._assigned.setdefault(ref, [])
        base = singularize(ref.name, self._plurals)
        while len(names) < n:
            k = self._next.get(base, 0)
            self._next[base] = k + 1
            candidate = f"{base}:{k}" if k else base
            if candidate not in self._reserved:
                names.append(candidate)
        return names[:n]


def convert(graph: MRGraph, options: Optional[ConvertOptions] = None) -> SceneGraph:
    """Map an MR graph to a scene graph.

    Relations are collective unless both endpoints carry the same exact,
    modifier-free count n >= 2, in which case n individual pairs are emitted
    and no quantifier attributes are added for those endpoints.
    """
    options = options or ConvertOptions()
    facts: set[SGFact] = set()

    reserved = set()
    for fact in graph.facts:
        if isinstance(fact, AttributeFact):
            reserved.add(str(fact.object))
        elif not (options.distributive and is_distributive(fact)):
            reserved.update((str(fact.subject), str(fact.object)))
    individuals = _Individuals(reserved, options.morphology.plurals)

    def add_quantifier(ref: ObjectRef, q: Optional[Quantifier]) -> None:
        text = quantifier_attribute(q, options)
        if text is not None:
            facts.add(make_fact(str(ref), HAS_ATTRIBUTE, text))

    for fact in graph.facts:
        if isinstance(fact, AttributeFact):
            facts.add(make_fact(str(fact.object), HAS_ATTRIBUTE, fact.attribute))
            add_quantifier(fact.object, fact.quantifier)
            continue
        predicate = realize_predicate(fact.verb, fact.preposition, options.morphology)
        if options.distributive and is_distributive(fact):
            n = fact.quantifier_sub.count
            subjects = individuals.get(fact.subject, n)
            objects = individuals.get(fact.object, n)
            for s, o in zip(subjects, objects):
                facts.add(make_fact(s, predicate, o))
        else:
            facts.add(make_fact(str(fact.subject), predicate, str(fact.object)))
            add_quantifier(fact.subject, fact.quantifier_sub)
            add_quantifier(fact.object, fact.quantifier_obj)
    return SceneGraph(frozenset(facts))
