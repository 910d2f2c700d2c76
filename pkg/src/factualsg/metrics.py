"""Graph-comparison, correlation, retrieval and lexical-diversity metrics."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Sequence

import numpy as np

from ._text import normalize
from .embeddings import EmbeddingStore, lookup
from .errors import (
    AllDistinct,
    DegenerateM,
    EmptyInput,
    EmptyReference,
    FactualError,
    GoldMissing,
    LengthMismatch,
    NegativeInput,
    NeverCrosses,
    ZeroVariance,
)
from .sg import SceneGraph, SpiceComponents, decompose


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, p: float, r: float) -> "PRF":
        return cls(p, r, 2 * p * r / (p + r) if p + r > 0 else 0.0)


def spice_f1(candidate: SceneGraph, reference: SceneGraph) -> PRF:
    """SPICE precision/recall/F1 over exactly matching tuples.

    Objects, attribute pairs and relation triples are matched within their own
    kind. Two empty graphs score 1; one empty graph scores 0.
    """
    c, r = decompose(candidate), decompose(reference)
    nc, nr = len(c), len(r)
    if nc == 0 and nr == 0:
        return PRF(1.0, 1.0, 1.0)
    if nc == 0 or nr == 0:
        return PRF(0.0, 0.0, 0.0)
    matched = (
        len(c.objects & r.objects)
        + len(c.attribute_pairs & r.attribute_pairs)
        + len(c.relation_triples & r.relation_triples)
    )
    return PRF.from_pr(matched / nc, matched / nr)


def _canonical(graph: SceneGraph) -> frozenset:
    return frozenset(tuple(normalize(x) for x in f) for f in graph.facts)


def set_match(candidate: SceneGraph, reference: SceneGraph) -> bool:
    return _canonical(candidate) == _canonical(reference)


def _unit_rows(texts: Sequence[str], store: EmbeddingStore) -> np.ndarray:
    m = np.vstack([lookup(store, t) for t in texts])
    return m / np.linalg.norm(m, axis=1, keepdims=True)


def _component_texts(components: SpiceComponents) -> list[str]:
    return [text for _, text in components.tagged()]


def _best_match_scores(cand: SpiceComponents, ref: SpiceComponents, store: EmbeddingStore) -> np.ndarray:
    c = _unit_rows(_component_texts(cand), store)
    r = _unit_rows(_component_texts(ref), store)
    return np.clip((c @ r.T).max(axis=1), 0.0, 1.0)


def soft_spice(candidate: SceneGraph, reference: SceneGraph, store: EmbeddingStore) -> float:
    """Mean over candidate components of the best (non-negative) cosine to a reference component."""
    cand, ref = decompose(candidate), decompose(reference)
    if len(ref) == 0:
        raise EmptyReference("reference graph has no components")
    if len(cand) == 0:
        return 0.0
    return float(np.mean(_best_match_scores(cand, ref, store)))


def image_grounding(candidate: SceneGraph, image_id: str, store: EmbeddingStore) -> float:
    """Mean non-negative cosine between candidate components and the image vector."""
    image = store.image(image_id)
    cand = decompose(candidate)
    if len(cand) == 0:
        return 0.0
    c = _unit_rows(_component_texts(cand), store)
    sims = c @ (image / np.linalg.norm(image))
    return float(np.mean(np.clip(sims, 0.0, 1.0)))


def soft_spice_img(candidate: SceneGraph, reference: SceneGraph, image_id: str, store: EmbeddingStore) -> float:
    return harmonic_combine(soft_spice(candidate, reference, store), image_grounding(candidate, image_id, store))


def harmonic_combine(a: float, b: float) -> float:
    if a < 0 or b < 0:
        raise NegativeInput(f"harmonic mean needs non-negative inputs, got {a}, {b}")
    if a + b == 0:
        return 0.0
    return 2 * a * b / (a + b)


def _paired(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise LengthMismatch(f"lengths {x.shape} and {y.shape} differ")
    if len(x) < 2:
        raise LengthMismatch("need at least two points")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x, y = _paired(xs, ys)
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("pearson correlation undefined for constant input")
    return float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def kendall_tau_c(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Stuart's tau-c from concordant minus discordant pair counts."""
    x, y = _paired(xs, ys)
    n = len(x)
    m = min(len(np.unique(x)), len(np.unique(y)))
    if m < 2:
        raise DegenerateM("tau-c needs at least two distinct values in both lists")
    iu = np.triu_indices(n, k=1)
    s = np.sign(x[:, None] - x[None, :])[iu] * np.sign(y[:, None] - y[None, :])[iu]
    c_minus_d = int(np.sum(s > 0)) - int(np.sum(s < 0))
    return float(c_minus_d * 2 * m / (n * n * (m - 1)))


@dataclass(frozen=True)
class ScoredPair:
    true_score: float
    foil_score: float


class TiePolicy(str, enum.Enum):
    LOSE = "lose"
    HALF = "half"


def foil_accuracy(pairs: Iterable[ScoredPair], tie_policy: TiePolicy = TiePolicy.LOSE) -> float:
    pairs = list(pairs)
    if not pairs:
        raise EmptyInput("no scored pairs")
    tie_credit = 0.5 if TiePolicy(tie_policy) is TiePolicy.HALF else 0.0
    total = 0.0
    for p in pairs:
        if p.true_score > p.foil_score:
            total += 1.0
        elif p.true_score == p.foil_score:
            total += tie_credit
    return total / len(pairs)


def rank_items(query_scores: Iterable[tuple[Hashable, float]]) -> list[Hashable]:
    """Item ids by descending score, ties by ascending id."""
    return [item for item, _ in sorted(query_scores, key=lambda p: (-p[1], p[0]))]


def recall_at_k(query_scores: Iterable[tuple[Hashable, float]], gold_id: Hashable, k: int) -> bool:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ranking = rank_items(query_scores)
    try:
        return ranking.index(gold_id) < k
    except ValueError:
        raise GoldMissing(f"gold item {gold_id!r} not among scored items") from None


def mean_recall_at_k(queries: Iterable[tuple[Iterable[tuple[Hashable, float]], Hashable]], k: int) -> float:
    hits = [recall_at_k(scores, gold, k) for scores, gold in queries]
    if not hits:
        raise EmptyInput("no queries")
    return sum(hits) / len(hits)


def yules_i(tokens: Sequence[Hashable]) -> float:
    if not tokens:
        raise EmptyInput("no tokens")
    freqs = Counter(tokens)
    m1 = len(tokens)
    spectrum = Counter(freqs.values())
    m2 = sum(f * f * v for f, v in spectrum.items())
    if m2 == m1:
        raise AllDistinct("Yule's I undefined when every token is distinct")
    return m1 * m1 / (m2 - m1)


def ttr(tokens: Sequence[Hashable]) -> float:
    if not tokens:
        raise EmptyInput("no tokens")
    return len(set(tokens)) / len(tokens)


def _mtld_factors(tokens: Sequence[Hashable], threshold: float) -> float:
    factors = 0.0
    types: set = set()
    count = 0
    current = 1.0
    for tok in tokens:
        count += 1
        types.add(tok)
        current = len(types) / count
        if current < threshold:
            factors += 1.0
            types.clear()
            count = 0
            current = 1.0
    if count:
        factors += (1.0 - current) / (1.0 - threshold)
    return factors


def mtld_passes(tokens: Sequence[Hashable], threshold: float = 0.72) -> tuple[float, float]:
    """Forward and reverse MTLD values."""
    if not tokens:
        raise EmptyInput("no tokens")
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    tokens = list(tokens)
    fwd = _mtld_factors(tokens, threshold)
    rev = _mtld_factors(tokens[::-1], threshold)
    if fwd == 0 or rev == 0:
        raise NeverCrosses("type-token ratio never drops below the threshold")
    return len(tokens) / fwd, len(tokens) / rev


def mtld(tokens: Sequence[Hashable], threshold: float = 0.72) -> float:
    fwd, rev = mtld_passes(tokens, threshold)
    return (fwd + rev) / 2


def safe(fn, *args, **kwargs) -> tuple[Optional[float], Optional[str]]:
    """Run a metric, returning ``(value, None)`` or ``(None, error_code)``."""
    try:
        return fn(*args, **kwargs), None
    except FactualError as exc:
        return None, exc.code
