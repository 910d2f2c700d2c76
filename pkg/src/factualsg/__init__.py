"""FACTUAL-MR parsing, deterministic scene-graph conversion and graph metrics."""

from .convert import ConvertOptions, convert, realize_predicate
from .embeddings import EmbeddingStore, cosine, load_store, lookup
from .lexicons import Lexicons, MorphTable, default_lexicons, default_morphology
from .metrics import (
    PRF,
    ScoredPair,
    TiePolicy,
    foil_accuracy,
    harmonic_combine,
    kendall_tau_c,
    mtld,
    pearson,
    recall_at_k,
    set_match,
    soft_spice,
    soft_spice_img,
    spice_f1,
    ttr,
    yules_i,
)
from .mr import (
    AttributeFact,
    MRGraph,
    ObjectRef,
    Quantifier,
    RelationFact,
    VerbSlot,
    parse_mr,
    serialize_mr,
    validate_mr,
)
from .sg import SceneGraph, SGFact, SpiceComponents, decompose, parse_sg, serialize_sg

__version__ = "0.1.0"
