"""File-backed text/image embeddings, cosine similarity and a hash fallback.

File format: one entry per line, ``key<TAB>v1 v2 ... vd``. Keys are
lowercased and whitespace-collapsed on load and on lookup.
"""

from __future__ import annotations

import hashlib
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np

from ._text import normalize
from .errors import DimensionMismatch, EmptyFile, FormatError, MissingImage, MissingKey, ZeroVector

log = logging.getLogger(__name__)

ZERO_NORM = 1e-12
FALLBACK_DIM = 64
_MASK64 = (1 << 64) - 1


def _read_vectors(path: Union[str, Path], normalize_keys: bool, diagnostics: list[str]) -> dict[str, np.ndarray]:
    entries: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            key, sep, values = line.partition("\t")
            if not sep or not key.strip():
                raise FormatError(f"{path}:{lineno}: expected 'key<TAB>v1 ... vd'")
            try:
                vec = np.array([float(x) for x in values.split()], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric field ({exc})") from None
            if vec.size == 0 or not np.all(np.isfinite(vec)):
                raise FormatError(f"{path}:{lineno}: empty or non-finite vector")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise FormatError(f"{path}:{lineno}: ragged row of length {vec.size}, expected {dim}")
            if np.linalg.norm(vec) <= ZERO_NORM:
                raise ZeroVector(f"{path}:{lineno}: zero vector for {key!r}")
            key = normalize(key) if normalize_keys else key.strip()
            if key in entries:
                msg = f"{path}:{lineno}: duplicate key {key!r}, keeping last"
                diagnostics.append(msg)
                log.warning(msg)
            vec.setflags(write=False)
            entries[key] = vec
    if not entries:
        raise EmptyFile(f"{path}: no embeddings")
    return entries


@dataclass(frozen=True)
class EmbeddingStore:
    """Read-only text and image vectors of one dimension."""

    dimension: int
    entries: Mapping[str, np.ndarray] = field(default_factory=dict)
    image_entries: Mapping[str, np.ndarray] = field(default_factory=dict)
    fallback: bool = True
    diagnostics: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise FormatError("dimension must be positive")
        for table in (self.entries, self.image_entries):
            for key, vec in table.items():
                if len(vec) != self.dimension:
                    raise DimensionMismatch(f"{key!r} has dimension {len(vec)}, store has {self.dimension}")

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def empty(cls, dimension: int = FALLBACK_DIM) -> "EmbeddingStore":
        """A store with no entries that embeds everything through the fallback."""
        return cls(dimension, fallback=True)

    def lookup(self, text: str) -> np.ndarray:
        return lookup(self, text)

    def image(self, image_id: str) -> np.ndarray:
        try:
            return self.image_entries[str(image_id).strip()]
        except KeyError:
            raise MissingImage(f"no embedding for image {image_id!r}") from None


def load_store(
    path: Optional[Union[str, Path]] = None,
    image_path: Optional[Union[str, Path]] = None,
    fallback: bool = True,
) -> EmbeddingStore:
    """Load text (and optionally image) embeddings; both must share a dimension."""
    diagnostics: list[str] = []
    entries = _read_vectors(path, True, diagnostics) if path is not None else {}
    images = _read_vectors(image_path, False, diagnostics) if image_path is not None else {}
    dims = {len(v) for v in entries.values()} | {len(v) for v in images.values()}
    if len(dims) > 1:
        raise DimensionMismatch(f"text and image embeddings differ in dimension: {sorted(dims)}")
    dim = dims.pop() if dims else FALLBACK_DIM
    return EmbeddingStore(dim, entries, images, fallback, tuple(diagnostics))


def _splitmix64(state: int):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def fallback_vector(text: str, dimension: int = FALLBACK_DIM) -> np.ndarray:
    """Unit vector seeded by a 64-bit BLAKE2b hash of the normalized text.

    Pure integer arithmetic (SplitMix64 + Box-Muller), so the result does not
    depend on platform or numpy version.
    """
    seed = int.from_bytes(hashlib.blake2b(normalize(text).encode("utf-8"), digest_size=8).digest(), "little")
    rng = _splitmix64(seed)
    out = []
    while len(out) < dimension:
        u1 = (next(rng) >> 11) * 2.0**-53
        u2 = (next(rng) >> 11) * 2.0**-53
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        out.extend((r * math.cos(2 * math.pi * u2), r * math.sin(2 * math.pi * u2)))
    vec = np.array(out[:dimension])
    norm = np.linalg.norm(vec)
    if norm <= ZERO_NORM:  # astronomically unlikely
        vec = np.ones(dimension)
        norm = np.linalg.norm(vec)
    return vec / norm


def lookup(store: EmbeddingStore, text: str) -> np.ndarray:
    key = normalize(text)
    vec = store.entries.get(key)
    if vec is not None:
        return vec
    if not store.fallback:
        raise MissingKey(f"no embedding for {key!r}")
    return fallback_vector(key, store.dimension)


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu <= ZERO_NORM or nv <= ZERO_NORM:
        raise ZeroVector("cosine of a zero vector")
    return float(min(1.0, max(-1.0, np.dot(u, v) / (nu * nv))))
