"""Deterministic text primitives shared by the whole package.

Tokenization, sentence segmentation, sparse TF.IDF vectors, dense
embedding averages and cosine similarity. Everything here is a pure
function of its inputs; corpus statistics and embedding stores are
built once and then treated as read-only.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "tokenize",
    "segment_passages",
    "CorpusStats",
    "build_corpus_stats",
    "EmbeddingStore",
    "tfidf_vector",
    "embed_text",
    "embed_document",
    "cosine",
    "load_stopwords",
    "default_stopwords",
]

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_SENT_END_RE = re.compile(r"[.!?]+(?=\s|$)")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric terms, in order of appearance."""
    return _TOKEN_RE.findall(text.lower())


def segment_passages(text: str) -> list[str]:
    """Split text into sentences on terminal punctuation (. ! ?).

    A sentence ends at a run of terminal punctuation followed by
    whitespace or end of text. No abbreviation dictionary is used, so
    "Mr. X" splits after "Mr." -- acceptable for short plain-text
    documents. Joining the passages with single spaces preserves the
    term sequence of the input.
    """
    if not text.strip():
        raise ValueError("cannot segment empty text")
    passages = []
    start = 0
    for m in _SENT_END_RE.finditer(text):
        chunk = text[start : m.end()].strip()
        if chunk:
            passages.append(chunk)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        passages.append(tail)
    return passages


@dataclass(frozen=True)
class CorpusStats:
    """Frozen corpus-level counts backing IDF and Dirichlet smoothing.

    collection_term_freq/collection_length may include text beyond the
    ranked documents (e.g. query text) so that every query term has a
    nonzero collection probability.
    """

    doc_count: int
    doc_freq: Mapping[str, int]
    collection_term_freq: Mapping[str, int]
    collection_length: int
    stopwords: frozenset[str] = frozenset()

    def idf(self, term: str) -> float:
        """ln(N / df) with a df floor of 1 for unseen terms."""
        df = max(1, self.doc_freq.get(term, 0))
        return math.log(self.doc_count / df)

    def collection_prob(self, term: str) -> float:
        if self.collection_length <= 0:
            return 0.0
        return self.collection_term_freq.get(term, 0) / self.collection_length

    @property
    def avg_doc_length(self) -> float:
        # Collection length may include non-document text (queries), so
        # this is an upper-bound estimate; fine at desk scale.
        return self.collection_length / self.doc_count if self.doc_count else 0.0


def build_corpus_stats(
    doc_texts: Iterable[str],
    extra_texts: Iterable[str] = (),
    stopwords: Iterable[str] = (),
) -> CorpusStats:
    """Aggregate counts over a document collection.

    ``extra_texts`` (typically the query strings) contribute to the
    collection term counts but not to document counts, which guarantees
    a positive collection probability for every query term.
    """
    doc_freq: Counter[str] = Counter()
    ctf: Counter[str] = Counter()
    n_docs = 0
    for text in doc_texts:
        toks = tokenize(text)
        n_docs += 1
        doc_freq.update(set(toks))
        ctf.update(toks)
    for text in extra_texts:
        ctf.update(tokenize(text))
    if n_docs == 0:
        raise ValueError("corpus must contain at least one document")
    return CorpusStats(
        doc_count=n_docs,
        doc_freq=dict(doc_freq),
        collection_term_freq=dict(ctf),
        collection_length=sum(ctf.values()),
        stopwords=frozenset(tokenize(" ".join(stopwords))),
    )


def _hash_unit_vector(term: str, dimension: int) -> np.ndarray:
    # Seeded by the term string only: reproducible across runs and hosts.
    digest = hashlib.sha256(term.encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "big"))
    v = rng.standard_normal(dimension)
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


@dataclass
class EmbeddingStore:
    """Term -> dense vector lookup with a configurable OOV fallback.

    fallback_mode "hash" maps unknown terms to reproducible pseudo-random
    unit vectors seeded by the term string; "error" mode skips unknown
    terms when averaging (an all-unknown text embeds to the zero vector).
    """

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    fallback_mode: str = "hash"
    _hash_cache: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.fallback_mode not in ("hash", "error"):
            raise ValueError(f"unknown fallback mode {self.fallback_mode!r}")
        for term, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise ValueError(f"vector for {term!r} has wrong dimension")

    def vector(self, term: str) -> np.ndarray | None:
        v = self.vectors.get(term)
        if v is not None:
            return v
        if self.fallback_mode == "error":
            return None
        cached = self._hash_cache.get(term)
        if cached is None:
            cached = _hash_unit_vector(term, self.dimension)
            self._hash_cache[term] = cached
        return cached

    @classmethod
    def hash_only(cls, dimension: int = 64) -> "EmbeddingStore":
        return cls(dimension=dimension, vectors={}, fallback_mode="hash")

    @classmethod
    def load(cls, path: str | Path, fallback_mode: str = "hash") -> "EmbeddingStore":
        """Read a plain-text word-vector file: ``term v1 v2 ... vD``.

        An optional first line ``count dimension`` is accepted.
        """
        vectors: dict[str, np.ndarray] = {}
        dimension = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh):
                parts = line.split()
                if not parts:
                    continue
                if lineno == 0 and len(parts) == 2:
                    try:
                        int(parts[0]), int(parts[1])
                        dimension = int(parts[1])
                        continue
                    except ValueError:
                        pass
                term, values = parts[0], parts[1:]
                vec = np.array([float(x) for x in values], dtype=float)
                if dimension is None:
                    dimension = vec.size
                elif vec.size != dimension:
                    raise ValueError(
                        f"line {lineno + 1}: expected {dimension} components, got {vec.size}"
                    )
                vectors[term] = vec
        if dimension is None:
            raise ValueError(f"no vectors found in {path}")
        return cls(dimension=dimension, vectors=vectors, fallback_mode=fallback_mode)


def tfidf_vector(text: str, stats: CorpusStats) -> dict[str, float]:
    """tf(t, text) * ln(N / df(t)); zero-weight entries are dropped."""
    counts = Counter(tokenize(text))
    vec = {}
    for term, tf in counts.items():
        w = tf * stats.idf(term)
        if w > 0:
            vec[term] = w
    return vec


def embed_text(text: str, store: EmbeddingStore) -> np.ndarray:
    """Arithmetic mean of the term vectors of ``tokenize(text)``.

    Terms are summed in sorted order so permutations of the same term
    multiset embed to bit-identical vectors.
    """
    total = np.zeros(store.dimension)
    n = 0
    for term in sorted(tokenize(text)):
        v = store.vector(term)
        if v is None:
            continue
        total += v
        n += 1
    return total / n if n else total


def embed_document(passages: Sequence[str], store: EmbeddingStore) -> np.ndarray:
    """Mean of per-passage embeddings (not the mean over all terms)."""
    if not passages:
        raise ValueError("document has no passages")
    total = np.zeros(store.dimension)
    for p in passages:
        total += embed_text(p, store)
    return total / len(passages)


def cosine(u, v) -> float:
    """u.v / (|u||v|); 0 when either norm is zero.

    Accepts two sparse vectors (mappings) or two dense vectors
    (array-likes); mixing the two raises.
    """
    u_sparse = isinstance(u, Mapping)
    v_sparse = isinstance(v, Mapping)
    if u_sparse != v_sparse:
        raise ValueError("cannot mix sparse and dense vectors")
    if u_sparse:
        dot = sum(u[k] * v[k] for k in sorted(u.keys() & v.keys()))
        nu = math.sqrt(sum(x * x for x in u.values()))
        nv = math.sqrt(sum(x * x for x in v.values()))
    else:
        ua = np.asarray(u, dtype=float)
        va = np.asarray(v, dtype=float)
        if ua.shape != va.shape:
            raise ValueError(f"dimension mismatch: {ua.shape} vs {va.shape}")
        dot = float(np.dot(ua, va))
        nu = float(np.linalg.norm(ua))
        nv = float(np.linalg.norm(va))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(dot / (nu * nv))


def load_stopwords(path: str | Path) -> frozenset[str]:
    """One term per line, UTF-8; blank lines ignored."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(t for t in (line.strip().lower() for line in fh) if t)


def default_stopwords() -> frozenset[str]:
    """Bundled small English function-word list."""
    from importlib.resources import files

    data = files("rankarena.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(t for t in (line.strip() for line in data.splitlines()) if t)
