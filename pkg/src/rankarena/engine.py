"""The "search engine" side of the sandbox.

Query/document/ranking types, query-dependent and quality document
features, and two pluggable ranking functions (a linear model over the
document features and a Dirichlet-smoothed query-likelihood model).
Nothing in here is ever exposed to the content-modification bot, which
only observes induced rankings.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .text import CorpusStats, segment_passages, tokenize

__all__ = [
    "Query",
    "Document",
    "Ranking",
    "DocFeatureVector",
    "EngineModel",
    "extract_doc_features",
    "lm_dirichlet_score",
    "bm25_score",
    "rank_documents",
    "ndcg_at_k",
    "DEFAULT_TERM_CAP",
]

DEFAULT_TERM_CAP = 150

BM25_K1 = 1.2
BM25_B = 0.75


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    topic_description: str = ""

    def __post_init__(self):
        if not tokenize(self.text):
            raise ValueError(f"query {self.id!r} has no terms")

    @property
    def terms(self) -> frozenset[str]:
        return frozenset(tokenize(self.text))


@dataclass(frozen=True)
class Document:
    """An identified text split into ordered passages (sentences)."""

    id: str
    author_id: str
    text: str
    passages: tuple[str, ...]

    @classmethod
    def from_text(
        cls,
        id: str,
        author_id: str,
        text: str,
        max_terms: int | None = DEFAULT_TERM_CAP,
    ) -> "Document":
        passages = tuple(segment_passages(text))
        doc = cls(id=id, author_id=author_id, text=text, passages=passages)
        if max_terms is not None and doc.term_count > max_terms:
            raise ValueError(
                f"document {id!r} has {doc.term_count} terms, cap is {max_terms}"
            )
        return doc

    @classmethod
    def from_passages(
        cls, id: str, author_id: str, passages: Sequence[str]
    ) -> "Document":
        # Passages are kept verbatim; re-segmenting could merge a spliced
        # passage that lacks terminal punctuation into its neighbour.
        if not passages:
            raise ValueError("document needs at least one passage")
        return cls(
            id=id, author_id=author_id, text=" ".join(passages), passages=tuple(passages)
        )

    @property
    def term_count(self) -> int:
        return len(tokenize(self.text))

    def with_id(self, new_id: str) -> "Document":
        return replace(self, id=new_id)


@dataclass(frozen=True)
class Ranking:
    """Induced ordering of document ids; position 1 is best."""

    query_id: str
    doc_ids: tuple[str, ...]
    round_index: int = 1

    def __post_init__(self):
        if len(set(self.doc_ids)) != len(self.doc_ids):
            raise ValueError("ranking contains duplicate document ids")

    def rank_of(self, doc_id: str) -> int:
        try:
            return self.doc_ids.index(doc_id) + 1
        except ValueError:
            raise KeyError(f"{doc_id!r} not in ranking") from None

    def __len__(self) -> int:
        return len(self.doc_ids)


@dataclass(frozen=True)
class DocFeatureVector:
    query_term_coverage: float
    sum_tf: float
    sum_tfidf: float
    lm_dirichlet_score: float
    bm25_score: float
    stopword_ratio: float
    stopword_coverage: float
    term_entropy: float
    doc_length: float

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class EngineModel:
    """Ranking function description: 'linear' over document features or
    'lm_dirichlet' query likelihood with smoothing mu."""

    kind: str = "lm_dirichlet"
    weights: Mapping[str, float] = field(default_factory=dict)
    mu: float = 1000.0

    def __post_init__(self):
        if self.kind not in ("linear", "lm_dirichlet"):
            raise ValueError(f"unknown engine kind {self.kind!r}")
        if self.kind == "linear" and not self.weights:
            raise ValueError("linear engine needs feature weights")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        unknown = set(self.weights) - set(DocFeatureVector.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown features in weights: {sorted(unknown)}")

    def to_dict(self) -> dict:
        if self.kind == "linear":
            return {"kind": self.kind, "weights": dict(self.weights)}
        return {"kind": self.kind, "mu": self.mu}

    @classmethod
    def from_dict(cls, d: Mapping) -> "EngineModel":
        return cls(
            kind=d["kind"],
            weights=dict(d.get("weights", {})),
            mu=float(d.get("mu", 1000.0)),
        )


def lm_dirichlet_score(
    doc: Document, query: Query, stats: CorpusStats, mu: float = 1000.0
) -> float:
    """Query-likelihood log score with Dirichlet smoothing:
    sum over query terms of ln((tf + mu*p(t|C)) / (|d| + mu)).
    """
    doc_counts = Counter(tokenize(doc.text))
    doc_len = sum(doc_counts.values())
    score = 0.0
    for term in tokenize(query.text):
        p_c = stats.collection_prob(term)
        if p_c <= 0.0:
            raise ValueError(
                f"query term {term!r} has zero collection probability; "
                "corpus stats must cover the query text"
            )
        score += math.log((doc_counts.get(term, 0) + mu * p_c) / (doc_len + mu))
    return score


def bm25_score(doc: Document, query: Query, stats: CorpusStats) -> float:
    doc_counts = Counter(tokenize(doc.text))
    doc_len = sum(doc_counts.values())
    avgdl = stats.avg_doc_length or 1.0
    score = 0.0
    for term in query.terms:
        tf = doc_counts.get(term, 0)
        if tf == 0:
            continue
        df = stats.doc_freq.get(term, 0)
        idf = math.log(1.0 + (stats.doc_count - df + 0.5) / (df + 0.5))
        denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * doc_len / avgdl)
        score += idf * tf * (BM25_K1 + 1.0) / denom
    return score


def extract_doc_features(
    doc: Document, query: Query, stats: CorpusStats, mu: float = 1000.0
) -> DocFeatureVector:
    toks = tokenize(doc.text)
    counts = Counter(toks)
    n = len(toks)
    q_terms = sorted(query.terms)

    covered = sum(1 for t in q_terms if counts.get(t, 0) > 0)
    sum_tf = float(sum(counts.get(t, 0) for t in q_terms))
    sum_tfidf = float(sum(counts.get(t, 0) * stats.idf(t) for t in q_terms))

    stop_hits = sum(c for t, c in counts.items() if t in stats.stopwords)
    stop_present = sum(1 for t in stats.stopwords if counts.get(t, 0) > 0)

    entropy = 0.0
    for c in counts.values():
        p = c / n
        entropy -= p * math.log(p)

    return DocFeatureVector(
        query_term_coverage=covered / len(q_terms) if q_terms else 0.0,
        sum_tf=sum_tf,
        sum_tfidf=sum_tfidf,
        lm_dirichlet_score=lm_dirichlet_score(doc, query, stats, mu),
        bm25_score=bm25_score(doc, query, stats),
        stopword_ratio=stop_hits / n if n else 0.0,
        stopword_coverage=stop_present / len(stats.stopwords) if stats.stopwords else 0.0,
        term_entropy=entropy,
        doc_length=float(n),
    )


def score_document(
    doc: Document, query: Query, model: EngineModel, stats: CorpusStats
) -> float:
    if model.kind == "lm_dirichlet":
        return lm_dirichlet_score(doc, query, stats, model.mu)
    feats = extract_doc_features(doc, query, stats, model.mu).as_dict()
    return sum(w * feats[name] for name, w in model.weights.items())


def rank_documents(
    docs: Iterable[Document],
    query: Query,
    model: EngineModel,
    stats: CorpusStats,
    round_index: int = 1,
) -> Ranking:
    """Deterministic total order: descending score, ties by ascending id."""
    docs = list(docs)
    if len(docs) < 2:
        raise ValueError("need at least two documents to rank")
    scored = sorted(
        docs, key=lambda d: (-score_document(d, query, model, stats), d.id)
    )
    return Ranking(
        query_id=query.id,
        doc_ids=tuple(d.id for d in scored),
        round_index=round_index,
    )


def ndcg_at_k(ranked_labels: Sequence[float], k: int) -> float:
    """NDCG with gain 2^label - 1 and discount 1/log2(position + 1).

    Zero ideal DCG (all labels zero) yields 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")

    def dcg(labels: Sequence[float]) -> float:
        return sum(
            (2.0**lab - 1.0) / math.log2(i + 2) for i, lab in enumerate(labels[:k])
        )

    ideal = dcg(sorted(ranked_labels, reverse=True))
    if ideal == 0.0:
        return 0.0
    return dcg(list(ranked_labels)) / ideal
