"""Content-modification bot: replace one passage of a document to promote
it in the next ranking of an undisclosed ranking function.

The bot only ever sees induced rankings (current and past) plus the
documents in them. It builds a candidate pool from passages of documents
ranked above its own, represents every (source passage, replacement
passage) pair by 15 features, scores the pairs with a linear model and
applies the best feasible replacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .engine import Document, Query, Ranking
from .text import CorpusStats, EmbeddingStore, cosine, embed_document, embed_text, tfidf_vector, tokenize

__all__ = [
    "FEATURE_NAMES",
    "PassagePair",
    "PairModel",
    "RankingHistory",
    "PoolPassage",
    "Centroid",
    "NothingToMimic",
    "LengthCapExceeded",
    "build_candidate_pool",
    "time_decay_weights",
    "compute_top_centroids",
    "compute_past_centroid",
    "PairFeatureExtractor",
    "extract_pair_features",
    "min_max_normalize",
    "score_and_select",
    "apply_replacement",
    "modify_document",
    "ModificationAudit",
]

# Order is load-bearing: feature matrices use these columns.
FEATURE_NAMES: tuple[str, ...] = (
    "QryTermSrc",
    "QryTermTarget",
    "SimSrcTop(TF.IDF)",
    "SimTargetTop(TF.IDF)",
    "SimSrcTop(W2V)",
    "SimTargetTop(W2V)",
    "SimSrcPrevTop(TF.IDF)",
    "SimTargetPrevTop(TF.IDF)",
    "SimSrcPrevTop(W2V)",
    "SimTargetPrevTop(W2V)",
    "SimSrcTarget(W2V)",
    "SimSrcPrecPsg(W2V)",
    "SimSrcFollowPsg(W2V)",
    "SimTargetPrecPsg(W2V)",
    "SimTargetFollowPsg(W2V)",
)


class NothingToMimic(ValueError):
    """The document is already at rank 1: the candidate pool is empty."""


class LengthCapExceeded(ValueError):
    """A replacement would push the document over the term cap."""


@dataclass(frozen=True)
class PassagePair:
    """A candidate replacement: passage src_index of the document under
    modification, replaced by passage target_index of a pool document."""

    src_index: int
    target_doc_id: str
    target_index: int


@dataclass(frozen=True)
class PairModel:
    """Linear scorer over the 15 pair features.

    ``bounds`` holds per-feature (min, max) captured at training time;
    when absent, candidates are normalized within their own set.
    """

    weights: Mapping[str, float]
    bounds: Mapping[str, tuple[float, float]] | None = None

    def __post_init__(self):
        if set(self.weights) != set(FEATURE_NAMES):
            missing = set(FEATURE_NAMES) - set(self.weights)
            extra = set(self.weights) - set(FEATURE_NAMES)
            raise ValueError(f"bad feature names: missing={sorted(missing)} extra={sorted(extra)}")
        if self.bounds is not None and set(self.bounds) != set(FEATURE_NAMES):
            raise ValueError("bounds must cover exactly the 15 features")

    def weight_vector(self) -> np.ndarray:
        return np.array([self.weights[n] for n in FEATURE_NAMES])

    def bounds_array(self) -> np.ndarray | None:
        if self.bounds is None:
            return None
        return np.array([self.bounds[n] for n in FEATURE_NAMES]).T  # (2, n_feat)

    def to_dict(self) -> dict:
        d: dict = {"weights": {n: float(self.weights[n]) for n in FEATURE_NAMES}}
        if self.bounds is not None:
            d["bounds"] = {n: [float(lo), float(hi)] for n, (lo, hi) in self.bounds.items()}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "PairModel":
        bounds = d.get("bounds")
        return cls(
            weights=dict(d["weights"]),
            bounds={n: (float(lo), float(hi)) for n, (lo, hi) in bounds.items()}
            if bounds
            else None,
        )


@dataclass(frozen=True)
class RankingHistory:
    """Everything the bot may observe for one query: the current and past
    rankings (newest first) and a snapshot of every document version that
    appears in any of them."""

    query_id: str
    rankings: tuple[Ranking, ...]
    documents: Mapping[str, Document]

    def __post_init__(self):
        if not self.rankings:
            raise ValueError("history needs at least the current ranking")
        for ranking in self.rankings:
            for doc_id in ranking.doc_ids:
                if doc_id not in self.documents:
                    raise ValueError(f"ranked document {doc_id!r} has no snapshot")

    @property
    def current(self) -> Ranking:
        return self.rankings[0]

    def document(self, doc_id: str) -> Document:
        return self.documents[doc_id]


@dataclass(frozen=True)
class PoolPassage:
    doc_id: str
    index: int
    text: str
    rank: int  # rank of the source document in the current ranking


def build_candidate_pool(history: RankingHistory, d_cur_id: str) -> list[PoolPassage]:
    """All passages of documents ranked strictly above ``d_cur`` in the
    current ranking, in rank-then-position order.

    Passages token-identical to one of d_cur's own passages are dropped:
    swapping them in would either be a no-op or duplicate a sentence.
    """
    current = history.current
    if d_cur_id not in current.doc_ids:
        raise KeyError(f"{d_cur_id!r} not in the current ranking")
    rank = current.rank_of(d_cur_id)
    if rank == 1:
        raise NothingToMimic(f"{d_cur_id!r} is already at rank 1")
    own = {tuple(tokenize(p)) for p in history.document(d_cur_id).passages}
    pool = []
    for pos, doc_id in enumerate(current.doc_ids[: rank - 1], start=1):
        doc = history.document(doc_id)
        for idx, passage in enumerate(doc.passages):
            if tuple(tokenize(passage)) in own:
                continue
            pool.append(PoolPassage(doc_id=doc_id, index=idx, text=passage, rank=pos))
    return pool


@dataclass(frozen=True)
class Centroid:
    """A mean vector pair (sparse TF.IDF, dense embedding) with its
    magnitude kept as a separate positive factor.

    Cosine similarity is invariant to positive scaling, so the factor
    never influences features; keeping it symbolic makes that invariance
    exact instead of subject to float rounding.
    """

    tf: Mapping[str, float]
    emb: np.ndarray
    magnitude: float = 1.0

    def scaled(self, factor: float) -> "Centroid":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return Centroid(self.tf, self.emb, self.magnitude * factor)


def _mean_sparse(vectors: Sequence[Mapping[str, float]], weights: Sequence[float]) -> dict[str, float]:
    out: dict[str, float] = {}
    for vec, w in zip(vectors, weights):
        for term in sorted(vec):
            out[term] = out.get(term, 0.0) + w * vec[term]
    return out


def compute_top_centroids(
    history: RankingHistory,
    d_cur_id: str,
    stats: CorpusStats,
    store: EmbeddingStore,
    m_max: int = 3,
) -> Centroid:
    """Arithmetic mean of the vectors of the min(m_max, rank-1) documents
    ranked above ``d_cur`` in the current ranking.

    Document TF.IDF vectors are averaged raw (not length-normalized);
    the cosine features are insensitive to the overall scale but not to
    per-document normalization, so the choice is fixed here.
    """
    current = history.current
    if d_cur_id not in current.doc_ids:
        raise KeyError(f"{d_cur_id!r} not in the current ranking")
    rank = current.rank_of(d_cur_id)
    if rank == 1:
        raise NothingToMimic(f"{d_cur_id!r} is already at rank 1")
    m = min(m_max, rank - 1)
    docs = [history.document(doc_id) for doc_id in current.doc_ids[:m]]
    w = 1.0 / m
    tf = _mean_sparse([tfidf_vector(d.text, stats) for d in docs], [w] * m)
    emb = sum(w * embed_document(d.passages, store) for d in docs)
    return Centroid(tf=tf, emb=np.asarray(emb))


def time_decay_weights(p: int, alpha: float = 0.01) -> np.ndarray:
    """w_i = alpha * exp(-alpha*i) / sum_j exp(-alpha*j), i = 1..p.

    The weights sum to alpha, not 1; the alpha factor is a uniform scale
    and cannot move any cosine-based feature.
    """
    if p < 1:
        raise ValueError("need at least one ranking")
    i = np.arange(1, p + 1)
    decay = np.exp(-alpha * i)
    return alpha * decay / decay.sum()


def compute_past_centroid(
    history: RankingHistory,
    stats: CorpusStats,
    store: EmbeddingStore,
    alpha: float = 0.01,
) -> Centroid:
    """Time-decayed mix of the top-ranked document of each observed
    ranking, newest first.

    The shared alpha factor of the weights is carried in the centroid's
    magnitude field; the stored components use exp(-alpha*i)/sum_j
    exp(-alpha*j), so downstream cosines are exactly those of the printed
    weights.
    """
    p = len(history.rankings)
    # Unit mix exp(-alpha*i)/sum_j exp(-alpha*j); the alpha factor of the
    # printed weights goes into the magnitude. For p=1 this is exactly 1,
    # so the centroid components equal the top document's vectors.
    i = np.arange(1, p + 1)
    decay = np.exp(-alpha * i)
    weights = decay / decay.sum()
    top_docs = [history.document(r.doc_ids[0]) for r in history.rankings]
    tf = _mean_sparse([tfidf_vector(d.text, stats) for d in top_docs], list(weights))
    emb = np.zeros(store.dimension)
    for w, d in zip(weights, top_docs):
        emb = emb + w * embed_document(d.passages, store)
    return Centroid(tf=tf, emb=emb, magnitude=alpha)


def _query_term_fraction(passage: str, query: Query, mode: str) -> float:
    toks = tokenize(passage)
    if not toks:
        return 0.0
    if mode == "occurrence":
        return sum(1 for t in toks if t in query.terms) / len(toks)
    if mode == "coverage":
        present = {t for t in toks if t in query.terms}
        return len(present) / len(query.terms)
    raise ValueError(f"unknown query-term mode {mode!r}")


class PairFeatureExtractor:
    """Computes the 15 pair features for one document within one ranking
    history, caching centroids and per-passage vectors.

    ``qry_term_mode`` selects the reading of the query-term features:
    "occurrence" (query-term occurrences / passage length, the default)
    or "coverage" (fraction of distinct query terms present).
    """

    def __init__(
        self,
        d_cur: Document,
        query: Query,
        history: RankingHistory,
        stats: CorpusStats,
        store: EmbeddingStore,
        m_max: int = 3,
        alpha: float = 0.01,
        qry_term_mode: str = "occurrence",
    ):
        self.d_cur = d_cur
        self.query = query
        self.stats = stats
        self.store = store
        self.qry_term_mode = qry_term_mode
        self.top = compute_top_centroids(history, d_cur.id, stats, store, m_max)
        self.past = compute_past_centroid(history, stats, store, alpha)
        self._src_tf = [tfidf_vector(p, stats) for p in d_cur.passages]
        self._src_emb = [embed_text(p, store) for p in d_cur.passages]
        self._target_cache: dict[str, tuple[dict, np.ndarray]] = {}

    def _target_vectors(self, text: str) -> tuple[dict, np.ndarray]:
        got = self._target_cache.get(text)
        if got is None:
            got = (tfidf_vector(text, self.stats), embed_text(text, self.store))
            self._target_cache[text] = got
        return got

    def _context_embeddings(self, src_index: int) -> tuple[np.ndarray | None, np.ndarray | None]:
        """Embeddings of the passages around src_index, after the boundary
        rules: a first passage uses its follower twice, a last passage its
        predecessor twice, a single-passage document has no context."""
        n = len(self.d_cur.passages)
        prec = self._src_emb[src_index - 1] if src_index > 0 else None
        follow = self._src_emb[src_index + 1] if src_index < n - 1 else None
        if prec is None:
            prec = follow
        if follow is None:
            follow = prec
        return prec, follow

    def features(self, pair: PassagePair, target_text: str) -> dict[str, float]:
        src_text = self.d_cur.passages[pair.src_index]
        src_tf = self._src_tf[pair.src_index]
        src_emb = self._src_emb[pair.src_index]
        tgt_tf, tgt_emb = self._target_vectors(target_text)
        prec, follow = self._context_embeddings(pair.src_index)

        def ctx(vec: np.ndarray, context: np.ndarray | None) -> float:
            return cosine(vec, context) if context is not None else 0.0

        return {
            "QryTermSrc": _query_term_fraction(src_text, self.query, self.qry_term_mode),
            "QryTermTarget": _query_term_fraction(target_text, self.query, self.qry_term_mode),
            "SimSrcTop(TF.IDF)": cosine(src_tf, self.top.tf),
            "SimTargetTop(TF.IDF)": cosine(tgt_tf, self.top.tf),
            "SimSrcTop(W2V)": cosine(src_emb, self.top.emb),
            "SimTargetTop(W2V)": cosine(tgt_emb, self.top.emb),
            "SimSrcPrevTop(TF.IDF)": cosine(src_tf, self.past.tf),
            "SimTargetPrevTop(TF.IDF)": cosine(tgt_tf, self.past.tf),
            "SimSrcPrevTop(W2V)": cosine(src_emb, self.past.emb),
            "SimTargetPrevTop(W2V)": cosine(tgt_emb, self.past.emb),
            "SimSrcTarget(W2V)": cosine(src_emb, tgt_emb),
            "SimSrcPrecPsg(W2V)": ctx(src_emb, prec),
            "SimSrcFollowPsg(W2V)": ctx(src_emb, follow),
            "SimTargetPrecPsg(W2V)": ctx(tgt_emb, prec),
            "SimTargetFollowPsg(W2V)": ctx(tgt_emb, follow),
        }


def extract_pair_features(
    pair: PassagePair,
    d_cur: Document,
    query: Query,
    history: RankingHistory,
    stats: CorpusStats,
    store: EmbeddingStore,
    m_max: int = 3,
    alpha: float = 0.01,
    qry_term_mode: str = "occurrence",
) -> dict[str, float]:
    """One-off feature extraction for a single pair; batch callers should
    use PairFeatureExtractor directly."""
    extractor = PairFeatureExtractor(
        d_cur, query, history, stats, store, m_max=m_max, alpha=alpha, qry_term_mode=qry_term_mode
    )
    target = history.document(pair.target_doc_id).passages[pair.target_index]
    return extractor.features(pair, target)


def feature_matrix(rows: Sequence[Mapping[str, float]]) -> np.ndarray:
    return np.array([[row[n] for n in FEATURE_NAMES] for row in rows], dtype=float)


def min_max_normalize(
    matrix: np.ndarray, bounds: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature (x - min) / (max - min).

    Without ``bounds`` the min/max come from the matrix itself (the
    candidate set of one modification decision) and constant features
    map to 0. With ``bounds`` (2 x n_features, captured at training
    time) values are normalized against those and clipped to [0, 1].
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValueError("need a non-empty 2-D feature matrix")
    clip = bounds is not None
    if bounds is None:
        bounds = np.vstack([matrix.min(axis=0), matrix.max(axis=0)])
    lo, hi = bounds[0], bounds[1]
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    normalized = (matrix - lo) / safe
    normalized = np.where(span > 0, normalized, 0.0)
    if clip:
        normalized = np.clip(normalized, 0.0, 1.0)
    return normalized, bounds


@dataclass(frozen=True)
class Selection:
    pair: PassagePair
    score: float
    index: int
    scores: np.ndarray


def score_and_select(
    candidates: Sequence[tuple[PassagePair, PoolPassage]],
    normalized: np.ndarray,
    model: PairModel,
) -> Selection:
    """Argmax of w.x over the candidate rows.

    Ties break by (src_index, target document rank, target_index), all
    ascending. All scores are returned for auditability.
    """
    if len(candidates) == 0:
        raise ValueError("no candidate pairs to score")
    if normalized.shape[0] != len(candidates):
        raise ValueError("row count does not match candidate count")
    scores = normalized @ model.weight_vector()
    order = sorted(
        range(len(candidates)),
        key=lambda i: (
            -scores[i],
            candidates[i][0].src_index,
            candidates[i][1].rank,
            candidates[i][0].target_index,
        ),
    )
    best = order[0]
    return Selection(pair=candidates[best][0], score=float(scores[best]), index=best, scores=scores)


def apply_replacement(
    d_cur: Document,
    pair: PassagePair,
    pool: Sequence[PoolPassage],
    max_terms: int | None = 150,
) -> Document:
    """Replace passage ``pair.src_index`` with the pool passage; every
    other passage is kept byte-identical and a new id is minted."""
    target = next(
        (p for p in pool if p.doc_id == pair.target_doc_id and p.index == pair.target_index),
        None,
    )
    if target is None:
        raise KeyError(f"pair target {pair.target_doc_id}:{pair.target_index} not in pool")
    if not 0 <= pair.src_index < len(d_cur.passages):
        raise IndexError(f"src_index {pair.src_index} out of range")
    passages = list(d_cur.passages)
    passages[pair.src_index] = target.text
    new_id = f"{d_cur.id}~s{pair.src_index}+{pair.target_doc_id}:{pair.target_index}"
    doc = Document.from_passages(new_id, d_cur.author_id, passages)
    if max_terms is not None and doc.term_count > max_terms:
        raise LengthCapExceeded(
            f"replacement yields {doc.term_count} terms, cap is {max_terms}"
        )
    return doc


@dataclass(frozen=True)
class CandidateAudit:
    pair: PassagePair
    target_text: str
    score: float
    raw: dict[str, float]
    normalized: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "src_index": self.pair.src_index,
            "target_doc_id": self.pair.target_doc_id,
            "target_index": self.pair.target_index,
            "target_text": self.target_text,
            "score": self.score,
            "raw_features": self.raw,
            "normalized_features": self.normalized,
        }


@dataclass(frozen=True)
class ModificationAudit:
    """Decision record for one modify_document call."""

    doc_id: str
    query_id: str
    reason: str  # "modified" | "top_ranked" | "empty_pool" | "no_feasible_swap"
    chosen: CandidateAudit | None = None
    skipped_over_cap: tuple[PassagePair, ...] = ()
    candidates: tuple[CandidateAudit, ...] = ()

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "query_id": self.query_id,
            "reason": self.reason,
            "chosen": self.chosen.to_dict() if self.chosen else None,
            "skipped_over_cap": [
                {"src_index": p.src_index, "target_doc_id": p.target_doc_id, "target_index": p.target_index}
                for p in self.skipped_over_cap
            ],
            "candidates": [c.to_dict() for c in self.candidates],
        }


def modify_document(
    d_cur: Document,
    query: Query,
    history: RankingHistory,
    model: PairModel,
    stats: CorpusStats,
    store: EmbeddingStore,
    max_terms: int | None = 150,
    m_max: int = 3,
    alpha: float = 0.01,
    qry_term_mode: str = "occurrence",
) -> tuple[Document, ModificationAudit]:
    """End-to-end single-shot modification.

    Builds the pool, scores every candidate pair, applies the best one
    that fits the term cap (falling back to the next-best when a swap
    would overflow). A rank-1 document or an empty pool returns the
    document unchanged with the reason recorded.
    """
    try:
        pool = build_candidate_pool(history, d_cur.id)
    except NothingToMimic:
        return d_cur, ModificationAudit(d_cur.id, query.id, reason="top_ranked")
    if not pool:
        return d_cur, ModificationAudit(d_cur.id, query.id, reason="empty_pool")

    extractor = PairFeatureExtractor(
        d_cur, query, history, stats, store, m_max=m_max, alpha=alpha, qry_term_mode=qry_term_mode
    )
    candidates: list[tuple[PassagePair, PoolPassage]] = []
    raw_rows: list[dict[str, float]] = []
    for src_index in range(len(d_cur.passages)):
        for pp in pool:
            pair = PassagePair(src_index=src_index, target_doc_id=pp.doc_id, target_index=pp.index)
            candidates.append((pair, pp))
            raw_rows.append(extractor.features(pair, pp.text))

    raw = feature_matrix(raw_rows)
    normalized, _ = min_max_normalize(raw, model.bounds_array())
    selection = score_and_select(candidates, normalized, model)

    def audit_of(i: int) -> CandidateAudit:
        return CandidateAudit(
            pair=candidates[i][0],
            target_text=candidates[i][1].text,
            score=float(selection.scores[i]),
            raw=dict(zip(FEATURE_NAMES, (float(x) for x in raw[i]))),
            normalized=dict(zip(FEATURE_NAMES, (float(x) for x in normalized[i]))),
        )

    ordered = sorted(
        range(len(candidates)),
        key=lambda i: (
            -selection.scores[i],
            candidates[i][0].src_index,
            candidates[i][1].rank,
            candidates[i][0].target_index,
        ),
    )
    skipped: list[PassagePair] = []
    for i in ordered:
        pair, pp = candidates[i]
        try:
            doc = apply_replacement(d_cur, pair, pool, max_terms=max_terms)
        except LengthCapExceeded:
            skipped.append(pair)
            continue
        return doc, ModificationAudit(
            d_cur.id,
            query.id,
            reason="modified",
            chosen=audit_of(i),
            skipped_over_cap=tuple(skipped),
            candidates=tuple(audit_of(j) for j in ordered),
        )
    return d_cur, ModificationAudit(
        d_cur.id,
        query.id,
        reason="no_feasible_swap",
        skipped_over_cap=tuple(skipped),
        candidates=tuple(audit_of(j) for j in ordered),
    )
