"""Manufacture labeled passage pairs and train the pairwise ranker.

The promotion label r comes from counterfactual re-ranking (replace one
passage, re-rank the same document set, count positions gained). The
coherence label c is an automated proxy for human judgment (which this
sandbox does not collect), built from the same embedding cosines the
bot's coherence features use. Both are folded into a single target
l via a smoothed harmonic mean, and a linear RankSVM is fit on within-
group preference pairs with cross-validated regularization.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bot import (
    FEATURE_NAMES,
    LengthCapExceeded,
    PairFeatureExtractor,
    PairModel,
    PassagePair,
    RankingHistory,
    apply_replacement,
    build_candidate_pool,
    feature_matrix,
    min_max_normalize,
)
from .engine import Document, EngineModel, Query, ndcg_at_k, rank_documents
from .text import CorpusStats, EmbeddingStore, cosine, embed_text

__all__ = [
    "TrainingConfig",
    "LabeledPair",
    "TrainedModel",
    "promotion_label",
    "coherence_proxy_label",
    "aggregate_label",
    "label_for_mode",
    "relabel",
    "generate_training_set",
    "dataset_shape",
    "fit_rank_svm",
    "train_pairwise",
    "cross_validate",
]

LABEL_MODES = ("l", "r_only", "c_only")


@dataclass(frozen=True)
class TrainingConfig:
    beta: float = 1.0
    epsilon: float = 1e-4
    c_grid: tuple[float, ...] = (0.001, 0.01, 0.1)
    folds: int = 5
    label_mode: str = "l"
    seed: int = 0
    max_terms: int | None = 150
    m_max: int = 3
    alpha: float = 0.01
    qry_term_mode: str = "occurrence"

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least 2 folds")
        if not self.c_grid:
            raise ValueError("C grid must not be empty")
        if self.label_mode not in LABEL_MODES:
            raise ValueError(f"label_mode must be one of {LABEL_MODES}")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


@dataclass(frozen=True)
class LabeledPair:
    pair: PassagePair
    features: Mapping[str, float]
    r: int
    c: float
    l: float
    group_id: str
    query_id: str

    def to_dict(self) -> dict:
        return {
            "group_id": self.group_id,
            "query_id": self.query_id,
            "src_index": self.pair.src_index,
            "target_doc_id": self.pair.target_doc_id,
            "target_index": self.pair.target_index,
            "features": {n: float(self.features[n]) for n in FEATURE_NAMES},
            "r": self.r,
            "c": self.c,
            "l": self.l,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LabeledPair":
        return cls(
            pair=PassagePair(
                src_index=int(d["src_index"]),
                target_doc_id=d["target_doc_id"],
                target_index=int(d["target_index"]),
            ),
            features=dict(d["features"]),
            r=int(d["r"]),
            c=float(d["c"]),
            l=float(d["l"]),
            group_id=d["group_id"],
            query_id=d["query_id"],
        )


def promotion_label(rank_cur: int, rank_next: int, n: int = 5) -> int:
    """Positions gained by the counterfactual document: max(0, cur - next)."""
    if not (1 <= rank_cur <= n and 1 <= rank_next <= n):
        raise ValueError(f"ranks must lie in 1..{n}")
    return max(0, rank_cur - rank_next)


def _context_similarity(d_cur: Document, src_index: int, emb: np.ndarray, store: EmbeddingStore) -> float:
    """Mean cosine of an embedding with the passages around src_index,
    under the same boundary rules the pair features use."""
    n = len(d_cur.passages)
    prec = embed_text(d_cur.passages[src_index - 1], store) if src_index > 0 else None
    follow = embed_text(d_cur.passages[src_index + 1], store) if src_index < n - 1 else None
    if prec is None:
        prec = follow
    if follow is None:
        follow = prec
    if prec is None:  # single-passage document
        return 0.0
    return 0.5 * (cosine(emb, prec) + cosine(emb, follow))


def coherence_proxy_label(
    d_cur: Document, src_index: int, target_text: str, store: EmbeddingStore
) -> float:
    """Automated stand-in for human coherence judgments, on 0..4.

    c = 4 * clamp01((s_ctx + s_pair) / 2) where s_ctx is the mean cosine
    of the replacement's embedding with the embeddings of the passages
    surrounding the replaced one, and s_pair is the embedding cosine of
    the replaced and replacing passages. A proxy, not a human judgment.
    """
    src_emb = embed_text(d_cur.passages[src_index], store)
    tgt_emb = embed_text(target_text, store)
    s_ctx = _context_similarity(d_cur, src_index, tgt_emb, store)
    s_pair = cosine(src_emb, tgt_emb)
    return 4.0 * min(1.0, max(0.0, (s_ctx + s_pair) / 2.0))


def aggregate_label(r: float, c: float, beta: float = 1.0, epsilon: float = 1e-4) -> float:
    """Smoothed harmonic mean (1 + beta^2) r c / (r + beta^2 c + epsilon)."""
    if r < 0 or c < 0:
        raise ValueError("labels must be non-negative")
    return (1.0 + beta**2) * r * c / (r + beta**2 * c + epsilon)


def label_for_mode(r: float, c: float, config: TrainingConfig) -> float:
    if config.label_mode == "r_only":
        return float(r)
    if config.label_mode == "c_only":
        return float(c)
    return aggregate_label(r, c, config.beta, config.epsilon)


def relabel(data: Sequence[LabeledPair], config: TrainingConfig) -> list[LabeledPair]:
    """Recompute the integrated label from the stored r and c."""
    return [
        LabeledPair(
            pair=lp.pair,
            features=lp.features,
            r=lp.r,
            c=lp.c,
            l=label_for_mode(lp.r, lp.c, config),
            group_id=lp.group_id,
            query_id=lp.query_id,
        )
        for lp in data
    ]


def _designated_doc_ids(history: RankingHistory) -> list[str]:
    """The second-ranked and the lowest-ranked documents: a mix of high
    and low starting positions."""
    ids = history.current.doc_ids
    picks = []
    if len(ids) >= 2:
        picks.append(ids[1])
    if ids[-1] not in picks:
        picks.append(ids[-1])
    return picks


def generate_training_set(
    snapshot: Sequence[tuple[Query, RankingHistory]],
    engine: EngineModel,
    stats: CorpusStats,
    store: EmbeddingStore,
    config: TrainingConfig = TrainingConfig(),
) -> list[LabeledPair]:
    """Enumerate and label every candidate replacement in the snapshot.

    For each query, the second-ranked and lowest-ranked documents of the
    current ranking are designated for modification. Each candidate pair
    is applied counterfactually (all other documents held fixed), the
    set is re-ranked with the supplied engine, and the promotion label
    is the number of positions gained. Pairs whose replacement exceeds
    the term cap are skipped: the bot could never play them.
    """
    out: list[LabeledPair] = []
    for query, history in snapshot:
        current = history.current
        docs = [history.document(doc_id) for doc_id in current.doc_ids]
        recomputed = rank_documents(docs, query, engine, stats, round_index=current.round_index)
        if recomputed.doc_ids != current.doc_ids:
            raise ValueError(
                f"stored ranking for query {query.id!r} does not match the engine; "
                "labels would be invalid"
            )
        n = len(current.doc_ids)
        for d_cur_id in _designated_doc_ids(history):
            d_cur = history.document(d_cur_id)
            rank_cur = current.rank_of(d_cur_id)
            pool = build_candidate_pool(history, d_cur_id)
            if not pool:
                continue
            extractor = PairFeatureExtractor(
                d_cur,
                query,
                history,
                stats,
                store,
                m_max=config.m_max,
                alpha=config.alpha,
                qry_term_mode=config.qry_term_mode,
            )
            others = [d for d in docs if d.id != d_cur_id]
            group_id = f"{query.id}/{d_cur_id}"
            for src_index in range(len(d_cur.passages)):
                for pp in pool:
                    pair = PassagePair(src_index, pp.doc_id, pp.index)
                    try:
                        d_next = apply_replacement(d_cur, pair, pool, max_terms=config.max_terms)
                    except LengthCapExceeded:
                        continue
                    new_ranking = rank_documents(others + [d_next], query, engine, stats)
                    r = promotion_label(rank_cur, new_ranking.rank_of(d_next.id), n)
                    c = coherence_proxy_label(d_cur, src_index, pp.text, store)
                    out.append(
                        LabeledPair(
                            pair=pair,
                            features=extractor.features(pair, pp.text),
                            r=r,
                            c=c,
                            l=label_for_mode(r, c, config),
                            group_id=group_id,
                            query_id=query.id,
                        )
                    )
    return out


def _group_rows(data: Sequence[LabeledPair]) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for i, lp in enumerate(data):
        groups.setdefault(lp.group_id, []).append(i)
    return groups


def _difference_matrix(data: Sequence[LabeledPair]) -> np.ndarray:
    """Stack x_i - x_j for every within-group index pair with l_i > l_j,
    using per-group min-max normalized features.

    Exact duplicate difference vectors are collapsed: a duplicated row
    with an equal label adds only constraints that already exist.
    """
    raw = feature_matrix([lp.features for lp in data])
    labels = np.array([lp.l for lp in data])
    diffs: list[np.ndarray] = []
    for _, idx in sorted(_group_rows(data).items()):
        rows, _ = min_max_normalize(raw[idx])
        lab = labels[idx]
        for a in range(len(idx)):
            for b in range(len(idx)):
                if lab[a] > lab[b]:
                    diffs.append(rows[a] - rows[b])
    if not diffs:
        raise ValueError("no orderable pairs: every group has constant labels")
    return np.unique(np.array(diffs), axis=0)


def _objective(w: np.ndarray, diffs: np.ndarray, C: float) -> float:
    margins = diffs @ w
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * float(w @ w) + C * float(hinge)


def fit_rank_svm(
    diffs: np.ndarray,
    C: float,
    seed: int = 0,
    epochs: int = 200,
    batch_size: int = 2048,
    tol: float = 1e-6,
) -> tuple[np.ndarray, list[float]]:
    """Minimize 0.5*|w|^2 + C * sum hinge(1 - w.delta) by mini-batch
    subgradient descent with seed-fixed shuffling.

    Each epoch's Polyak-averaged iterate is kept only if it improves the
    full objective, so the returned per-epoch objective history is
    non-increasing. Stops after ``epochs`` epochs or when the relative
    improvement falls below ``tol``.
    """
    n, dim = diffs.shape
    w = np.zeros(dim)
    best_w = w.copy()
    best_obj = _objective(w, diffs, C)
    history = [best_obj]
    if C == 0.0:
        return best_w, history
    rng = np.random.default_rng(seed)
    lam = 1.0 / (C * n)  # objective scaled to lam/2 |w|^2 + mean hinge
    radius = 1.0 / math.sqrt(lam)
    t = 0
    for _ in range(epochs):
        order = rng.permutation(n)
        w = best_w.copy()
        acc = np.zeros(dim)
        steps = 0
        for start in range(0, n, batch_size):
            t += 1
            batch = diffs[order[start : start + batch_size]]
            margins = batch @ w
            viol = batch[margins < 1.0]
            grad = lam * w
            if len(viol):
                grad = grad - viol.sum(axis=0) / len(batch)
            w = w - grad / (lam * t)
            norm = np.linalg.norm(w)
            if norm > radius:
                w = w * (radius / norm)
            acc += w
            steps += 1
        candidate = acc / steps
        obj = _objective(candidate, diffs, C)
        if obj < best_obj:
            improvement = (best_obj - obj) / max(best_obj, 1e-12)
            best_obj = obj
            best_w = candidate
        else:
            improvement = 0.0
        history.append(best_obj)
        if improvement < tol and len(history) > 2:
            break
    return best_w, history


def _global_bounds(data: Sequence[LabeledPair]) -> dict[str, tuple[float, float]]:
    raw = feature_matrix([lp.features for lp in data])
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    return {n: (float(lo[i]), float(hi[i])) for i, n in enumerate(FEATURE_NAMES)}


def train_pairwise(
    data: Sequence[LabeledPair],
    C: float,
    seed: int = 0,
    epochs: int = 200,
    tol: float = 1e-6,
) -> PairModel:
    """Fit the linear pair ranker on within-group preference pairs.

    The model stores per-feature min/max over the raw training rows;
    at inference those bounds normalize new candidates (clipped to
    [0, 1])."""
    if len(data) < 2:
        raise ValueError("need at least two labeled pairs")
    diffs = _difference_matrix(data)
    w, _ = fit_rank_svm(diffs, C, seed=seed, epochs=epochs, tol=tol)
    return PairModel(
        weights={name: float(w[i]) for i, name in enumerate(FEATURE_NAMES)},
        bounds=_global_bounds(data),
    )


def score_pairs(model: PairModel, rows: Sequence[Mapping[str, float]]) -> np.ndarray:
    """Model scores for raw feature rows, applying the model's stored
    normalization bounds (or within-set normalization without them)."""
    normalized, _ = min_max_normalize(feature_matrix(rows), model.bounds_array())
    return normalized @ model.weight_vector()


def dataset_shape(data: Sequence[LabeledPair]) -> dict:
    """Size summary: pair count plus per-designated-document mean/std of
    pairs, the shape a regenerated dataset is sanity-checked against."""
    counts: dict[str, int] = {}
    for lp in data:
        counts[lp.group_id] = counts.get(lp.group_id, 0) + 1
    values = np.array(list(counts.values()), dtype=float)
    return {
        "pairs": len(data),
        "documents": len(counts),
        "pairs_per_document_mean": float(values.mean()) if len(values) else 0.0,
        "pairs_per_document_std": float(values.std()) if len(values) else 0.0,
    }


def dataset_fingerprint(data: Sequence[LabeledPair]) -> str:
    digest = hashlib.sha256()
    for lp in sorted(data, key=lambda x: (x.group_id, x.pair.src_index, x.pair.target_doc_id, x.pair.target_index)):
        digest.update(json.dumps(lp.to_dict(), sort_keys=True).encode())
    return digest.hexdigest()[:16]


@dataclass(frozen=True)
class TrainedModel:
    model: PairModel
    chosen_c: float
    cv_ndcg: Mapping[str, float]  # C value (as str) -> mean validation NDCG@5
    fold_ndcg: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    label_mode: str = "l"
    dataset_fingerprint: str = ""
    dataset_shape: Mapping[str, float] = field(default_factory=dict)

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(json.dumps(self.model.to_dict(), sort_keys=True).encode())
        digest.update(
            json.dumps(
                {
                    "chosen_c": self.chosen_c,
                    "cv_ndcg": dict(self.cv_ndcg),
                    "label_mode": self.label_mode,
                    "dataset": self.dataset_fingerprint,
                },
                sort_keys=True,
            ).encode()
        )
        return digest.hexdigest()

    def to_dict(self) -> dict:
        return {
            **self.model.to_dict(),
            "metadata": {
                "chosen_c": self.chosen_c,
                "cv_ndcg": dict(self.cv_ndcg),
                "fold_ndcg": {k: list(v) for k, v in self.fold_ndcg.items()},
                "label_mode": self.label_mode,
                "dataset_fingerprint": self.dataset_fingerprint,
                "dataset_shape": dict(self.dataset_shape),
                "fingerprint": self.fingerprint(),
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainedModel":
        meta = d.get("metadata", {})
        return cls(
            model=PairModel.from_dict(d),
            chosen_c=float(meta.get("chosen_c", 0.0)),
            cv_ndcg={k: float(v) for k, v in meta.get("cv_ndcg", {}).items()},
            fold_ndcg={k: tuple(v) for k, v in meta.get("fold_ndcg", {}).items()},
            label_mode=meta.get("label_mode", "l"),
            dataset_fingerprint=meta.get("dataset_fingerprint", ""),
            dataset_shape=dict(meta.get("dataset_shape", {})),
        )


def _fold_assignment(group_ids: Sequence[str], folds: int, seed: int) -> dict[str, int]:
    ordered = sorted(set(group_ids))
    rng = np.random.default_rng(seed)
    rng.shuffle(ordered)
    return {gid: i % folds for i, gid in enumerate(ordered)}


def cross_validate(data: Sequence[LabeledPair], config: TrainingConfig = TrainingConfig()) -> TrainedModel:
    """Pick C from the grid by mean validation NDCG@5 over groups, then
    retrain on everything with the winner.

    Folds partition group ids (seeded, deterministic). Each group is
    validated exactly once; ties in mean NDCG go to the smallest C."""
    groups = _group_rows(data)
    if len(groups) < config.folds:
        raise ValueError(f"{len(groups)} groups cannot fill {config.folds} folds")
    assignment = _fold_assignment(list(groups), config.folds, config.seed)

    per_c_scores: dict[float, list[float]] = {c: [] for c in config.c_grid}
    per_c_folds: dict[float, list[float]] = {c: [] for c in config.c_grid}
    for c_value in config.c_grid:
        for fold in range(config.folds):
            train_rows = [lp for lp in data if assignment[lp.group_id] != fold]
            model = train_pairwise(train_rows, c_value, seed=config.seed)
            fold_scores = []
            for gid, idx in sorted(groups.items()):
                if assignment[gid] != fold:
                    continue
                rows = [data[i].features for i in idx]
                labels = [data[i].l for i in idx]
                scores = score_pairs(model, rows)
                order = sorted(range(len(idx)), key=lambda i: (-scores[i], i))
                fold_scores.append(ndcg_at_k([labels[i] for i in order], 5))
            per_c_scores[c_value].extend(fold_scores)
            per_c_folds[c_value].append(float(np.mean(fold_scores)) if fold_scores else 0.0)

    means = {c: (float(np.mean(v)) if v else 0.0) for c, v in per_c_scores.items()}
    best_c = min(means, key=lambda c: (-means[c], c))
    final = train_pairwise(data, best_c, seed=config.seed)
    return TrainedModel(
        model=final,
        chosen_c=best_c,
        cv_ndcg={str(c): means[c] for c in config.c_grid},
        fold_ndcg={str(c): tuple(per_c_folds[c]) for c in config.c_grid},
        label_mode=config.label_mode,
        dataset_fingerprint=dataset_fingerprint(data),
        dataset_shape=dataset_shape(data),
    )
