"""rankarena: a ranking-competition sandbox with a passage-replacement
bot that promotes documents under a non-disclosed ranking function.

Layers, bottom up: :mod:`rankarena.text` (tokenization, vectors,
similarity), :mod:`rankarena.engine` (the search engine and its
metrics), :mod:`rankarena.bot` (the content-modification method),
:mod:`rankarena.training` (label manufacture and the pairwise ranker),
:mod:`rankarena.arena` (competitions, measures, significance, reports),
:mod:`rankarena.synth` (seeded synthetic worlds) and
:mod:`rankarena.service` (HTTP facade for live competitions).
"""

from .bot import (
    FEATURE_NAMES,
    ModificationAudit,
    PairModel,
    PassagePair,
    RankingHistory,
    modify_document,
)
from .engine import Document, EngineModel, Query, Ranking, ndcg_at_k, rank_documents
from .text import CorpusStats, EmbeddingStore, build_corpus_stats, cosine, segment_passages, tokenize
from .training import (
    LabeledPair,
    TrainedModel,
    TrainingConfig,
    aggregate_label,
    coherence_proxy_label,
    cross_validate,
    generate_training_set,
    promotion_label,
    train_pairwise,
)

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "ModificationAudit",
    "PairModel",
    "PassagePair",
    "RankingHistory",
    "modify_document",
    "Document",
    "EngineModel",
    "Query",
    "Ranking",
    "ndcg_at_k",
    "rank_documents",
    "CorpusStats",
    "EmbeddingStore",
    "build_corpus_stats",
    "cosine",
    "segment_passages",
    "tokenize",
    "LabeledPair",
    "TrainedModel",
    "TrainingConfig",
    "aggregate_label",
    "coherence_proxy_label",
    "cross_validate",
    "generate_training_set",
    "promotion_label",
    "train_pairwise",
    "__version__",
]
