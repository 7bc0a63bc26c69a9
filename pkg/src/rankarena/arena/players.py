"""Competition players: the reactive bot, a static baseline, a scripted
mimicking author, planted replays and a slot for live humans."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..bot import PairModel, RankingHistory, modify_document
from ..engine import Document, Query
from ..text import CorpusStats, EmbeddingStore, tokenize

__all__ = ["PlayerSpec", "STRATEGIES", "next_document"]

STRATEGIES = ("bot", "static", "mimic_top", "planted", "human")


@dataclass(frozen=True)
class PlayerSpec:
    """One competitor. ``initial_text`` seeds round 1 (humans may instead
    submit theirs); ``replays`` holds a planted player's per-round
    versions, the last one reused when rounds outnumber versions."""

    id: str
    strategy: str
    initial_text: str = ""
    replays: tuple[str, ...] = ()
    model: PairModel | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.strategy == "bot" and self.model is None:
            raise ValueError(f"bot player {self.id!r} needs a pair model")
        if self.strategy == "planted" and not (self.replays or self.initial_text):
            raise ValueError(f"planted player {self.id!r} needs replay versions")

    def text_for_round(self, round_index: int) -> str:
        """Replay text for a planted player at the given 1-based round."""
        versions = self.replays or (self.initial_text,)
        return versions[min(round_index, len(versions)) - 1]


def _query_density(passage: str, query: Query) -> float:
    toks = tokenize(passage)
    if not toks:
        return 0.0
    return sum(1 for t in toks if t in query.terms) / len(toks)


def _mimic_top(
    own: Document, query: Query, history: RankingHistory, max_terms: int | None
) -> Sequence[str]:
    """Copy the most query-dense sentence of the previous top document
    over this player's least query-dense sentence.

    No-ops when this player holds rank 1, when the copied sentence is
    already in the document, or when the swap would overflow the cap.
    """
    top = history.document(history.current.doc_ids[0])
    if top.author_id == own.author_id:
        return own.passages
    best_idx = max(
        range(len(top.passages)),
        key=lambda i: (_query_density(top.passages[i], query), -i),
    )
    best = top.passages[best_idx]
    own_norm = {tuple(tokenize(p)) for p in own.passages}
    if tuple(tokenize(best)) in own_norm:
        return own.passages
    victim = min(
        range(len(own.passages)),
        key=lambda i: (_query_density(own.passages[i], query), i),
    )
    passages = list(own.passages)
    passages[victim] = best
    if max_terms is not None and len(tokenize(" ".join(passages))) > max_terms:
        return own.passages
    return passages


def next_document(
    spec: PlayerSpec,
    own: Document,
    query: Query,
    history: RankingHistory,
    stats: CorpusStats,
    store: EmbeddingStore,
    round_index: int,
    max_terms: int | None,
    submission: str | None = None,
) -> tuple[Sequence[str] | str, dict | None]:
    """The player's document content for ``round_index``, given the
    history through the previous round. Returns (passages-or-text,
    optional audit record)."""
    if spec.strategy == "static":
        return own.passages, None
    if spec.strategy == "planted":
        return spec.text_for_round(round_index), None
    if spec.strategy == "human":
        return (submission if submission is not None else own.passages), None
    if spec.strategy == "mimic_top":
        return _mimic_top(own, query, history, max_terms), None
    if spec.strategy == "bot":
        doc, audit = modify_document(
            own, query, history, spec.model, stats, store, max_terms=max_terms
        )
        return doc.passages, audit.to_dict()
    raise AssertionError(f"unhandled strategy {spec.strategy!r}")
