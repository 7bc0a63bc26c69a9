"""Round-based ranking competition orchestration.

A competition ranks one document per player each round; players then
revise their documents (scripted strategies act automatically, humans
submit text) and the next round is ranked. All state is a deterministic
function of the config, the seed and the human submissions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..bot import RankingHistory
from ..engine import Document, EngineModel, Query, Ranking, rank_documents
from ..text import CorpusStats, EmbeddingStore, build_corpus_stats, default_stopwords, tokenize
from .metrics import PlayerRoundMetrics, RoundMetrics, quality_proxy, raw_and_scaled_promotion
from .players import PlayerSpec, next_document

__all__ = [
    "CompetitionConfig",
    "Competition",
    "CompetitionResult",
    "run_competition",
    "run_batch",
    "BatchResult",
    "SubmissionError",
]


class SubmissionError(ValueError):
    """A human submission failed validation; the previous version stands."""


@dataclass(frozen=True)
class CompetitionConfig:
    query: Query
    players: tuple[PlayerSpec, ...]
    rounds: int = 2
    engine: EngineModel = field(default_factory=EngineModel)
    seed: int = 0
    max_terms: int = 150

    def __post_init__(self):
        ids = [p.id for p in self.players]
        if len(set(ids)) != len(ids):
            raise ValueError("player ids must be distinct")
        if len(self.players) < 2:
            raise ValueError("need at least two players")
        if self.rounds < 2:
            raise ValueError("a competition has at least two rounds")

    def to_dict(self) -> dict:
        return {
            "query": {
                "id": self.query.id,
                "text": self.query.text,
                "topic_description": self.query.topic_description,
            },
            "players": [
                {
                    "id": p.id,
                    "strategy": p.strategy,
                    "initial_text": p.initial_text,
                    "replays": list(p.replays),
                    "model": p.model.to_dict() if p.model else None,
                }
                for p in self.players
            ],
            "rounds": self.rounds,
            "engine": self.engine.to_dict(),
            "seed": self.seed,
            "max_terms": self.max_terms,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CompetitionConfig":
        from ..bot import PairModel

        q = d["query"]
        players = tuple(
            PlayerSpec(
                id=p["id"],
                strategy=p["strategy"],
                initial_text=p.get("initial_text", ""),
                replays=tuple(p.get("replays", ())),
                model=PairModel.from_dict(p["model"]) if p.get("model") else None,
            )
            for p in d["players"]
        )
        return cls(
            query=Query(q["id"], q["text"], q.get("topic_description", "")),
            players=players,
            rounds=int(d.get("rounds", 2)),
            engine=EngineModel.from_dict(d["engine"]) if d.get("engine") else EngineModel(),
            seed=int(d.get("seed", 0)),
            max_terms=int(d.get("max_terms", 150)),
        )


class Competition:
    """Mutable competition state; one writer at a time.

    Corpus stats default to being built from the round-1 documents plus
    the query text the first time a ranking is induced; a shared
    pre-built CorpusStats/EmbeddingStore can be injected instead.
    """

    def __init__(
        self,
        config: CompetitionConfig,
        stats: CorpusStats | None = None,
        store: EmbeddingStore | None = None,
    ):
        self.config = config
        self.stats = stats
        self.store = store or EmbeddingStore.hash_only()
        self.documents: dict[str, Document] = {}
        self.snapshots: dict[str, Document] = {}
        self.rankings: list[Ranking] = []
        self.metrics: list[RoundMetrics] = []
        self.audits: list[dict] = []
        self.doc_ids_by_round: list[dict[str, str]] = []
        self.pending: dict[str, str] = {}

    @property
    def rounds_completed(self) -> int:
        return len(self.rankings)

    @property
    def finished(self) -> bool:
        return self.rounds_completed >= self.config.rounds

    def player(self, player_id: str) -> PlayerSpec:
        for p in self.config.players:
            if p.id == player_id:
                return p
        raise KeyError(f"unknown player {player_id!r}")

    def submit(self, player_id: str, text: str) -> Document:
        """Queue a human submission for the pending round; resubmission
        before the round closes overwrites."""
        spec = self.player(player_id)
        if spec.strategy != "human":
            raise SubmissionError(f"player {player_id!r} is not a human slot")
        if self.finished:
            raise SubmissionError("competition is over")
        if not text.strip():
            raise SubmissionError("empty document")
        n_terms = len(tokenize(text))
        if n_terms > self.config.max_terms:
            raise SubmissionError(
                f"length cap exceeded: {n_terms} terms, cap is {self.config.max_terms}"
            )
        doc = Document.from_text(
            f"{self.config.query.id}:{player_id}:r{self.rounds_completed + 1}",
            player_id,
            text,
            max_terms=self.config.max_terms,
        )
        self.pending[player_id] = text
        return doc

    def missing_humans(self) -> list[str]:
        """Human players with no pending submission for the next round.
        Only round 1 has no carry-over fallback for missing initial text."""
        out = []
        for p in self.config.players:
            if p.strategy != "human" or p.id in self.pending:
                continue
            if self.rounds_completed == 0 and not p.initial_text:
                out.append(p.id)
            elif self.rounds_completed > 0:
                out.append(p.id)
        return out

    def history(self) -> RankingHistory:
        """What players may observe: newest-first rankings and every
        ranked document version."""
        if not self.rankings:
            raise ValueError("no completed rounds yet")
        return RankingHistory(
            query_id=self.config.query.id,
            rankings=tuple(reversed(self.rankings)),
            documents=dict(self.snapshots),
        )

    def _mint(self, player_id: str, round_index: int, content: Sequence[str] | str) -> Document:
        doc_id = f"{self.config.query.id}:{player_id}:r{round_index}"
        if isinstance(content, str):
            return Document.from_text(doc_id, player_id, content, max_terms=self.config.max_terms)
        return Document.from_passages(doc_id, player_id, list(content))

    def advance(self, force: bool = False) -> Ranking:
        """Close the current round: collect every player's document,
        induce the ranking and compute the round metrics."""
        if self.finished:
            raise ValueError("competition is over")
        missing = self.missing_humans()
        if missing and not force:
            raise ValueError(f"awaiting submissions from {sorted(missing)}")
        round_index = self.rounds_completed + 1

        docs: dict[str, Document] = {}
        if round_index == 1:
            for spec in self.config.players:
                text = self.pending.get(spec.id) or spec.initial_text
                if spec.strategy == "planted":
                    text = self.pending.get(spec.id) or spec.text_for_round(1)
                if not text:
                    raise ValueError(f"player {spec.id!r} has no round-1 document")
                docs[spec.id] = self._mint(spec.id, 1, text)
        else:
            history = self.history()
            for spec in self.config.players:
                own = self.documents[spec.id]
                submission = self.pending.get(spec.id)
                content, audit = next_document(
                    spec,
                    own,
                    self.config.query,
                    history,
                    self.stats,
                    self.store,
                    round_index,
                    self.config.max_terms,
                    submission=submission,
                )
                if audit is not None:
                    self.audits.append({"round": round_index, "player": spec.id, **audit})
                docs[spec.id] = self._mint(spec.id, round_index, content)

        if self.stats is None:
            self.stats = build_corpus_stats(
                [d.text for d in docs.values()],
                extra_texts=[self.config.query.text],
                stopwords=default_stopwords(),
            )

        ranking = rank_documents(
            docs.values(), self.config.query, self.config.engine, self.stats, round_index
        )
        self.documents = docs
        for d in docs.values():
            self.snapshots[d.id] = d
        self.doc_ids_by_round.append({pid: d.id for pid, d in docs.items()})
        self.rankings.append(ranking)
        self.pending.clear()
        self.metrics.append(self._round_metrics(round_index, ranking))
        return ranking

    def _round_metrics(self, round_index: int, ranking: Ranking) -> RoundMetrics:
        n = len(ranking)
        per_player = {}
        for spec in self.config.players:
            doc_id = self.doc_ids_by_round[round_index - 1][spec.id]
            rank = ranking.rank_of(doc_id)
            raw = scaled = None
            if round_index > 1:
                prev_ranking = self.rankings[round_index - 2]
                prev_doc = self.doc_ids_by_round[round_index - 2][spec.id]
                promo = raw_and_scaled_promotion(prev_ranking.rank_of(prev_doc), rank, n)
                if promo is not None:
                    raw, scaled = promo
            per_player[spec.id] = PlayerRoundMetrics(
                rank=rank,
                raw_promotion=raw,
                scaled_promotion=scaled,
                quality_proxy=quality_proxy(self.documents[spec.id], self.stats),
            )
        return RoundMetrics(round_index=round_index, per_player=per_player)


@dataclass(frozen=True)
class CompetitionResult:
    config: CompetitionConfig
    rankings: tuple[Ranking, ...]
    metrics: tuple[RoundMetrics, ...]
    audits: tuple[dict, ...]
    documents: Mapping[str, Document]
    doc_ids_by_round: tuple[Mapping[str, str], ...]

    def strategy_of(self, player_id: str) -> str:
        for p in self.config.players:
            if p.id == player_id:
                return p.strategy
        raise KeyError(player_id)

    def to_records(self) -> list[dict]:
        """Line-delimited record form: one record per (round, player)."""
        out = []
        for rm in self.metrics:
            for pid, m in sorted(rm.per_player.items()):
                out.append(
                    {
                        "query_id": self.config.query.id,
                        "round": rm.round_index,
                        "player": pid,
                        "strategy": self.strategy_of(pid),
                        **m.to_dict(),
                    }
                )
        return out


def run_competition(
    config: CompetitionConfig,
    stats: CorpusStats | None = None,
    store: EmbeddingStore | None = None,
) -> CompetitionResult:
    """Run every round of a competition with no live humans."""
    humans = [p.id for p in config.players if p.strategy == "human"]
    if humans:
        raise ValueError(f"human players {humans} need the live service, not a batch run")
    comp = Competition(config, stats=stats, store=store)
    while not comp.finished:
        comp.advance()
    return CompetitionResult(
        config=config,
        rankings=tuple(comp.rankings),
        metrics=tuple(comp.metrics),
        audits=tuple(comp.audits),
        documents=dict(comp.snapshots),
        doc_ids_by_round=tuple(comp.doc_ids_by_round),
    )


@dataclass(frozen=True)
class BatchResult:
    """Results for a batch of competitions plus per-strategy aggregates."""

    results: tuple[CompetitionResult, ...]

    def aggregate(self) -> dict[str, dict[int, dict[str, float | None]]]:
        """strategy -> round -> mean of each measure over players and
        queries. Promotion means skip undefined entries (round 1 and
        previous rank-1 holders)."""
        buckets: dict[str, dict[int, dict[str, list[float]]]] = {}
        for result in self.results:
            for rm in result.metrics:
                for pid, m in rm.per_player.items():
                    strategy = result.strategy_of(pid)
                    cell = (
                        buckets.setdefault(strategy, {})
                        .setdefault(rm.round_index, {"rank": [], "raw": [], "scaled": [], "quality": []})
                    )
                    cell["rank"].append(float(m.rank))
                    cell["quality"].append(m.quality_proxy)
                    if m.raw_promotion is not None:
                        cell["raw"].append(float(m.raw_promotion))
                        cell["scaled"].append(float(m.scaled_promotion))
        out: dict[str, dict[int, dict[str, float | None]]] = {}
        for strategy, rounds in buckets.items():
            out[strategy] = {}
            for rnd, cell in rounds.items():
                out[strategy][rnd] = {
                    "average_rank": sum(cell["rank"]) / len(cell["rank"]),
                    "raw_promotion": sum(cell["raw"]) / len(cell["raw"]) if cell["raw"] else None,
                    "scaled_promotion": sum(cell["scaled"]) / len(cell["scaled"]) if cell["scaled"] else None,
                    "quality_proxy": sum(cell["quality"]) / len(cell["quality"]),
                }
        return out


def run_batch(
    configs: Iterable[CompetitionConfig],
    stats: CorpusStats | None = None,
    store: EmbeddingStore | None = None,
) -> BatchResult:
    return BatchResult(results=tuple(run_competition(c, stats=stats, store=store) for c in configs))
