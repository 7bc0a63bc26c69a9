"""Seeded synthetic corpora and competition worlds.

Generates desk-scale material for training and evaluating the bot
without any external data: queries with topical vocabularies, short
multi-sentence documents whose query-term density varies by author,
scripted author revisions that mildly chase the query, and the
training/online/offline bundles the evaluation protocols consume.
Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .arena.competition import CompetitionConfig
from .arena.offline import RoundPairSnapshot
from .arena.players import PlayerSpec
from .bot import PairModel, RankingHistory
from .engine import Document, EngineModel, Query, rank_documents
from .text import CorpusStats, EmbeddingStore, build_corpus_stats, default_stopwords, tokenize

__all__ = ["SynthWorld", "build_world", "online_configs"]

# Content-word bank for topical vocabularies and filler.
_WORDS = """
anchor basin bridge canyon cedar circuit copper coral crane crater current
dagger delta dynamo ember engine estuary falcon ferry fiber flint forge
fossil fountain gale garnet geyser glacier granite grove harbor harvest
hazel heron hollow ingot island ivory jetty juniper kelp kiln lagoon lantern
ledge lichen locket lumber magnet mantle maple marble meadow mesa mill
mineral mirror monsoon moraine moss nectar nickel oasis obsidian orchard
osprey otter oxide pebble pine pitch plain plateau pollen prairie prism
pulley quarry quartz raft rapids ravine reef ridge river rudder runoff
saddle sandbar sapling schooner sediment shale shoal silo silt slate sluice
smelter spring sprocket spruce steppe summit taiga talon tarn terrace
thicket tide timber trellis tributary trout tundra turbine valley vein
vessel vineyard walnut waterfall wavelet wharf willow windmill zephyr
alloy amber aquifer ballast beacon bellows birch bluff bog boulder breeze
cairn cascade cavern channel cliff clover cobalt comet cottonwood cove
creek crest cypress drift dune eddy fen fjord floe flume frost furrow
""".split()

_TOPIC_SIZE = 10
_STOP_SHARE = 0.34


@dataclass(frozen=True)
class SynthWorld:
    """Everything one experiment needs, generated from a single seed."""

    seed: int
    engine: EngineModel
    stats: CorpusStats
    store: EmbeddingStore
    topics: Mapping[str, tuple[str, ...]]
    training: tuple[tuple[Query, RankingHistory], ...]
    online_queries: tuple[Query, ...]
    online_players: Mapping[str, tuple[dict, ...]]
    offline: tuple[RoundPairSnapshot, ...]
    corpus_texts: tuple[str, ...] = ()
    queries: tuple[Query, ...] = ()


class _Author:
    """Per-author density state; revisions chase the query a little."""

    def __init__(self, rng: np.random.Generator, lam_range=(0.01, 0.14), stuff_p=0.25):
        self.lam = float(rng.uniform(*lam_range))
        self.stuffed = bool(rng.random() < stuff_p)


class _Generator:
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.stopwords = sorted(default_stopwords())

    def topic(self) -> tuple[str, ...]:
        return tuple(self.rng.choice(_WORDS, size=_TOPIC_SIZE, replace=False))

    def sentence(self, topic: Sequence[str], query_terms: Sequence[str], lam: float,
                 length: tuple[int, int] = (8, 16), stop_share: float = _STOP_SHARE) -> str:
        rng = self.rng
        n = int(rng.integers(length[0], length[1] + 1))
        toks = []
        for _ in range(n):
            u = rng.random()
            if u < stop_share:
                toks.append(self.stopwords[int(rng.integers(len(self.stopwords)))])
            elif u < stop_share + lam:
                toks.append(query_terms[int(rng.integers(len(query_terms)))])
            elif u < stop_share + lam + 0.42:
                toks.append(topic[int(rng.integers(len(topic)))])
            else:
                toks.append(_WORDS[int(rng.integers(len(_WORDS)))])
        return " ".join(toks).capitalize() + "."

    def stuffed_sentence(self, query_terms: Sequence[str]) -> str:
        # Keyword-heavy, barely any glue: promotes hard, reads badly.
        return self.sentence(query_terms, query_terms, lam=0.6, length=(8, 12), stop_share=0.05)

    def doc_text(self, topic, query_terms, lam: float, stuffed: bool = False,
                 n_sentences: tuple[int, int] = (4, 7)) -> str:
        k = int(self.rng.integers(n_sentences[0], n_sentences[1] + 1))
        sentences = [self.sentence(topic, query_terms, lam) for _ in range(k)]
        if stuffed:
            slot = int(self.rng.integers(len(sentences)))
            sentences[slot] = self.stuffed_sentence(query_terms)
        return " ".join(sentences)

    def revise(self, text: str, topic, query_terms, author: _Author) -> str:
        """Replace the least query-dense sentence with a denser fresh one."""
        from .text import segment_passages

        passages = segment_passages(text)

        def density(p: str) -> float:
            toks = tokenize(p)
            return sum(1 for t in toks if t in query_terms) / len(toks) if toks else 0.0

        victim = min(range(len(passages)), key=lambda i: (density(passages[i]), i))
        boost = float(self.rng.uniform(0.03, 0.12))
        passages[victim] = self.sentence(topic, query_terms, min(0.35, author.lam + boost))
        return " ".join(passages)


def _doc(qid: str, author: str, rnd: int, text: str) -> Document:
    return Document.from_text(f"{qid}-{author}-r{rnd}", author, text, max_terms=None)


def _author_rounds(
    gen: _Generator,
    query: Query,
    topic,
    n_rounds: int,
    n_authors: int = 5,
) -> tuple[list[list[Document]], list[_Author]]:
    """Author documents over n_rounds of mild revision; no rankings yet."""
    authors = [_Author(gen.rng) for _ in range(n_authors)]
    q_terms = sorted(query.terms)
    rounds: list[list[Document]] = []
    texts = [
        gen.doc_text(topic, q_terms, a.lam, stuffed=a.stuffed) for a in authors
    ]
    rounds.append([_doc(query.id, f"a{k+1}", 1, t) for k, t in enumerate(texts)])
    for rnd in range(2, n_rounds + 1):
        texts = [gen.revise(t, topic, q_terms, a) for t, a in zip(texts, authors)]
        rounds.append([_doc(query.id, f"a{k+1}", rnd, t) for k, t in enumerate(texts)])
    return rounds, authors


def _history(query: Query, rounds_docs: list[list[Document]], engine, stats) -> RankingHistory:
    rankings = []
    snapshots = {}
    for i, docs in enumerate(rounds_docs, start=1):
        rankings.append(rank_documents(docs, query, engine, stats, round_index=i))
        snapshots.update({d.id: d for d in docs})
    return RankingHistory(
        query_id=query.id, rankings=tuple(reversed(rankings)), documents=snapshots
    )


def build_world(
    n_train: int = 31,
    n_online: int = 15,
    n_offline: int = 31,
    seed: int = 7,
    dim: int = 48,
    train_rounds: int = 3,
    mu: float = 1000.0,
) -> SynthWorld:
    """Generate a full experiment world: training snapshot, online
    competition material and offline round-pair snapshots, all sharing
    one corpus, one engine and one embedding store."""
    gen = _Generator(seed)
    engine = EngineModel(kind="lm_dirichlet", mu=mu)
    store = EmbeddingStore.hash_only(dim)

    queries: list[Query] = []
    topics: dict[str, tuple[str, ...]] = {}

    def new_query(prefix: str, i: int) -> Query:
        topic = gen.topic()
        q = Query(
            id=f"{prefix}{i:02d}",
            text=" ".join(topic[:2]),
            topic_description=f"material about {topic[0]} and {topic[1]}",
        )
        queries.append(q)
        topics[q.id] = topic
        return q

    # Documents are generated before stats exist; rankings are induced
    # afterwards with the one shared stats object.
    train_material = []
    for i in range(1, n_train + 1):
        q = new_query("train", i)
        rounds_docs, _ = _author_rounds(gen, q, topics[q.id], train_rounds)
        train_material.append((q, rounds_docs))

    online_material = []
    for i in range(1, n_online + 1):
        q = new_query("live", i)
        t = topics[q.id]
        q_terms = sorted(q.terms)
        shared = gen.doc_text(t, q_terms, lam=float(gen.rng.uniform(0.03, 0.08)))
        mimic_author = _Author(gen.rng)
        mimic_text = gen.doc_text(t, q_terms, mimic_author.lam, stuffed=mimic_author.stuffed)
        planted = []
        for _ in range(2):
            a = _Author(gen.rng)
            text = gen.doc_text(t, q_terms, a.lam, stuffed=a.stuffed)
            versions = [text]
            for _ in range(3):
                text = gen.revise(text, t, q_terms, a)
                versions.append(text)
            planted.append(tuple(versions))
        online_material.append((q, shared, mimic_text, planted))

    offline_material = []
    for i in range(1, n_offline + 1):
        q = new_query("off", i)
        rounds_docs, authors = _author_rounds(gen, q, topics[q.id], 2)
        next_texts = [
            gen.revise(d.text, topics[q.id], sorted(q.terms), a)
            for d, a in zip(rounds_docs[-1], authors)
        ]
        next_docs = [
            _doc(q.id, d.author_id, 3, t) for d, t in zip(rounds_docs[-1], next_texts)
        ]
        offline_material.append((q, rounds_docs, next_docs))

    all_texts = []
    for _, rounds_docs in train_material:
        all_texts.extend(d.text for docs in rounds_docs for d in docs)
    for _, shared, mimic_text, planted in online_material:
        all_texts.append(shared)
        all_texts.append(mimic_text)
        all_texts.extend(v for versions in planted for v in versions)
    for _, rounds_docs, next_docs in offline_material:
        all_texts.extend(d.text for docs in rounds_docs for d in docs)
        all_texts.extend(d.text for d in next_docs)
    stats = build_corpus_stats(
        all_texts,
        extra_texts=[q.text for q in queries],
        stopwords=default_stopwords(),
    )

    training = tuple(
        (q, _history(q, rounds_docs, engine, stats)) for q, rounds_docs in train_material
    )
    online_players: dict[str, tuple[dict, ...]] = {}
    online_queries = []
    for q, shared, mimic_text, planted in online_material:
        online_queries.append(q)
        online_players[q.id] = (
            {"id": "bot", "strategy": "bot", "initial_text": shared},
            {"id": "static", "strategy": "static", "initial_text": shared},
            {"id": "mimic", "strategy": "mimic_top", "initial_text": mimic_text},
            {"id": "plant1", "strategy": "planted", "replays": planted[0]},
            {"id": "plant2", "strategy": "planted", "replays": planted[1]},
        )
    offline = tuple(
        RoundPairSnapshot(
            query=q,
            history=_history(q, rounds_docs, engine, stats),
            next_versions={d.author_id: d for d in next_docs},
        )
        for q, rounds_docs, next_docs in offline_material
    )
    return SynthWorld(
        seed=seed,
        engine=engine,
        stats=stats,
        store=store,
        topics=topics,
        training=training,
        online_queries=tuple(online_queries),
        online_players=online_players,
        offline=offline,
        corpus_texts=tuple(all_texts),
        queries=tuple(queries),
    )


def online_configs(
    world: SynthWorld, model: PairModel, rounds: int = 2, max_terms: int = 150
) -> list[CompetitionConfig]:
    """Competition configs for the world's online queries with the given
    pair model plugged into the bot slot."""
    configs = []
    for q in world.online_queries:
        players = tuple(
            PlayerSpec(**{**proto, "model": model} if proto["strategy"] == "bot" else proto)
            for proto in world.online_players[q.id]
        )
        configs.append(
            CompetitionConfig(
                query=q,
                players=players,
                rounds=rounds,
                engine=world.engine,
                seed=world.seed,
                max_terms=max_terms,
            )
        )
    return configs
