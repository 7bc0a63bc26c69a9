"""Line-delimited JSON persistence for corpora, snapshots, datasets and
models."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from .bot import PairModel, RankingHistory
from .engine import Document, EngineModel, Query, Ranking
from .training import LabeledPair, TrainedModel

__all__ = [
    "read_jsonl",
    "write_jsonl",
    "load_documents",
    "save_documents",
    "load_queries",
    "load_engine_model",
    "save_engine_model",
    "load_pair_model",
    "save_pair_model",
    "load_labeled_pairs",
    "save_labeled_pairs",
    "load_snapshot",
    "save_snapshot",
    "load_offline_snapshot",
    "save_offline_snapshot",
]


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def write_jsonl(path: str | Path, records: Iterable[Mapping]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_documents(path: str | Path, max_terms: int | None = None) -> dict[str, Document]:
    docs = {}
    for rec in read_jsonl(path):
        doc = Document.from_text(rec["id"], rec["author_id"], rec["text"], max_terms=max_terms)
        docs[doc.id] = doc
    return docs


def save_documents(path: str | Path, docs: Iterable[Document]) -> None:
    write_jsonl(
        path,
        ({"id": d.id, "author_id": d.author_id, "text": d.text} for d in docs),
    )


def load_queries(path: str | Path) -> dict[str, Query]:
    out = {}
    for rec in read_jsonl(path):
        q = Query(rec["id"], rec["text"], rec.get("topic_description", ""))
        out[q.id] = q
    return out


def load_engine_model(path: str | Path) -> EngineModel:
    with open(path, encoding="utf-8") as fh:
        return EngineModel.from_dict(json.load(fh))


def save_engine_model(path: str | Path, model: EngineModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_pair_model(path: str | Path) -> PairModel | TrainedModel:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "metadata" in data:
        return TrainedModel.from_dict(data)
    return PairModel.from_dict(data)


def save_pair_model(path: str | Path, model: PairModel | TrainedModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_labeled_pairs(path: str | Path) -> list[LabeledPair]:
    return [LabeledPair.from_dict(rec) for rec in read_jsonl(path)]


def save_labeled_pairs(path: str | Path, pairs: Iterable[LabeledPair]) -> None:
    write_jsonl(path, (p.to_dict() for p in pairs))


def save_snapshot(path: str | Path, snapshot: Iterable[tuple[Query, RankingHistory]]) -> None:
    """One record per query: its rankings (newest first) and every
    document version they mention."""
    records = []
    for query, history in snapshot:
        records.append(
            {
                "query": {
                    "id": query.id,
                    "text": query.text,
                    "topic_description": query.topic_description,
                },
                "rankings": [
                    {"round_index": r.round_index, "doc_ids": list(r.doc_ids)}
                    for r in history.rankings
                ],
                "documents": [
                    {"id": d.id, "author_id": d.author_id, "text": d.text}
                    for _, d in sorted(history.documents.items())
                ],
            }
        )
    write_jsonl(path, records)


def load_snapshot(path: str | Path) -> list[tuple[Query, RankingHistory]]:
    out = []
    for rec in read_jsonl(path):
        q, history = _history_from_record(rec)
        out.append((q, history))
    return out


def _history_from_record(rec: Mapping) -> tuple[Query, RankingHistory]:
    q = Query(
        rec["query"]["id"],
        rec["query"]["text"],
        rec["query"].get("topic_description", ""),
    )
    documents = {
        d["id"]: Document.from_text(d["id"], d["author_id"], d["text"], max_terms=None)
        for d in rec["documents"]
    }
    rankings = tuple(
        Ranking(query_id=q.id, doc_ids=tuple(r["doc_ids"]), round_index=r["round_index"])
        for r in rec["rankings"]
    )
    return q, RankingHistory(query_id=q.id, rankings=rankings, documents=documents)


def save_offline_snapshot(path: str | Path, snapshots) -> None:
    """Round-pair snapshots: the training-snapshot record shape plus each
    author's next-round version."""
    records = []
    for snap in snapshots:
        records.append(
            {
                "query": {
                    "id": snap.query.id,
                    "text": snap.query.text,
                    "topic_description": snap.query.topic_description,
                },
                "rankings": [
                    {"round_index": r.round_index, "doc_ids": list(r.doc_ids)}
                    for r in snap.history.rankings
                ],
                "documents": [
                    {"id": d.id, "author_id": d.author_id, "text": d.text}
                    for _, d in sorted(snap.history.documents.items())
                ],
                "next_versions": [
                    {"id": d.id, "author_id": d.author_id, "text": d.text}
                    for _, d in sorted(snap.next_versions.items())
                ],
            }
        )
    write_jsonl(path, records)


def load_offline_snapshot(path: str | Path):
    from .arena.offline import RoundPairSnapshot

    out = []
    for rec in read_jsonl(path):
        q, history = _history_from_record(rec)
        next_versions = {
            d["author_id"]: Document.from_text(d["id"], d["author_id"], d["text"], max_terms=None)
            for d in rec["next_versions"]
        }
        out.append(RoundPairSnapshot(query=q, history=history, next_versions=next_versions))
    return out
