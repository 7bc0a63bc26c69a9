"""Offline evaluation: bot revision vs. the author's own revision.

For every (query, rank) cell, the document at that rank of a stored
round is modified once by each bot variant. Its rank is then read off a
ranking induced over the other four authors' next-round versions plus
the modified document, and contrasted with the rank the author's own
next-round version achieves among the same four documents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..bot import PairModel, RankingHistory, modify_document
from ..engine import Document, EngineModel, Query, rank_documents
from ..text import CorpusStats, EmbeddingStore
from .metrics import quality_proxy, raw_and_scaled_promotion
from .significance import bonferroni, permutation_test

__all__ = ["RoundPairSnapshot", "OfflineCell", "OfflineReport", "offline_eval"]

AUTHOR_ROW = "author"
STATIC_ROW = "static"


@dataclass(frozen=True)
class RoundPairSnapshot:
    """One query's material: the history up to round t (current ranking
    first) and each author's round t+1 version, when they produced one."""

    query: Query
    history: RankingHistory
    next_versions: Mapping[str, Document]  # author_id -> round t+1 document

    @property
    def current_docs(self) -> list[Document]:
        return [self.history.document(i) for i in self.history.current.doc_ids]


@dataclass(frozen=True)
class OfflineCell:
    query_id: str
    start_rank: int
    row: str
    rank: int
    raw_promotion: int
    scaled_promotion: float
    quality_proxy: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class OfflineReport:
    rows: tuple[str, ...]
    cells: tuple[OfflineCell, ...]
    skipped: tuple[dict, ...]
    total_settings: int
    p_values: Mapping[tuple[str, str, str], float] = field(default_factory=dict)
    bonferroni_factor: int = 1

    def cells_for(self, row: str) -> list[OfflineCell]:
        return [c for c in self.cells if c.row == row]

    def aggregate(self) -> dict[str, dict[str, float]]:
        out = {}
        for row in self.rows:
            cells = self.cells_for(row)
            if not cells:
                continue
            n = len(cells)
            out[row] = {
                "cells": n,
                "average_rank": sum(c.rank for c in cells) / n,
                "raw_promotion": sum(c.raw_promotion for c in cells) / n,
                "scaled_promotion": sum(c.scaled_promotion for c in cells) / n,
                "quality_proxy": sum(c.quality_proxy for c in cells) / n,
            }
        return out

    def corrected_p(self, row_a: str, row_b: str, measure: str) -> float | None:
        p = self.p_values.get((row_a, row_b, measure)) or self.p_values.get((row_b, row_a, measure))
        return None if p is None else bonferroni(p, self.bonferroni_factor)

    def paired_values(self, row_a: str, row_b: str, measure: str) -> tuple[list[float], list[float]]:
        """Measure values of two rows over the cells both produced."""
        key = lambda c: (c.query_id, c.start_rank)
        a_cells = {key(c): c for c in self.cells_for(row_a)}
        b_cells = {key(c): c for c in self.cells_for(row_b)}
        shared = sorted(set(a_cells) & set(b_cells))
        get = lambda c: float(getattr(c, measure))
        return [get(a_cells[k]) for k in shared], [get(b_cells[k]) for k in shared]



def offline_eval(
    snapshots: Sequence[RoundPairSnapshot],
    variants: Mapping[str, PairModel],
    engine: EngineModel,
    stats: CorpusStats,
    store: EmbeddingStore,
    start_ranks: Sequence[int] = (2, 3, 4, 5),
    max_terms: int | None = 150,
    n_perm: int = 100_000,
    seed: int = 0,
    test_measures: Sequence[str] = ("raw_promotion",),
) -> OfflineReport:
    """Modify each snapshot's documents at the given start ranks with
    every bot variant and contrast against the author's own revision and
    a static (unchanged) reference.

    Pairwise permutation tests between rows run on ``test_measures``;
    the Bonferroni factor is the number of tests performed.
    """
    rows = tuple(variants) + (STATIC_ROW, AUTHOR_ROW)
    cells: list[OfflineCell] = []
    skipped: list[dict] = []
    total = 0

    for snap in snapshots:
        current = snap.history.current
        n = len(current)
        for start_rank in start_ranks:
            if start_rank < 2 or start_rank > n:
                continue
            total += 1
            d_cur = snap.history.document(current.doc_ids[start_rank - 1])
            other_next = []
            missing_other = None
            for doc_id in current.doc_ids:
                if doc_id == d_cur.id:
                    continue
                author = snap.history.document(doc_id).author_id
                nxt = snap.next_versions.get(author)
                if nxt is None:
                    missing_other = author
                    break
                other_next.append(nxt)
            if missing_other is not None:
                skipped.append(
                    {
                        "query_id": snap.query.id,
                        "start_rank": start_rank,
                        "reason": f"author {missing_other!r} has no next-round version",
                    }
                )
                continue

            def cell(row: str, candidate: Document) -> OfflineCell:
                ranking = rank_documents(other_next + [candidate], snap.query, engine, stats)
                new_rank = ranking.rank_of(candidate.id)
                promo = raw_and_scaled_promotion(start_rank, new_rank, n)
                assert promo is not None  # start_rank >= 2
                raw, scaled = promo
                return OfflineCell(
                    query_id=snap.query.id,
                    start_rank=start_rank,
                    row=row,
                    rank=new_rank,
                    raw_promotion=raw,
                    scaled_promotion=scaled,
                    quality_proxy=quality_proxy(candidate, stats),
                )

            for name, model in variants.items():
                modified, _ = modify_document(
                    d_cur, snap.query, snap.history, model, stats, store, max_terms=max_terms
                )
                cells.append(cell(name, modified))
            cells.append(cell(STATIC_ROW, d_cur))
            own_next = snap.next_versions.get(d_cur.author_id)
            if own_next is None:
                skipped.append(
                    {
                        "query_id": snap.query.id,
                        "start_rank": start_rank,
                        "reason": f"author {d_cur.author_id!r} (modified document) has no next-round version",
                    }
                )
            else:
                cells.append(cell(AUTHOR_ROW, own_next))

    report = OfflineReport(
        rows=rows,
        cells=tuple(cells),
        skipped=tuple(skipped),
        total_settings=total,
    )
    p_values: dict[tuple[str, str, str], float] = {}
    for i, row_a in enumerate(rows):
        for row_b in rows[i + 1 :]:
            for measure in test_measures:
                a, b = report.paired_values(row_a, row_b, measure)
                if a:
                    p_values[(row_a, row_b, measure)] = permutation_test(
                        a, b, n_perm=n_perm, seed=seed
                    )
    return OfflineReport(
        rows=rows,
        cells=tuple(cells),
        skipped=tuple(skipped),
        total_settings=total,
        p_values=p_values,
        bonferroni_factor=max(1, len(p_values)),
    )
