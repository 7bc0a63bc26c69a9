"""Per-round ranking measures and the automated quality proxy."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping

from ..engine import Document
from ..text import CorpusStats, tokenize

__all__ = ["raw_and_scaled_promotion", "quality_proxy", "PlayerRoundMetrics", "RoundMetrics"]

# quality_proxy internals, fixed so reported numbers are reproducible:
# documents shorter than MIN_TERMS skip the stopword and entropy checks,
# stopword starvation ramps below a 5% stopword share, entropy collapse
# ramps as the term-distribution entropy falls below ln(8).
_MIN_TERMS = 16
_STOPWORD_FLOOR = 0.05
_ENTROPY_FLOOR = math.log(8.0)


def raw_and_scaled_promotion(
    rank_prev: int, rank_next: int, n: int
) -> tuple[int, float] | None:
    """Positions gained between consecutive rounds, raw and scaled.

    raw = rank_prev - rank_next (positive means promotion). Scaled
    divides by the maximum movement possible from the starting position:
    rank_prev - 1 upward, n - rank_prev downward, so scaled lies in
    [-1, 1]. Rank-1 holders can only be demoted and are not measured:
    they yield None.
    """
    if not (1 <= rank_prev <= n and 1 <= rank_next <= n):
        raise ValueError(f"ranks must lie in 1..{n}")
    if rank_prev == 1:
        return None
    raw = rank_prev - rank_next
    scaled = raw / (rank_prev - 1) if raw >= 0 else raw / (n - rank_prev)
    return raw, scaled


def quality_proxy(doc: Document, stats: CorpusStats) -> float:
    """Automated 0..1 stand-in for human quality judgments.

    1 - max(duplicate-passage ratio, stopword starvation, entropy
    collapse). Catches the failure modes a passage-swapping bot can
    introduce: verbatim repeated sentences, keyword stuffing and
    degenerate term distributions. A proxy, not a human label.
    """
    passages = doc.passages
    normalized = [tuple(tokenize(p)) for p in passages]
    dup_ratio = 1.0 - len(set(normalized)) / len(normalized)

    toks = tokenize(doc.text)
    n = len(toks)
    starvation = 0.0
    collapse = 0.0
    if n >= _MIN_TERMS:
        stop_ratio = sum(1 for t in toks if t in stats.stopwords) / n
        starvation = max(0.0, min(1.0, (_STOPWORD_FLOOR - stop_ratio) / _STOPWORD_FLOOR))
        entropy = 0.0
        for count in Counter(toks).values():
            p = count / n
            entropy -= p * math.log(p)
        collapse = max(0.0, min(1.0, 1.0 - entropy / _ENTROPY_FLOOR))
    return 1.0 - max(dup_ratio, starvation, collapse)


@dataclass(frozen=True)
class PlayerRoundMetrics:
    rank: int
    raw_promotion: int | None
    scaled_promotion: float | None
    quality_proxy: float

    def to_dict(self) -> dict:
        return {
            "rank": self.rank,
            "raw_promotion": self.raw_promotion,
            "scaled_promotion": self.scaled_promotion,
            "quality_proxy": self.quality_proxy,
        }


@dataclass(frozen=True)
class RoundMetrics:
    round_index: int
    per_player: Mapping[str, PlayerRoundMetrics]

    def to_dict(self) -> dict:
        return {
            "round_index": self.round_index,
            "players": {pid: m.to_dict() for pid, m in sorted(self.per_player.items())},
        }
