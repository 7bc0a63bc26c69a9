"""Plain-text tables and machine-readable records for stored results.

Rendering is byte-deterministic: fixed float formats, fixed row orders,
no timestamps.
"""

from __future__ import annotations

from ..bot import FEATURE_NAMES, PairModel
from ..training import TrainedModel
from .competition import BatchResult
from .offline import OfflineReport

__all__ = [
    "render_batch_report",
    "render_offline_report",
    "render_weight_table",
    "batch_records",
    "offline_records",
]

_STRATEGY_ORDER = ("human", "planted", "static", "mimic_top", "bot")
_MEASURES = (
    ("average_rank", "average rank"),
    ("raw_promotion", "raw promotion"),
    ("scaled_promotion", "scaled promotion"),
    ("quality_proxy", "quality proxy"),
)


def _fmt(value: float | None) -> str:
    return "NA" if value is None else f"{value:.3f}"


def render_batch_report(batch: BatchResult) -> str:
    """Measure-by-strategy table with one column per round. Promotions
    are undefined in round 1 and render as NA."""
    agg = batch.aggregate()
    strategies = [s for s in _STRATEGY_ORDER if s in agg] + sorted(set(agg) - set(_STRATEGY_ORDER))
    rounds = sorted({r for rounds in agg.values() for r in rounds})
    name_w = max(16, max((len(s) for s in strategies), default=0) + 2)

    lines = [f"competitions: {len(batch.results)}  queries averaged per cell"]
    header = f"{'measure':<18}{'player':<{name_w}}" + "".join(f"{f'round {r}':>12}" for r in rounds)
    lines.append(header)
    lines.append("-" * len(header))
    for key, label in _MEASURES:
        for i, strategy in enumerate(strategies):
            cells = "".join(
                f"{_fmt(agg[strategy].get(r, {}).get(key)):>12}" for r in rounds
            )
            lines.append(f"{label if i == 0 else '':<18}{strategy:<{name_w}}{cells}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"


def render_offline_report(report: OfflineReport) -> str:
    """One row per variant with the four aggregate measures.

    Significance markers: 's' / 'b' after a value mean the difference
    with the author row / static row is significant at corrected
    p < 0.05 for that measure (when that test was run).
    """
    agg = report.aggregate()
    rows = [r for r in report.rows if r in agg]
    name_w = max(14, max((len(r) for r in rows), default=0) + 2)
    header = (
        f"{'variant':<{name_w}}{'cells':>6}"
        + "".join(f"{label:>20}" for _, label in _MEASURES)
    )
    lines = [
        f"settings: {report.total_settings}  evaluated cells per row below  "
        f"(skipped: {len(report.skipped)})",
        header,
        "-" * len(header),
    ]
    for row in rows:
        a = agg[row]
        cells = f"{a['cells']:>6.0f}"
        for key, _ in _MEASURES:
            marks = ""
            for ref, mark in (("author", "s"), ("static", "b")):
                if row == ref:
                    continue
                p = report.corrected_p(row, ref, key)
                if p is not None and p < 0.05:
                    marks += mark
            cells += f"{a[key]:>17.3f}{marks:<3}"
        lines.append(f"{row:<{name_w}}{cells}")
    if report.p_values:
        lines.append("")
        lines.append(f"permutation tests ({report.bonferroni_factor} comparisons, Bonferroni-corrected):")
        for (ra, rb, measure), p in sorted(report.p_values.items()):
            corrected = report.corrected_p(ra, rb, measure)
            lines.append(f"  {ra} vs {rb} [{measure}]: p={p:.5f} corrected={corrected:.5f}")
    return "\n".join(lines) + "\n"


def render_weight_table(model: PairModel | TrainedModel) -> str:
    """All 15 pair-ranker feature weights, heaviest first."""
    pair_model = model.model if isinstance(model, TrainedModel) else model
    lines = [f"{'feature':<26}{'weight':>9}", "-" * 35]
    for name in sorted(FEATURE_NAMES, key=lambda n: -pair_model.weights[n]):
        lines.append(f"{name:<26}{pair_model.weights[name]:>9.3f}")
    if isinstance(model, TrainedModel):
        lines.append("")
        lines.append(f"chosen C: {model.chosen_c}")
        for c, score in sorted(model.cv_ndcg.items(), key=lambda kv: float(kv[0])):
            lines.append(f"  C={c}: mean validation NDCG@5 = {score:.5f}")
    return "\n".join(lines) + "\n"


def batch_records(batch: BatchResult) -> list[dict]:
    records = []
    for result in batch.results:
        records.extend(result.to_records())
    return records


def offline_records(report: OfflineReport) -> list[dict]:
    records = [c.to_dict() for c in report.cells]
    records.extend({"skipped": True, **s} for s in report.skipped)
    return records
