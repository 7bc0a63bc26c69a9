"""Competition simulator, evaluation measures and reporting."""

from .competition import (
    BatchResult,
    Competition,
    CompetitionConfig,
    CompetitionResult,
    SubmissionError,
    run_batch,
    run_competition,
)
from .metrics import PlayerRoundMetrics, RoundMetrics, quality_proxy, raw_and_scaled_promotion
from .offline import OfflineCell, OfflineReport, RoundPairSnapshot, offline_eval
from .players import PlayerSpec
from .reports import (
    batch_records,
    offline_records,
    render_batch_report,
    render_offline_report,
    render_weight_table,
)
from .significance import bonferroni, permutation_test

__all__ = [
    "BatchResult",
    "Competition",
    "CompetitionConfig",
    "CompetitionResult",
    "SubmissionError",
    "run_batch",
    "run_competition",
    "PlayerRoundMetrics",
    "RoundMetrics",
    "quality_proxy",
    "raw_and_scaled_promotion",
    "OfflineCell",
    "OfflineReport",
    "RoundPairSnapshot",
    "offline_eval",
    "PlayerSpec",
    "batch_records",
    "offline_records",
    "render_batch_report",
    "render_offline_report",
    "render_weight_table",
    "bonferroni",
    "permutation_test",
]
