/**
 * Pure view-state helpers: everything the dashboard shows is derived
 * from API responses plus the local draft, with no hidden channel.
 */

import { RankingView } from "./api.js";
import { countTerms, segmentPassages } from "./segment.js";

export type DraftStatus = {
  termCount: number;
  cap: number;
  overCap: boolean;
  empty: boolean;
  canSubmit: boolean;
  preview: string[];
};

export function draftStatus(draft: string, cap: number): DraftStatus {
  const termCount = countTerms(draft);
  const empty = draft.trim() === "";
  const overCap = termCount > cap;
  return {
    termCount,
    cap,
    overCap,
    empty,
    canSubmit: !empty && !overCap,
    preview: empty ? [] : segmentPassages(draft),
  };
}

/** Round-1 promotions are undefined and display as NA. */
export function formatPromotion(value: number | null, digits = 0): string {
  if (value === null || value === undefined) {
    return "NA";
  }
  const text = digits > 0 ? value.toFixed(digits) : String(value);
  return value > 0 ? `+${text}` : text;
}

export type TrajectoryPoint = {
  round: number;
  rank: number;
  raw: string;
  scaled: string;
};

export function myTrajectory(view: RankingView): TrajectoryPoint[] {
  return view.metrics
    .filter((m) => m.is_you)
    .sort((a, b) => a.round - b.round)
    .map((m) => ({
      round: m.round,
      rank: m.rank,
      raw: formatPromotion(m.raw_promotion),
      scaled: formatPromotion(m.scaled_promotion, 2),
    }));
}

export type RoundTable = {
  round: number;
  rows: { author: string; rank: number; raw: string; isYou: boolean }[];
};

export function metricsByRound(view: RankingView): RoundTable[] {
  const rounds = new Map<number, RoundTable>();
  for (const m of view.metrics) {
    let table = rounds.get(m.round);
    if (!table) {
      table = { round: m.round, rows: [] };
      rounds.set(m.round, table);
    }
    table.rows.push({
      author: m.author,
      rank: m.rank,
      raw: formatPromotion(m.raw_promotion),
      isYou: m.is_you,
    });
  }
  for (const table of rounds.values()) {
    table.rows.sort((a, b) => a.rank - b.rank);
  }
  return [...rounds.values()].sort((a, b) => a.round - b.round);
}
