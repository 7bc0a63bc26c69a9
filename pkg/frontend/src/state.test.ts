import { describe, expect, it } from "vitest";

import { RankingView } from "./api.js";
import { draftStatus, formatPromotion, metricsByRound, myTrajectory } from "./state.js";

describe("draftStatus", () => {
  it("blocks submission over the term cap", () => {
    const status = draftStatus("word ".repeat(151), 150);
    expect(status.termCount).toBe(151);
    expect(status.overCap).toBe(true);
    expect(status.canSubmit).toBe(false);
  });

  it("blocks empty drafts", () => {
    const status = draftStatus("   ", 150);
    expect(status.empty).toBe(true);
    expect(status.canSubmit).toBe(false);
    expect(status.preview).toEqual([]);
  });

  it("allows a draft exactly at the cap and previews passages", () => {
    const status = draftStatus("One two three. Four five.", 5);
    expect(status.termCount).toBe(5);
    expect(status.canSubmit).toBe(true);
    expect(status.preview).toEqual(["One two three.", "Four five."]);
  });
});

describe("formatPromotion", () => {
  it("renders NA for the undefined round-1 value", () => {
    expect(formatPromotion(null)).toBe("NA");
  });

  it("signs defined values", () => {
    expect(formatPromotion(2)).toBe("+2");
    expect(formatPromotion(-1)).toBe("-1");
    expect(formatPromotion(0.5, 2)).toBe("+0.50");
  });
});

const view: RankingView = {
  round_index: 2,
  finished: false,
  standings: [],
  rounds: [],
  metrics: [
    { round: 1, author: "author-1", is_you: true, rank: 3, raw_promotion: null, scaled_promotion: null },
    { round: 1, author: "author-2", is_you: false, rank: 1, raw_promotion: null, scaled_promotion: null },
    { round: 2, author: "author-1", is_you: true, rank: 1, raw_promotion: 2, scaled_promotion: 1.0 },
    { round: 2, author: "author-2", is_you: false, rank: 3, raw_promotion: null, scaled_promotion: null },
  ],
};

describe("metric views", () => {
  it("round-1 rows show NA promotions", () => {
    const tables = metricsByRound(view);
    expect(tables[0].round).toBe(1);
    expect(tables[0].rows.every((r) => r.raw === "NA")).toBe(true);
  });

  it("orders rows by rank and rounds ascending", () => {
    const tables = metricsByRound(view);
    expect(tables.map((t) => t.round)).toEqual([1, 2]);
    expect(tables[1].rows.map((r) => r.rank)).toEqual([1, 3]);
  });

  it("extracts my trajectory across rounds", () => {
    expect(myTrajectory(view)).toEqual([
      { round: 1, rank: 3, raw: "NA", scaled: "NA" },
      { round: 2, rank: 1, raw: "+2", scaled: "+1.00" },
    ]);
  });
});
