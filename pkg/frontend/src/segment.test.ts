import { describe, expect, it } from "vitest";

import fixtures from "./__fixtures__/segmentation.json";
import { countTerms, segmentPassages, tokenize } from "./segment.js";

type Case = { text: string; passages: string[]; term_count: number };

describe("segmentPassages stays in lockstep with the server", () => {
  for (const [name, data] of Object.entries(fixtures as Record<string, Case>)) {
    it(`matches the server segmentation for ${name}`, () => {
      expect(segmentPassages(data.text)).toEqual(data.passages);
      expect(countTerms(data.text)).toBe(data.term_count);
    });
  }

  it("rejects empty text", () => {
    expect(() => segmentPassages("   ")).toThrow();
  });
});

describe("tokenize", () => {
  it("lowercases and strips punctuation", () => {
    expect(tokenize("Hoof Cracks, horses.")).toEqual(["hoof", "cracks", "horses"]);
  });

  it("returns an empty list for empty text", () => {
    expect(tokenize("")).toEqual([]);
  });
});
