import { describe, expect, it } from "vitest";
import { defaultRoster, fullPrecision, poolLabel, prob3 } from "../src/format";
import { parseOverride } from "../src/components/ResultForm";

describe("prob3", () => {
  it("renders three decimals", () => {
    expect(prob3(0.7224891)).toBe("0.722");
    expect(prob3(0)).toBe("0.000");
    expect(prob3(1)).toBe("1.000");
  });
});

describe("fullPrecision", () => {
  it("round-trips the exact double", () => {
    for (const v of [0.1, 0.5130218600000002, 2.548951818586009, 1e-7]) {
      expect(Number(fullPrecision(v))).toBe(v);
    }
  });
});

describe("poolLabel", () => {
  const roster = defaultRoster(10);

  it("joins roster names in pool order", () => {
    expect(poolLabel([0, 3, 7], roster)).toBe("P0, P3, P7");
  });

  it("falls back to the raw index outside the roster", () => {
    expect(poolLabel([12], roster)).toBe("#12");
  });
});

describe("parseOverride", () => {
  it("parses comma separated indices", () => {
    expect(parseOverride("2, 3,4 , 7")).toEqual([2, 3, 4, 7]);
  });

  it("rejects fractions, negatives, junk, and empty input", () => {
    expect(parseOverride("1.5")).toBeNull();
    expect(parseOverride("-1")).toBeNull();
    expect(parseOverride("a,b")).toBeNull();
    expect(parseOverride("  ")).toBeNull();
  });
});
