import { describe, expect, it } from "vitest";

import {
  cachePayload,
  currentPattern,
  initialState,
  isFlippable,
  loadStudent,
  makeLatestGate,
  reset,
  selectModel,
  setOverride,
  clearOverride,
  toggleFlip,
} from "../src/state.js";
import type { ResponseEntry } from "../src/types.js";

const RESPONSES: ResponseEntry[] = [
  { item_id: "i1", correct: 1, selected_option: null },
  { item_id: "i2", correct: 0, selected_option: "B" },
  { item_id: "i3", correct: 1, selected_option: null },
];

function loaded() {
  const base = selectModel(initialState(), "m-1", "ds-1");
  return loadStudent(base, "s1", RESPONSES);
}

describe("staged flips", () => {
  it("flip twice returns the view to its base state (deep equal)", () => {
    const start = loaded();
    const once = toggleFlip(start, "i2");
    const twice = toggleFlip(once, "i2");
    expect(twice).toEqual(start);
  });

  it("staged pattern is always derivable from the base pattern", () => {
    const start = loaded();
    expect(currentPattern(start)).toEqual(RESPONSES);
    const flipped = toggleFlip(start, "i1");
    expect(currentPattern(flipped)).toEqual([
      { item_id: "i1", correct: 0, selected_option: null },
      { item_id: "i2", correct: 0, selected_option: "B" },
      { item_id: "i3", correct: 1, selected_option: null },
    ]);
    // the base itself is never rewritten
    expect(flipped.baseResponses).toEqual(RESPONSES);
  });

  it("items outside the student's responses cannot be flipped", () => {
    const start = loaded();
    expect(isFlippable(start, "i9")).toBe(false);
    expect(toggleFlip(start, "i9")).toEqual(start);
  });

  it("multiple staged flips accumulate in staging order", () => {
    const state = toggleFlip(toggleFlip(loaded(), "i3"), "i1");
    expect(state.stagedFlips).toEqual(["i3", "i1"]);
    expect(currentPattern(state).map((r) => r.correct)).toEqual([0, 0, 0]);
  });
});

describe("reset", () => {
  it("restores the initial post-load state deep-equal after arbitrary work", () => {
    const start = loaded();
    let state = toggleFlip(start, "i1");
    state = toggleFlip(state, "i2");
    state = setOverride(state, "kc1", 0.3);
    state = setOverride(state, "kc2", 0.8);
    state = clearOverride(state, "kc2");
    expect(reset(state)).toEqual(start);
  });

  it("is a no-op when nothing is staged", () => {
    const start = loaded();
    expect(reset(start)).toEqual(start);
  });

  it("keeps cached read-only payloads for re-render without new requests", () => {
    const start = cachePayload(loaded(), "diagnose", { mastery: { kc1: 0.5 } });
    const after = reset(toggleFlip(start, "i1"));
    expect(after.cache.diagnose).toEqual({ mastery: { kc1: 0.5 } });
    expect(after.cache.contrastive).toBeUndefined();
  });
});

describe("overrides", () => {
  it("set and clear", () => {
    const start = loaded();
    const withOverride = setOverride(start, "kc1", 0.34);
    expect(withOverride.overrides).toEqual({ kc1: 0.34 });
    expect(clearOverride(withOverride, "kc1")).toEqual(start);
  });
});

describe("loading a student", () => {
  it("clears staged work and explanation caches", () => {
    let state = loaded();
    state = toggleFlip(state, "i1");
    state = setOverride(state, "kc1", 0.2);
    state = cachePayload(state, "contrastive", { delta: {} });
    const next = loadStudent(state, "s2", RESPONSES.slice(0, 1));
    expect(next.stagedFlips).toEqual([]);
    expect(next.overrides).toEqual({});
    expect(next.cache.contrastive).toBeUndefined();
    expect(next.baseResponses).toEqual(RESPONSES.slice(0, 1));
  });
});

describe("latest-request gate", () => {
  it("drops responses that were superseded by a newer request", async () => {
    const gate = makeLatestGate();
    let releaseFirst!: (v: string) => void;
    const first = gate("panel", () => new Promise<string>((res) => (releaseFirst = res)));
    const second = gate("panel", () => Promise.resolve("newer"));
    expect(await second).toBe("newer");
    releaseFirst("stale");
    expect(await first).toBeUndefined();
  });

  it("tracks panels independently", async () => {
    const gate = makeLatestGate();
    const a = gate("a", () => Promise.resolve("a1"));
    const b = gate("b", () => Promise.resolve("b1"));
    expect(await a).toBe("a1");
    expect(await b).toBe("b1");
  });
});
