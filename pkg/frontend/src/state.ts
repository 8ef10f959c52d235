/** View state and its pure transitions.
 *
 * The staged response pattern is never stored: it is always derived from
 * the base pattern plus the staged flip set, so reset is exact by
 * construction and flipping an item twice is the identity.
 */

import type { PanelView, ResponseEntry } from "./types.js";

export interface ViewState {
  datasetId: string | null;
  modelId: string | null;
  studentId: string | null;
  baseResponses: ResponseEntry[];
  stagedFlips: string[];
  overrides: Record<string, number>;
  cache: Partial<Record<PanelView, unknown>>;
}

export function initialState(): ViewState {
  return {
    datasetId: null,
    modelId: null,
    studentId: null,
    baseResponses: [],
    stagedFlips: [],
    overrides: {},
    cache: {},
  };
}

export function selectModel(
  state: ViewState,
  modelId: string,
  datasetId: string,
): ViewState {
  return { ...initialState(), modelId, datasetId };
}

/** Loading a student establishes the base pattern and clears staged work. */
export function loadStudent(
  state: ViewState,
  studentId: string,
  responses: ResponseEntry[],
): ViewState {
  return {
    ...state,
    studentId,
    baseResponses: responses.map((r) => ({ ...r })),
    stagedFlips: [],
    overrides: {},
    cache: { ...state.cache, diagnose: undefined, contrastive: undefined, counterfactual: undefined },
  };
}

export function isFlippable(state: ViewState, itemId: string): boolean {
  return state.baseResponses.some((r) => r.item_id === itemId);
}

/** Toggle one staged flip; flipping the same item again un-stages it. */
export function toggleFlip(state: ViewState, itemId: string): ViewState {
  if (!isFlippable(state, itemId)) return state;
  const staged = state.stagedFlips.includes(itemId)
    ? state.stagedFlips.filter((i) => i !== itemId)
    : [...state.stagedFlips, itemId];
  return { ...state, stagedFlips: staged };
}

/** The pattern under inspection: base responses with staged flips applied. */
export function currentPattern(state: ViewState): ResponseEntry[] {
  const flips = new Set(state.stagedFlips);
  return state.baseResponses.map((r) =>
    flips.has(r.item_id) ? { ...r, correct: 1 - r.correct } : { ...r },
  );
}

export function setOverride(
  state: ViewState,
  kcId: string,
  value: number,
): ViewState {
  return { ...state, overrides: { ...state.overrides, [kcId]: value } };
}

export function clearOverride(state: ViewState, kcId: string): ViewState {
  const overrides = { ...state.overrides };
  delete overrides[kcId];
  return { ...state, overrides };
}

/** Back to the student's original response state: no flips, no overrides. */
export function reset(state: ViewState): ViewState {
  return {
    ...state,
    stagedFlips: [],
    overrides: {},
    cache: { ...state.cache, contrastive: undefined, counterfactual: undefined },
  };
}

export function cachePayload(
  state: ViewState,
  view: PanelView,
  payload: unknown,
): ViewState {
  return { ...state, cache: { ...state.cache, [view]: payload } };
}

/** Keep only the newest in-flight request per panel: stale responses are
 * dropped when a fresher request has been issued since. */
export function makeLatestGate() {
  const tokens = new Map<string, number>();
  return async function latest<T>(
    panel: string,
    request: () => Promise<T>,
  ): Promise<T | undefined> {
    const token = (tokens.get(panel) ?? 0) + 1;
    tokens.set(panel, token);
    const result = await request();
    return tokens.get(panel) === token ? result : undefined;
  };
}
