/** Thin-client fidelity: rendered panels display exactly the values of the
 * recorded API payloads (raw values on hover titles, whole-percent text),
 * and rendering is deterministic. Fixtures were captured verbatim from a
 * live service run. */

import { describe, expect, it } from "vitest";

import {
  renderContrastive,
  renderCounterfactual,
  renderDiagnosis,
  renderItems,
  renderKcs,
  renderOverview,
  renderPattern,
  renderSuggestions,
} from "../src/render.js";
import { pct } from "../src/format.js";
import fixtures from "./fixtures.json";
import type {
  ContrastivePayload,
  CounterfactualPayload,
  DiagnosePayload,
  ItemsPayload,
  KcsPayload,
  OverviewPayload,
  ResponseEntry,
  SuggestionsPayload,
} from "../src/types.js";

const overview = fixtures.overview as OverviewPayload;
const items = fixtures.items as ItemsPayload;
const kcs = fixtures.kcs as KcsPayload;
const suggestions = fixtures.suggestions as SuggestionsPayload;
const diagnose = fixtures.diagnose as DiagnosePayload;
const contrastivePayload = fixtures.contrastive as ContrastivePayload;
const counterfactual = fixtures.counterfactual as CounterfactualPayload;
const studentResponses = fixtures.student_responses as ResponseEntry[];

describe("dashboard panels render payload values verbatim", () => {
  it("overview: counts, class accuracy, every KC weight and mastery", () => {
    const html = renderOverview(overview);
    expect(html).toContain(`<dd>${overview.n_students}</dd>`);
    expect(html).toContain(`<dd>${overview.n_records}</dd>`);
    expect(html).toContain(`title="${overview.class_accuracy}"`);
    for (const [kc, weight] of Object.entries(overview.kc_weights)) {
      expect(html).toContain(kc);
      expect(html).toContain(`title="${weight}"`);
    }
    for (const value of Object.values(overview.kc_class_mastery ?? {})) {
      expect(html).toContain(`title="${value}"`);
    }
  });

  it("items: every accuracy/difficulty/discrimination value appears", () => {
    const html = renderItems(items);
    for (const st of items.items) {
      expect(html).toContain(st.item_id);
      expect(html).toContain(`title="${st.accuracy}"`);
      expect(html).toContain(`title="${st.difficulty_classical}"`);
      if (st.discrimination_pb !== null) {
        expect(html).toContain(`title="${st.discrimination_pb}"`);
      }
    }
    for (const missing of items.error_patterns.items_without_option_data) {
      expect(html).toContain(missing);
    }
  });

  it("kcs: weights, item counts and class mastery as payload values", () => {
    const html = renderKcs(kcs, suggestions);
    for (const kc of kcs.kcs) {
      expect(html).toContain(kc.kc_id);
      expect(html).toContain(`title="${kc.weight}"`);
      expect(html).toContain(`title="${kc.class_mean_mastery}"`);
      expect(html).toContain(`<td>${kc.item_count}</td>`);
    }
  });

  it("suggestions: every text verbatim (HTML-escaped only)", () => {
    const html = renderSuggestions(suggestions);
    for (const s of suggestions.suggestions) {
      const escaped = s.text.replace(/&/g, "&amp;").replace(/</g, "&lt;");
      expect(html).toContain(escaped.slice(0, 40));
    }
  });
});

describe("reasoning panels", () => {
  it("mastery values (G) and conclusions (D) come straight from the payload", () => {
    const html = renderDiagnosis(diagnose);
    for (const [kc, value] of Object.entries(diagnose.mastery)) {
      expect(html).toContain(kc);
      expect(html).toContain(`title="${value}"`);
      expect(html).toContain(`>${pct(value)}<`);
    }
    for (const step of diagnose.reasoning_chain) {
      expect(html).toContain(step.conclusion.replace(/&/g, "&amp;").slice(0, 40));
      for (const ev of step.evidence) {
        expect(html).toContain(ev.item_id);
      }
    }
  });

  it("contrastive delta equals the API delta field verbatim", () => {
    const html = renderContrastive(contrastivePayload);
    for (const [kc, delta] of Object.entries(contrastivePayload.delta)) {
      expect(html).toContain(kc);
      expect(html).toContain(`title="${delta}"`);
    }
    for (const value of Object.values(contrastivePayload.mastery_1)) {
      expect(html).toContain(`title="${value}"`);
    }
  });

  it("counterfactual shows y_prime raw values and the inferred pattern", () => {
    const html = renderCounterfactual(counterfactual);
    for (const [item, y] of Object.entries(counterfactual.y_prime)) {
      expect(html).toContain(item);
      expect(html).toContain(`title="${y}"`);
    }
    for (const [item, bit] of Object.entries(counterfactual.binary_pattern)) {
      void item;
      expect(html).toContain(bit === 1 ? "likely correct" : "likely wrong");
    }
    expect(html).toContain(`title="${counterfactual.threshold}"`);
  });

  it("response pattern renders one box per response and marks staged flips", () => {
    const base = renderPattern(studentResponses, []);
    for (const r of studentResponses) {
      expect(base).toContain(`data-item="${r.item_id}"`);
    }
    expect(base).not.toContain("flipped");
    const withFlip = renderPattern(studentResponses, [studentResponses[0].item_id]);
    expect(withFlip).toContain("flipped");
  });
});

describe("deterministic rendering", () => {
  it("same payloads produce byte-identical markup", () => {
    expect(renderOverview(overview)).toBe(renderOverview(overview));
    expect(renderDiagnosis(diagnose)).toBe(renderDiagnosis(diagnose));
    expect(renderItems(items)).toBe(renderItems(items));
  });

  it("snapshots stay stable", () => {
    expect(renderOverview(overview)).toMatchSnapshot();
    expect(renderDiagnosis(diagnose)).toMatchSnapshot();
    expect(renderContrastive(contrastivePayload)).toMatchSnapshot();
    expect(renderCounterfactual(counterfactual)).toMatchSnapshot();
  });
});
