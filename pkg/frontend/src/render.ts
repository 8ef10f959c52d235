/** Pure payload-to-markup renderers.
 *
 * Every renderer is a function of the payload(s) it is given; identical
 * payloads yield identical markup, and every displayed number is the
 * payload value (formatting only, raw value on the title attribute).
 */

import { barList, distStrip, radar } from "./charts.js";
import { escapeHtml, num, pct, pctSpan } from "./format.js";
import type {
  ComparisonPayload,
  ContrastivePayload,
  CounterfactualPayload,
  DiagnosePayload,
  ItemsPayload,
  KcsPayload,
  OverviewPayload,
  ResponseEntry,
  SuggestionsPayload,
} from "./types.js";

function panel(id: string, title: string, body: string): string {
  return (
    `<section class="panel" data-panel="${id}">` +
    `<h3>${escapeHtml(title)}</h3>${body}</section>`
  );
}

function emptyNote(text: string): string {
  return `<p class="empty-note">${escapeHtml(text)}</p>`;
}

/* Dashboard: class-level overview (radar, accuracy distribution, weights,
 * summary). */
export function renderOverview(payload: OverviewPayload): string {
  const mastery = payload.kc_class_mastery;
  const radarBody = mastery
    ? radar(Object.keys(mastery), Object.values(mastery)) +
      barList(Object.entries(mastery).map(([label, value]) => ({ label, value })))
    : emptyNote("No trained model selected; class mastery unavailable.");
  const dist = payload.student_summaries.length
    ? barList(
        payload.student_summaries.map((s) => ({
          label: s.student_id,
          value: s.accuracy,
        })),
      )
    : emptyNote("No responses in this dataset.");
  const weights = Object.keys(payload.kc_weights).length
    ? barList(
        Object.entries(payload.kc_weights).map(([label, value]) => ({ label, value })),
      )
    : emptyNote("No knowledge components.");
  const summary =
    `<dl class="facts">` +
    `<dt>Students</dt><dd>${payload.n_students}</dd>` +
    `<dt>Items</dt><dd>${payload.n_items}</dd>` +
    `<dt>Knowledge components</dt><dd>${payload.n_kcs}</dd>` +
    `<dt>Responses</dt><dd>${payload.n_records}</dd>` +
    `<dt>Class accuracy</dt><dd>${pctSpan(payload.class_accuracy)}</dd>` +
    `</dl>`;
  return (
    panel("A1", "Class mastery radar", radarBody) +
    panel("A2", "Student accuracy distribution", dist) +
    panel("A3", "KC weights in this test", weights) +
    panel("A4", "Class summary", summary)
  );
}

/* Dashboard: item statistics, response distributions, error analysis. */
export function renderItems(payload: ItemsPayload): string {
  if (payload.items.length === 0) {
    return panel("B1", "Item statistics", emptyNote("No items."));
  }
  const rows = payload.items
    .map((it) => {
      const pb =
        it.discrimination_pb === null
          ? `<span class="na" title="undefined (zero variance)">n/a</span>`
          : `<span title="${it.discrimination_pb}">${num(it.discrimination_pb, 2)}</span>`;
      return (
        `<tr><td>${escapeHtml(it.item_id)}</td>` +
        `<td>${it.respondents}</td>` +
        `<td>${pctSpan(it.accuracy)}</td>` +
        `<td>${pctSpan(it.difficulty_classical, "plain")}</td>` +
        `<td>${pb}</td></tr>`
      );
    })
    .join("");
  const statsTable =
    `<table class="stats"><thead><tr><th>item</th><th>answered</th>` +
    `<th>accuracy</th><th>difficulty</th><th>discrimination</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;

  const responseDist = payload.items
    .filter((it) => it.option_counts && it.option_counts.length)
    .map(
      (it) =>
        `<div class="option-row"><strong>${escapeHtml(it.item_id)}</strong> ` +
        it
          .option_counts!.map(
            (oc) => `<span class="option">${escapeHtml(oc.option)}&times;${oc.count}</span>`,
          )
          .join(" ") +
        `</div>`,
    )
    .join("");
  const errors = payload.error_patterns;
  const patternRows = Object.entries(errors.per_item)
    .map(([item, counts]) => {
      const top = counts[0];
      return (
        `<li><strong>${escapeHtml(item)}</strong>: most chosen wrong answer ` +
        `<span class="option">${escapeHtml(top.option)}</span> (${top.count} students)</li>`
      );
    })
    .join("");
  const coverage = errors.items_without_option_data.length
    ? emptyNote(
        `No distractor data for: ${errors.items_without_option_data.join(", ")}`,
      )
    : "";
  return (
    panel("B1", "Item statistics", statsTable) +
    panel(
      "B2",
      "Wrong-answer distribution",
      responseDist || emptyNote("No option data recorded."),
    ) +
    panel(
      "B3",
      "Error analysis",
      (patternRows ? `<ul class="patterns">${patternRows}</ul>` : emptyNote("No recurring error patterns.")) +
        coverage,
    )
  );
}

/* Dashboard: per-KC difficulty mix and strategy hints. */
export function renderKcs(payload: KcsPayload, suggestions: SuggestionsPayload): string {
  if (payload.kcs.length === 0) {
    return panel("C1", "Questions per KC", emptyNote("No knowledge components."));
  }
  const rows = payload.kcs
    .map(
      (kc) =>
        `<tr><td>${escapeHtml(kc.kc_id)}</td>` +
        `<td><span title="${kc.weight}">${pct(kc.weight)}</span></td>` +
        `<td>${kc.item_count}</td>` +
        `<td>${pctSpan(kc.class_mean_mastery)}</td>` +
        `<td>${distStrip(kc.difficulty_distribution)}</td></tr>`,
    )
    .join("");
  const table =
    `<table class="stats"><thead><tr><th>kc</th><th>weight</th><th>items</th>` +
    `<th>class mastery</th><th>easy / medium / hard</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
  const strategies = suggestions.suggestions.filter((s) => s.scope === "kc");
  const list = strategies.length
    ? `<ul class="suggestions">` +
      strategies.map((s) => `<li>${escapeHtml(s.text)}</li>`).join("") +
      `</ul>`
    : emptyNote("No KC-level strategies triggered.");
  return (
    panel("C1", "Questions per KC (difficulty mix)", table) +
    panel("C2", "Teaching strategies", list)
  );
}

export function renderSuggestions(payload: SuggestionsPayload): string {
  if (payload.suggestions.length === 0) {
    return panel("S", "Suggestions", emptyNote("No suggestions triggered."));
  }
  const items = payload.suggestions
    .map(
      (s) =>
        `<li class="scope-${escapeHtml(s.scope)}"><span class="scope">[${escapeHtml(s.scope)}]</span> ` +
        `${escapeHtml(s.text)}</li>`,
    )
    .join("");
  return panel("S", "Suggestions", `<ul class="suggestions">${items}</ul>`);
}

export function renderComparison(payload: ComparisonPayload): string {
  const flagged = payload.item_gaps.filter((g) => g.exceeds_class_ability);
  const gapList = flagged.length
    ? `<ul class="patterns">` +
      flagged
        .map(
          (g) =>
            `<li><strong>${escapeHtml(g.item_id)}</strong> sits ` +
            `<span title="${g.gap}">${pct(g.gap!)}</span> above class ability</li>`,
        )
        .join("") +
      `</ul>`
    : emptyNote("No item exceeds class ability.");
  const issues = Object.entries(payload.kc_classwide_issue).filter(([, v]) => v);
  const issueList = issues.length
    ? `<ul class="patterns">` +
      issues
        .map(([kc]) => {
          const rate = payload.kc_accuracy[kc];
          return `<li><strong>${escapeHtml(kc)}</strong>: class-wide accuracy ${pctSpan(rate ?? null)}</li>`;
        })
        .join("") +
      `</ul>`
    : emptyNote("No class-wide KC issues.");
  return (
    panel("CMP1", "Items above class ability", gapList) +
    panel("CMP2", "Class-wide KC issues", issueList)
  );
}

/* Reasoning view: response pattern with click-to-flip (E1). */
export function renderPattern(
  base: ResponseEntry[],
  stagedFlips: string[],
): string {
  if (base.length === 0) {
    return emptyNote("This student has no responses.");
  }
  const flips = new Set(stagedFlips);
  const boxes = base
    .map((r) => {
      const flipped = flips.has(r.item_id);
      const shown = flipped ? 1 - r.correct : r.correct;
      const classes = ["item-box", shown === 1 ? "correct" : "wrong"];
      if (flipped) classes.push("flipped");
      return (
        `<button class="${classes.join(" ")}" data-item="${escapeHtml(r.item_id)}"` +
        ` title="${flipped ? "staged flip (click to undo)" : "click to flip"}">` +
        `${escapeHtml(r.item_id)}<span class="mark">${shown === 1 ? "&#10003;" : "&#10007;"}</span></button>`
      );
    })
    .join("");
  return `<div class="pattern">${boxes}</div>`;
}

/* Reasoning view: conclusions (D), chain (E), mastery values (G). */
export function renderDiagnosis(payload: DiagnosePayload): string {
  const mastery =
    `<dl class="mastery">` +
    Object.entries(payload.mastery)
      .map(([kc, v]) => `<dt>${escapeHtml(kc)}</dt><dd>${pctSpan(v)}</dd>`)
      .join("") +
    `</dl>`;
  const chain = payload.reasoning_chain
    .map((step) => {
      const evidence = step.evidence.length
        ? step.evidence
            .map(
              (ev) =>
                `<span class="evidence ${ev.correct ? "correct" : "wrong"}">` +
                `${escapeHtml(ev.item_id)}${ev.correct ? "&#10003;" : "&#10007;"}</span>`,
            )
            .join(" ")
        : `<span class="empty-note">no related responses</span>`;
      return (
        `<li class="chain-step band-${escapeHtml(step.band)}">` +
        `<div class="chain-evidence">${evidence}</div>` +
        `<div class="chain-kc">${escapeHtml(step.kc_id)} ${pctSpan(step.mastery)}</div>` +
        `<div class="chain-conclusion">${escapeHtml(step.conclusion)}</div></li>`
      );
    })
    .join("");
  return (
    panel("G", "Knowledge mastery", mastery) +
    panel("E", "Reasoning chain", `<ol class="chain">${chain}</ol>`) +
    panel(
      "D",
      "Diagnostic conclusions",
      `<ul class="conclusions">` +
        payload.reasoning_chain
          .map((s) => `<li>${escapeHtml(s.conclusion)}</li>`)
          .join("") +
        `</ul>`,
    )
  );
}

/* Reasoning view: contrastive delta next to the base mastery (E1 result). */
export function renderContrastive(payload: ContrastivePayload): string {
  const rows = Object.keys(payload.delta)
    .map((kc) => {
      const d = payload.delta[kc];
      const dir = d > 0 ? "up" : d < 0 ? "down" : "flat";
      const arrow = d > 0 ? "&#9650;" : d < 0 ? "&#9660;" : "&#8596;";
      return (
        `<tr><td>${escapeHtml(kc)}</td>` +
        `<td>${pctSpan(payload.mastery_1[kc])}</td>` +
        `<td>${pctSpan(payload.mastery_2[kc])}</td>` +
        `<td class="delta ${dir}" title="${d}">${arrow} ${pct(Math.abs(d))}</td></tr>`
      );
    })
    .join("");
  return panel(
    "E1",
    "What the flipped answers would change",
    `<table class="stats"><thead><tr><th>kc</th><th>actual</th>` +
      `<th>flipped</th><th>change</th></tr></thead><tbody>${rows}</tbody></table>`,
  );
}

/* Disagreement result: predicted probabilities (H2) + inferred pattern (H3). */
export function renderCounterfactual(payload: CounterfactualPayload): string {
  const asserted =
    `<dl class="mastery compact">` +
    Object.entries(payload.mastery_used)
      .map(([kc, v]) => `<dt>${escapeHtml(kc)}</dt><dd>${pctSpan(v)}</dd>`)
      .join("") +
    `</dl>`;
  const rows = Object.entries(payload.y_prime)
    .map(([item, y]) => {
      const hit = payload.binary_pattern[item] === 1;
      return (
        `<tr><td>${escapeHtml(item)}</td>` +
        `<td><span title="${y}">${pct(y)}</span></td>` +
        `<td class="${hit ? "correct" : "wrong"}">${hit ? "&#10003; likely correct" : "&#10007; likely wrong"}</td></tr>`
      );
    })
    .join("");
  return (
    panel("H2", "Predictions at your asserted mastery", asserted +
      `<table class="stats"><thead><tr><th>item</th><th>p(correct)</th>` +
      `<th>inferred (cutoff <span title="${payload.threshold}">${pct(payload.threshold)}</span>)</th></tr></thead>` +
      `<tbody>${rows}</tbody></table>`)
  );
}
