/** Tiny deterministic SVG/HTML chart builders. No animation, no random
 * ids: identical inputs always produce identical markup. */

import { escapeHtml, pct } from "./format.js";

const RADAR_SIZE = 260;
const RADAR_R = 96;

function polar(cx: number, cy: number, r: number, angle: number): [number, number] {
  return [cx + r * Math.sin(angle), cy - r * Math.cos(angle)];
}

function fix(v: number): string {
  return v.toFixed(2);
}

/** Radar of values in [0, 1], one axis per label. */
export function radar(labels: string[], values: number[]): string {
  const n = labels.length;
  if (n === 0) return `<svg class="radar" viewBox="0 0 ${RADAR_SIZE} ${RADAR_SIZE}"></svg>`;
  const cx = RADAR_SIZE / 2;
  const cy = RADAR_SIZE / 2;
  const rings = [0.25, 0.5, 0.75, 1.0]
    .map((f) => {
      const pts = labels
        .map((_, i) => polar(cx, cy, RADAR_R * f, (2 * Math.PI * i) / n))
        .map(([x, y]) => `${fix(x)},${fix(y)}`)
        .join(" ");
      return `<polygon class="ring" points="${pts}"/>`;
    })
    .join("");
  const axes = labels
    .map((label, i) => {
      const [x, y] = polar(cx, cy, RADAR_R, (2 * Math.PI * i) / n);
      const [lx, ly] = polar(cx, cy, RADAR_R + 16, (2 * Math.PI * i) / n);
      return (
        `<line class="axis" x1="${cx}" y1="${cy}" x2="${fix(x)}" y2="${fix(y)}"/>` +
        `<text class="axis-label" x="${fix(lx)}" y="${fix(ly)}" text-anchor="middle">${escapeHtml(label)}</text>`
      );
    })
    .join("");
  const shape = values
    .map((v, i) => polar(cx, cy, RADAR_R * Math.max(0, Math.min(1, v)), (2 * Math.PI * i) / n))
    .map(([x, y]) => `${fix(x)},${fix(y)}`)
    .join(" ");
  return (
    `<svg class="radar" viewBox="0 0 ${RADAR_SIZE} ${RADAR_SIZE}" role="img">` +
    rings +
    axes +
    `<polygon class="shape" points="${shape}"/></svg>`
  );
}

/** Horizontal bar list; values in [0, 1] carry their raw value on hover. */
export function barList(rows: { label: string; value: number | null }[]): string {
  const bars = rows
    .map(({ label, value }) => {
      const width = value === null ? 0 : Math.round(value * 100);
      const text = value === null ? "n/a" : pct(value);
      const title = value === null ? "no data" : String(value);
      return (
        `<div class="bar-row"><span class="bar-label">${escapeHtml(label)}</span>` +
        `<span class="bar-track"><span class="bar-fill" style="width:${width}%"></span></span>` +
        `<span class="bar-value" title="${title}">${text}</span></div>`
      );
    })
    .join("");
  return `<div class="bar-list">${bars}</div>`;
}

/** Distribution strip, e.g. easy/medium/hard counts per KC. */
export function distStrip(dist: Record<string, number>): string {
  const total = Object.values(dist).reduce((a, b) => a + b, 0);
  if (total === 0) return `<span class="dist empty">no items</span>`;
  const parts = Object.entries(dist)
    .filter(([, count]) => count > 0)
    .map(
      ([name, count]) =>
        `<span class="dist-part dist-${name}" style="flex:${count}" title="${name}: ${count}">${count}</span>`,
    )
    .join("");
  return `<span class="dist">${parts}</span>`;
}
