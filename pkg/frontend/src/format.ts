/** Formatting only: every displayed number originates in an API payload.
 * Percentages render to whole percent; the raw value rides on the title
 * attribute so it stays inspectable on hover. */

export function pct(value: number | null | undefined): string {
  if (value === null || value === undefined) return "n/a";
  return `${Math.round(value * 100)}%`;
}

export function num(value: number | null | undefined, digits = 3): string {
  if (value === null || value === undefined) return "n/a";
  return value.toFixed(digits);
}

/** Shared interpretation bands: weak < 0.4, partial < 0.7, strong >= 0.7. */
export function band(value: number): "weak" | "partial" | "strong" {
  if (value < 0.4) return "weak";
  if (value < 0.7) return "partial";
  return "strong";
}

export function escapeHtml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** A percentage span carrying the raw payload value on hover. */
export function pctSpan(value: number | null | undefined, cls = ""): string {
  if (value === null || value === undefined) {
    return `<span class="na${cls ? " " + cls : ""}">n/a</span>`;
  }
  const classes = ["pct", band(value), cls].filter(Boolean).join(" ");
  return `<span class="${classes}" title="${value}">${pct(value)}</span>`;
}

/** Validate a disagreement input: must parse to a number strictly in (0, 1). */
export function validateMastery(
  raw: string,
): { ok: true; value: number } | { ok: false; message: string } {
  const trimmed = raw.trim();
  if (trimmed === "") return { ok: false, message: "enter a mastery value" };
  const value = Number(trimmed);
  if (!Number.isFinite(value)) {
    return { ok: false, message: `"${trimmed}" is not a number` };
  }
  if (value <= 0 || value >= 1) {
    return { ok: false, message: "mastery must lie strictly between 0 and 1" };
  }
  return { ok: true, value };
}
