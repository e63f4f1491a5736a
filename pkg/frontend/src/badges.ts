import { QueryClass, TierName } from "./types.js";

// One color per query class and per confidence tier; the mappings are
// one-to-one so a badge is identifiable by color alone.
export const CLASS_COLORS: Record<QueryClass, string> = {
  K: "#2d6cdf", // knowledge retrieval
  D: "#c0392b", // symptom diagnostic
  T: "#b8860b", // to-be-clarified
  G: "#2e8b57", // general
};

export const CLASS_LABELS: Record<QueryClass, string> = {
  K: "Knowledge",
  D: "Diagnostic",
  T: "Clarify",
  G: "General",
};

export const TIER_COLORS: Record<TierName, string> = {
  VeryHigh: "#1e7d32",
  High: "#688f2a",
  Medium: "#c08a00",
  Low: "#8a8a8a",
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function classBadge(cls: QueryClass): string {
  return (
    `<span class="badge badge-${cls}" style="background:${CLASS_COLORS[cls]}"` +
    ` title="${CLASS_LABELS[cls]}">${cls}</span>`
  );
}

export function tierChip(disease: string, tier: TierName, score: number): string {
  return (
    `<span class="chip chip-${tier}" style="background:${TIER_COLORS[tier]}"` +
    ` data-score="${score.toFixed(2)}">${escapeHtml(disease)}: ${tier}</span>`
  );
}
