import { classBadge, escapeHtml, tierChip } from "./badges.js";
import { Citation, Outcome, SessionSnapshot, TurnView } from "./types.js";

// The transcript is a pure function of the session snapshot: rendering the
// same snapshot twice yields byte-identical markup, so a page reload
// reproduces the view exactly.

function citationLink(citation: Citation): string {
  const file = escapeHtml(citation.source_file);
  return (
    `<a class="citation" href="#" data-source="${file}" data-page="${citation.page}">` +
    `(${file}, p.${citation.page})</a>`
  );
}

function outcomeBlock(outcome: Outcome): string {
  const chips = outcome.ranking
    .map(([disease, score]) => tierChip(disease, outcome.tiers[disease], score))
    .join(" ");
  const details =
    `<details class="scores"><summary>raw confidence scores</summary>` +
    outcome.ranking
      .map(([disease, score]) => `<div>${escapeHtml(disease)}: ${score.toFixed(3)}</div>`)
      .join("") +
    `</details>`;
  const escalation = outcome.ood
    ? `<div class="escalation warning">Escalation (${outcome.escalation}): consult a vet before acting.</div>`
    : "";
  return `<div class="outcome">${chips}${escalation}${details}</div>`;
}

export function renderTurn(turn: TurnView): string {
  const pieces: string[] = [];
  if (turn.role === "user") {
    const badge = turn.class ? classBadge(turn.class) : "";
    pieces.push(`<div class="turn user">${badge}<p>${escapeHtml(turn.text)}</p></div>`);
    return pieces.join("");
  }
  let body = `<p>${escapeHtml(turn.text)}</p>`;
  if (turn.outcome) {
    body += outcomeBlock(turn.outcome);
  }
  if (turn.citations && turn.citations.length > 0) {
    body += `<div class="citations">${turn.citations.map(citationLink).join(" ")}</div>`;
  }
  pieces.push(`<div class="turn system">${body}</div>`);
  return pieces.join("");
}

export function renderTranscript(snapshot: SessionSnapshot): string {
  return snapshot.turns.map(renderTurn).join("\n");
}
