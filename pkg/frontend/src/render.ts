// Markup builders. Pure string-in string-out so they test without a DOM;
// reply text is never mutated, only escaped for display.

import { Candidate } from "./api.js";
import {
  ConversationTurn,
  KeywordSpan,
  codePoints,
  spanWithinBounds,
} from "./conversation.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export interface HighlightSegments {
  before: string;
  highlight: string;
  after: string;
}

export function splitKeywordSpan(
  text: string,
  span: KeywordSpan | null,
): HighlightSegments | null {
  if (span === null) return null;
  if (!spanWithinBounds(text, span)) {
    console.warn("malformed keyword span; rendering without highlight");
    return null;
  }
  const cps = codePoints(text);
  return {
    before: cps.slice(0, span.start).join(""),
    highlight: cps.slice(span.start, span.start + span.length).join(""),
    after: cps.slice(span.start + span.length).join(""),
  };
}

// Exactly the span's characters are emphasized; everything else is plain.
export function renderKeywordHighlight(turn: ConversationTurn): string {
  const segments = splitKeywordSpan(turn.text, turn.keywordSpan);
  if (segments === null) return escapeHtml(turn.text);
  return (
    escapeHtml(segments.before) +
    `<mark class="keyword">${escapeHtml(segments.highlight)}</mark>` +
    escapeHtml(segments.after)
  );
}

export function renderCandidates(candidates: Candidate[]): string {
  if (candidates.length === 0) return "";
  const items = candidates
    .map(
      (c) =>
        `<li><span class="term">${escapeHtml(c.term)}</span>` +
        `<span class="score">${c.score.toFixed(3)}</span></li>`,
    )
    .join("");
  return `<ul class="candidates">${items}</ul>`;
}

export function renderTurn(turn: ConversationTurn): string {
  if (turn.role === "user") {
    return `<div class="turn user"><div class="bubble">` +
      `${escapeHtml(turn.text)}</div></div>`;
  }
  if (turn.role === "error") {
    return (
      `<div class="turn error"><div class="bubble">` +
      `${escapeHtml(turn.text)}` +
      `<button class="retry" type="button">retry</button></div></div>`
    );
  }
  const latency =
    turn.latencyMs !== null
      ? `<span class="latency">${turn.latencyMs.toFixed(0)} ms</span>`
      : "";
  const mode = turn.mode !== null
    ? `<span class="mode">${escapeHtml(turn.mode)}</span>` : "";
  return (
    `<div class="turn system"><div class="bubble">` +
    `${renderKeywordHighlight(turn)}</div>` +
    `<div class="meta">${mode}${latency}</div>` +
    `${renderCandidates(turn.candidates)}</div>`
  );
}
