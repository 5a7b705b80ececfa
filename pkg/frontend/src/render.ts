/** HTML renderers for the session panes. Pure string producers so the same
 * code is unit-testable without a browser. */

import type { SessionView } from "./api.js";
import { allowedAnswerKinds, wantsFreeText } from "./guard.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderQuestion(view: SessionView): string {
  if (!view.question) {
    return renderOutcome(view);
  }
  const q = view.question;
  const parts = [`<p class="question" data-kind="${q.kind}">${escapeHtml(q.text)}</p>`];
  const allowed = allowedAnswerKinds(q.kind);
  if (allowed.includes("yes")) {
    parts.push(`<button data-answer="yes">Yes</button>`);
    parts.push(`<button data-answer="no">No</button>`);
  }
  if (wantsFreeText(q.kind)) {
    parts.push(
      `<input type="text" id="free-text" placeholder="Type your answer" />`,
      `<button data-answer="free-text">Send</button>`,
    );
  }
  parts.push(`<button data-answer="stop" class="stop">Stop</button>`);
  return parts.join("\n");
}

export function renderOutcome(view: SessionView): string {
  switch (view.outcome) {
    case "inserted":
      return `<p class="banner inserted">Added: ${view.inserted
        .map(escapeHtml)
        .join(" &rarr; ")}</p>`;
    case "declined":
      return `<p class="banner declined">Not inserted.</p>`;
    case "aborted":
      return `<p class="banner aborted">Session stopped.</p>`;
    default:
      return "";
  }
}

export function renderStack(view: SessionView): string {
  const items = view.definition_stack
    .map((entry) => `<li>${escapeHtml(entry)}</li>`)
    .join("");
  return `<ol class="definition-stack" reversed>${items}</ol>`;
}

export function renderStepCount(view: SessionView): string {
  return `<span class="steps">Steps: ${view.step_count}</span>`;
}

export function renderTranscript(view: SessionView): string {
  const rows = view.transcript
    .map(
      (row) =>
        `<tr><td>${row.step}</td><td>${escapeHtml(row.question.text)}</td>` +
        `<td>${escapeHtml(row.answer.text ?? row.answer.kind)}</td></tr>`,
    )
    .join("");
  return (
    `<table class="transcript"><thead><tr><th>#</th><th>Question</th>` +
    `<th>Answer</th></tr></thead><tbody>${rows}</tbody></table>`
  );
}
