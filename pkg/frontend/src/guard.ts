/** Client-side legality guard mirroring the server's 422 rules: the UI must
 * never send an answer kind the pending question forbids. Stop is always
 * available. */

import type { AnswerKind, QuestionKind } from "./api.js";

const RULES: Record<QuestionKind, readonly AnswerKind[]> = {
  "yes-no": ["yes", "no", "stop"],
  "propose-start": ["yes", "no", "stop"],
  "propose-leaf-attach": ["yes", "no", "stop"],
  "propose-sibling-attach": ["yes", "no", "stop"],
  "ask-definition": ["free-text", "stop"],
  "ask-sentence": ["free-text", "stop"],
};

export function allowedAnswerKinds(kind: QuestionKind): readonly AnswerKind[] {
  return RULES[kind];
}

export function isLegalAnswer(question: QuestionKind, answer: AnswerKind): boolean {
  return RULES[question].includes(answer);
}

export function wantsFreeText(kind: QuestionKind): boolean {
  return RULES[kind].includes("free-text");
}
