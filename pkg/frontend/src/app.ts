/** Browser bootstrap: wires the controller and renderers to the page. */

import { ApiClient } from "./api.js";
import type { SessionView } from "./api.js";
import { GuardError, SessionController } from "./controller.js";
import { renderQuestion, renderStack, renderStepCount, renderTranscript } from "./render.js";
import { renderTree } from "./tree-view.js";

const api = new ApiClient("");
const controller = new SessionController(api);

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

async function refreshTree(): Promise<void> {
  const dump = await api.getTree();
  el("tree-pane").innerHTML = renderTree(dump, {
    cursor: controller.cursorTopic(),
    highlight: controller.insertedBranch(),
  });
}

function renderView(view: SessionView | null, error: string | null): void {
  if (error) {
    el("error-pane").textContent = error;
    return;
  }
  el("error-pane").textContent = "";
  if (!view) {
    return;
  }
  el("question-pane").innerHTML = renderQuestion(view);
  el("stack-pane").innerHTML = renderStack(view);
  el("steps-pane").innerHTML = renderStepCount(view);
  el("transcript-pane").innerHTML = renderTranscript(view);
  el("utterance-pane").textContent = view.robot_utterance;
  bindAnswerButtons();
  if (view.outcome !== "pending") {
    void refreshTree();
  }
}

function bindAnswerButtons(): void {
  for (const button of el("question-pane").querySelectorAll<HTMLButtonElement>(
    "button[data-answer]",
  )) {
    button.onclick = async () => {
      const kind = button.dataset.answer as "yes" | "no" | "free-text" | "stop";
      const input = document.getElementById("free-text") as HTMLInputElement | null;
      // inputs are disabled while a round-trip is in flight (one question
      // outstanding per session)
      setInputsDisabled(true);
      try {
        await controller.answer(kind, kind === "free-text" ? input?.value : undefined);
      } catch (error) {
        if (!(error instanceof GuardError)) {
          throw error;
        }
      } finally {
        setInputsDisabled(false);
      }
    };
  }
}

function setInputsDisabled(disabled: boolean): void {
  for (const node of el("question-pane").querySelectorAll<HTMLButtonElement>("button")) {
    node.disabled = disabled;
  }
}

export function boot(): void {
  controller.onUpdate(renderView);
  el("start-form").onsubmit = async (event) => {
    event.preventDefault();
    const concept = (el("concept-input") as HTMLInputElement).value.trim();
    const method = Number((el("method-select") as HTMLSelectElement).value);
    if (concept) {
      await controller.start(concept, method);
      await refreshTree();
    }
  };
  void refreshTree();
}

if (typeof document !== "undefined") {
  boot();
}
