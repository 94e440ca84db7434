import type { ApiClient, SubmitBody } from "./api.js";
import { el } from "./dom.js";
import { CodeEditor } from "./editor.js";
import { HelpForm } from "./help.js";
import { HistoryBrowser } from "./history.js";
import { renderHints } from "./hints.js";
import { renderReport } from "./report-table.js";
import type { Descriptor } from "./types.js";

/**
 * One embedded coding exercise: editor, the three base buttons (submit,
 * help, history), an input box when the exercise mode calls for one, hints,
 * and the grading box that updates in place.  Blue until solved; green with
 * a checkmark once a submission is Correct.  At most one submit is in
 * flight at a time, and nothing here ever navigates the page.
 */
export class ExerciseBox {
  element: HTMLElement;
  editor: CodeEditor;
  private submitButton: HTMLButtonElement;
  private gradeBox: HTMLElement;
  private noticeBox: HTMLElement;
  private stdinBox: HTMLTextAreaElement | null = null;
  private argsBox: HTMLInputElement | null = null;
  private helpForm: HelpForm;
  private historyBrowser: HistoryBrowser;
  private pending = false;

  constructor(
    private api: ApiClient,
    private descriptor: Descriptor,
  ) {
    this.editor = new CodeEditor(descriptor.editor);
    this.submitButton = el("button.submit-button", { type: "button" }, "Submit");
    this.submitButton.addEventListener("click", () => void this.submit());
    const helpButton = el("button.help-button", { type: "button" }, "Help");
    const historyButton = el("button.history-button", { type: "button" }, "History");

    this.helpForm = new HelpForm(api, descriptor.exercise_id, () => this.editor.value);
    this.historyBrowser = new HistoryBrowser(api, descriptor.exercise_id, (code) => {
      this.editor.value = code;
    });
    helpButton.addEventListener("click", () => this.helpForm.toggle());
    historyButton.addEventListener("click", () => void this.historyBrowser.toggle());

    this.gradeBox = el("div.grade-box");
    this.noticeBox = el("div.notice");

    const buttons = el("div.button-row", {}, this.submitButton, helpButton, historyButton);
    this.element = el("div.exercise-box.unsolved", {});
    this.element.dataset.exerciseId = descriptor.exercise_id;
    this.element.append(el("span.checkmark", { hidden: true }, "✓"), this.editor.element);

    if (descriptor.input_kind === "stdin") {
      const stdinBox = el("textarea.stdin-box", { placeholder: "Test input" });
      this.stdinBox = stdinBox;
      this.element.append(el("label.input-label", {}, "Test input:"), stdinBox);
    } else if (descriptor.input_kind === "args") {
      const argsBox = el("input.args-box", { placeholder: "Test arguments" });
      this.argsBox = argsBox;
      this.element.append(el("label.input-label", {}, "Test arguments:"), argsBox);
    }

    this.element.append(buttons, this.noticeBox);
    const hints = renderHints(descriptor.hints);
    if (hints) this.element.append(hints);
    this.element.append(this.gradeBox, this.helpForm.element, this.historyBrowser.element);
  }

  get solved(): boolean {
    return this.element.classList.contains("solved");
  }

  async submit(): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.submitButton.disabled = true;
    this.noticeBox.replaceChildren();
    const body: SubmitBody = { code: this.editor.value };
    if (this.stdinBox && this.stdinBox.value) body.stdin = this.stdinBox.value;
    if (this.argsBox && this.argsBox.value) body.args = this.argsBox.value;
    try {
      const response = await this.api.submit(this.descriptor.exercise_id, body);
      this.gradeBox.replaceChildren(renderReport(response.report));
      if (response.trial && response.trial["stdout"] !== undefined) {
        this.gradeBox.append(
          el("pre.trial-output", {}, String(response.trial["stdout"])),
        );
      }
      if (response.completed) this.markSolved();
    } catch (error) {
      // The editor contents stay put; offer an inline retry.
      const retry = el("button.retry-button", { type: "button" }, "Retry");
      retry.addEventListener("click", () => void this.submit());
      this.noticeBox.replaceChildren(
        el("span.notice-text", {}, `Could not reach the grader (${String(error)}). `),
        retry,
      );
    } finally {
      this.pending = false;
      this.submitButton.disabled = false;
    }
  }

  private markSolved(): void {
    this.element.classList.remove("unsolved");
    this.element.classList.add("solved");
    const mark = this.element.querySelector<HTMLElement>(".checkmark");
    if (mark) mark.hidden = false;
  }
}
