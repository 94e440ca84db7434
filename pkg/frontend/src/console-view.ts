import type { ApiClient } from "./api.js";
import { el } from "./dom.js";

/**
 * The free-run console: paste or copy code in, run it without any grader
 * interference, read stdout/stderr.  A TimeLimit outcome is rendered
 * distinctly from ordinary errors.
 */
export class ConsoleView {
  element: HTMLElement;
  codeArea: HTMLTextAreaElement;
  stdinArea: HTMLTextAreaElement;
  private output: HTMLElement;
  private status: HTMLElement;
  private runButton: HTMLButtonElement;

  constructor(private api: ApiClient) {
    this.codeArea = el("textarea.console-code", { placeholder: "Code to run" });
    this.stdinArea = el("textarea.console-stdin", { placeholder: "Input (optional)" });
    this.runButton = el("button.run-button", { type: "button" }, "Run");
    this.runButton.addEventListener("click", () => void this.run());
    this.status = el("span.console-status");
    this.output = el("pre.console-output");
    this.element = el(
      "div.console-view",
      {},
      this.codeArea,
      this.stdinArea,
      el("div.button-row", {}, this.runButton, this.status),
      this.output,
    );
  }

  /** Copy-to-console keeps the text verbatim. */
  copyToConsole(code: string): void {
    this.codeArea.value = code;
  }

  async run(): Promise<void> {
    this.runButton.disabled = true;
    this.status.className = "console-status";
    this.status.textContent = "running…";
    try {
      const outcome = await this.api.runConsole(
        this.codeArea.value,
        this.stdinArea.value || undefined,
      );
      this.status.textContent = outcome.status;
      this.status.classList.add(`status-${outcome.status.toLowerCase()}`);
      if (outcome.status === "TimeLimit") {
        this.status.textContent = "TimeLimit: your program ran too long";
      }
      this.output.replaceChildren();
      if (outcome.stdout) this.output.append(el("span.stdout", {}, outcome.stdout));
      if (outcome.stderr) this.output.append(el("span.stderr", {}, outcome.stderr));
    } catch (error) {
      this.status.textContent = `error: ${String(error)}`;
      this.status.classList.add("status-unreachable");
    } finally {
      this.runButton.disabled = false;
    }
  }
}

/** Button placed next to lesson examples: one click copies the example into
 * the console view (lesson pages open it in a new browser tab). */
export function copyToConsoleButton(code: string, console_: ConsoleView): HTMLButtonElement {
  const button = el("button.copy-console", { type: "button" }, "Copy to console");
  button.addEventListener("click", () => console_.copyToConsole(code));
  return button;
}
