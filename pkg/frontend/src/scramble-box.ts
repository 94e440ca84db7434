import type { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { renderHints } from "./hints.js";
import { renderReport } from "./report-table.js";
import type { Descriptor } from "./types.js";

/**
 * Code-scramble exercise: the solution's lines in shuffled order, reordered
 * by dragging whole lines.  There is no text editing surface at all; the
 * submission is the current line order.
 */
export class ScrambleBox {
  element: HTMLElement;
  private list: HTMLUListElement;
  private gradeBox: HTMLElement;
  private noticeBox: HTMLElement;
  private submitButton: HTMLButtonElement;
  private pending = false;
  private dragFrom: number | null = null;

  constructor(
    private api: ApiClient,
    private descriptor: Descriptor,
  ) {
    this.list = el("ul.scramble-list");
    descriptor.lines.forEach((line) => this.list.append(this.makeItem(line)));

    this.submitButton = el("button.submit-button", { type: "button" }, "Submit");
    this.submitButton.addEventListener("click", () => void this.submit());
    this.gradeBox = el("div.grade-box");
    this.noticeBox = el("div.notice");

    this.element = el("div.exercise-box.scramble-box.unsolved", {});
    this.element.dataset.exerciseId = descriptor.exercise_id;
    this.element.append(
      el("span.checkmark", { hidden: true }, "✓"),
      el("p.scramble-instructions", {}, "Drag whole lines into the right order."),
      this.list,
      el("div.button-row", {}, this.submitButton),
      this.noticeBox,
    );
    const hints = renderHints(descriptor.hints);
    if (hints) this.element.append(hints);
    this.element.append(this.gradeBox);
  }

  private makeItem(line: string): HTMLLIElement {
    const item = el("li.scramble-line");
    item.setAttribute("draggable", "true");
    // Whole-line drag only: the text itself is never editable.
    item.append(el("pre.scramble-text", { contentEditable: "false" }, line));
    item.addEventListener("dragstart", (event) => {
      this.dragFrom = this.indexOf(item);
      event.dataTransfer?.setData("text/plain", String(this.dragFrom));
    });
    item.addEventListener("dragover", (event) => event.preventDefault());
    item.addEventListener("drop", (event) => {
      event.preventDefault();
      if (this.dragFrom !== null) {
        this.moveLine(this.dragFrom, this.indexOf(item));
        this.dragFrom = null;
      }
    });
    return item;
  }

  private indexOf(item: HTMLLIElement): number {
    return Array.from(this.list.children).indexOf(item);
  }

  /** Reorder: remove the line at `from` and reinsert it at `to`. */
  moveLine(from: number, to: number): void {
    const items = Array.from(this.list.children);
    if (from === to || !items[from]) return;
    const moved = items[from];
    const reference = items[to];
    moved.remove();
    if (to >= items.length - 1 && from < to) this.list.append(moved);
    else if (from < to) reference.after(moved);
    else reference.before(moved);
  }

  get lineOrder(): string[] {
    return Array.from(this.list.querySelectorAll(".scramble-text")).map(
      (node) => node.textContent ?? "",
    );
  }

  get solved(): boolean {
    return this.element.classList.contains("solved");
  }

  async submit(): Promise<void> {
    if (this.pending) return;
    this.pending = true;
    this.submitButton.disabled = true;
    this.noticeBox.replaceChildren();
    try {
      const response = await this.api.submit(this.descriptor.exercise_id, {
        line_order: this.lineOrder,
      });
      this.gradeBox.replaceChildren(renderReport(response.report));
      if (response.completed) {
        this.element.classList.remove("unsolved");
        this.element.classList.add("solved");
        const mark = this.element.querySelector<HTMLElement>(".checkmark");
        if (mark) mark.hidden = false;
      }
    } catch (error) {
      this.noticeBox.replaceChildren(
        el("span.notice-text", {}, `Could not reach the grader (${String(error)}).`),
      );
    } finally {
      this.pending = false;
      this.submitButton.disabled = false;
    }
  }
}
