import type { ApiClient } from "./api.js";
import { el } from "./dom.js";

/**
 * "My Progress": a hyperlinked list of exercises with a checkmark on each
 * completed one, linking back to the exercise's anchor on its lesson page.
 */
export class ProgressPage {
  element: HTMLElement;

  constructor(
    private api: ApiClient,
    private anchorFor: (exerciseId: string) => string = (id) => `#ex-${id}`,
  ) {
    this.element = el("div.progress-page");
  }

  async load(): Promise<void> {
    let snapshot;
    try {
      snapshot = await this.api.progress();
    } catch (error) {
      this.element.replaceChildren(el("div.notice", {}, `Progress unavailable (${String(error)})`));
      return;
    }
    const list = el("ul.progress-list");
    for (const entry of snapshot.exercises) {
      const link = el(
        "a.progress-link",
        { href: this.anchorFor(entry.exercise_id) },
        entry.exercise_id,
      );
      const item = el(
        "li.progress-item",
        { className: entry.completed ? "progress-item completed" : "progress-item" },
        link,
      );
      if (entry.completed) item.append(el("span.checkmark", {}, " ✓"));
      list.append(item);
    }
    this.element.replaceChildren(list);
  }
}
