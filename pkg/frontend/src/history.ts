import type { ApiClient } from "./api.js";
import { el } from "./dom.js";

const PAGE_SIZE = 5;

/**
 * Pages through past submissions on demand (never fetching the whole
 * history at once).  Picking an entry loads its code back into the editor.
 */
export class HistoryBrowser {
  element: HTMLElement;
  private offset = 0;
  private total = 0;

  constructor(
    private api: ApiClient,
    private exerciseId: string,
    private loadCode: (code: string) => void,
    private pageSize: number = PAGE_SIZE,
  ) {
    this.element = el("div.history-browser", { hidden: true });
  }

  get visible(): boolean {
    return !this.element.hidden;
  }

  async toggle(): Promise<void> {
    if (this.visible) {
      this.element.hidden = true;
      return;
    }
    this.element.hidden = false;
    await this.load(0);
  }

  async load(offset: number): Promise<void> {
    let page;
    try {
      page = await this.api.history(this.exerciseId, offset, this.pageSize);
    } catch (error) {
      this.element.replaceChildren(el("div.notice", {}, `History unavailable (${String(error)})`));
      return;
    }
    this.offset = page.offset;
    this.total = page.total;
    const list = el("ul.history-list");
    for (const item of page.items) {
      const when = new Date(item.timestamp / 1000).toISOString();
      const load = el("button.load-code", { type: "button" }, "load");
      load.addEventListener("click", () => this.loadCode(item.code));
      list.append(
        el(
          "li.history-item",
          {},
          el("span.history-when", {}, when),
          el("span.history-verdict", {}, ` ${item.report.verdict} `),
          load,
        ),
      );
    }
    const prev = el("button.history-prev", { type: "button", disabled: this.offset === 0 }, "prev");
    prev.addEventListener("click", () => void this.load(Math.max(0, this.offset - this.pageSize)));
    const next = el("button.history-next", {
      type: "button",
      disabled: this.offset + this.pageSize >= this.total,
    }, "next");
    next.addEventListener("click", () => void this.load(this.offset + this.pageSize));
    this.element.replaceChildren(
      el("div.history-header", {}, `${this.total} submissions`),
      list,
      el("div.history-nav", {}, prev, next),
    );
  }
}
