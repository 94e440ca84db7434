import { el } from "./dom.js";

// Above this many hints the popups would bury the page, so they collapse
// into an accordion where at most one hint is open at a time.
export const ACCORDION_THRESHOLD = 3;

/** Clickable hints: popup style for a few, accordion style for many. */
export function renderHints(hints: string[]): HTMLElement | null {
  if (hints.length === 0) return null;
  return hints.length > ACCORDION_THRESHOLD ? accordion(hints) : popups(hints);
}

function popups(hints: string[]): HTMLElement {
  const container = el("div.hints.hints-popup");
  hints.forEach((text, i) => {
    const button = el("button.hint-button", { type: "button" }, `Hint ${i + 1}`);
    button.addEventListener("click", () => {
      const existing = container.querySelector<HTMLElement>(`[data-hint="${i}"]`);
      if (existing) {
        existing.remove();
        return;
      }
      container.append(popupWindow(text, i));
    });
    container.append(button);
  });
  return container;
}

function popupWindow(text: string, index: number): HTMLElement {
  const popup = el("div.hint-popup", {});
  popup.dataset.hint = String(index);
  popup.style.position = "absolute";
  popup.style.left = "0px";
  popup.style.top = "0px";
  const close = el("button.hint-close", { type: "button" }, "x");
  close.addEventListener("click", () => popup.remove());
  popup.append(el("div.hint-titlebar", {}, close), el("div.hint-text", {}, text));

  // Drag the popup around by its title bar; it stays where it is dropped.
  let grab: { x: number; y: number } | null = null;
  popup.addEventListener("mousedown", (event) => {
    grab = { x: event.clientX - popup.offsetLeft, y: event.clientY - popup.offsetTop };
  });
  const move = (event: MouseEvent) => {
    if (!grab) return;
    popup.style.left = `${event.clientX - grab.x}px`;
    popup.style.top = `${event.clientY - grab.y}px`;
  };
  const release = () => {
    grab = null;
  };
  popup.ownerDocument.addEventListener("mousemove", move);
  popup.ownerDocument.addEventListener("mouseup", release);
  return popup;
}

function accordion(hints: string[]): HTMLElement {
  const container = el("div.hints.hints-accordion");
  hints.forEach((text, i) => {
    const body = el("div.accordion-body", {}, text);
    body.hidden = true;
    const header = el("button.accordion-header", { type: "button" }, `Hint ${i + 1}`);
    header.addEventListener("click", () => {
      const wasOpen = !body.hidden;
      // At most one hint is open: opening any hint closes the others.
      container
        .querySelectorAll<HTMLElement>(".accordion-body")
        .forEach((other) => (other.hidden = true));
      body.hidden = wasOpen;
    });
    container.append(header, body);
  });
  return container;
}
