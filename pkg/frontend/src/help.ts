import type { ApiClient } from "./api.js";
import { el } from "./dom.js";

/**
 * The help form behind the Help button: a few sentences from the student,
 * sent together with whatever is in the editor right now (attached
 * automatically at send time).
 */
export class HelpForm {
  element: HTMLElement;
  private message: HTMLTextAreaElement;
  private status: HTMLElement;

  constructor(
    private api: ApiClient,
    private exerciseId: string,
    private currentCode: () => string,
  ) {
    this.message = el("textarea.help-message", {
      placeholder: "Describe what you tried and where you are stuck",
    });
    const send = el("button.help-send", { type: "button" }, "Send");
    send.addEventListener("click", () => void this.send());
    this.status = el("div.help-status");
    this.element = el("div.help-form", { hidden: true }, this.message, send, this.status);
  }

  get visible(): boolean {
    return !this.element.hidden;
  }

  toggle(): void {
    this.element.hidden = !this.element.hidden;
  }

  async send(): Promise<void> {
    try {
      await this.api.sendHelp(this.exerciseId, this.message.value, this.currentCode());
      this.status.textContent = "Sent! Your current code went along with it.";
      this.message.value = "";
    } catch (error) {
      this.status.textContent = `Could not send (${String(error)})`;
    }
  }
}
