import { el } from "./dom.js";

interface CodeMirrorLike {
  fromTextArea(
    textarea: HTMLTextAreaElement,
    options?: Record<string, unknown>,
  ): { getValue(): string; setValue(v: string): void };
}

/**
 * Thin wrapper around the page's rich editor when one is loaded (a global
 * CodeMirror, as lesson pages provide from a CDN), otherwise a plain
 * textarea.  Components only ever talk to this wrapper.
 */
export class CodeEditor {
  element: HTMLElement;
  private textarea: HTMLTextAreaElement;
  private mirror: { getValue(): string; setValue(v: string): void } | null = null;

  constructor(initial: string) {
    this.textarea = el("textarea.code-editor", { value: initial, spellcheck: false });
    this.textarea.rows = Math.max(4, initial.split("\n").length + 1);
    this.element = this.textarea;
    const cm = (globalThis as { CodeMirror?: CodeMirrorLike }).CodeMirror;
    if (cm) {
      this.mirror = cm.fromTextArea(this.textarea, { lineNumbers: true, indentUnit: 4 });
    }
  }

  get value(): string {
    return this.mirror ? this.mirror.getValue() : this.textarea.value;
  }

  set value(text: string) {
    if (this.mirror) this.mirror.setValue(text);
    else this.textarea.value = text;
  }
}
