// Browser entry point for the demo lesson page.

import { ApiClient, ApiError } from "./api.js";
import { ConsoleView } from "./console-view.js";
import { bootLesson } from "./lesson.js";
import { ProgressPage } from "./progress.js";
import { el } from "./dom.js";

async function start(): Promise<void> {
  const api = new ApiClient("");

  const sessionBar = document.querySelector<HTMLElement>("#session-bar");
  if (sessionBar) {
    const name = el("input.session-name", { placeholder: "display name" });
    const status = el("span.session-status", {}, "not signed in (grading still works)");
    const button = el("button.session-button", { type: "button" }, "Sign in / register");
    button.addEventListener("click", async () => {
      try {
        await api.login(name.value);
      } catch (error) {
        if (error instanceof ApiError && error.status === 404) {
          await api.register(name.value);
        } else {
          status.textContent = String(error);
          return;
        }
      }
      status.textContent = `signed in as ${name.value}`;
      void progress.load();
    });
    sessionBar.append(name, button, status);
  }

  const consoleView = new ConsoleView(api);
  document.querySelector("#console-tab")?.append(consoleView.element);

  const progress = new ProgressPage(api);
  document.querySelector("#progress-tab")?.append(progress.element);

  await bootLesson(document, api, consoleView);
}

void start();
