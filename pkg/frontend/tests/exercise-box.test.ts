import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExerciseBox } from "../src/exercise-box.js";
import {
  correctReport,
  descriptorOf,
  incorrectReport,
  mockApi,
  submitResponse,
} from "./helpers.js";

beforeEach(() => {
  document.body.innerHTML = "";
  window.location.hash = "";
});

describe("exercise box", () => {
  it("turns green with a checkmark on a correct submission, without navigation", async () => {
    const { api } = mockApi({ "/submit": submitResponse(correctReport()) });
    const box = new ExerciseBox(api, descriptorOf());
    document.body.append(box.element);
    const urlBefore = window.location.href;

    expect(box.element.classList.contains("unsolved")).toBe(true);
    box.editor.value = "x, y = y, x";
    await box.submit();

    expect(box.solved).toBe(true);
    expect(box.element.classList.contains("solved")).toBe(true);
    expect(box.element.classList.contains("unsolved")).toBe(false);
    const mark = box.element.querySelector<HTMLElement>(".checkmark")!;
    expect(mark.hidden).toBe(false);
    expect(window.location.href).toBe(urlBefore);
    expect(box.element.querySelector(".verdict")!.textContent).toBe("Correct!");
  });

  it("stays blue and renders the per-test table on an incorrect submission", async () => {
    const { api } = mockApi({ "/submit": submitResponse(incorrectReport()) });
    const box = new ExerciseBox(api, descriptorOf());
    await box.submit();

    expect(box.solved).toBe(false);
    expect(box.element.classList.contains("unsolved")).toBe(true);
    const rows = box.element.querySelectorAll("tr.test-fail");
    expect(rows.length).toBe(1);
    expect(rows[0].querySelector(".test-label")!.textContent).toBe("y");
    expect(rows[0].querySelector(".test-expected")!.textContent).toBe("1");
    expect(rows[0].querySelector(".test-observed")!.textContent).toBe("2");
    expect(box.element.querySelectorAll("tr.test-pass").length).toBe(1);
  });

  it("shows a retry notice and preserves editor contents on network failure", async () => {
    const { api } = mockApi({ "/submit": new Error("connection refused") });
    const box = new ExerciseBox(api, descriptorOf());
    box.editor.value = "my precious draft";
    await box.submit();

    expect(box.editor.value).toBe("my precious draft");
    expect(box.element.querySelector(".notice-text")!.textContent).toContain(
      "Could not reach the grader",
    );
    expect(box.element.querySelector(".retry-button")).not.toBeNull();
  });

  it("allows only one in-flight submit", async () => {
    let resolveFirst!: (value: Response) => void;
    const gate = new Promise<Response>((resolve) => (resolveFirst = resolve));
    let requests = 0;
    const gated = new ApiClient("", () => {
      requests += 1;
      return gate;
    });
    const box = new ExerciseBox(gated, descriptorOf());
    const first = box.submit();
    const second = box.submit(); // swallowed: one at a time
    resolveFirst(
      new Response(JSON.stringify(submitResponse(correctReport())), { status: 200 }),
    );
    await Promise.all([first, second]);
    expect(requests).toBe(1);
  });

  it("shows exactly the three base buttons when no input box is gated in", () => {
    const { api } = mockApi({});
    const box = new ExerciseBox(api, descriptorOf({ input_kind: "none" }));
    const buttons = box.element.querySelectorAll(".button-row button");
    expect(Array.from(buttons).map((b) => b.textContent)).toEqual([
      "Submit",
      "Help",
      "History",
    ]);
    expect(box.element.querySelector(".stdin-box")).toBeNull();
    expect(box.element.querySelector(".args-box")).toBeNull();
  });

  it("gates in the stdin box for stdio exercises and sends its contents", async () => {
    const { api, calls } = mockApi({ "/submit": submitResponse(correctReport()) });
    const box = new ExerciseBox(
      api,
      descriptorOf({ exercise_id: "double-number", mode: "stdio", input_kind: "stdin" }),
    );
    const stdin = box.element.querySelector<HTMLTextAreaElement>(".stdin-box")!;
    expect(stdin).not.toBeNull();
    stdin.value = "21\n";
    await box.submit();
    const submitCall = calls.find((c) => c.url.includes("/submit"))!;
    expect((submitCall.body as { stdin?: string }).stdin).toBe("21\n");
  });

  it("preloads the editor from the descriptor", () => {
    const { api } = mockApi({});
    const box = new ExerciseBox(api, descriptorOf({ editor: "print(?)" }));
    expect(box.editor.value).toBe("print(?)");
  });

  it("help sends the current editor contents automatically", async () => {
    const { api, calls } = mockApi({
      "/api/help": { thread_id: 1, recipient: "@staff" },
    });
    const box = new ExerciseBox(api, descriptorOf());
    box.editor.value = "latest attempt";
    const helpButton = box.element.querySelector<HTMLButtonElement>(".help-button")!;
    helpButton.click();
    const form = box.element.querySelector<HTMLElement>(".help-form")!;
    expect(form.hidden).toBe(false);
    form.querySelector<HTMLTextAreaElement>(".help-message")!.value = "I am stuck";
    form.querySelector<HTMLButtonElement>(".help-send")!.click();
    await Promise.resolve();
    const call = calls.find((c) => c.url.includes("/api/help"))!;
    expect(call.body).toMatchObject({
      exercise_id: "swap",
      message: "I am stuck",
      code: "latest attempt",
    });
  });
});
