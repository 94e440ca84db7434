import { beforeEach, describe, expect, it } from "vitest";

import { ScrambleBox } from "../src/scramble-box.js";
import { descriptorOf, mockApi, submitResponse } from "./helpers.js";

const CANONICAL = ["n = 3", "while n > 0:", "    print(n)", "print('done')"];
const SHUFFLED = ["    print(n)", "n = 3", "print('done')", "while n > 0:"];

function scrambleDescriptor() {
  return descriptorOf({
    exercise_id: "countdown-scramble",
    mode: "scramble",
    lines: [...SHUFFLED],
    editor: SHUFFLED.join("\n"),
  });
}

function dragLine(box: ScrambleBox, from: number, to: number) {
  const items = box.element.querySelectorAll<HTMLLIElement>("li.scramble-line");
  const dataTransfer = { setData: () => {}, getData: () => String(from) };
  items[from].dispatchEvent(
    Object.assign(new Event("dragstart", { bubbles: true }), { dataTransfer }),
  );
  items[to].dispatchEvent(
    Object.assign(new Event("dragover", { bubbles: true, cancelable: true }), { dataTransfer }),
  );
  items[to].dispatchEvent(
    Object.assign(new Event("drop", { bubbles: true, cancelable: true }), { dataTransfer }),
  );
}

beforeEach(() => {
  document.body.innerHTML = "";
});

describe("scramble box", () => {
  it("renders the given line order and never an editing surface", () => {
    const { api } = mockApi({});
    const box = new ScrambleBox(api, scrambleDescriptor());
    expect(box.lineOrder).toEqual(SHUFFLED);
    expect(box.element.querySelector("textarea")).toBeNull();
    expect(box.element.querySelector("input")).toBeNull();
    const text = box.element.querySelector<HTMLElement>(".scramble-text")!;
    expect(text.getAttribute("contenteditable")).toBe("false");
    expect(box.element.querySelectorAll("li[draggable]").length).toBe(4);
  });

  it("reorders lines via drag events (drag line 3 above line 1 -> 3,1,2)", () => {
    const { api } = mockApi({});
    const three = descriptorOf({
      mode: "scramble",
      lines: ["one", "two", "three"],
    });
    const box = new ScrambleBox(api, three);
    dragLine(box, 2, 0);
    expect(box.lineOrder).toEqual(["three", "one", "two"]);
  });

  it("moveLine handles both directions", () => {
    const { api } = mockApi({});
    const box = new ScrambleBox(api, scrambleDescriptor());
    box.moveLine(0, 2);
    expect(box.lineOrder).toEqual(["n = 3", "print('done')", "    print(n)", "while n > 0:"]);
    box.moveLine(3, 1);
    expect(box.lineOrder).toEqual(["n = 3", "while n > 0:", "print('done')", "    print(n)"]);
  });

  it("submits the current line order and turns green when solved by dragging", async () => {
    const { api, calls } = mockApi({
      "/submit": (init: RequestInit | undefined) => {
        const body = JSON.parse(String(init?.body)) as { line_order: string[] };
        const correct = JSON.stringify(body.line_order) === JSON.stringify(CANONICAL);
        return submitResponse({
          verdict: correct ? "Correct" : "Incorrect",
          results: [
            {
              round: 1,
              label: "line order",
              expected: "canonical order",
              observed: correct ? "canonical order" : "first mismatch at line 1",
              passed: correct,
              detail: "",
            },
          ],
          constraint_notes: [],
        });
      },
    });
    const box = new ScrambleBox(api, scrambleDescriptor());
    document.body.append(box.element);

    // Wrong order first: stays unsolved, table shows the failing row.
    await box.submit();
    expect(box.solved).toBe(false);
    expect(box.element.querySelectorAll("tr.test-fail").length).toBe(1);

    // Drag into the canonical order: start SHUFFLED = [print(n), n=3, done, while]
    dragLine(box, 1, 0); // n=3 to the front
    dragLine(box, 3, 1); // while up to second place
    expect(box.lineOrder).toEqual(CANONICAL);

    await box.submit();
    expect(box.solved).toBe(true);
    expect(box.element.querySelector<HTMLElement>(".checkmark")!.hidden).toBe(false);
    const submits = calls.filter((c) => c.url.includes("/submit"));
    expect((submits.at(-1)!.body as { line_order: string[] }).line_order).toEqual(CANONICAL);
  });
});
