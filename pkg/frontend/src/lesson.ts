import { ApiClient } from "./api.js";
import { ConsoleView, copyToConsoleButton } from "./console-view.js";
import { ExerciseBox } from "./exercise-box.js";
import { ScrambleBox } from "./scramble-box.js";

/**
 * Lesson pages are static documents with placeholders:
 *
 *     <div data-exercise="swap" id="ex-swap"></div>
 *     <pre data-example>print("try me")</pre>
 *
 * Booting a page resolves each placeholder by fetching the exercise's
 * client descriptor and mounting the right box; example blocks get a
 * copy-to-console button.  Returns the mounted boxes for the caller.
 */
export async function bootLesson(
  root: ParentNode,
  api: ApiClient,
  consoleView?: ConsoleView,
): Promise<(ExerciseBox | ScrambleBox)[]> {
  const boxes: (ExerciseBox | ScrambleBox)[] = [];
  for (const placeholder of Array.from(root.querySelectorAll<HTMLElement>("[data-exercise]"))) {
    const exerciseId = placeholder.dataset.exercise;
    if (!exerciseId) continue;
    const descriptor = await api.getExercise(exerciseId);
    const box =
      descriptor.mode === "scramble"
        ? new ScrambleBox(api, descriptor)
        : new ExerciseBox(api, descriptor);
    placeholder.replaceChildren(box.element);
    boxes.push(box);
  }
  if (consoleView) {
    for (const example of Array.from(root.querySelectorAll<HTMLElement>("[data-example]"))) {
      example.after(copyToConsoleButton(example.textContent ?? "", consoleView));
    }
  }
  return boxes;
}
