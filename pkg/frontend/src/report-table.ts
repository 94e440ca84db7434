import { el } from "./dom.js";
import type { ReportRecord } from "./types.js";

/** The grading box contents: verdict line, notes, per-test table. */
export function renderReport(report: ReportRecord): HTMLElement {
  const box = el("div.grade-report");
  box.append(
    el("div.verdict", { className: `verdict verdict-${report.verdict.toLowerCase()}` },
      report.verdict === "Correct" ? "Correct!" : report.verdict),
  );
  for (const note of report.constraint_notes) {
    box.append(el("div.constraint-note", {}, note));
  }
  if (report.results.length > 0) {
    const table = el("table.test-table");
    const head = el("tr");
    for (const title of ["test", "expected", "observed", "result"]) {
      head.append(el("th", {}, title));
    }
    table.append(head);
    for (const row of report.results) {
      const tr = el("tr", { className: row.passed ? "test-pass" : "test-fail" });
      tr.append(
        el("td.test-label", {}, row.label),
        el("td.test-expected", {}, row.expected),
        el("td.test-observed", {}, row.observed),
        el("td.test-outcome", {}, row.passed ? "pass" : "fail"),
      );
      if (!row.passed && row.detail) tr.title = row.detail;
      table.append(tr);
    }
    box.append(table);
  }
  return box;
}
