import { ApiClient } from "../src/api.js";
import type { Descriptor, ReportRecord, SubmitResponse } from "../src/types.js";

export function descriptorOf(overrides: Partial<Descriptor> = {}): Descriptor {
  return {
    exercise_id: "swap",
    mode: "variable",
    editor: "",
    lines: [],
    input_kind: "none",
    hints: [],
    ...overrides,
  };
}

export function correctReport(): ReportRecord {
  return {
    verdict: "Correct",
    results: [
      { round: 1, label: "x", expected: "2", observed: "2", passed: true, detail: "" },
      { round: 1, label: "y", expected: "1", observed: "1", passed: true, detail: "" },
    ],
    constraint_notes: [],
  };
}

export function incorrectReport(): ReportRecord {
  return {
    verdict: "Incorrect",
    results: [
      { round: 1, label: "x", expected: "2", observed: "2", passed: true, detail: "" },
      { round: 1, label: "y", expected: "1", observed: "2", passed: false, detail: "wrong value" },
    ],
    constraint_notes: [],
  };
}

export function submitResponse(report: ReportRecord): SubmitResponse {
  return {
    report,
    completed: report.verdict === "Correct",
    persisted: true,
    submission_id: 1,
    trial: null,
  };
}

type Handler = (init: RequestInit | undefined, url: string) => unknown;

/** ApiClient whose transport is a URL-pattern table; records every call. */
export function mockApi(routes: Record<string, Handler | unknown>): {
  api: ApiClient;
  calls: { url: string; body: unknown }[];
} {
  const calls: { url: string; body: unknown }[] = [];
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, body: init?.body ? JSON.parse(String(init.body)) : undefined });
    for (const [pattern, handler] of Object.entries(routes)) {
      if (url.includes(pattern)) {
        const value = typeof handler === "function" ? (handler as Handler)(init, url) : handler;
        if (value instanceof Error) throw value;
        if (value instanceof Response) return value;
        return new Response(JSON.stringify(value), {
          status: 200,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ detail: { code: "unknown", message: url } }), {
      status: 404,
    });
  };
  return { api: new ApiClient("", fetchFn), calls };
}
