// Wire types for the gradebox HTTP API.

export type InputKind = "none" | "stdin" | "args";

export interface Descriptor {
  exercise_id: string;
  mode: string;
  editor: string;
  lines: string[];
  input_kind: InputKind;
  hints: string[];
}

export interface TestRow {
  round: number;
  label: string;
  expected: string;
  observed: string;
  passed: boolean;
  detail: string;
}

export interface ReportRecord {
  verdict: string;
  results: TestRow[];
  constraint_notes: string[];
}

export interface SubmitResponse {
  report: ReportRecord;
  completed: boolean;
  persisted: boolean;
  submission_id: number | null;
  trial: Record<string, unknown> | null;
}

export interface OutcomeRecord {
  status: string;
  stdout: string;
  stderr: string;
  stdout_truncated: boolean;
  stderr_truncated: boolean;
  exit_code: number | string | null;
  cpu_used: number;
  wall_used: number;
}

export interface SubmissionRecord {
  submission_id: number;
  exercise_id: string;
  timestamp: number;
  code: string;
  report: ReportRecord;
}

export interface HistoryPage {
  total: number;
  offset: number;
  limit: number;
  items: SubmissionRecord[];
}

export interface ProgressEntry {
  exercise_id: string;
  completed: boolean;
  first_completed_at: number | null;
}

export interface ThreadRecord {
  thread_id: number;
  user_id: string;
  exercise_id: string;
  message: string;
  attached_code: string;
  recipient: string;
  created_at: number;
  replies: { author_id: string; text: string; created_at: number }[];
}
