import type {
  Descriptor,
  HistoryPage,
  OutcomeRecord,
  ProgressEntry,
  SubmitResponse,
  ThreadRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface SubmitBody {
  code?: string;
  line_order?: string[];
  stdin?: string;
  args?: string;
}

/** Thin typed client for the grading service; holds the session token. */
export class ApiClient {
  token: string | null = null;

  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let response: Response;
    response = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = "http_error";
      let message = `${response.status}`;
      try {
        const detail = (await response.json()).detail;
        if (detail && typeof detail === "object") {
          code = detail.code ?? code;
          message = detail.message ?? message;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  async register(name: string): Promise<void> {
    const body = await this.request<{ token: string }>("POST", "/api/register", { name });
    this.token = body.token;
  }

  async login(name: string): Promise<void> {
    const body = await this.request<{ token: string }>("POST", "/api/login", { name });
    this.token = body.token;
  }

  listExercises(): Promise<{ exercises: { exercise_id: string; mode: string }[] }> {
    return this.request("GET", "/api/exercises");
  }

  getExercise(id: string): Promise<Descriptor> {
    return this.request("GET", `/api/exercises/${encodeURIComponent(id)}`);
  }

  submit(id: string, body: SubmitBody): Promise<SubmitResponse> {
    return this.request("POST", `/api/exercises/${encodeURIComponent(id)}/submit`, body);
  }

  runConsole(code: string, stdin?: string): Promise<OutcomeRecord> {
    return this.request("POST", "/api/console", { code, stdin });
  }

  progress(): Promise<{ exercises: ProgressEntry[] }> {
    return this.request("GET", "/api/progress");
  }

  history(id: string, offset: number, limit: number): Promise<HistoryPage> {
    const q = `offset=${offset}&limit=${limit}`;
    return this.request("GET", `/api/exercises/${encodeURIComponent(id)}/history?${q}`);
  }

  latest(id: string): Promise<{ code: string | null }> {
    return this.request("GET", `/api/exercises/${encodeURIComponent(id)}/latest`);
  }

  sendHelp(exerciseId: string, message: string, code: string): Promise<ThreadRecord> {
    return this.request("POST", "/api/help", { exercise_id: exerciseId, message, code });
  }

  setGuru(guruName: string): Promise<{ guru_name: string }> {
    return this.request("POST", "/api/guru", { guru_name: guruName });
  }

  threads(): Promise<{ threads: ThreadRecord[] }> {
    return this.request("GET", "/api/threads");
  }
}
