// Wire types and transport for the /v1 chat contract.

export type Mode = "seq2bf" | "seq2seq" | "seq2bf-nokw";

export const MODES: Mode[] = ["seq2bf", "seq2seq", "seq2bf-nokw"];

export interface Candidate {
  term: string;
  score: number;
}

export interface ChatRequest {
  query: string;
  mode: Mode;
}

export interface ChatResponse {
  query: string;
  mode: string;
  reply: string;
  keyword: string | null;
  keyword_start: number | null; // 1-based character index into reply
  pmi_score: number | null;
  candidates: Candidate[];
  latency_ms?: number;
  protocol_version?: number;
}

export interface TransportResult {
  status: number;
  body: unknown;
}

// The conversation talks to the server through this seam; tests replace it
// with a replay of recorded bodies.
export interface Transport {
  chat(request: ChatRequest): Promise<TransportResult>;
}

export class HttpTransport implements Transport {
  constructor(private readonly baseUrl: string) {}

  async chat(request: ChatRequest): Promise<TransportResult> {
    const resp = await fetch(`${this.baseUrl}/v1/chat`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return { status: resp.status, body: await resp.json() };
  }

  async health(): Promise<boolean> {
    try {
      const resp = await fetch(`${this.baseUrl}/v1/health`);
      if (!resp.ok) return false;
      const body = (await resp.json()) as { status?: string };
      return body.status === "ok";
    } catch {
      return false;
    }
  }
}

export function isChatResponse(body: unknown): body is ChatResponse {
  if (typeof body !== "object" || body === null) return false;
  const b = body as Record<string, unknown>;
  return (
    typeof b.reply === "string" &&
    (b.keyword === null || typeof b.keyword === "string") &&
    (b.keyword_start === null || typeof b.keyword_start === "number") &&
    Array.isArray(b.candidates)
  );
}
