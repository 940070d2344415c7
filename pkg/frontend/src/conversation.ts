// Conversation state: an append-only list of turns plus one in-flight lock.

import {
  Candidate,
  ChatRequest,
  ChatResponse,
  Mode,
  Transport,
  isChatResponse,
} from "./api.js";

export interface KeywordSpan {
  start: number; // 0-based, counted in code points like the server side
  length: number;
}

export interface ConversationTurn {
  role: "user" | "system" | "error";
  text: string;
  keywordSpan: KeywordSpan | null;
  candidates: Candidate[];
  latencyMs: number | null;
  mode: Mode | null;
  // error turns keep the failed request so a retry control can reissue it
  retryRequest: ChatRequest | null;
}

export function codePoints(text: string): string[] {
  return Array.from(text);
}

export function spanWithinBounds(text: string, span: KeywordSpan): boolean {
  return (
    span.start >= 0 &&
    span.length > 0 &&
    span.start + span.length <= codePoints(text).length
  );
}

function userTurn(text: string, mode: Mode): ConversationTurn {
  return { role: "user", text, keywordSpan: null, candidates: [],
           latencyMs: null, mode, retryRequest: null };
}

export function systemTurn(response: ChatResponse): ConversationTurn {
  let span: KeywordSpan | null = null;
  if (response.keyword !== null && response.keyword_start !== null) {
    span = {
      start: response.keyword_start - 1,
      length: codePoints(response.keyword).length,
    };
    if (!spanWithinBounds(response.reply, span)) {
      console.warn("keyword span outside reply bounds; dropping highlight",
                   response);
      span = null;
    }
  }
  return {
    role: "system",
    text: response.reply,
    keywordSpan: span,
    candidates: response.candidates ?? [],
    latencyMs: response.latency_ms ?? null,
    mode: (response.mode as Mode) ?? null,
    retryRequest: null,
  };
}

function errorTurn(message: string, request: ChatRequest): ConversationTurn {
  return { role: "error", text: message, keywordSpan: null, candidates: [],
           latencyMs: null, mode: request.mode, retryRequest: request };
}

export class Conversation {
  readonly turns: ConversationTurn[] = [];
  pending = false;

  constructor(private readonly transport: Transport) {}

  // One request in flight at a time; the UI disables send while pending.
  async send(query: string, mode: Mode): Promise<ConversationTurn> {
    const text = query.trim();
    if (!text) throw new Error("query must be nonempty");
    if (this.pending) throw new Error("a request is already in flight");
    const request: ChatRequest = { query: text, mode };
    this.turns.push(userTurn(text, mode));
    const turn = await this.exchange(request);
    this.turns.push(turn);
    return turn;
  }

  // Reissue a failed request, replacing its error turn in place. The rest
  // of the conversation is untouched.
  async retry(turn: ConversationTurn): Promise<ConversationTurn> {
    if (turn.retryRequest === null) throw new Error("turn is not retryable");
    const index = this.turns.indexOf(turn);
    if (index < 0) throw new Error("turn is not part of this conversation");
    if (this.pending) throw new Error("a request is already in flight");
    const replacement = await this.exchange(turn.retryRequest);
    this.turns[index] = replacement;
    return replacement;
  }

  private async exchange(request: ChatRequest): Promise<ConversationTurn> {
    this.pending = true;
    try {
      const { status, body } = await this.transport.chat(request);
      if (status !== 200) {
        const detail =
          typeof body === "object" && body !== null && "error" in body
            ? String((body as { error: unknown }).error)
            : `status ${status}`;
        return errorTurn(`server error: ${detail}`, request);
      }
      if (!isChatResponse(body)) {
        return errorTurn("server returned an unexpected payload", request);
      }
      return systemTurn(body);
    } catch (err) {
      return errorTurn(`network failure: ${String(err)}`, request);
    } finally {
      this.pending = false;
    }
  }
}
