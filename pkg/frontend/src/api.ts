/**
 * Thin typed client for the gateway HTTP + SSE surface.
 *
 * Every non-2xx response becomes a GatewayError carrying the status and
 * the `detail` string the service puts in its JSON error bodies, so the
 * UI can surface failures inline without caring which endpoint raised.
 */

import { frameToEvent, SseParser } from './sse.js';
import type {
  AskMode,
  GraphSchemaInfo,
  IngestResult,
  KgBuildResult,
  QueryResult,
  SessionLog,
  SubgraphView,
  TraceEvent,
} from './types.js';

export class GatewayError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = 'GatewayError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const defaultFetch: FetchLike = (input, init) => globalThis.fetch(input, init);

export class GatewayClient {
  constructor(
    readonly baseUrl = '',
    private readonly fetchFn: FetchLike = defaultFetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new GatewayError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  private postJson<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  ingestTable(file: Blob, filename: string, name?: string): Promise<IngestResult> {
    const form = new FormData();
    form.append('file', file, filename);
    if (name) form.append('name', name);
    return this.request<IngestResult>('/tables', { method: 'POST', body: form });
  }

  buildKg(table: string, config?: unknown): Promise<KgBuildResult> {
    const body: Record<string, unknown> = { table };
    if (config !== undefined) body.config = config;
    return this.postJson<KgBuildResult>('/kg/build', body);
  }

  async ask(question: string, mode: AskMode = 'leader', sessionId?: string): Promise<string> {
    const body: Record<string, unknown> = { question, mode };
    if (sessionId) body.session_id = sessionId;
    const result = await this.postJson<{ session_id: string }>('/ask', body);
    return result.session_id;
  }

  /** Subscribe to a session's live event stream (one subscription per session). */
  async *streamEvents(sessionId: string): AsyncGenerator<TraceEvent> {
    const response = await this.fetchFn(`${this.baseUrl}/sessions/${sessionId}/events`);
    if (!response.ok) {
      throw new GatewayError(response.status, await errorDetail(response));
    }
    if (!response.body) return;
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    while (true) {
      const { value, done } = await reader.read();
      if (done) break;
      for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
        yield frameToEvent(frame);
      }
    }
  }

  fetchSession(sessionId: string): Promise<SessionLog> {
    return this.request<SessionLog>(`/sessions/${sessionId}`);
  }

  graphSchema(): Promise<GraphSchemaInfo> {
    return this.request<GraphSchemaInfo>('/graph/schema');
  }

  graphQuery(cypher: string): Promise<QueryResult> {
    return this.postJson<QueryResult>('/graph/query', { cypher });
  }

  fetchSubgraph(ids: string[], radius = 1): Promise<SubgraphView> {
    const params = new URLSearchParams({ ids: ids.join(','), radius: String(radius) });
    return this.request<SubgraphView>(`/graph/subgraph?${params}`);
  }
}

async function errorDetail(response: Response): Promise<string> {
  const text = await response.text();
  try {
    const body = JSON.parse(text) as { detail?: unknown };
    if (typeof body.detail === 'string') return body.detail;
  } catch {
    // non-JSON error body; fall through to the raw text
  }
  return text || response.statusText;
}
