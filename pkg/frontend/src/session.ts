/**
 * ViewSession: everything the UI shows for one ask, derived purely from
 * the session's trace events.
 *
 * The view keeps no state of its own: events are ordered by seq (with
 * duplicates dropped, defending against out-of-order delivery) and every
 * derived field is recomputed from that ordered log. Applying a live
 * stream event-by-event therefore reconstructs exactly the same view as
 * replaying the recorded log after a reload.
 */

import type {
  ActionPayload,
  ChartPayload,
  ErrorPayload,
  FinalPayload,
  SubgraphView,
  TraceEvent,
} from './types.js';

export interface TraceStep {
  seq: number;
  kind: 'thought' | 'action' | 'observation';
  text: string;
  action?: string;
  input?: string;
}

export interface ViewSession {
  sessionId: string;
  mode: string;
  events: TraceEvent[];
  steps: TraceStep[];
  charts: ChartPayload[];
  subgraphs: SubgraphView[];
  final: FinalPayload | null;
  error: ErrorPayload | null;
  awaitingClarification: boolean;
  done: boolean;
}

export function createViewSession(sessionId: string, mode: string): ViewSession {
  return derive(sessionId, mode, []);
}

/** Insert one event (by seq, duplicates ignored) and re-derive the view. */
export function applyEvent(session: ViewSession, event: TraceEvent): ViewSession {
  if (session.events.some((e) => e.seq === event.seq)) return session;
  const events = [...session.events, event].sort((a, b) => a.seq - b.seq);
  return derive(session.sessionId, session.mode, events);
}

/** Rebuild the full view from a recorded event log. */
export function reconstructSession(
  sessionId: string,
  mode: string,
  events: TraceEvent[],
): ViewSession {
  return events.reduce(applyEvent, createViewSession(sessionId, mode));
}

function derive(sessionId: string, mode: string, events: TraceEvent[]): ViewSession {
  const steps: TraceStep[] = [];
  const charts: ChartPayload[] = [];
  const subgraphs: SubgraphView[] = [];
  let final: FinalPayload | null = null;
  let error: ErrorPayload | null = null;

  for (const event of events) {
    switch (event.kind) {
      case 'thought':
      case 'observation':
        steps.push({ seq: event.seq, kind: event.kind, text: String(event.payload.text ?? '') });
        break;
      case 'action': {
        const payload = event.payload as unknown as ActionPayload;
        steps.push({
          seq: event.seq,
          kind: 'action',
          text: `${payload.action}: ${payload.input}`,
          action: payload.action,
          input: payload.input,
        });
        break;
      }
      case 'chart':
        charts.push(event.payload as unknown as ChartPayload);
        break;
      case 'subgraph':
        subgraphs.push(event.payload as unknown as SubgraphView);
        break;
      case 'final':
        final = event.payload as unknown as FinalPayload;
        break;
      case 'error':
        error = event.payload as unknown as ErrorPayload;
        break;
    }
  }

  return {
    sessionId,
    mode,
    events,
    steps,
    charts,
    subgraphs,
    final,
    error,
    awaitingClarification: final?.final_kind === 'clarification',
    done: final !== null || error !== null,
  };
}
