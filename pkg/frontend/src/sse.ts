/**
 * Incremental parser for the gateway's SSE framing:
 *
 *   id: <seq>\n
 *   event: <kind>\n
 *   data: <json>\n
 *   \n
 *
 * Frames may arrive split across arbitrary chunk boundaries, so the
 * parser buffers until it sees the blank-line terminator.
 */

import type { EventKind, TraceEvent } from './types.js';
import { EVENT_KINDS } from './types.js';

export interface SseFrame {
  id: number;
  event: string;
  data: string;
}

export class SseParser {
  private buffer = '';

  /** Feed a chunk; returns every frame completed by it. */
  push(chunk: string): SseFrame[] {
    this.buffer += chunk.replace(/\r\n/g, '\n');
    const frames: SseFrame[] = [];
    let cut: number;
    while ((cut = this.buffer.indexOf('\n\n')) >= 0) {
      const block = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut + 2);
      const frame = parseFrame(block);
      if (frame) frames.push(frame);
    }
    return frames;
  }

  /** Unterminated tail still sitting in the buffer. */
  pending(): string {
    return this.buffer;
  }
}

function parseFrame(block: string): SseFrame | null {
  let id = 0;
  let event = '';
  let data = '';
  let sawData = false;
  for (const line of block.split('\n')) {
    if (line.startsWith('id: ')) {
      id = Number(line.slice(4));
    } else if (line.startsWith('event: ')) {
      event = line.slice(7);
    } else if (line.startsWith('data: ')) {
      data = sawData ? `${data}\n${line.slice(6)}` : line.slice(6);
      sawData = true;
    }
  }
  if (!sawData && !event) return null;
  return { id, event, data };
}

export function parseSseText(text: string): SseFrame[] {
  return new SseParser().push(text.endsWith('\n\n') ? text : text + '\n\n');
}

/** Decode a frame into a TraceEvent; throws on unknown kinds or bad JSON. */
export function frameToEvent(frame: SseFrame): TraceEvent {
  if (!EVENT_KINDS.includes(frame.event as EventKind)) {
    throw new Error(`unknown event kind ${JSON.stringify(frame.event)}`);
  }
  const payload = JSON.parse(frame.data) as TraceEvent;
  return {
    session_id: payload.session_id,
    seq: payload.seq ?? frame.id,
    kind: frame.event as EventKind,
    payload: payload.payload ?? {},
  };
}
