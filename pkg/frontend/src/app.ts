/**
 * Single-page app wiring: upload a table, build the graph, ask
 * questions, and watch the trace stream in.
 *
 * All state lives in the gateway; the page holds only the current
 * ViewSession, so reloading and replaying the recorded event log via
 * GET /sessions/{id} reconstructs exactly what streaming produced.
 */

import { GatewayClient, GatewayError } from './api.js';
import { renderChart } from './chart.js';
import { applyEvent, createViewSession, reconstructSession, ViewSession } from './session.js';
import { attributePanel, HOME_VIEWPORT, panBy, renderSubgraph, viewBoxAttr, Viewport, zoomAt } from './subgraph.js';
import type { AskMode, SubgraphView } from './types.js';

const SHELL = `
<header><h1>datafactory</h1><p id="notice" class="notice" hidden></p></header>
<section class="setup">
  <form id="upload-form">
    <input type="file" id="table-file" accept=".csv,.tsv" required/>
    <button type="submit">Ingest table</button>
  </form>
  <button id="build-kg">Build knowledge graph</button>
  <span id="setup-status"></span>
</section>
<section class="ask">
  <form id="ask-form">
    <input type="text" id="question" placeholder="Ask about the data" required/>
    <select id="mode">
      <option value="leader">leader</option>
      <option value="database">database team</option>
      <option value="knowledge_graph">knowledge graph team</option>
    </select>
    <button type="submit">Ask</button>
  </form>
</section>
<section class="trace"><h2>Trace</h2><ol id="steps"></ol></section>
<section class="answer"><h2>Answer</h2><div id="final"></div></section>
<section class="artifacts">
  <div id="charts"></div>
  <div id="subgraph-box"></div>
  <div id="attr-box"></div>
</section>
`;

interface PageState {
  client: GatewayClient;
  session: ViewSession | null;
  clarifying: string | null;
  viewport: Viewport;
  lastTable: string | null;
}

export function bootstrap(root: HTMLElement, client = new GatewayClient()): PageState {
  root.innerHTML = SHELL;
  const state: PageState = {
    client,
    session: null,
    clarifying: null,
    viewport: HOME_VIEWPORT,
    lastTable: null,
  };

  const uploadForm = root.querySelector('#upload-form') as HTMLFormElement;
  uploadForm.addEventListener('submit', (e) => {
    e.preventDefault();
    const input = root.querySelector('#table-file') as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void ingest(root, state, file);
  });

  (root.querySelector('#build-kg') as HTMLButtonElement).addEventListener('click', () => {
    void buildKg(root, state);
  });

  const askForm = root.querySelector('#ask-form') as HTMLFormElement;
  askForm.addEventListener('submit', (e) => {
    e.preventDefault();
    const input = root.querySelector('#question') as HTMLInputElement;
    const mode = (root.querySelector('#mode') as HTMLSelectElement).value as AskMode;
    const question = input.value.trim();
    if (question) void ask(root, state, question, mode);
    input.value = '';
  });

  return state;
}

function notice(root: HTMLElement, text: string | null): void {
  const box = root.querySelector('#notice') as HTMLElement;
  box.hidden = text === null;
  box.textContent = text ?? '';
}

function surface(root: HTMLElement, exc: unknown): void {
  if (exc instanceof GatewayError) {
    // a 409 before any ingest means there is nothing to ask about yet
    notice(root, exc.status === 409 ? `ingest a table first (${exc.detail})` : exc.detail);
  } else {
    notice(root, String(exc));
  }
}

async function ingest(root: HTMLElement, state: PageState, file: File): Promise<void> {
  notice(root, null);
  try {
    const result = await state.client.ingestTable(file, file.name);
    state.lastTable = result.table;
    setStatus(root, `ingested ${result.table}: ${result.rows} rows`);
  } catch (exc) {
    surface(root, exc);
  }
}

async function buildKg(root: HTMLElement, state: PageState): Promise<void> {
  notice(root, null);
  if (!state.lastTable) {
    notice(root, 'ingest a table first');
    return;
  }
  try {
    const result = await state.client.buildKg(state.lastTable);
    setStatus(root, `graph: ${result.entities} entities, ${result.relationships} relationships`);
  } catch (exc) {
    surface(root, exc);
  }
}

function setStatus(root: HTMLElement, text: string): void {
  (root.querySelector('#setup-status') as HTMLElement).textContent = text;
}

async function ask(
  root: HTMLElement,
  state: PageState,
  question: string,
  mode: AskMode,
): Promise<void> {
  notice(root, null);
  try {
    const sessionId = await state.client.ask(question, mode, state.clarifying ?? undefined);
    state.clarifying = null;
    state.session = createViewSession(sessionId, mode);
    render(root, state);
    for await (const event of state.client.streamEvents(sessionId)) {
      state.session = applyEvent(state.session, event);
      render(root, state);
    }
  } catch (exc) {
    surface(root, exc);
  }
}

/** Rebuild the view for a finished session from its recorded log. */
export async function reloadSession(
  root: HTMLElement,
  state: PageState,
  sessionId: string,
): Promise<void> {
  const log = await state.client.fetchSession(sessionId);
  state.session = reconstructSession(log.session_id, log.mode, log.events);
  render(root, state);
}

function render(root: HTMLElement, state: PageState): void {
  const session = state.session;
  if (!session) return;

  const steps = root.querySelector('#steps') as HTMLElement;
  steps.innerHTML = session.steps
    .map((s) => `<li class="step ${s.kind}"><b>${s.kind}</b> ${escText(s.text)}</li>`)
    .join('');

  const final = root.querySelector('#final') as HTMLElement;
  if (session.error) {
    final.innerHTML = `<p class="error">${escText(session.error.type)}: ${escText(session.error.message)}</p>`;
  } else if (session.final) {
    final.innerHTML = `<p class="final ${escText(session.final.final_kind)}">${escText(session.final.answer)}</p>`;
  } else {
    final.innerHTML = '<p class="pending">working...</p>';
  }

  if (session.awaitingClarification) {
    state.clarifying = session.sessionId;
    const input = root.querySelector('#question') as HTMLInputElement;
    input.placeholder = 'Answer the clarification to continue';
    input.focus();
  }

  (root.querySelector('#charts') as HTMLElement).innerHTML = session.charts
    .map((c) => renderChart(c.spec, { columns: c.columns, rows: c.rows }))
    .join('');

  const box = root.querySelector('#subgraph-box') as HTMLElement;
  const view = session.subgraphs[session.subgraphs.length - 1];
  box.innerHTML = view ? renderSubgraph(view) : '';
  if (view) wireSubgraph(root, state, box, view);
}

function wireSubgraph(
  root: HTMLElement,
  state: PageState,
  box: HTMLElement,
  view: SubgraphView,
): void {
  const svg = box.querySelector('svg.subgraph') as SVGSVGElement | null;
  if (!svg) return;
  svg.setAttribute('viewBox', viewBoxAttr(state.viewport));

  svg.addEventListener('wheel', (e) => {
    e.preventDefault();
    state.viewport = zoomAt(state.viewport, e.deltaY < 0 ? 1.2 : 1 / 1.2, e.offsetX, e.offsetY);
    svg.setAttribute('viewBox', viewBoxAttr(state.viewport));
  });

  let dragging: { x: number; y: number } | null = null;
  svg.addEventListener('pointerdown', (e) => {
    dragging = { x: e.clientX, y: e.clientY };
  });
  svg.addEventListener('pointermove', (e) => {
    if (!dragging) return;
    state.viewport = panBy(state.viewport, e.clientX - dragging.x, e.clientY - dragging.y);
    dragging = { x: e.clientX, y: e.clientY };
    svg.setAttribute('viewBox', viewBoxAttr(state.viewport));
  });
  svg.addEventListener('pointerup', () => {
    dragging = null;
  });

  for (const group of svg.querySelectorAll('g.node')) {
    group.addEventListener('click', () => {
      const id = group.getAttribute('data-node-id') ?? '';
      (root.querySelector('#attr-box') as HTMLElement).innerHTML = attributePanel(view, id);
    });
  }
}

function escText(value: string): string {
  return value.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

if (typeof document !== 'undefined') {
  const root = document.getElementById('app');
  if (root) bootstrap(root);
}
