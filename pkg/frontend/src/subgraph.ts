/**
 * Knowledge-graph subgraph renderer.
 *
 * Nodes are placed on a deterministic circle (sorted by id) so the same
 * view always draws the same picture; there is no simulation to settle.
 * Bound nodes and edges carry a `highlighted` class for distinct
 * styling, and pan/zoom is expressed as pure viewBox arithmetic the
 * browser wiring applies on wheel/drag.
 */

import type { SubgraphNode, SubgraphView } from './types.js';
import { esc } from './chart.js';

const WIDTH = 600;
const HEIGHT = 400;
const NODE_R = 18;

export const EMPTY_SUBGRAPH = '<div class="empty-state">no subgraph to display</div>';

/** Label line under the type: a display attribute or the bare id. */
export function displayAttr(node: SubgraphNode): string {
  if ('name' in node.attrs) return String(node.attrs.name);
  const keys = Object.keys(node.attrs).sort();
  const first = keys[0];
  return first === undefined ? node.id : String(node.attrs[first]);
}

export function renderSubgraph(view: SubgraphView): string {
  if (view.nodes.length === 0) return EMPTY_SUBGRAPH;

  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const r = Math.min(WIDTH, HEIGHT) / 2 - 60;
  const ordered = [...view.nodes].sort((a, b) => (a.id < b.id ? -1 : 1));
  const place = new Map<string, { x: number; y: number }>();
  ordered.forEach((node, i) => {
    const angle = (2 * Math.PI * i) / ordered.length - Math.PI / 2;
    place.set(node.id, {
      x: ordered.length === 1 ? cx : cx + r * Math.cos(angle),
      y: ordered.length === 1 ? cy : cy + r * Math.sin(angle),
    });
  });

  let svg = '';
  for (const edge of view.edges) {
    const a = place.get(edge.source);
    const b = place.get(edge.target);
    if (!a || !b) continue;
    const cls = edge.highlighted ? 'edge highlighted' : 'edge';
    svg += `<line class="${cls}" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`;
    svg +=
      `<text class="edge-label" x="${(a.x + b.x) / 2}" y="${(a.y + b.y) / 2 - 6}" ` +
      `text-anchor="middle">${esc(edge.rel_type)}</text>`;
  }
  for (const node of ordered) {
    const at = place.get(node.id)!;
    const cls = node.highlighted ? 'node highlighted' : 'node';
    svg +=
      `<g class="${cls}" data-node-id="${esc(node.id)}">` +
      `<circle cx="${at.x}" cy="${at.y}" r="${NODE_R}"/>` +
      `<text class="node-type" x="${at.x}" y="${at.y + NODE_R + 14}" text-anchor="middle">${esc(node.type)}</text>` +
      `<text class="node-name" x="${at.x}" y="${at.y + NODE_R + 28}" text-anchor="middle">${esc(displayAttr(node))}</text>` +
      `</g>`;
  }
  return (
    `<svg class="subgraph" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `xmlns="http://www.w3.org/2000/svg">${svg}</svg>`
  );
}

/** Attribute panel shown when a node is clicked. */
export function attributePanel(view: SubgraphView, nodeId: string): string {
  const node = view.nodes.find((n) => n.id === nodeId);
  if (!node) return '<div class="empty-state">node not in view</div>';
  let rows = `<dt>id</dt><dd>${esc(node.id)}</dd><dt>type</dt><dd>${esc(node.type)}</dd>`;
  for (const key of Object.keys(node.attrs).sort()) {
    const value = node.attrs[key];
    rows += `<dt>${esc(key)}</dt><dd>${esc(Array.isArray(value) ? value.join(', ') : (value ?? ''))}</dd>`;
  }
  return `<dl class="attr-panel" data-node-id="${esc(node.id)}">${rows}</dl>`;
}

// ── Pan/zoom ─────────────────────────────────────────────────────────────

export interface Viewport {
  x: number;
  y: number;
  scale: number;
}

export const HOME_VIEWPORT: Viewport = { x: 0, y: 0, scale: 1 };
const MIN_SCALE = 0.2;
const MAX_SCALE = 8;

/** Shift the view by a screen-space delta. */
export function panBy(view: Viewport, dx: number, dy: number): Viewport {
  return { ...view, x: view.x - dx / view.scale, y: view.y - dy / view.scale };
}

/** Scale around a screen-space anchor, keeping it fixed on screen. */
export function zoomAt(view: Viewport, factor: number, sx: number, sy: number): Viewport {
  const scale = Math.min(MAX_SCALE, Math.max(MIN_SCALE, view.scale * factor));
  return {
    x: view.x + sx / view.scale - sx / scale,
    y: view.y + sy / view.scale - sy / scale,
    scale,
  };
}

export function viewBoxAttr(view: Viewport): string {
  return `${view.x} ${view.y} ${WIDTH / view.scale} ${HEIGHT / view.scale}`;
}
