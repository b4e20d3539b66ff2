/**
 * Declarative chart renderer: ChartSpec + ResultTable in, inline SVG out.
 *
 * The spec arrives pre-validated by the engine, but the table travels
 * separately, so every render re-checks that the referenced columns
 * exist and carry usable values; any mismatch falls back to a plain
 * HTML table of the result rows instead of failing.
 */

import type { CellValue, ChartSpec, ResultTable } from './types.js';

const WIDTH = 600;
const HEIGHT = 400;
const PLOT = { left: 60, top: 40, right: 580, bottom: 330 };

const PALETTE = [
  '#2563eb',
  '#059669',
  '#d97706',
  '#dc2626',
  '#7c3aed',
  '#0d9488',
];

export function esc(value: unknown): string {
  return String(value)
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function color(i: number): string {
  return PALETTE[i % PALETTE.length] ?? '#2563eb';
}

// ── Validation ───────────────────────────────────────────────────────────

/** Reason the spec cannot be drawn over this table, or null when it can. */
export function chartProblem(spec: ChartSpec, table: ResultTable): string | null {
  for (const column of [spec.x, spec.y]) {
    if (!table.columns.includes(column)) return `column ${JSON.stringify(column)} not in result`;
  }
  if (spec.series && !table.columns.includes(spec.series)) {
    return `series column ${JSON.stringify(spec.series)} not in result`;
  }
  if (table.rows.length === 0) return 'result has no rows';
  const yIdx = table.columns.indexOf(spec.y);
  if (table.rows.some((row) => !isNumeric(row[yIdx]))) {
    return `column ${JSON.stringify(spec.y)} is not numeric`;
  }
  if (spec.kind === 'scatter') {
    const xIdx = table.columns.indexOf(spec.x);
    if (table.rows.some((row) => !isNumeric(row[xIdx]))) {
      return `column ${JSON.stringify(spec.x)} is not numeric`;
    }
  }
  return null;
}

function isNumeric(value: CellValue | undefined): boolean {
  if (typeof value === 'number') return Number.isFinite(value);
  if (typeof value === 'string' && value.trim() !== '') return Number.isFinite(Number(value));
  return false;
}

function num(value: CellValue | undefined): number {
  return typeof value === 'number' ? value : Number(value);
}

// ── Fallback table ───────────────────────────────────────────────────────

export function renderResultTable(table: ResultTable): string {
  const head = table.columns.map((c) => `<th>${esc(c)}</th>`).join('');
  const body = table.rows
    .map((row) => `<tr>${row.map((v) => `<td>${esc(v ?? '')}</td>`).join('')}</tr>`)
    .join('');
  return `<table class="result-table"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

// ── Renderers ────────────────────────────────────────────────────────────

interface Series {
  name: string;
  points: Array<{ x: CellValue; y: number }>;
}

function splitSeries(spec: ChartSpec, table: ResultTable): Series[] {
  const xIdx = table.columns.indexOf(spec.x);
  const yIdx = table.columns.indexOf(spec.y);
  const sIdx = spec.series ? table.columns.indexOf(spec.series) : -1;
  const groups = new Map<string, Series>();
  for (const row of table.rows) {
    const name = sIdx >= 0 ? String(row[sIdx] ?? '') : '';
    let series = groups.get(name);
    if (!series) {
      series = { name, points: [] };
      groups.set(name, series);
    }
    series.points.push({ x: row[xIdx] ?? '', y: num(row[yIdx]) });
  }
  return [...groups.values()];
}

function axisLabels(spec: ChartSpec): string {
  const midX = (PLOT.left + PLOT.right) / 2;
  const midY = (PLOT.top + PLOT.bottom) / 2;
  return (
    `<text class="axis-label" x="${midX}" y="${HEIGHT - 12}" text-anchor="middle">${esc(spec.x)}</text>` +
    `<text class="axis-label" x="16" y="${midY}" text-anchor="middle" transform="rotate(-90, 16, ${midY})">${esc(spec.y)}</text>`
  );
}

function title(spec: ChartSpec): string {
  if (!spec.title) return '';
  return `<text class="chart-title" x="${WIDTH / 2}" y="22" text-anchor="middle">${esc(spec.title)}</text>`;
}

function frame(spec: ChartSpec, inner: string): string {
  return (
    `<svg class="chart" data-kind="${spec.kind}" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
    `xmlns="http://www.w3.org/2000/svg">${title(spec)}${inner}</svg>`
  );
}

function renderBar(spec: ChartSpec, table: ResultTable): string {
  const series = splitSeries(spec, table);
  const labels = [...new Set(series.flatMap((s) => s.points.map((p) => String(p.x ?? ''))))];
  const peak = Math.max(1, ...series.flatMap((s) => s.points.map((p) => p.y)));
  const groupW = (PLOT.right - PLOT.left) / labels.length;
  const barW = (groupW - 8) / series.length;

  let svg = `<line x1="${PLOT.left}" y1="${PLOT.bottom}" x2="${PLOT.right}" y2="${PLOT.bottom}" stroke="#d1d5db"/>`;
  labels.forEach((label, i) => {
    series.forEach((s, si) => {
      const point = s.points.find((p) => String(p.x ?? '') === label);
      if (!point) return;
      const h = (point.y / peak) * (PLOT.bottom - PLOT.top);
      const x = PLOT.left + i * groupW + 4 + si * barW;
      svg +=
        `<rect class="bar" data-label="${esc(label)}" x="${x}" y="${PLOT.bottom - h}" ` +
        `width="${Math.max(barW - 2, 1)}" height="${h}" fill="${color(si)}"/>`;
    });
    svg +=
      `<text class="tick" x="${PLOT.left + i * groupW + groupW / 2}" y="${PLOT.bottom + 16}" ` +
      `text-anchor="middle">${esc(label)}</text>`;
  });
  return frame(spec, svg + axisLabels(spec));
}

function renderLine(spec: ChartSpec, table: ResultTable): string {
  const series = splitSeries(spec, table);
  const labels = [...new Set(series.flatMap((s) => s.points.map((p) => String(p.x ?? ''))))];
  const peak = Math.max(1, ...series.flatMap((s) => s.points.map((p) => p.y)));
  const stepX = (PLOT.right - PLOT.left) / Math.max(labels.length - 1, 1);

  let svg = `<line x1="${PLOT.left}" y1="${PLOT.bottom}" x2="${PLOT.right}" y2="${PLOT.bottom}" stroke="#d1d5db"/>`;
  series.forEach((s, si) => {
    const points = s.points
      .map((p) => {
        const i = labels.indexOf(String(p.x ?? ''));
        const px = PLOT.left + i * stepX;
        const py = PLOT.bottom - (p.y / peak) * (PLOT.bottom - PLOT.top);
        return `${px},${py}`;
      })
      .join(' ');
    svg += `<polyline class="line" data-series="${esc(s.name)}" points="${points}" fill="none" stroke="${color(si)}" stroke-width="2"/>`;
  });
  labels.forEach((label, i) => {
    svg +=
      `<text class="tick" x="${PLOT.left + i * stepX}" y="${PLOT.bottom + 16}" ` +
      `text-anchor="middle">${esc(label)}</text>`;
  });
  return frame(spec, svg + axisLabels(spec));
}

function renderPie(spec: ChartSpec, table: ResultTable): string {
  const xIdx = table.columns.indexOf(spec.x);
  const yIdx = table.columns.indexOf(spec.y);
  const slices = table.rows.map((row) => ({
    label: String(row[xIdx] ?? ''),
    value: Math.max(num(row[yIdx]), 0),
  }));
  const total = slices.reduce((sum, s) => sum + s.value, 0) || 1;
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2 + 10;
  const r = 130;

  let svg = '';
  let angle = -Math.PI / 2;
  slices.forEach((slice, i) => {
    const share = slice.value / total;
    // a full-circle arc degenerates, so a 100% share renders as a circle
    if (share >= 1) {
      svg += `<circle class="slice" data-label="${esc(slice.label)}" cx="${cx}" cy="${cy}" r="${r}" fill="${color(i)}"/>`;
      svg += `<text class="slice-label" x="${cx}" y="${cy - r - 8}" text-anchor="middle">${esc(slice.label)}</text>`;
      return;
    }
    const end = angle + share * 2 * Math.PI;
    const large = share > 0.5 ? 1 : 0;
    const x1 = cx + r * Math.cos(angle);
    const y1 = cy + r * Math.sin(angle);
    const x2 = cx + r * Math.cos(end);
    const y2 = cy + r * Math.sin(end);
    svg +=
      `<path class="slice" data-label="${esc(slice.label)}" ` +
      `d="M${cx},${cy} L${x1},${y1} A${r},${r} 0 ${large},1 ${x2},${y2} Z" fill="${color(i)}"/>`;
    const mid = angle + (share * 2 * Math.PI) / 2;
    svg +=
      `<text class="slice-label" x="${cx + (r + 16) * Math.cos(mid)}" y="${cy + (r + 16) * Math.sin(mid)}" ` +
      `text-anchor="middle">${esc(slice.label)}</text>`;
    angle = end;
  });
  return frame(spec, svg);
}

function renderScatter(spec: ChartSpec, table: ResultTable): string {
  const xIdx = table.columns.indexOf(spec.x);
  const yIdx = table.columns.indexOf(spec.y);
  const points = table.rows.map((row) => ({ x: num(row[xIdx]), y: num(row[yIdx]) }));
  const xMax = Math.max(1, ...points.map((p) => p.x));
  const yMax = Math.max(1, ...points.map((p) => p.y));
  const xMin = Math.min(0, ...points.map((p) => p.x));
  const yMin = Math.min(0, ...points.map((p) => p.y));

  let svg =
    `<line x1="${PLOT.left}" y1="${PLOT.bottom}" x2="${PLOT.right}" y2="${PLOT.bottom}" stroke="#d1d5db"/>` +
    `<line x1="${PLOT.left}" y1="${PLOT.top}" x2="${PLOT.left}" y2="${PLOT.bottom}" stroke="#d1d5db"/>`;
  for (const p of points) {
    const px = PLOT.left + ((p.x - xMin) / (xMax - xMin || 1)) * (PLOT.right - PLOT.left);
    const py = PLOT.bottom - ((p.y - yMin) / (yMax - yMin || 1)) * (PLOT.bottom - PLOT.top);
    svg += `<circle class="point" cx="${px}" cy="${py}" r="4" fill="${color(0)}"/>`;
  }
  return frame(spec, svg + axisLabels(spec));
}

// ── Entry point ──────────────────────────────────────────────────────────

/** Render the spec over the table; fall back to an HTML table on mismatch. */
export function renderChart(spec: ChartSpec, table: ResultTable): string {
  if (chartProblem(spec, table) !== null) return renderResultTable(table);
  switch (spec.kind) {
    case 'bar':
      return renderBar(spec, table);
    case 'line':
      return renderLine(spec, table);
    case 'pie':
      return renderPie(spec, table);
    case 'scatter':
      return renderScatter(spec, table);
    default:
      return renderResultTable(table);
  }
}
