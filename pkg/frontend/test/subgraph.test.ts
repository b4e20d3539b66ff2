import { describe, expect, it } from 'vitest';

import {
  attributePanel,
  displayAttr,
  EMPTY_SUBGRAPH,
  HOME_VIEWPORT,
  panBy,
  renderSubgraph,
  viewBoxAttr,
  zoomAt,
} from '../src/subgraph.js';
import type { SubgraphView } from '../src/types.js';

const TOY_VIEW: SubgraphView = {
  nodes: [
    { id: 'person:Ada', type: 'person', attrs: { name: 'Ada', age: 35 }, highlighted: true },
    { id: 'city:Paris', type: 'city', attrs: { name: 'Paris' }, highlighted: false },
  ],
  edges: [{ source: 'person:Ada', target: 'city:Paris', rel_type: 'lives_in', highlighted: false }],
};

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe('renderSubgraph', () => {
  it('the two-node toy view renders 2 nodes and 1 edge', () => {
    const svg = renderSubgraph(TOY_VIEW);
    expect(count(svg, '<g class="node')).toBe(2);
    expect(count(svg, '<line class="edge')).toBe(1);
    expect(svg).toContain('>lives_in</text>');
  });

  it('nodes are labeled by type and display attribute', () => {
    const svg = renderSubgraph(TOY_VIEW);
    expect(svg).toContain('>person</text>');
    expect(svg).toContain('>Ada</text>');
    expect(svg).toContain('>city</text>');
    expect(svg).toContain('>Paris</text>');
  });

  it('highlight flags produce distinct classes', () => {
    const svg = renderSubgraph(TOY_VIEW);
    expect(svg).toContain('class="node highlighted" data-node-id="person:Ada"');
    expect(svg).toContain('class="node" data-node-id="city:Paris"');
    const lit: SubgraphView = {
      ...TOY_VIEW,
      edges: [{ ...TOY_VIEW.edges[0]!, highlighted: true }],
    };
    expect(renderSubgraph(lit)).toContain('class="edge highlighted"');
  });

  it('an empty view renders the empty state', () => {
    expect(renderSubgraph({ nodes: [], edges: [] })).toBe(EMPTY_SUBGRAPH);
  });

  it('the layout is deterministic', () => {
    expect(renderSubgraph(TOY_VIEW)).toBe(renderSubgraph(TOY_VIEW));
  });
});

describe('displayAttr', () => {
  it('prefers the name attribute', () => {
    expect(displayAttr(TOY_VIEW.nodes[0]!)).toBe('Ada');
  });

  it('falls back to the first attribute key, then the id', () => {
    expect(displayAttr({ id: 'x', type: 't', attrs: { b: 2, a: 1 }, highlighted: false })).toBe('1');
    expect(displayAttr({ id: 'x', type: 't', attrs: {}, highlighted: false })).toBe('x');
  });
});

describe('attributePanel', () => {
  it('lists id, type, and every attribute', () => {
    const html = attributePanel(TOY_VIEW, 'person:Ada');
    expect(html).toContain('<dt>id</dt><dd>person:Ada</dd>');
    expect(html).toContain('<dt>type</dt><dd>person</dd>');
    expect(html).toContain('<dt>age</dt><dd>35</dd>');
    expect(html).toContain('<dt>name</dt><dd>Ada</dd>');
  });

  it('an unknown node gets the empty state', () => {
    expect(attributePanel(TOY_VIEW, 'ghost')).toContain('empty-state');
  });
});

describe('viewport', () => {
  it('panning shifts the origin by screen delta over scale', () => {
    const panned = panBy({ x: 10, y: 20, scale: 2 }, 30, -10);
    expect(panned).toEqual({ x: -5, y: 25, scale: 2 });
  });

  it('zooming keeps the anchor point fixed', () => {
    const view = { x: 40, y: 10, scale: 1 };
    const zoomed = zoomAt(view, 2, 300, 200);
    const before = view.x + 300 / view.scale;
    const after = zoomed.x + 300 / zoomed.scale;
    expect(after).toBeCloseTo(before, 9);
    expect(zoomed.scale).toBe(2);
  });

  it('zoom is clamped to sane bounds', () => {
    expect(zoomAt(HOME_VIEWPORT, 1000, 0, 0).scale).toBe(8);
    expect(zoomAt(HOME_VIEWPORT, 0.0001, 0, 0).scale).toBe(0.2);
  });

  it('the identity viewport covers the full canvas', () => {
    expect(viewBoxAttr(HOME_VIEWPORT)).toBe('0 0 600 400');
  });
});
