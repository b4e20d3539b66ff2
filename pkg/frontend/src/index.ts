export { GatewayClient, GatewayError } from './api.js';
export { bootstrap, reloadSession } from './app.js';
export { chartProblem, renderChart, renderResultTable } from './chart.js';
export {
  applyEvent,
  createViewSession,
  reconstructSession,
  type TraceStep,
  type ViewSession,
} from './session.js';
export { frameToEvent, parseSseText, SseParser, type SseFrame } from './sse.js';
export {
  attributePanel,
  displayAttr,
  EMPTY_SUBGRAPH,
  HOME_VIEWPORT,
  panBy,
  renderSubgraph,
  viewBoxAttr,
  type Viewport,
  zoomAt,
} from './subgraph.js';
export * from './types.js';
