import type { ModelPayload } from "./types.js";

// View model of the node-link graph. Condition strings are carried verbatim
// from the service payload: the client never re-derives them.

export type GraphNode = {
  id: string;
  name: string;
  kind: "goal" | "task" | "resource";
  actor: string;
  temp: boolean;
  conflicted: boolean;
  ie: string[][];
  ce: string[][] | null;
  x: number;
  y: number;
};

export type GraphEdge = {
  from: string;
  to: string;
  kind: "and" | "or" | "depends";
  exclusionGroup: string | null; // OR fans share their parent id
};

export type GraphView = {
  revision: string;
  root: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
};

const X_STEP = 190;
const Y_STEP = 110;

export function buildGraph(payload: ModelPayload): GraphView {
  const conflicted = new Set(payload.conflicts);
  const nodes: GraphNode[] = payload.document.artefacts.map((art) => {
    const spot = payload.layout[art.id] ?? { depth: 0, column: 0 };
    return {
      id: art.id,
      name: art.name,
      kind: art.kind,
      actor: art.actor,
      temp: art.temp,
      conflicted: conflicted.has(art.id),
      ie: art.ie,
      ce: payload.ce[art.id] ?? null,
      x: 40 + spot.column * X_STEP,
      y: 40 + spot.depth * Y_STEP,
    };
  });
  const edges: GraphEdge[] = [];
  for (const link of payload.document.decompositions) {
    for (const child of link.children) {
      edges.push({
        from: link.parent,
        to: child,
        kind: link.kind,
        exclusionGroup: link.kind === "or" ? link.parent : null,
      });
    }
  }
  for (const dep of payload.document.dependencies) {
    edges.push({
      from: dep.depender[1],
      to: dep.dependee[1],
      kind: "depends",
      exclusionGroup: null,
    });
  }
  return { revision: payload.revision, root: payload.root, nodes, edges };
}

export function conditionText(alternatives: string[][]): string {
  return alternatives.map((alt) => `{${alt.join(", ")}}`).join(" | ");
}

function escapeXml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

const NODE_SHAPES: Record<GraphNode["kind"], string> = {
  goal: "rx='28'",
  task: "rx='6'",
  resource: "rx='0'",
};

// The SVG is rebuilt wholesale on every refresh; state lives in the payloads.
export function renderSvg(view: GraphView): string {
  const width = Math.max(...view.nodes.map((n) => n.x), 0) + 220;
  const height = Math.max(...view.nodes.map((n) => n.y), 0) + 140;
  const byId = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `data-revision="${escapeXml(view.revision)}">`,
  );
  for (const edge of view.edges) {
    const from = byId.get(edge.from);
    const to = byId.get(edge.to);
    if (!from || !to) continue;
    const dash =
      edge.kind === "or" ? ' stroke-dasharray="7 4"' : edge.kind === "depends" ? ' stroke-dasharray="2 4"' : "";
    const group = edge.exclusionGroup ? ` data-or-group="${escapeXml(edge.exclusionGroup)}"` : "";
    parts.push(
      `<line class="edge edge-${edge.kind}" x1="${from.x + 80}" y1="${from.y + 28}" ` +
        `x2="${to.x + 80}" y2="${to.y}" stroke="#666"${dash}${group}/>`,
    );
  }
  for (const node of view.nodes) {
    const classes = ["node", `node-${node.kind}`];
    if (node.conflicted) classes.push("node-conflict");
    if (node.temp) classes.push("node-temp");
    const stroke = node.conflicted ? "#c0392b" : "#34495e";
    const dash = node.temp ? ' stroke-dasharray="6 3"' : "";
    const title = [`${node.id}: ${node.name}`, `IE ${conditionText(node.ie)}`];
    if (node.ce) title.push(`CE ${conditionText(node.ce)}`);
    parts.push(
      `<g class="${classes.join(" ")}" data-id="${escapeXml(node.id)}"` +
        (node.conflicted ? ' data-conflict="true"' : "") +
        (node.temp ? ' data-temp="true"' : "") +
        ">" +
        `<rect x="${node.x}" y="${node.y}" width="160" height="56" ${NODE_SHAPES[node.kind]} ` +
        `fill="#fff" stroke="${stroke}" stroke-width="${node.conflicted ? 3 : 1.5}"${dash}/>` +
        `<title>${escapeXml(title.join("\n"))}</title>` +
        `<text x="${node.x + 80}" y="${node.y + 24}" text-anchor="middle" class="node-id">` +
        `${escapeXml(node.id)}</text>` +
        `<text x="${node.x + 80}" y="${node.y + 42}" text-anchor="middle" class="node-name">` +
        `${escapeXml(node.name.slice(0, 22))}</text>` +
        "</g>",
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
