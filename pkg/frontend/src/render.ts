/**
 * Pure scene-to-SVG string rendering.
 *
 * Colors, angles, fractions, severities and orderings come verbatim from the
 * scene document; the only arithmetic here maps unit-circle coordinates onto
 * viewport pixels. Every node, edge, band cell and heat cell becomes exactly
 * one addressable element carrying the document values as data attributes.
 */

import type { Band, HeatMap, Rgb, SceneDoc, SceneEdge, SceneNode } from "./scene.js";

export const HEAT_CELL_PX = 14;
export const HEAT_GAP_PX = 2;

function fmt(v: number): string {
  return v.toFixed(4);
}

function rgb(c: Rgb): string {
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

function sanitize(ident: string): string {
  let safe = "";
  for (const ch of ident) {
    safe += /[A-Za-z0-9_.:-]/.test(ch) ? ch : `_${ch.codePointAt(0)!.toString(16).padStart(2, "0")}`;
  }
  return safe;
}

function attr(value: string): string {
  return `"${value.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/"/g, "&quot;")}"`;
}

function text(value: string): string {
  return value.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

class Canvas {
  readonly scale: number;
  readonly cx: number;
  readonly cy: number;

  constructor(viewport: number) {
    this.scale = viewport / 2;
    this.cx = viewport / 2;
    this.cy = viewport / 2;
  }

  point(angle: number, radius: number): [number, number] {
    return [
      this.cx + this.scale * radius * Math.cos(angle),
      this.cy - this.scale * radius * Math.sin(angle),
    ];
  }

  sectorPath(a0: number, a1: number, r0: number, r1: number): string {
    const large = a1 - a0 > Math.PI ? 1 : 0;
    const [x0, y0] = this.point(a0, r1);
    const [x1, y1] = this.point(a1, r1);
    const [x2, y2] = this.point(a1, r0);
    const [x3, y3] = this.point(a0, r0);
    const ro = fmt(this.scale * r1);
    const ri = fmt(this.scale * r0);
    return (
      `M ${fmt(x0)} ${fmt(y0)} ` +
      `A ${ro} ${ro} 0 ${large} 0 ${fmt(x1)} ${fmt(y1)} ` +
      `L ${fmt(x2)} ${fmt(y2)} ` +
      `A ${ri} ${ri} 0 ${large} 1 ${fmt(x3)} ${fmt(y3)} Z`
    );
  }
}

function xMark(canvas: Canvas, angle: number, radius: number, size: number): string {
  const [x, y] = canvas.point(angle, radius);
  const s = size * canvas.scale;
  return (
    `<path class="xmark" d="M ${fmt(x - s)} ${fmt(y - s)} L ${fmt(x + s)} ${fmt(y + s)} ` +
    `M ${fmt(x - s)} ${fmt(y + s)} L ${fmt(x + s)} ${fmt(y - s)}" ` +
    `stroke="#222222" stroke-width="1.4" fill="none"/>`
  );
}

function nodeElement(canvas: Canvas, node: SceneNode): string {
  const [a0, a1] = node.angular_span;
  const [r0, r1] = node.radial_span;
  const classes = ["node"];
  if (node.gray) classes.push("gray");
  if (node.enlarged) classes.push("enlarged");
  return (
    `<path id="node-${sanitize(node.id)}" data-id=${attr(node.id)} ` +
    `data-kind=${attr(node.kind)} data-a0=${attr(String(a0))} data-a1=${attr(String(a1))} ` +
    `data-gray=${attr(String(node.gray))} data-enlarged=${attr(String(node.enlarged))} ` +
    `class="${classes.join(" ")}" d="${canvas.sectorPath(a0, a1, r0, r1)}" ` +
    `fill=${attr(rgb(node.color))} stroke="#333333" stroke-width="${node.enlarged ? "1.2" : "0.6"}">` +
    `<title>${text(node.id)} (${text(node.kind)})</title></path>`
  );
}

function edgeElement(
  canvas: Canvas,
  edge: SceneEdge,
  anchors: Map<string, [number, number]>,
): string | null {
  const src = anchors.get(edge.from);
  const dst = anchors.get(edge.to);
  if (!src || !dst) return null;
  const [x0, y0] = canvas.point(src[0], src[1]);
  const [x1, y1] = canvas.point(dst[0], dst[1]);
  const width = fmt(Math.max(edge.thickness * canvas.scale, 0.5));
  const ident = `${edge.from}->${edge.to}`;
  let d: string;
  if (edge.style === "arc") {
    const [cx, cy] = canvas.point((src[0] + dst[0]) / 2, 0.08);
    d = `M ${fmt(x0)} ${fmt(y0)} Q ${fmt(cx)} ${fmt(cy)} ${fmt(x1)} ${fmt(y1)}`;
  } else {
    d = `M ${fmt(x0)} ${fmt(y0)} L ${fmt(x1)} ${fmt(y1)}`;
  }
  return (
    `<path id="edge-${sanitize(ident)}" data-id=${attr(ident)} ` +
    `data-thickness=${attr(String(edge.thickness))} data-gray=${attr(String(edge.gray))} ` +
    `class="edge${edge.gray ? " gray" : ""}" d="${d}" fill="none" ` +
    `stroke=${attr(rgb(edge.color))} stroke-width="${width}" stroke-linecap="round"/>`
  );
}

function bandElements(
  canvas: Canvas,
  band: Band,
  ownerSpan: [number, number],
  ring: [number, number],
): string[] {
  const [a0, a1] = ownerSpan;
  const [r0, r1] = ring;
  const split = r0 + (r1 - r0) * 0.3;
  const ident = `${band.owner}:${band.layer}`;
  const parts = [`<g id="band-${sanitize(ident)}" data-id=${attr(ident)} class="band">`];
  if (band.region_a.length) {
    const width = (a1 - a0) / band.region_a.length;
    band.region_a.forEach((cell, i) => {
      const ca0 = a0 + i * width;
      parts.push(
        `<path data-id=${attr(cell.id)} data-severity=${attr(String(cell.severity))} ` +
          `class="region-a" d="${canvas.sectorPath(ca0, ca0 + width, r0, split)}" ` +
          `fill=${attr(rgb(cell.color))} stroke="#444444" stroke-width="0.3"/>`,
      );
    });
  }
  let cursor = a0;
  for (const seg of band.region_b) {
    const sweep = (a1 - a0) * seg.fraction;
    if (sweep <= 0) continue;
    parts.push(
      `<path data-label=${attr(seg.label)} data-fraction=${attr(String(seg.fraction))} ` +
        `class="region-b" d="${canvas.sectorPath(cursor, cursor + sweep, split, r1)}" ` +
        `fill=${attr(rgb(seg.color))} stroke="#444444" stroke-width="0.3"/>`,
    );
    if (seg.marked_x) {
      parts.push(xMark(canvas, cursor + sweep / 2, (split + r1) / 2, 0.012));
    }
    cursor += sweep;
  }
  parts.push("</g>");
  return parts;
}

function heatmapElements(grid: HeatMap, name: string, x0: number, y0: number): string[] {
  const parts = [`<g id="heatmap-${sanitize(name)}" class="heatmap">`];
  const step = HEAT_CELL_PX + HEAT_GAP_PX;
  grid.cells.forEach((cell, i) => {
    const x = x0 + (i % grid.columns) * step;
    const y = y0 + Math.floor(i / grid.columns) * step;
    parts.push(
      `<rect data-id=${attr(cell.id)} data-severity=${attr(String(cell.severity))} ` +
        `data-marked=${attr(String(cell.marked_x))} class="heat-cell" ` +
        `x="${fmt(x)}" y="${fmt(y)}" width="${HEAT_CELL_PX}" height="${HEAT_CELL_PX}" ` +
        `fill=${attr(rgb(cell.color))}>` +
        `<title>${text(cell.id)}: ${cell.severity.toFixed(3)}</title></rect>`,
    );
    if (cell.marked_x) {
      parts.push(
        `<path class="xmark" d="M ${fmt(x)} ${fmt(y)} L ${fmt(x + HEAT_CELL_PX)} ${fmt(y + HEAT_CELL_PX)} ` +
          `M ${fmt(x)} ${fmt(y + HEAT_CELL_PX)} L ${fmt(x + HEAT_CELL_PX)} ${fmt(y)}" ` +
          `stroke="#222222" stroke-width="1.2"/>`,
      );
    }
  });
  parts.push("</g>");
  return parts;
}

function heatmapHeight(grid: HeatMap): number {
  const rows = grid.cells.length ? Math.ceil(grid.cells.length / grid.columns) : 0;
  return rows * (HEAT_CELL_PX + HEAT_GAP_PX);
}

/** Deterministic standalone SVG for one validated scene document. */
export function renderScene(scene: SceneDoc, viewport = 900): string {
  const canvas = new Canvas(viewport);
  const anchors = new Map<string, [number, number]>();
  const ownerSpans = new Map<string, [number, number]>();
  for (const node of scene.nodes) {
    anchors.set(node.id, [(node.angular_span[0] + node.angular_span[1]) / 2, node.radial_span[0]]);
    ownerSpans.set(node.id, node.angular_span);
  }

  let hmHeight = 0;
  for (const name of ["employees", "clients"]) {
    const grid = scene.heatmaps[name];
    if (grid) hmHeight = Math.max(hmHeight, heatmapHeight(grid));
  }
  const totalHeight = viewport + (hmHeight ? 40 + hmHeight : 0);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${viewport} ${fmt(totalHeight)}" ` +
      `width="${viewport}" height="${fmt(totalHeight)}">`,
  );
  parts.push(`<rect class="backdrop" width="${viewport}" height="${fmt(totalHeight)}" fill="#FAFAFA"/>`);
  parts.push(
    `<g class="frame" data-mode=${attr(scene.mode)} data-focus=${attr(scene.focus ?? "")}>` +
      `<circle cx="${fmt(canvas.cx)}" cy="${fmt(canvas.cy)}" r="${fmt(canvas.scale * 0.99)}" ` +
      `fill="none" stroke="#DDDDDD"/></g>`,
  );

  parts.push('<g class="edges">');
  for (const edge of scene.edges) {
    const el = edgeElement(canvas, edge, anchors);
    if (el) parts.push(el);
  }
  parts.push("</g>");

  parts.push('<g class="nodes">');
  for (const node of scene.nodes) {
    parts.push(nodeElement(canvas, node));
  }
  parts.push("</g>");

  parts.push('<g class="bands">');
  for (const band of scene.bands) {
    const span = ownerSpans.get(band.owner);
    const ring = scene.arcs.rings[band.layer];
    if (span && ring) parts.push(...bandElements(canvas, band, span, ring));
  }
  parts.push("</g>");

  if (hmHeight) {
    const hmY = viewport + 20;
    const emp = scene.heatmaps["employees"];
    const cli = scene.heatmaps["clients"];
    if (emp) parts.push(...heatmapElements(emp, "employees", 20, hmY));
    if (cli) parts.push(...heatmapElements(cli, "clients", viewport / 2 + 20, hmY));
  }

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
