/**
 * Frame scene document contract.
 *
 * The engine precomputes all geometry (unit-circle angles and radii, colors,
 * segment fractions); the client parses and draws, nothing more. A document
 * that fails this schema must never partially render.
 */

import { z } from "zod";

const rgbSchema = z.tuple([z.number(), z.number(), z.number()]);
const spanSchema = z.tuple([z.number(), z.number()]);

export const heatCellSchema = z.object({
  id: z.string(),
  severity: z.number(),
  color: rgbSchema,
  marked_x: z.boolean(),
});

export const heatMapSchema = z.object({
  columns: z.number().int().positive(),
  cells: z.array(heatCellSchema),
});

export const segmentSchema = z.object({
  label: z.string(),
  color: rgbSchema,
  fraction: z.number(),
  marked_x: z.boolean(),
});

export const bandSchema = z.object({
  owner: z.string(),
  layer: z.string(),
  region_a: z.array(heatCellSchema),
  region_b: z.array(segmentSchema),
});

export const nodeSchema = z.object({
  id: z.string(),
  kind: z.string(),
  angular_span: spanSchema,
  radial_span: spanSchema,
  color: rgbSchema,
  gray: z.boolean(),
  enlarged: z.boolean(),
  members: z.array(z.string()).optional(),
});

export const edgeSchema = z.object({
  from: z.string(),
  to: z.string(),
  thickness: z.number().positive(),
  color: rgbSchema,
  gray: z.boolean(),
  style: z.enum(["arc", "straight"]),
});

export const sceneSchema = z.object({
  mode: z.enum(["detail", "overview"]),
  focus: z.string().nullable(),
  nodes: z.array(nodeSchema),
  edges: z.array(edgeSchema),
  bands: z.array(bandSchema),
  heatmaps: z.record(heatMapSchema),
  arcs: z
    .object({ rings: z.record(spanSchema) })
    .catchall(z.unknown()),
});

export type Rgb = z.infer<typeof rgbSchema>;
export type HeatCell = z.infer<typeof heatCellSchema>;
export type HeatMap = z.infer<typeof heatMapSchema>;
export type Segment = z.infer<typeof segmentSchema>;
export type Band = z.infer<typeof bandSchema>;
export type SceneNode = z.infer<typeof nodeSchema>;
export type SceneEdge = z.infer<typeof edgeSchema>;
export type SceneDoc = z.infer<typeof sceneSchema>;

export class SceneParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SceneParseError";
  }
}

/** Validate a raw document; throws SceneParseError on any contract breach. */
export function parseScene(doc: unknown): SceneDoc {
  const result = sceneSchema.safeParse(doc);
  if (!result.success) {
    const issue = result.error.issues[0];
    const where = issue && issue.path.length ? issue.path.join(".") : "document";
    throw new SceneParseError(`${where}: ${issue ? issue.message : "invalid scene"}`);
  }
  const scene = result.data;
  for (const band of scene.bands) {
    if (!(band.layer in scene.arcs.rings)) {
      throw new SceneParseError(`band layer ${band.layer} has no ring geometry`);
    }
  }
  return scene;
}
