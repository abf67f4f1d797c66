// Sagittal stick-figure geometry computed from a state message, using the
// same kinematic conventions as the engine: x forward, z up; hip flexion
// positive forward; knee flexion positive (0 = straight); ankle
// dorsiflexion positive. All outputs are in world meters; rendering maps
// them to the canvas separately.

import { Geometry, StateMessage } from "./protocol.js";

export interface Point {
  x: number;
  z: number;
}

export interface LegFigure {
  hip: Point;
  knee: Point;
  ankle: Point;
  heel: Point;
  toe: Point;
}

export interface Figure {
  hip: Point;
  left: LegFigure;
  right: LegFigure;
}

export interface TerrainOverlay {
  // Polylines in world coordinates (tread edges, ramp surface, pads).
  lines: Point[][];
  // Sole levels actually underfoot, useful for assertions and grid lines.
  treadLevels: number[];
}

const HEEL_BACK_FRACTION = 0.35; // drawing-only heel extent vs forefoot
export const STONE_PAD_WIDTH = 0.15;

function legFromAngles(
  geom: Geometry,
  hip: Point,
  hipAngle: number,
  kneeAngle: number,
  ankleAngle: number,
): LegFigure {
  const knee: Point = {
    x: hip.x + geom.thigh_length * Math.sin(hipAngle),
    z: hip.z - geom.thigh_length * Math.cos(hipAngle),
  };
  const shankAngle = hipAngle - kneeAngle;
  const ankle: Point = {
    x: knee.x + geom.shank_length * Math.sin(shankAngle),
    z: knee.z - geom.shank_length * Math.cos(shankAngle),
  };
  const pitch = ankleAngle + shankAngle;
  const cos = Math.cos(pitch);
  const sin = Math.sin(pitch);
  const f = geom.foot_forward_length;
  const ah = geom.ankle_height;
  const toe: Point = {
    x: ankle.x + f * cos + ah * sin,
    z: ankle.z + f * sin - ah * cos,
  };
  const b = HEEL_BACK_FRACTION * f;
  const heel: Point = {
    x: ankle.x - b * cos + ah * sin,
    z: ankle.z - b * sin - ah * cos,
  };
  return { hip, knee, ankle, heel, toe };
}

/** Both legs' joint points from one state snapshot. */
export function computeFigure(state: StateMessage, geom: Geometry): Figure {
  const hip: Point = { x: state.hip_x, z: state.hip_z };
  return {
    hip,
    left: legFromAngles(geom, hip, state.left_hip, state.left_knee, state.left_ankle),
    right: legFromAngles(geom, hip, state.right_hip, state.right_knee, state.right_ankle),
  };
}

/** Terrain overlay per behavior, derived from the feet the server reports. */
export function computeTerrain(state: StateMessage, geom: Geometry): TerrainOverlay {
  const ah = geom.ankle_height;
  const feet = [
    { x: state.left_foot_x, sole: state.left_foot_z - ah },
    { x: state.right_foot_x, sole: state.right_foot_z - ah },
  ].sort((a, b) => a.x - b.x);
  const levels = [...new Set(feet.map((f) => round6(f.sole)))];
  const behavior = state.behavior;
  const lines: Point[][] = [];

  if (behavior === "stairs_up" || behavior === "stairs_down") {
    // One tread per footfall; risers midway between the feet. Extend one
    // tread beyond each side so the next footfall has somewhere to land.
    const run = Math.max(Math.abs(feet[1].x - feet[0].x), 0.29);
    const rise = 0.18;
    const [lo, hi] = feet;
    const ascendsRight = hi.sole >= lo.sole;
    const stairLine: Point[] = [];
    for (let i = -1; i <= 2; i++) {
      const x0 = lo.x + (i - 0.5) * run;
      const x1 = lo.x + (i + 0.5) * run;
      const z = lo.sole + (ascendsRight ? i : -i) * rise;
      stairLine.push({ x: x0, z }, { x: x1, z });
    }
    lines.push(stairLine);
  } else if (behavior === "ramp_up" || behavior === "ramp_down") {
    const [lo, hi] = feet;
    const dx = hi.x - lo.x;
    const slope = dx > 1e-9 ? (hi.sole - lo.sole) / dx : 0;
    const x0 = lo.x - 1.0;
    const x1 = hi.x + 1.0;
    lines.push([
      { x: x0, z: lo.sole + slope * (x0 - lo.x) },
      { x: x1, z: lo.sole + slope * (x1 - lo.x) },
    ]);
  } else if (behavior === "stepping_stones") {
    for (const f of feet) {
      lines.push([
        { x: f.x - STONE_PAD_WIDTH / 2, z: f.sole },
        { x: f.x + STONE_PAD_WIDTH / 2, z: f.sole },
      ]);
    }
  } else {
    const level = Math.min(...feet.map((f) => f.sole));
    lines.push([
      { x: feet[0].x - 1.0, z: level },
      { x: feet[1].x + 1.5, z: level },
    ]);
  }
  return { lines, treadLevels: levels };
}

function round6(v: number): number {
  return Math.round(v * 1e6) / 1e6;
}

// ----------------------------------------------------------------- canvas

/** The 2D-context subset the renderer needs (stubbed in tests). */
export interface DrawContext {
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface Camera {
  width: number;
  height: number;
  metersToPixels: number;
  centerX: number; // world x mapped to the canvas center
  groundY: number; // canvas y of world z = 0
}

export function worldToCanvas(p: Point, cam: Camera): { x: number; y: number } {
  return {
    x: cam.width / 2 + (p.x - cam.centerX) * cam.metersToPixels,
    y: cam.groundY - p.z * cam.metersToPixels,
  };
}

function drawPolyline(ctx: DrawContext, points: Point[], cam: Camera): void {
  if (points.length < 2) return;
  ctx.beginPath();
  const first = worldToCanvas(points[0], cam);
  ctx.moveTo(first.x, first.y);
  for (const p of points.slice(1)) {
    const c = worldToCanvas(p, cam);
    ctx.lineTo(c.x, c.y);
  }
  ctx.stroke();
}

export function drawScene(
  ctx: DrawContext,
  figure: Figure,
  terrain: TerrainOverlay,
  cam: Camera,
  options: { swingSide: "left" | "right" | null } = { swingSide: null },
): void {
  ctx.lineWidth = 2;
  ctx.strokeStyle = "#7a7a7a";
  for (const line of terrain.lines) drawPolyline(ctx, line, cam);

  for (const side of ["left", "right"] as const) {
    const leg = figure[side];
    ctx.strokeStyle = side === options.swingSide ? "#d9480f" : "#1c3d6e";
    ctx.lineWidth = side === options.swingSide ? 3 : 2;
    drawPolyline(ctx, [leg.hip, leg.knee, leg.ankle], cam);
    drawPolyline(ctx, [leg.heel, leg.toe], cam);
  }

  // Pelvis marker.
  const hip = worldToCanvas(figure.hip, cam);
  ctx.beginPath();
  ctx.fillStyle = "#1c3d6e";
  ctx.arc(hip.x, hip.y, 5, 0, 2 * Math.PI);
  ctx.fill();
}
