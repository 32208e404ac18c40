/** Pure projection helpers for the two views and the HUD.
 *
 * Nothing here computes physics or rewards: the first-person view converts
 * the server's pixel buffer to RGBA unchanged (a lights-out frame therefore
 * renders black), and the top-down view lays out the server's world summary
 * as 2D footprints.
 *
 * Top-down screen convention: world x runs right, world z runs UP the
 * screen (canvas y = arena_size - z). A body with yaw g (degrees) is drawn
 * in local coordinates rotated clockwise by g, which under the z-flip
 * reproduces the world mapping local x -> (cos g, -sin g), local z ->
 * (sin g, cos g). The agent marker's tip points along local +z, so its
 * heading on screen equals the server yaw exactly.
 */

import { Bundle, PlaySession, WorldSummary } from "./session.js";

export interface Frame {
  data: Uint8ClampedArray<ArrayBuffer>; // RGBA, row 0 at the top
  width: number;
  height: number;
}

/** Server RGB frame to opaque RGBA, byte-for-byte otherwise. */
export function firstPersonImage(
  pixels: Uint8Array,
  shape: readonly [number, number, number],
): Frame {
  const [height, width, channels] = shape;
  if (channels !== 3 || pixels.length !== height * width * 3) {
    throw new Error(`pixel buffer ${pixels.length} does not match shape ${shape}`);
  }
  const data = new Uint8ClampedArray(height * width * 4);
  for (let i = 0, o = 0; i < pixels.length; i += 3, o += 4) {
    data[o] = pixels[i]!;
    data[o + 1] = pixels[i + 1]!;
    data[o + 2] = pixels[i + 2]!;
    data[o + 3] = 255;
  }
  return { data, width, height };
}

export interface FootprintShape {
  form: "rect" | "circle";
  name: string;
  cx: number; // arena units
  cz: number;
  hw: number; // rect half extents along local x / z
  hh: number;
  r: number; // circle radius
  yawDeg: number;
  color: string;
  alpha: number;
  outline: boolean;
}

export interface AgentMarker {
  x: number;
  z: number;
  r: number;
  headingDeg: number;
}

export interface TopDownScene {
  arenaSize: number;
  shapes: FootprintShape[];
  agent: AgentMarker;
}

const ZONE_ALPHA = 0.3;
const TRANSPARENT_ALPHA = 0.35;

/** World summary to drawable footprints; spheres are circles, everything
 * else draws its bounding footprint. */
export function topDownScene(summary: WorldSummary): TopDownScene {
  const shapes: FootprintShape[] = [];
  for (const body of summary.bodies) {
    const [red, green, blue] = body.color;
    const base = {
      name: body.name,
      cx: body.x,
      cz: body.z,
      yawDeg: body.yaw,
      color: `rgb(${red}, ${green}, ${blue})`,
      outline: body.transparent,
    };
    if (body.kind === "sphere") {
      shapes.push({
        ...base,
        form: "circle",
        hw: 0,
        hh: 0,
        r: body.sx / 2,
        alpha: 1,
      });
    } else {
      const alpha =
        body.kind === "ground-quad" ? ZONE_ALPHA
        : body.transparent ? TRANSPARENT_ALPHA
        : 1;
      shapes.push({
        ...base,
        form: "rect",
        hw: body.sx / 2,
        hh: body.sz / 2,
        r: 0,
        alpha,
      });
    }
  }
  return {
    arenaSize: summary.arena_size,
    shapes,
    agent: {
      x: summary.agent.x,
      z: summary.agent.z,
      r: 0.5,
      headingDeg: summary.agent.yaw,
    },
  };
}

/** Score overlay text: every number is a server value, rounded for display
 * only. Stays visible in every state, lights-out frames included. */
export function hudLines(session: PlaySession): string[] {
  const lines = [
    `score ${session.currentScore.toFixed(2)}`,
    `previous ${session.previousScore.toFixed(2)}`,
  ];
  const bundle: Bundle | null = session.latest;
  if (bundle !== null) {
    lines.push(`step ${bundle.step}`);
    if (!bundle.info.lights_on) lines.push("lights out");
    if (bundle.done) lines.push(`episode over: ${bundle.info.cause ?? "?"}`);
  }
  return lines;
}
