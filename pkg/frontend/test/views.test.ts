import { describe, expect, test } from "vitest";

import { Envelope } from "../src/protocol.js";
import { Bundle, PlaySession, WorldSummary } from "../src/session.js";
import { firstPersonImage, hudLines, topDownScene } from "../src/views.js";

describe("first-person frame", () => {
  test("RGB copies through to opaque RGBA", () => {
    const pixels = new Uint8Array([10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120]);
    const frame = firstPersonImage(pixels, [2, 2, 3]);
    expect(frame.width).toBe(2);
    expect(frame.height).toBe(2);
    expect(Array.from(frame.data)).toEqual([
      10, 20, 30, 255, 40, 50, 60, 255,
      70, 80, 90, 255, 100, 110, 120, 255,
    ]);
  });

  test("a lights-out frame renders pure black", () => {
    const k = 8;
    const frame = firstPersonImage(new Uint8Array(k * k * 3), [k, k, 3]);
    for (let i = 0; i < frame.data.length; i += 4) {
      expect(frame.data[i]).toBe(0);
      expect(frame.data[i + 1]).toBe(0);
      expect(frame.data[i + 2]).toBe(0);
      expect(frame.data[i + 3]).toBe(255);
    }
  });

  test("mismatched buffer and shape is an error", () => {
    expect(() => firstPersonImage(new Uint8Array(10), [2, 2, 3])).toThrow();
  });
});

function summary(): WorldSummary {
  return {
    arena_size: 40,
    bodies: [
      {
        name: "Wall", kind: "box", x: 10, y: 1.5, z: 20, yaw: 90,
        sx: 4, sy: 3, sz: 1, color: [153, 153, 153], transparent: false,
      },
      {
        name: "GoodGoal", kind: "sphere", x: 30, y: 1, z: 5, yaw: 0,
        sx: 2, sy: 2, sz: 2, color: [0, 255, 0], transparent: false,
      },
      {
        name: "DeathZone", kind: "ground-quad", x: 20, y: 0, z: 30, yaw: 0,
        sx: 6, sy: 0, sz: 4, color: [255, 0, 0], transparent: false,
      },
      {
        name: "WallTransparent", kind: "box", x: 5, y: 1, z: 5, yaw: 0,
        sx: 2, sy: 2, sz: 2, color: [255, 255, 255], transparent: true,
      },
    ],
    agent: { x: 20, y: 0.5, z: 10, yaw: 45 },
  };
}

describe("top-down scene", () => {
  test("footprints keep server positions, sizes, and yaw", () => {
    const scene = topDownScene(summary());
    expect(scene.arenaSize).toBe(40);

    const wall = scene.shapes.find((s) => s.name === "Wall")!;
    expect(wall.form).toBe("rect");
    expect([wall.cx, wall.cz]).toEqual([10, 20]);
    expect([wall.hw, wall.hh]).toEqual([2, 0.5]);
    expect(wall.yawDeg).toBe(90);
    expect(wall.color).toBe("rgb(153, 153, 153)");
    expect(wall.alpha).toBe(1);

    const goal = scene.shapes.find((s) => s.name === "GoodGoal")!;
    expect(goal.form).toBe("circle");
    expect(goal.r).toBe(1);
    expect(goal.color).toBe("rgb(0, 255, 0)");
  });

  test("zones draw translucent, transparent walls outlined", () => {
    const scene = topDownScene(summary());
    const zone = scene.shapes.find((s) => s.name === "DeathZone")!;
    expect(zone.alpha).toBeLessThan(1);
    expect(zone.form).toBe("rect");

    const glass = scene.shapes.find((s) => s.name === "WallTransparent")!;
    expect(glass.outline).toBe(true);
    expect(glass.alpha).toBeLessThan(1);
  });

  test("agent marker carries pose through; heading within 6 degrees", () => {
    for (const yaw of [0, 45, 90, 133.7, 270, 359]) {
      const data = summary();
      data.agent.yaw = yaw;
      const scene = topDownScene(data);
      expect(scene.agent.x).toBe(20);
      expect(scene.agent.z).toBe(10);
      expect(Math.abs(scene.agent.headingDeg - yaw)).toBeLessThanOrEqual(6);
    }
  });

  test("all footprints stay inside arena bounds", () => {
    const scene = topDownScene(summary());
    for (const shape of scene.shapes) {
      expect(shape.cx).toBeGreaterThanOrEqual(0);
      expect(shape.cx).toBeLessThanOrEqual(scene.arenaSize);
      expect(shape.cz).toBeGreaterThanOrEqual(0);
      expect(shape.cz).toBeLessThanOrEqual(scene.arenaSize);
    }
  });
});

function sessionShowing(bundle: Bundle): PlaySession {
  const session = new PlaySession((_: Envelope) => {});
  session.handleMessage({ type: "hello", ack: true, session: "s" });
  session.handleMessage({ type: "observation", arenas: [bundle] });
  return session;
}

describe("HUD overlay", () => {
  function darkBundle(): Bundle {
    return {
      arena: 0,
      step: 6,
      shape: [4, 4, 3],
      pixels: new Uint8Array(48),
      velocity: [0, 0, 0],
      reward: -0.002,
      score: -0.012,
      done: false,
      info: { cause: null, step: 6, lights_on: false },
    };
  }

  test("scores show at display precision from server values", () => {
    const session = sessionShowing({ ...darkBundle(), score: 1.9199999999999999 });
    session.previousScore = -0.5;
    const lines = hudLines(session);
    expect(lines[0]).toBe("score 1.92");
    expect(lines[1]).toBe("previous -0.50");
  });

  test("overlay stays populated during a blackout", () => {
    const session = sessionShowing(darkBundle());
    const lines = hudLines(session);
    expect(lines.length).toBeGreaterThan(0);
    expect(lines).toContain("lights out");
    expect(lines[0]).toBe("score -0.01");
  });

  test("episode end surfaces the cause", () => {
    const done = darkBundle();
    done.done = true;
    done.info = { cause: "good-goal", step: 6, lights_on: true };
    const lines = hudLines(sessionShowing(done));
    expect(lines).toContain("episode over: good-goal");
  });
});
