/** Play-session state holder: key state, lockstep, scores, view mode.
 *
 * Single-threaded by design: network replies and key events all mutate one
 * PlaySession, and at most one request is outstanding at any time. Control
 * messages (hello/configure/reset/bye) queue behind the in-flight request;
 * step requests are never queued, they wait for the next ready tick.
 *
 * The session never computes rewards or physics: every number it exposes is
 * a server value passed through unchanged.
 */

import { Envelope, PROTOCOL_VERSION } from "./protocol.js";

export type Action = readonly [number, number];
export type ViewMode = "first-person" | "top-down";

const MOVEMENT_KEYS = ["w", "a", "s", "d"] as const;

/** W/S drive m, D/A drive r; opposing or absent keys cancel to 0. */
export function keyToAction(pressed: ReadonlySet<string>): Action {
  const w = pressed.has("w");
  const s = pressed.has("s");
  const d = pressed.has("d");
  const a = pressed.has("a");
  const m = w === s ? 0 : w ? 1 : 2;
  const r = d === a ? 0 : d ? 1 : 2;
  return [m, r];
}

export interface BundleInfo {
  cause: string | null;
  step: number;
  lights_on: boolean;
}

export interface SummaryBody {
  name: string;
  kind: string;
  x: number;
  y: number;
  z: number;
  yaw: number;
  sx: number;
  sy: number;
  sz: number;
  color: [number, number, number];
  transparent: boolean;
}

export interface WorldSummary {
  arena_size: number;
  bodies: SummaryBody[];
  agent: { x: number; y: number; z: number; yaw: number };
}

export interface Bundle {
  arena: number;
  step: number;
  shape: [number, number, number];
  pixels: Uint8Array;
  velocity: [number, number, number];
  reward: number;
  score: number;
  done: boolean;
  info: BundleInfo;
  summary?: WorldSummary;
}

export interface EpisodeEnd {
  scores: Record<string, number>;
  causes: Record<string, string>;
}

export class PlaySession {
  view: ViewMode = "first-person";
  currentScore = 0;
  previousScore = 0;
  readonly keys = new Set<string>();
  greeted = false;
  configured = false;
  sessionId: string | null = null;
  episodeEnd: EpisodeEnd | null = null;
  lastError: { code: string; message: string } | null = null;
  stepsSent = 0;

  private readonly bundles = new Map<number, Bundle>();
  private tapped = new Set<string>();
  private inFlight = false;
  private readonly pending: Envelope[] = [];

  constructor(private readonly send: (message: Envelope) => void) {}

  /** Bundle of the lowest-numbered arena: the one both views draw. */
  get latest(): Bundle | null {
    if (this.bundles.size === 0) return null;
    const lowest = Math.min(...this.bundles.keys());
    return this.bundles.get(lowest) ?? null;
  }

  get lightsOn(): boolean {
    return this.latest?.info.lights_on ?? true;
  }

  /** True once every arena of the current episode reports done. */
  get done(): boolean {
    if (this.bundles.size === 0) return false;
    for (const bundle of this.bundles.values()) {
      if (!bundle.done) return false;
    }
    return true;
  }

  get outstanding(): boolean {
    return this.inFlight;
  }

  private liveArenas(): number[] {
    const live: number[] = [];
    for (const [arena, bundle] of this.bundles) {
      if (!bundle.done) live.push(arena);
    }
    return live.sort((p, q) => p - q);
  }

  /** Queue-or-send keeping exactly one request outstanding. */
  private request(message: Envelope): void {
    if (this.inFlight) {
      this.pending.push(message);
      return;
    }
    this.inFlight = true;
    this.send(message);
  }

  private replyLanded(): void {
    this.inFlight = false;
    const next = this.pending.shift();
    if (next !== undefined) {
      this.inFlight = true;
      this.send(next);
    }
  }

  hello(resolution: number, seed?: number): void {
    const message: Envelope = {
      type: "hello",
      protocol: PROTOCOL_VERSION,
      resolution,
      play: true,
    };
    if (seed !== undefined) message.seed = seed;
    this.request(message);
  }

  configure(document: string): void {
    this.request({ type: "configure", config: document });
  }

  reset(seed?: number): void {
    const message: Envelope = { type: "reset" };
    if (seed !== undefined) message.seed = seed;
    this.request(message);
  }

  bye(): void {
    this.request({ type: "bye" });
  }

  /** Movement keys latch into key state; C and R act immediately. */
  keyDown(key: string): "view" | "reset" | null {
    const k = key.toLowerCase();
    if ((MOVEMENT_KEYS as readonly string[]).includes(k)) {
      this.keys.add(k);
      this.tapped.add(k);
      return null;
    }
    if (k === "c") {
      this.view = this.view === "first-person" ? "top-down" : "first-person";
      return "view";
    }
    if (k === "r") {
      this.previousScore = this.currentScore;
      this.episodeEnd = null;
      this.reset();
      return "reset";
    }
    return null;
  }

  keyUp(key: string): void {
    this.keys.delete(key.toLowerCase());
  }

  /** One animation frame: held (or tapped) keys auto-repeat a step while the
   * session is lockstep-ready. Returns true when a step was sent. */
  tick(): boolean {
    if (!this.greeted || !this.configured || this.inFlight) return false;
    if (this.pending.length > 0) return false;
    const live = this.liveArenas();
    if (live.length === 0) return false;
    const pressed = new Set([...this.keys, ...this.tapped]);
    this.tapped.clear();
    if (!MOVEMENT_KEYS.some((k) => pressed.has(k))) return false;
    const [m, r] = keyToAction(pressed);
    const actions: Record<string, [number, number]> = {};
    for (const arena of live) actions[String(arena)] = [m, r];
    this.request({ type: "step", actions });
    this.stepsSent += 1;
    return true;
  }

  /** Route one decoded server frame. episode-end is the only unsolicited
   * frame: it must not release the lockstep slot. */
  handleMessage(message: Envelope): void {
    switch (message.type) {
      case "hello": {
        this.greeted = message.ack === true;
        this.sessionId = typeof message.session === "string" ? message.session : null;
        this.replyLanded();
        break;
      }
      case "configure": {
        if (message.ok === true) {
          this.configured = true;
          this.bundles.clear();
          this.episodeEnd = null;
          this.lastError = null;
        }
        this.replyLanded();
        break;
      }
      case "observation": {
        const bundles = message.arenas as Bundle[];
        for (const bundle of bundles) this.bundles.set(bundle.arena, bundle);
        const shown = this.latest;
        if (shown !== null) this.currentScore = shown.score;
        this.replyLanded();
        break;
      }
      case "episode-end": {
        this.episodeEnd = {
          scores: message.scores as Record<string, number>,
          causes: message.causes as Record<string, string>,
        };
        break;
      }
      case "error": {
        this.lastError = {
          code: String(message.code),
          message: String(message.message ?? ""),
        };
        this.replyLanded();
        break;
      }
      case "bye": {
        this.replyLanded();
        break;
      }
      default:
        break;
    }
  }
}
