/** Browser entry point: wires the WebSocket, keyboard, and canvas together.
 *
 * All state lives in one PlaySession; network and key events serialize
 * through it on the main thread, and one requestAnimationFrame loop ticks
 * the lockstep and repaints.
 */

import { DEFAULT_CONFIG } from "./defaultConfig.js";
import { CodecError, decodeFrame, encodeFrame, Envelope } from "./protocol.js";
import { PlaySession } from "./session.js";
import { firstPersonImage, hudLines, topDownScene } from "./views.js";

const RESOLUTION = 84;

function element<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = element<HTMLCanvasElement>("view");
const hud = element<HTMLDivElement>("hud");
const banner = element<HTMLDivElement>("banner");
const bannerText = element<HTMLSpanElement>("banner-text");
const reconnectButton = element<HTMLButtonElement>("reconnect");
const statusLine = element<HTMLDivElement>("status");
const urlInput = element<HTMLInputElement>("url");
const connectButton = element<HTMLButtonElement>("connect");
const configBox = element<HTMLTextAreaElement>("config");
const applyButton = element<HTMLButtonElement>("apply");

configBox.value = DEFAULT_CONFIG;
urlInput.value = `ws://${window.location.hostname || "localhost"}:7171`;

const ctx = canvas.getContext("2d")!;
ctx.imageSmoothingEnabled = false;

let session: PlaySession | null = null;
let socket: WebSocket | null = null;
// scratch canvas holding the raw server frame before scaling up
const frameCanvas = document.createElement("canvas");
const frameCtx = frameCanvas.getContext("2d")!;

function connect(): void {
  socket?.close();
  banner.hidden = true;
  const ws = new WebSocket(urlInput.value);
  ws.binaryType = "arraybuffer";
  socket = ws;
  const active = new PlaySession((message: Envelope) => {
    ws.send(encodeFrame(message));
  });
  session = active;

  ws.onopen = () => {
    active.hello(RESOLUTION);
    active.configure(configBox.value);
    active.reset();
  };
  ws.onmessage = (event: MessageEvent) => {
    try {
      const raw =
        typeof event.data === "string"
          ? new TextEncoder().encode(event.data)
          : new Uint8Array(event.data as ArrayBuffer);
      active.handleMessage(decodeFrame(raw));
    } catch (exc) {
      if (exc instanceof CodecError) {
        active.lastError = { code: exc.code, message: exc.message };
      } else {
        throw exc;
      }
    }
  };
  ws.onclose = () => {
    if (socket === ws) showBanner("connection lost");
  };
  ws.onerror = () => {
    if (socket === ws) showBanner("connection failed");
  };
}

function showBanner(text: string): void {
  bannerText.textContent = text;
  banner.hidden = false;
}

connectButton.addEventListener("click", connect);
reconnectButton.addEventListener("click", connect);
applyButton.addEventListener("click", () => {
  session?.configure(configBox.value);
  session?.reset();
});

function isTyping(event: KeyboardEvent): boolean {
  const target = event.target as HTMLElement | null;
  return target !== null && (target.tagName === "TEXTAREA" || target.tagName === "INPUT");
}

window.addEventListener("keydown", (event) => {
  if (session === null || isTyping(event) || event.repeat) return;
  if (session.keyDown(event.key) !== null || "wasd".includes(event.key.toLowerCase())) {
    event.preventDefault();
  }
});
window.addEventListener("keyup", (event) => {
  if (session === null || isTyping(event)) return;
  session.keyUp(event.key);
});

function drawFirstPerson(active: PlaySession): void {
  const bundle = active.latest;
  ctx.fillStyle = "#000";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  if (bundle === null) return;
  const frame = firstPersonImage(bundle.pixels, bundle.shape);
  if (frameCanvas.width !== frame.width || frameCanvas.height !== frame.height) {
    frameCanvas.width = frame.width;
    frameCanvas.height = frame.height;
  }
  frameCtx.putImageData(new ImageData(frame.data, frame.width, frame.height), 0, 0);
  ctx.drawImage(frameCanvas, 0, 0, canvas.width, canvas.height);
}

function drawTopDown(active: PlaySession): void {
  ctx.fillStyle = "#1c1c1f";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const summary = active.latest?.summary;
  if (summary === undefined) return;
  const scene = topDownScene(summary);
  const k = canvas.width / scene.arenaSize;
  ctx.fillStyle = "#2e2e33";
  ctx.fillRect(0, 0, scene.arenaSize * k, scene.arenaSize * k);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 2;
  ctx.strokeRect(1, 1, scene.arenaSize * k - 2, scene.arenaSize * k - 2);

  for (const shape of scene.shapes) {
    ctx.save();
    ctx.translate(shape.cx * k, (scene.arenaSize - shape.cz) * k);
    ctx.rotate((shape.yawDeg * Math.PI) / 180);
    ctx.globalAlpha = shape.alpha;
    ctx.fillStyle = shape.color;
    if (shape.form === "circle") {
      ctx.beginPath();
      ctx.arc(0, 0, shape.r * k, 0, Math.PI * 2);
      ctx.fill();
    } else {
      ctx.fillRect(-shape.hw * k, -shape.hh * k, shape.hw * 2 * k, shape.hh * 2 * k);
      if (shape.outline) {
        ctx.globalAlpha = 1;
        ctx.strokeStyle = shape.color;
        ctx.lineWidth = 1.5;
        ctx.strokeRect(-shape.hw * k, -shape.hh * k, shape.hw * 2 * k, shape.hh * 2 * k);
      }
    }
    ctx.restore();
  }

  const agent = scene.agent;
  ctx.save();
  ctx.translate(agent.x * k, (scene.arenaSize - agent.z) * k);
  ctx.rotate((agent.headingDeg * Math.PI) / 180);
  ctx.fillStyle = "#4a90d9";
  ctx.beginPath();
  ctx.arc(0, 0, agent.r * k, 0, Math.PI * 2);
  ctx.fill();
  ctx.fillStyle = "#fff";
  ctx.beginPath();
  ctx.moveTo(0, -agent.r * k * 1.8); // tip = local +z = heading
  ctx.lineTo(-agent.r * k * 0.7, agent.r * k * 0.6);
  ctx.lineTo(agent.r * k * 0.7, agent.r * k * 0.6);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

function paint(): void {
  const active = session;
  if (active === null) {
    ctx.fillStyle = "#000";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    return;
  }
  if (active.view === "first-person") drawFirstPerson(active);
  else drawTopDown(active);
  hud.textContent = hudLines(active).join("\n");
  const parts = [
    active.greeted ? "connected" : "connecting",
    active.view,
    active.lastError !== null ? `error ${active.lastError.code}: ${active.lastError.message}` : "",
    active.done ? "press R for a new episode" : "",
  ];
  statusLine.textContent = parts.filter((p) => p !== "").join(" | ");
}

function loop(): void {
  session?.tick();
  paint();
  requestAnimationFrame(loop);
}

connect();
requestAnimationFrame(loop);
