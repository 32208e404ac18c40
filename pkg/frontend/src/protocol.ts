/** AAIP/1 text-transport codec: length-prefixed JSON with base64 byte markers.
 *
 * Every frame is a 4-byte big-endian length followed by that many bytes of
 * UTF-8 JSON. Raw byte values travel as {"__b64__": "<base64>"} markers and
 * come back as Uint8Array. One complete frame per WebSocket message.
 */

export const PROTOCOL_VERSION = "AAIP/1";
export const MAX_FRAME = 64 * 1024 * 1024;

/** One message: reserved keys type/session plus flattened data fields. */
export interface Envelope {
  type: string;
  session?: string;
  [key: string]: unknown;
}

export type CodecErrorCode =
  | "oversize"
  | "truncated"
  | "bad-json"
  | "bad-frame";

export class CodecError extends Error {
  constructor(readonly code: CodecErrorCode, message: string) {
    super(message);
    this.name = "CodecError";
  }
}

function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000; // String.fromCharCode argument limit
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

function base64ToBytes(text: string): Uint8Array {
  const binary = atob(text);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}

function packValue(value: unknown): unknown {
  if (value instanceof Uint8Array) return { __b64__: bytesToBase64(value) };
  if (Array.isArray(value)) return value.map(packValue);
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const [k, v] of Object.entries(value)) out[k] = packValue(v);
    return out;
  }
  return value;
}

function unpackValue(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(unpackValue);
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value);
    if (entries.length === 1 && entries[0]![0] === "__b64__") {
      const encoded = entries[0]![1];
      if (typeof encoded !== "string") {
        throw new CodecError("bad-frame", "__b64__ marker must hold a string");
      }
      return base64ToBytes(encoded);
    }
    const out: Record<string, unknown> = {};
    for (const [k, v] of entries) out[k] = unpackValue(v);
    return out;
  }
  return value;
}

/** Encode one message as a complete frame (prefix included). */
export function encodeFrame(message: Envelope): ArrayBuffer {
  if (typeof message.type !== "string" || message.type === "") {
    throw new CodecError("bad-frame", "message needs a non-empty type");
  }
  const body = new TextEncoder().encode(JSON.stringify(packValue(message)));
  if (body.length > MAX_FRAME) {
    throw new CodecError("oversize", `frame of ${body.length} bytes exceeds cap`);
  }
  const frame = new ArrayBuffer(4 + body.length);
  new DataView(frame).setUint32(0, body.length, false);
  new Uint8Array(frame, 4).set(body);
  return frame;
}

/** Decode one complete frame. The buffer must hold exactly one frame. */
export function decodeFrame(frame: ArrayBuffer | Uint8Array): Envelope {
  const bytes = frame instanceof Uint8Array ? frame : new Uint8Array(frame);
  if (bytes.length < 4) {
    throw new CodecError("truncated", "frame shorter than its length prefix");
  }
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const announced = view.getUint32(0, false);
  if (announced > MAX_FRAME) {
    throw new CodecError("oversize", `announced ${announced} bytes exceeds cap`);
  }
  if (bytes.length - 4 < announced) {
    throw new CodecError(
      "truncated",
      `frame ends inside message JSON (${bytes.length - 4}/${announced})`,
    );
  }
  if (bytes.length - 4 > announced) {
    throw new CodecError("bad-frame", "trailing bytes after one frame");
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(new TextDecoder().decode(bytes.subarray(4)));
  } catch (exc) {
    throw new CodecError("bad-json", `payload is not JSON: ${exc}`);
  }
  const message = unpackValue(parsed);
  if (message === null || typeof message !== "object" || Array.isArray(message)) {
    throw new CodecError("bad-frame", "payload must be a JSON object");
  }
  const envelope = message as Record<string, unknown>;
  if (typeof envelope.type !== "string") {
    throw new CodecError("bad-frame", "message needs a string type");
  }
  return envelope as Envelope;
}
