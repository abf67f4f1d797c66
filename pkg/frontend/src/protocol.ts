// Wire protocol: UTF-8 newline-delimited JSON with a mandatory schema
// version field. Mirrors docs/protocol.md; unknown fields are ignored.

export const PROTOCOL_VERSION = 1;

export type Phase = "standing" | "transfer" | "swing";
export type Role = "controller" | "observer";

export interface StateMessage {
  type: "state";
  seq: number;
  t: number;
  phase: Phase;
  phase_elapsed: number;
  phase_duration: number | null;
  support_side: "left" | "right" | "double";
  swing_side: "left" | "right" | null;
  behavior: string;
  stone_length: number | null;
  params_name: string;
  pending_trigger: boolean;
  step_count: number;
  hip_x: number;
  hip_z: number;
  remaining_step_time: number | null;
  trigger_window_s: number;
  window_opens_in: number | null;
  in_trigger_window: boolean;
  facing: "forward" | "backward";
  left_hip: number;
  left_knee: number;
  left_ankle: number;
  left_foot_x: number;
  left_foot_z: number;
  right_hip: number;
  right_knee: number;
  right_ankle: number;
  right_foot_x: number;
  right_foot_z: number;
}

export interface Geometry {
  thigh_length: number;
  shank_length: number;
  foot_forward_length: number;
  ankle_height: number;
}

export interface HelloMessage {
  type: "hello";
  seq: number;
  role: Role;
  rate_hz: number;
  geometry: Geometry;
  param_sets: string[];
  note?: string;
}

export interface TriggerAckMessage {
  type: "trigger_ack";
  seq: number;
  accepted: boolean;
}

export interface ErrorMessage {
  type: "error";
  message: string;
  seq?: number;
}

export type ServerMessage = StateMessage | HelloMessage | TriggerAckMessage | ErrorMessage;

export class ProtocolError extends Error {}

const SERVER_TYPES = new Set(["state", "hello", "trigger_ack", "error"]);

/** Parse one wire line into a server message. */
export function parseServerLine(line: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`not JSON: ${String(err)}`);
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    throw new ProtocolError("message must be an object");
  }
  const msg = raw as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) {
    throw new ProtocolError(`unsupported schema version ${String(msg.v)}`);
  }
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    throw new ProtocolError(`unknown server message type ${String(msg.type)}`);
  }
  return msg as unknown as ServerMessage;
}

export interface BehaviorChoice {
  name: string;
  stoneLength?: number;
}

export function encodeHello(role: Role, seq: number): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type: "hello", role, seq });
}

export function encodeTrigger(seq: number): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type: "trigger", seq });
}

export function encodeBehavior(choice: BehaviorChoice, seq: number): string {
  const msg: Record<string, unknown> = {
    v: PROTOCOL_VERSION,
    type: "behavior",
    name: choice.name,
    seq,
  };
  if (choice.stoneLength !== undefined) msg.stone_length = choice.stoneLength;
  return JSON.stringify(msg);
}

export function encodeParams(name: string, seq: number): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type: "params", name, seq });
}

/** Reassembles newline-delimited messages from arbitrary chunking. */
export class LineSplitter {
  private buffer = "";

  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((l) => l.trim().length > 0);
  }
}
