// Console view model: server-authoritative state for the UI.
//
// Every field here is justified by a received message; the console never
// predicts gait on its own. The trigger button arms exactly when the
// server's window rule says so (standing, or inside the re-trigger window
// reported with each state).

import {
  BehaviorChoice,
  ErrorMessage,
  Geometry,
  HelloMessage,
  LineSplitter,
  ProtocolError,
  Role,
  ServerMessage,
  StateMessage,
  TriggerAckMessage,
  encodeBehavior,
  encodeHello,
  encodeParams,
  encodeTrigger,
  parseServerLine,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "closed";

/** Sink for outgoing wire lines (WebSocket, TCP socket, test stub...). */
export interface LineSink {
  sendLine(line: string): void;
}

export const STALE_AFTER_S = 0.5;

export interface AckRecord {
  seq: number;
  accepted: boolean;
  atState: StateMessage | null;
}

export class ConsoleViewModel {
  status: ConnectionStatus = "connecting";
  role: Role | null = null;
  geometry: Geometry | null = null;
  paramSets: string[] = [];
  state: StateMessage | null = null;
  selectedBehavior: BehaviorChoice = { name: "flat_walk" };
  lastTriggerAck: AckRecord | null = null;
  lastError: ErrorMessage | null = null;
  note: string | null = null;

  private splitter = new LineSplitter();
  private sink: LineSink;
  private seq = 0;
  private lastStateWallTime: number | null = null;
  private pendingTriggerSeqs = new Set<number>();
  private listeners = new Set<() => void>();

  constructor(sink: LineSink) {
    this.sink = sink;
  }

  onChange(listener: () => void): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  // ------------------------------------------------------------- inbound

  connected(): void {
    this.status = "connected";
    this.notify();
  }

  disconnected(): void {
    this.status = "closed";
    this.notify();
  }

  /** Feed a raw transport chunk; returns the parsed messages. */
  ingestChunk(chunk: string, nowS: number): ServerMessage[] {
    const out: ServerMessage[] = [];
    for (const line of this.splitter.push(chunk)) {
      try {
        out.push(this.ingestMessage(parseServerLine(line), nowS));
      } catch (err) {
        if (err instanceof ProtocolError) {
          this.lastError = { type: "error", message: err.message };
          this.notify();
        } else {
          throw err;
        }
      }
    }
    return out;
  }

  ingestMessage(msg: ServerMessage, nowS: number): ServerMessage {
    switch (msg.type) {
      case "state":
        this.state = msg;
        this.lastStateWallTime = nowS;
        break;
      case "hello": {
        const hello = msg as HelloMessage;
        this.role = hello.role;
        this.geometry = hello.geometry;
        this.paramSets = hello.param_sets;
        this.note = hello.note ?? null;
        break;
      }
      case "trigger_ack": {
        const ack = msg as TriggerAckMessage;
        this.pendingTriggerSeqs.delete(ack.seq);
        this.lastTriggerAck = { seq: ack.seq, accepted: ack.accepted, atState: this.state };
        break;
      }
      case "error":
        this.lastError = msg as ErrorMessage;
        break;
    }
    this.notify();
    return msg;
  }

  // ------------------------------------------------------------ outbound

  hello(role: Role = "controller"): number {
    const seq = ++this.seq;
    this.sink.sendLine(encodeHello(role, seq));
    return seq;
  }

  sendTrigger(): number {
    if (this.role !== "controller") {
      throw new Error("only the controller session may trigger steps");
    }
    const seq = ++this.seq;
    this.pendingTriggerSeqs.add(seq);
    this.sink.sendLine(encodeTrigger(seq));
    return seq;
  }

  sendBehavior(choice: BehaviorChoice): number {
    if (this.role !== "controller") {
      throw new Error("only the controller session may change behaviors");
    }
    const seq = ++this.seq;
    this.selectedBehavior = choice;
    this.sink.sendLine(encodeBehavior(choice, seq));
    return seq;
  }

  sendParams(name: string): number {
    if (this.role !== "controller") {
      throw new Error("only the controller session may change parameters");
    }
    const seq = ++this.seq;
    this.sink.sendLine(encodeParams(name, seq));
    return seq;
  }

  // -------------------------------------------------------------- derived

  /** Armed exactly when the server-confirmed window rule matches. */
  triggerArmed(): boolean {
    if (this.role !== "controller" || this.state === null) return false;
    const s = this.state;
    return s.phase === "standing" || s.in_trigger_window;
  }

  /** Seconds until the re-trigger window opens (0 when open/standing). */
  windowCountdown(): number | null {
    const s = this.state;
    if (s === null) return null;
    if (s.phase === "standing") return 0;
    return s.window_opens_in;
  }

  triggerPending(): boolean {
    return this.pendingTriggerSeqs.size > 0;
  }

  /** True when connected but no state arrived for > 0.5 s. */
  isStale(nowS: number): boolean {
    if (this.status !== "connected" || this.lastStateWallTime === null) return false;
    return nowS - this.lastStateWallTime > STALE_AFTER_S;
  }
}
