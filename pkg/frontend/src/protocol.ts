// Wire contract with the simulation gateway: one JSON object per text
// message in both directions.

export interface TelemetryMsg {
  type: "telemetry";
  time_s: number;
  target_rpm: number;
  actual_rpm: number;
  min_range_m: number;
  obstacle: boolean;
  attack: boolean;
  collision: boolean;
  utilization_1s: number;
  mode: "ManualAEB" | "AutoDrive";
  aeb_enabled: boolean;
}

export interface AlertMsg {
  type: "alert";
  time_s: number;
  id_hex: string;
  reason: string;
  observed_ms: number;
  expected_ms: number;
}

export type EventName =
  | "collision"
  | "obstacle_detected"
  | "attack_started"
  | "attack_stopped";

export interface EventMsg {
  type: "event";
  name: EventName;
  time_s: number;
}

export interface RejectMsg {
  type: "reject";
  reason: string;
}

export type ServerMsg = TelemetryMsg | AlertMsg | EventMsg | RejectMsg;

export function parseServerMessage(raw: string): ServerMsg | null {
  let obj: unknown;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (type === "telemetry" || type === "alert" || type === "event" || type === "reject") {
    return obj as ServerMsg;
  }
  return null;
}

// Client commands. Out-of-range values throw here rather than being
// clamped; the server would reject them anyway.

export function throttleCommand(pct: number): string {
  if (!Number.isFinite(pct) || pct < 0 || pct > 100) {
    throw new RangeError(`throttle ${pct} outside 0..100`);
  }
  return JSON.stringify({ kind: "throttle", value: pct });
}

export function steeringCommand(pct: number): string {
  if (!Number.isFinite(pct) || pct < -100 || pct > 100) {
    throw new RangeError(`steering ${pct} outside -100..100`);
  }
  return JSON.stringify({ kind: "steering", value: pct });
}

export function aebCommand(on: boolean): string {
  return JSON.stringify({ kind: "aeb", value: on ? "on" : "off" });
}

export function modeCommand(mode: "ManualAEB" | "AutoDrive"): string {
  return JSON.stringify({ kind: "mode", value: mode });
}

export function attackCommand(start: boolean): string {
  return JSON.stringify({ kind: "attack", value: start ? "start" : "stop" });
}
